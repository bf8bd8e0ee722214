// Copyright 2026 The hbpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoints of the ADMM state.
//
// Layout (little-endian):
//   8 bytes  magic "HBPECKPT"
//   1 byte   format version (kCheckpointVersion)
//   int32    classes, int32 iteration
//   6 x matrix: int64 rows, int64 cols, rows*cols float64 column-major
//              (J_h, J_b, K_h, K_b, M_h, M_b)
//   uint64   residual count, then 8 float64 per record
//            (primal h/b, dual h/b, primal_rel h/b, dual_rel h/b)
//   uint64   objective count, then float64 values

#ifndef HBPE_CHECKPOINT_HPP
#define HBPE_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "hbpe/matrix_completion.hpp"

namespace hbpe {

inline constexpr char kCheckpointMagic[8] = {'H', 'B', 'P', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const AdmmState& state);
AdmmState load_checkpoint(const std::string& path);

}  // namespace hbpe

#endif  // HBPE_CHECKPOINT_HPP
