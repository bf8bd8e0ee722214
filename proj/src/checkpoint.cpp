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

#include "hbpe/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "hbpe/error.hpp"

namespace hbpe {

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw ParseError(path + ": truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::int64_t>(out, m.rows());
  put<std::int64_t>(out, m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) put<double>(out, m.data()[i]);
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::string& path) {
  const auto rows = get<std::int64_t>(in, path);
  const auto cols = get<std::int64_t>(in, path);
  if (rows < 0 || cols < 0 || rows > (1 << 24) || cols > (1 << 24)) {
    throw ParseError(path + ": implausible matrix shape in checkpoint");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(in, path);
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const AdmmState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint8_t>(out, kCheckpointVersion);
  put<std::int32_t>(out, state.classes);
  put<std::int32_t>(out, state.iteration);
  for (const Eigen::MatrixXd* m : {&state.j_h, &state.j_b, &state.k_h, &state.k_b, &state.m_h,
                                   &state.m_b}) {
    put_matrix(out, *m);
  }
  put<std::uint64_t>(out, state.residuals.size());
  for (const ResidualRecord& r : state.residuals) {
    for (const auto* a : {&r.primal, &r.dual, &r.primal_rel, &r.dual_rel}) {
      put<double>(out, (*a)[0]);
      put<double>(out, (*a)[1]);
    }
  }
  put<std::uint64_t>(out, state.objective_trace.size());
  for (double v : state.objective_trace) put<double>(out, v);
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

AdmmState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ParseError(path + ": not a checkpoint file (bad magic)");
  }
  const auto version = get<std::uint8_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  AdmmState state;
  state.classes = get<std::int32_t>(in, path);
  state.iteration = get<std::int32_t>(in, path);
  for (Eigen::MatrixXd* m : {&state.j_h, &state.j_b, &state.k_h, &state.k_b, &state.m_h,
                             &state.m_b}) {
    *m = get_matrix(in, path);
  }
  const auto residuals = get<std::uint64_t>(in, path);
  if (residuals != static_cast<std::uint64_t>(state.iteration)) {
    throw ParseError(path + ": residual history length does not match iteration count");
  }
  state.residuals.resize(residuals);
  for (ResidualRecord& r : state.residuals) {
    for (auto* a : {&r.primal, &r.dual, &r.primal_rel, &r.dual_rel}) {
      (*a)[0] = get<double>(in, path);
      (*a)[1] = get<double>(in, path);
    }
  }
  const auto objectives = get<std::uint64_t>(in, path);
  if (objectives > residuals) throw ParseError(path + ": objective trace longer than history");
  state.objective_trace.resize(objectives);
  for (double& v : state.objective_trace) v = get<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path + ": trailing bytes after checkpoint payload");
  }
  return state;
}

}  // namespace hbpe
