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

// On-disk formats.
//
// Dataset: one directory per person, named by person id, holding
//   features_head.csv, features_body.csv   header row + T rows x d reals
//   labels.csv                             header t,head_class,body_class
//   soft_head.csv, soft_body.csv           optional, header + T rows x c reals
//
// Sweep output: sweep.csv (one row per person, fraction, method) and
// sweep.json (config echo, per-repeat records, summaries).

#ifndef HBPE_IO_HPP
#define HBPE_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "hbpe/experiment.hpp"

namespace hbpe {

inline constexpr int kSweepSchemaVersion = 1;

/// Loads every person directory below \p path (sorted by name), or \p path
/// itself if it directly holds labels.csv.
std::vector<PersonDataset> load_dataset(const std::string& path, int classes = kDefaultClasses);
PersonDataset load_person(const std::string& dir, int classes = kDefaultClasses);

void save_dataset(const std::string& path, const std::vector<PersonDataset>& people);
void save_person(const std::string& dir, const PersonDataset& person);

nlohmann::json to_json(const SyntheticSpec& spec);
/// Overrides fields of \p base; unknown keys are a ParseError.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, SyntheticSpec base = {});

nlohmann::json to_json(const SolverWeights& weights);
SolverWeights weights_from_json(const nlohmann::json& j, SolverWeights base = {});
nlohmann::json to_json(const RbfKernelParams& kernel);
RbfKernelParams kernel_from_json(const nlohmann::json& j, RbfKernelParams base = {});

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields present in \p j override \p base; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

nlohmann::json to_json(const SweepResult& result, const nlohmann::json& provenance = {});
/// Parses a sweep.json document; checks schema_version.
SweepResult sweep_from_json(const nlohmann::json& j);

void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_sweep_json(const SweepResult& result, const std::string& path,
                      const nlohmann::json& provenance = {});
SweepResult read_sweep_json(const std::string& path);

/// One row per (fraction, method, stream) pooled over every successful
/// repeat record: mean, sample std, count.
struct ReportRow {
  double fraction = 0.0;
  Method method = Method::kGprMc;
  std::string stream;  // "head" or "body"
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

std::vector<ReportRow> report_rows(const SweepResult& result);
void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);

/// Per-person table at one fraction: "mean (std)" for head and body per
/// method, then label entropies.
std::string format_person_table(const SweepResult& result, double fraction);

}  // namespace hbpe

#endif  // HBPE_IO_HPP
