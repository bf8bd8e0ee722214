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

#include "hbpe/hbpe.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "hbpe/error.hpp"
#include "hbpe/experiment.hpp"
#include "hbpe/io.hpp"

#ifndef HBPE_VERSION
#define HBPE_VERSION "0.0.0"
#endif

using nlohmann::json;

struct hbpe_dataset {
  std::vector<hbpe::PersonDataset> people;
};

struct hbpe_sweep {
  hbpe::SweepResult result;
};

struct hbpe_solution {
  json request;
  hbpe::ObservationMask mask_h;
  hbpe::ObservationMask mask_b;
  hbpe::ClassVector head_truth;
  hbpe::ClassVector body_truth;
  hbpe::RunResult run;
};

namespace {

thread_local std::string last_error;

hbpe_status fail(hbpe_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs body() and maps exceptions onto status codes.
template <typename Fn>
hbpe_status guarded(Fn&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const hbpe::Error& e) {
    return fail(static_cast<hbpe_status>(e.kind()), e.what());
  } catch (const json::exception& e) {
    return fail(HBPE_ERR_USAGE, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(HBPE_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HBPE_ERR_DATA, e.what());
  }
}

json parse_optional(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return json::parse(text);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define HBPE_REQUIRE(cond, msg)                            \
  do {                                                     \
    if (!(cond)) return fail(HBPE_ERR_USAGE, msg);         \
  } while (0)

json record_json(const hbpe::RepeatRecord& r) {
  json j = {{"person_id", r.person_id},
            {"fraction", r.fraction},
            {"method", std::string(hbpe::to_string(r.method))},
            {"repeat", r.repeat},
            {"ok", r.ok}};
  if (r.ok) {
    j["head_accuracy"] = r.head_accuracy;
    j["body_accuracy"] = r.body_accuracy;
  } else {
    j["error"] = r.error;
  }
  return j;
}

json indices_json(const hbpe::ObservationMask& m) { return m.indices; }

}  // namespace

extern "C" {

const char* hbpe_version(void) { return HBPE_VERSION; }

const char* hbpe_last_error(void) { return last_error.c_str(); }

void hbpe_string_free(char* s) { std::free(s); }

hbpe_status hbpe_dataset_generate(const char* spec_json, int persons, hbpe_dataset** out) {
  HBPE_REQUIRE(out != nullptr, "output handle is null");
  HBPE_REQUIRE(persons >= 1, "persons must be >= 1");
  return guarded([&] {
    hbpe::SyntheticSpec spec = hbpe::synthetic_spec_from_json(parse_optional(spec_json));
    spec.validate();
    auto ds = std::make_unique<hbpe_dataset>();
    const int width = persons > 99 ? 3 : 2;
    for (int i = 0; i < persons; ++i) {
      hbpe::SyntheticSpec s = spec;
      s.seed = spec.seed + static_cast<std::uint64_t>(i);
      char id[16];
      std::snprintf(id, sizeof id, "p%0*d", width, i);
      ds->people.push_back(hbpe::generate_synthetic(s, id));
    }
    *out = ds.release();
    return HBPE_OK;
  });
}

hbpe_status hbpe_dataset_load(const char* path, int classes, hbpe_dataset** out) {
  HBPE_REQUIRE(out != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    auto ds = std::make_unique<hbpe_dataset>();
    ds->people = hbpe::load_dataset(path, classes);
    *out = ds.release();
    return HBPE_OK;
  });
}

hbpe_status hbpe_dataset_save(const hbpe_dataset* dataset, const char* path) {
  HBPE_REQUIRE(dataset != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    hbpe::save_dataset(path, dataset->people);
    return HBPE_OK;
  });
}

void hbpe_dataset_free(hbpe_dataset* dataset) { delete dataset; }

int hbpe_dataset_size(const hbpe_dataset* dataset) {
  return dataset == nullptr ? 0 : static_cast<int>(dataset->people.size());
}

hbpe_status hbpe_dataset_summary(const hbpe_dataset* dataset, char** out_json) {
  HBPE_REQUIRE(dataset != nullptr && out_json != nullptr, "null argument");
  return guarded([&] {
    json arr = json::array();
    for (const auto& p : dataset->people) {
      arr.push_back({{"person_id", p.person_id},
                     {"length", p.length()},
                     {"classes", p.classes},
                     {"head_features", p.head_features.rows()},
                     {"body_features", p.body_features.rows()},
                     {"head_entropy", hbpe::label_entropy(p.head_truth, p.classes).value},
                     {"body_entropy", hbpe::label_entropy(p.body_truth, p.classes).value},
                     {"soft_labels", p.soft_head.has_value() || p.soft_body.has_value()}});
    }
    *out_json = dup_string(arr.dump());
    return HBPE_OK;
  });
}

hbpe_status hbpe_config_resolve(const char* config_json, char** out_json) {
  HBPE_REQUIRE(out_json != nullptr, "null argument");
  return guarded([&] {
    hbpe::ExperimentConfig c = hbpe::config_from_json(parse_optional(config_json));
    c.validate();
    *out_json = dup_string(hbpe::to_json(c).dump());
    return HBPE_OK;
  });
}

hbpe_status hbpe_sweep_run(const hbpe_dataset* dataset, const char* config_json,
                           hbpe_record_fn on_record, void* user, hbpe_sweep** out) {
  HBPE_REQUIRE(dataset != nullptr && out != nullptr, "null argument");
  HBPE_REQUIRE(!dataset->people.empty(), "dataset is empty");
  return guarded([&] {
    hbpe::ExperimentConfig c = hbpe::config_from_json(parse_optional(config_json));
    c.validate();
    hbpe::RecordSink sink;
    if (on_record != nullptr) {
      sink = [&](const hbpe::RepeatRecord& r) { on_record(record_json(r).dump().c_str(), user); };
    }
    auto sweep = std::make_unique<hbpe_sweep>();
    sweep->result = hbpe::run_sweep(dataset->people, c, sink);
    const int failed = sweep->result.failed_units;
    *out = sweep.release();
    if (failed > 0) {
      return fail(HBPE_ERR_PARTIAL, std::to_string(failed) + " sweep unit(s) failed");
    }
    return HBPE_OK;
  });
}

hbpe_status hbpe_sweep_load(const char* sweep_json_path, hbpe_sweep** out) {
  HBPE_REQUIRE(sweep_json_path != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    auto sweep = std::make_unique<hbpe_sweep>();
    sweep->result = hbpe::read_sweep_json(sweep_json_path);
    *out = sweep.release();
    return HBPE_OK;
  });
}

void hbpe_sweep_free(hbpe_sweep* sweep) { delete sweep; }

int hbpe_sweep_failed_units(const hbpe_sweep* sweep) {
  return sweep == nullptr ? 0 : sweep->result.failed_units;
}

hbpe_status hbpe_sweep_write_csv(const hbpe_sweep* sweep, const char* path) {
  HBPE_REQUIRE(sweep != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    hbpe::write_sweep_csv(sweep->result, path);
    return HBPE_OK;
  });
}

hbpe_status hbpe_sweep_write_json(const hbpe_sweep* sweep, const char* path,
                                  const char* provenance_json) {
  HBPE_REQUIRE(sweep != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    json prov = provenance_json == nullptr ? json() : json::parse(provenance_json);
    hbpe::write_sweep_json(sweep->result, path, prov);
    return HBPE_OK;
  });
}

hbpe_status hbpe_sweep_table(const hbpe_sweep* sweep, double fraction, char** out_text) {
  HBPE_REQUIRE(sweep != nullptr && out_text != nullptr, "null argument");
  return guarded([&] {
    *out_text = dup_string(hbpe::format_person_table(sweep->result, fraction));
    return HBPE_OK;
  });
}

hbpe_status hbpe_sweep_write_report(const hbpe_sweep* sweep, const char* path) {
  HBPE_REQUIRE(sweep != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    hbpe::write_report_csv(hbpe::report_rows(sweep->result), path);
    return HBPE_OK;
  });
}

hbpe_status hbpe_solve(const hbpe_dataset* dataset, int person, const char* request_json,
                       hbpe_solution** out) {
  HBPE_REQUIRE(dataset != nullptr && out != nullptr, "null argument");
  HBPE_REQUIRE(person >= 0 && person < static_cast<int>(dataset->people.size()),
               "person index out of range");
  return guarded([&] {
    json req = parse_optional(request_json);
    const hbpe::PersonDataset& src = dataset->people[static_cast<std::size_t>(person)];
    src.validate();

    const double fraction = req.value("fraction", 0.05);
    const std::uint64_t seed = req.value("seed", std::uint64_t{0});
    const hbpe::Method method = hbpe::parse_method(req.value("method", std::string("gpr_mc")));
    const double variance_keep = req.value("variance_keep", 0.9);
    hbpe::MethodParams params;
    if (req.contains("weights")) params.weights = hbpe::weights_from_json(req["weights"]);
    params.weights.validate();
    params.laplacian_weight = req.value("laplacian_weight", params.laplacian_weight);
    if (req.contains("anchor_scope")) {
      params.anchor_scope = hbpe::parse_anchor_scope(req["anchor_scope"].get<std::string>());
    }
    hbpe::SolveOptions options;
    options.tol = req.value("tol", options.tol);
    options.max_iter = req.value("max_iter", options.max_iter);
    options.checkpoint_path = req.value("checkpoint_path", std::string());
    options.checkpoint_every = req.value("checkpoint_every", 0);
    if (!(options.tol > 0.0) || options.max_iter < 1) {
      throw hbpe::InvalidInput("tol must be > 0 and max_iter >= 1");
    }

    hbpe::PersonDataset data = src;
    data.head_features = hbpe::preprocess_features(src.head_features, variance_keep).features;
    data.body_features = hbpe::preprocess_features(src.body_features, variance_keep).features;
    if (!req.value("use_soft_labels", true)) {
      data.soft_head.reset();
      data.soft_body.reset();
    }

    auto sol = std::make_unique<hbpe_solution>();
    sol->mask_h = hbpe::generate_mask(data.length(), fraction, data.head_truth,
                                      hbpe::mask_seed(seed, person, 0, 0, 0));
    sol->mask_b = hbpe::generate_mask(data.length(), fraction, data.body_truth,
                                      hbpe::mask_seed(seed, person, 0, 0, 1));
    if (req.contains("kernel")) {
      params.kernel = hbpe::kernel_from_json(req["kernel"]);
      params.kernel.validate();
    } else {
      const auto grid = hbpe::default_kernel_grid();
      params.kernel = hbpe::select_kernel(
          hbpe::LabelMatrix::from_classes(data.head_truth, data.classes, sol->mask_h),
          hbpe::LabelMatrix::from_classes(data.body_truth, data.classes, sol->mask_b), grid);
    }
    sol->run = hbpe::run_single(data, sol->mask_h, sol->mask_b, method, params, options);
    sol->head_truth = data.head_truth;
    sol->body_truth = data.body_truth;
    sol->request = {{"person_id", data.person_id},
                    {"fraction", fraction},
                    {"seed", seed},
                    {"method", std::string(hbpe::to_string(method))},
                    {"weights", hbpe::to_json(params.weights)},
                    {"kernel", hbpe::to_json(params.kernel)},
                    {"laplacian_weight", params.laplacian_weight},
                    {"anchor_scope", std::string(hbpe::to_string(params.anchor_scope))},
                    {"tol", options.tol},
                    {"max_iter", options.max_iter},
                    {"variance_keep", variance_keep}};
    *out = sol.release();
    return HBPE_OK;
  });
}

void hbpe_solution_free(hbpe_solution* solution) { delete solution; }

double hbpe_solution_accuracy(const hbpe_solution* solution, int stream) {
  if (solution == nullptr) return -1.0;
  return stream == 0 ? solution->run.head_accuracy : solution->run.body_accuracy;
}

hbpe_status hbpe_solution_json(const hbpe_solution* solution, char** out_json) {
  HBPE_REQUIRE(solution != nullptr && out_json != nullptr, "null argument");
  return guarded([&] {
    const hbpe::RunResult& r = solution->run;
    json j = {{"request", solution->request},
              {"head_accuracy", r.head_accuracy},
              {"body_accuracy", r.body_accuracy},
              {"head_correct", r.head_correct},
              {"head_evaluated", r.head_evaluated},
              {"body_correct", r.body_correct},
              {"body_evaluated", r.body_evaluated},
              {"observed_head", indices_json(solution->mask_h)},
              {"observed_body", indices_json(solution->mask_b)}};
    if (r.report) {
      const hbpe::SolveReport& rep = *r.report;
      j["solver"] = {{"converged", rep.converged},
                     {"iterations", rep.iterations},
                     {"primal_residual", rep.final_primal_residuals},
                     {"dual_residual", rep.final_dual_residuals},
                     {"primal_tail_monotone", rep.primal_tail_monotone},
                     {"bias_row_drift", rep.bias_row_drift},
                     {"final_objective",
                      rep.objective_trace.empty() ? 0.0 : rep.objective_trace.back()}};
    }
    *out_json = dup_string(j.dump());
    return HBPE_OK;
  });
}

hbpe_status hbpe_solution_write_predictions(const hbpe_solution* solution, const char* path) {
  HBPE_REQUIRE(solution != nullptr && path != nullptr, "null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw hbpe::IoError(std::string("cannot write ") + path);
    const auto obs_h = solution->mask_h.observed();
    const auto obs_b = solution->mask_b.observed();
    out << "t,head_pred,head_true,head_observed,body_pred,body_true,body_observed\n";
    for (std::size_t t = 0; t < solution->head_truth.size(); ++t) {
      out << t << ',' << solution->run.head_prediction[t] << ',' << solution->head_truth[t] << ','
          << int(obs_h[t]) << ',' << solution->run.body_prediction[t] << ','
          << solution->body_truth[t] << ',' << int(obs_b[t]) << '\n';
    }
    if (!out) throw hbpe::IoError(std::string("write failed: ") + path);
    return HBPE_OK;
  });
}

}  // extern "C"
