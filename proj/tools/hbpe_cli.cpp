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

// hbpe command-line front end: generate, solve, sweep, ablate, report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbpe/hbpe.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = HBPE_ERR_USAGE;
constexpr int kExitData = HBPE_ERR_DATA;

int verbosity = 1;

struct CliFailure {
  int code;
  std::string message;
};

[[noreturn]] void raise(int code, std::string message) { throw CliFailure{code, std::move(message)}; }

void check(hbpe_status status, const char* what) {
  if (status != HBPE_OK) raise(status, std::string(what) + ": " + hbpe_last_error());
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  hbpe_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<hbpe_dataset, Deleter<hbpe_dataset, hbpe_dataset_free>>;
using Sweep = std::unique_ptr<hbpe_sweep, Deleter<hbpe_sweep, hbpe_sweep_free>>;
using Solution = std::unique_ptr<hbpe_solution, Deleter<hbpe_solution, hbpe_solution_free>>;

std::string default_output_dir() {
  const char* env = std::getenv("HBPE_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? env : "hbpe_out";
}

// Config file sections: "synthetic", "experiment", "solve".
json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) raise(kExitData, "cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(kExitData, "config file " + path + ": " + e.what());
  }
  if (!j.is_object()) raise(kExitData, "config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "synthetic" && key != "experiment" && key != "solve") {
      raise(kExitData, "unknown config section '" + key + "'");
    }
    if (!value.is_object()) raise(kExitData, "config section '" + key + "' must be an object");
  }
  return j;
}

json section(const json& file, const char* name) {
  return file.contains(name) ? file[name] : json::object();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(kExitData, "cannot create " + dir + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) raise(kExitData, "cannot write " + path.string());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Dataset load_data(const std::string& dir, int classes) {
  hbpe_dataset* raw = nullptr;
  check(hbpe_dataset_load(dir.c_str(), classes, &raw), "loading dataset");
  return Dataset(raw);
}

json provenance(const std::string& subcommand, const std::vector<std::string>& argv,
                const std::string& config_path, const json& config_file) {
  return {{"tool", "hbpe"},
          {"version", hbpe_version()},
          {"subcommand", subcommand},
          {"argv", argv},
          {"config_file", config_path.empty() ? json() : json(config_path)},
          {"config_file_contents", config_file}};
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  std::string config;
  int persons = 1;
  std::optional<std::uint64_t> seed;
  std::optional<int> turn_events;
  std::optional<int> length;
  std::optional<int> classes;
  std::optional<int> features;
  std::optional<int> feature_rank;
  std::optional<double> feature_noise;
  std::optional<double> offset_deg;
  std::optional<double> gp_length_scale;
};

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv) {
  const json file = load_config_file(a.config);
  json spec = section(file, "synthetic");
  if (a.seed) spec["seed"] = *a.seed;
  if (a.turn_events) spec["turn_events"] = *a.turn_events;
  if (a.length) spec["length"] = *a.length;
  if (a.classes) spec["classes"] = *a.classes;
  if (a.features) spec["head_features"] = spec["body_features"] = *a.features;
  if (a.feature_rank) spec["feature_rank"] = *a.feature_rank;
  if (a.feature_noise) spec["feature_noise"] = *a.feature_noise;
  if (a.offset_deg) spec["head_body_offset_deg"] = *a.offset_deg;
  if (a.gp_length_scale) spec["gp_length_scale"] = *a.gp_length_scale;

  hbpe_dataset* raw = nullptr;
  check(hbpe_dataset_generate(spec.dump().c_str(), a.persons, &raw), "generating data");
  Dataset data(raw);
  const std::string out = a.out.empty() ? (fs::path(default_output_dir()) / "data").string() : a.out;
  ensure_dir(out);
  check(hbpe_dataset_save(data.get(), out.c_str()), "saving dataset");

  char* summary = nullptr;
  check(hbpe_dataset_summary(data.get(), &summary), "summarizing dataset");
  const json people = json::parse(take(summary));
  json manifest = {{"synthetic", spec},
                   {"persons", a.persons},
                   {"people", people},
                   {"provenance", provenance("generate", argv, a.config, file)}};
  write_text(fs::path(out) / "generate.json", manifest.dump(2) + "\n");
  if (verbosity > 0) {
    std::printf("%-10s %6s %9s %9s\n", "person", "T", "H_head", "H_body");
    for (const auto& p : people) {
      std::printf("%-10s %6d %9.4f %9.4f\n", p["person_id"].get<std::string>().c_str(),
                  p["length"].get<int>(), p["head_entropy"].get<double>(),
                  p["body_entropy"].get<double>());
    }
    std::printf("wrote %d person(s) to %s\n", a.persons, out.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string person;
  int classes = 8;
  std::optional<double> fraction;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> nu, lambda, mu, phi;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> anchor_scope;
  std::string checkpoint;
  int checkpoint_every = 0;
};

int person_index(const hbpe_dataset* data, const std::string& key) {
  if (key.empty()) return 0;
  char* summary = nullptr;
  check(hbpe_dataset_summary(data, &summary), "summarizing dataset");
  const json people = json::parse(take(summary));
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (people[i]["person_id"] == key) return static_cast<int>(i);
  }
  raise(kExitUsage, "no person '" + key + "' in dataset");
}

int cmd_solve(const SolveArgs& a, const std::vector<std::string>& argv) {
  const json file = load_config_file(a.config);
  json req = section(file, "solve");
  if (a.fraction) req["fraction"] = *a.fraction;
  if (a.seed) req["seed"] = *a.seed;
  if (a.method) req["method"] = *a.method;
  if (a.nu) req["weights"]["nu_h"] = req["weights"]["nu_b"] = *a.nu;
  if (a.lambda) req["weights"]["lambda_h"] = req["weights"]["lambda_b"] = *a.lambda;
  if (a.mu) req["weights"]["mu"] = *a.mu;
  if (a.phi) req["weights"]["phi_h"] = req["weights"]["phi_b"] = *a.phi;
  if (a.tol) req["tol"] = *a.tol;
  if (a.max_iter) req["max_iter"] = *a.max_iter;
  if (a.anchor_scope) req["anchor_scope"] = *a.anchor_scope;
  if (!a.checkpoint.empty()) {
    req["checkpoint_path"] = a.checkpoint;
    req["checkpoint_every"] = a.checkpoint_every > 0 ? a.checkpoint_every : 50;
  }

  Dataset data = load_data(a.data, a.classes);
  const int index = person_index(data.get(), a.person);
  hbpe_solution* raw = nullptr;
  check(hbpe_solve(data.get(), index, req.dump().c_str(), &raw), "solving");
  Solution sol(raw);

  char* text = nullptr;
  check(hbpe_solution_json(sol.get(), &text), "serializing solution");
  json result = json::parse(take(text));
  result["provenance"] = provenance("solve", argv, a.config, file);
  const std::string out = a.out.empty() ? default_output_dir() : a.out;
  ensure_dir(out);
  write_text(fs::path(out) / "solve.json", result.dump(2) + "\n");
  check(hbpe_solution_write_predictions(sol.get(), (fs::path(out) / "predictions.csv").c_str()),
        "writing predictions");
  if (verbosity > 0) {
    std::printf("%s %s: head %.4f body %.4f", result["request"]["person_id"].get<std::string>().c_str(),
                result["request"]["method"].get<std::string>().c_str(),
                result["head_accuracy"].get<double>(), result["body_accuracy"].get<double>());
    if (result.contains("solver")) {
      std::printf(" (%s after %d iterations)",
                  result["solver"]["converged"].get<bool>() ? "converged" : "not converged",
                  result["solver"]["iterations"].get<int>());
    }
    std::printf("\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string data;
  std::string out;
  std::string config;
  int classes = 8;
  std::optional<std::string> fractions;
  std::optional<std::string> methods;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> folds;
  std::optional<std::string> anchor_scope;
  bool fixed_cv = false;
};

void on_record(const char* record_json, void*) {
  if (verbosity < 2) return;
  const json r = json::parse(record_json);
  if (r["ok"].get<bool>()) {
    std::fprintf(stderr, "%s f=%.3g %s #%d head %.4f body %.4f\n",
                 r["person_id"].get<std::string>().c_str(), r["fraction"].get<double>(),
                 r["method"].get<std::string>().c_str(), r["repeat"].get<int>(),
                 r["head_accuracy"].get<double>(), r["body_accuracy"].get<double>());
  } else {
    std::fprintf(stderr, "%s f=%.3g %s #%d failed: %s\n", r["person_id"].get<std::string>().c_str(),
                 r["fraction"].get<double>(), r["method"].get<std::string>().c_str(),
                 r["repeat"].get<int>(), r["error"].get<std::string>().c_str());
  }
}

int cmd_sweep(const SweepArgs& a, const std::string& name, bool ablation,
              const std::vector<std::string>& argv) {
  const json file = load_config_file(a.config);
  json cfg = section(file, "experiment");
  if (a.fractions) {
    std::vector<double> values;
    for (const std::string& s : split_list(*a.fractions)) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        raise(kExitUsage, "bad fraction '" + s + "'");
      }
    }
    cfg["fractions"] = values;
  }
  if (ablation) {
    cfg["methods"] = {"gpr_mc", "laplacian_mc", "gpr_only", "linear_only"};
  } else if (a.methods) {
    cfg["methods"] = split_list(*a.methods);
  }
  if (a.repeats) cfg["repeats"] = *a.repeats;
  if (a.seed) cfg["seed"] = *a.seed;
  if (a.jobs) cfg["jobs"] = *a.jobs;
  if (a.folds) cfg["folds"] = *a.folds;
  if (a.anchor_scope) cfg["anchor_scope"] = *a.anchor_scope;
  if (a.fixed_cv) cfg["cv_per_repeat"] = false;

  char* resolved_text = nullptr;
  check(hbpe_config_resolve(cfg.dump().c_str(), &resolved_text), "configuration");
  const json resolved = json::parse(take(resolved_text));

  Dataset data = load_data(a.data, a.classes);
  const std::string out = a.out.empty() ? default_output_dir() : a.out;
  ensure_dir(out);

  hbpe_sweep* raw = nullptr;
  const hbpe_status status = hbpe_sweep_run(data.get(), resolved.dump().c_str(), on_record, nullptr, &raw);
  if (status != HBPE_OK && status != HBPE_ERR_PARTIAL) check(status, name.c_str());
  Sweep sweep(raw);

  json prov = provenance(name, argv, a.config, file);
  prov["config_overrides"] = cfg;
  check(hbpe_sweep_write_csv(sweep.get(), (fs::path(out) / "sweep.csv").c_str()), "writing sweep.csv");
  check(hbpe_sweep_write_json(sweep.get(), (fs::path(out) / "sweep.json").c_str(), prov.dump().c_str()),
        "writing sweep.json");
  if (verbosity > 0) {
    for (double f : resolved["fractions"].get<std::vector<double>>()) {
      char* table = nullptr;
      check(hbpe_sweep_table(sweep.get(), f, &table), "formatting table");
      std::printf("%s\n", take(table).c_str());
    }
  }
  if (status == HBPE_ERR_PARTIAL) {
    std::fprintf(stderr, "hbpe %s: %d unit(s) failed; see sweep.json\n", name.c_str(),
                 hbpe_sweep_failed_units(sweep.get()));
    return HBPE_ERR_PARTIAL;
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::string& in, std::string out) {
  hbpe_sweep* raw = nullptr;
  check(hbpe_sweep_load(in.c_str(), &raw), "reading sweep");
  Sweep sweep(raw);
  if (out.empty()) out = (fs::path(in).parent_path() / "report.csv").string();
  check(hbpe_sweep_write_report(sweep.get(), out.c_str()), "writing report");
  if (verbosity > 0) std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Head and body pose estimation by coupled matrix completion", "hbpe"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(hbpe_version()));
  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "More output (repeatable)");
  app.add_flag("-q,--quiet", quiet, "Only errors");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("-o,--out", gen.out, "Output directory (default $HBPE_OUTPUT_DIR/data)");
  generate->add_option("--config", gen.config, "JSON config file")->check(CLI::ExistingFile);
  generate->add_option("--persons", gen.persons, "Number of people")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Base seed; person i uses seed + i");
  generate->add_option("--turn-events", gen.turn_events, "Body turns per person");
  generate->add_option("--length", gen.length, "Time steps per person");
  generate->add_option("--classes", gen.classes, "Pose classes");
  generate->add_option("--features", gen.features, "Feature dimension per stream");
  generate->add_option("--feature-rank", gen.feature_rank, "Rank of the feature map");
  generate->add_option("--feature-noise", gen.feature_noise, "Feature noise scale");
  generate->add_option("--offset-deg", gen.offset_deg, "Head-body offset scale in degrees");
  generate->add_option("--gp-length-scale", gen.gp_length_scale, "Offset process length scale");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "One masked run on one person");
  solve->add_option("-d,--data", sol.data, "Dataset directory")->required();
  solve->add_option("-o,--out", sol.out, "Output directory (default $HBPE_OUTPUT_DIR)");
  solve->add_option("--config", sol.config, "JSON config file")->check(CLI::ExistingFile);
  solve->add_option("--person", sol.person, "Person id (default: first)");
  solve->add_option("--classes", sol.classes, "Pose classes");
  solve->add_option("--fraction", sol.fraction, "Annotated fraction");
  solve->add_option("--seed", sol.seed, "Mask seed");
  solve->add_option("--method", sol.method, "gpr_mc, laplacian_mc, gpr_only or linear_only");
  solve->add_option("--nu", sol.nu, "Nuclear-norm weight (both streams)");
  solve->add_option("--lambda", sol.lambda, "Anchor weight (both streams)");
  solve->add_option("--mu", sol.mu, "Head-body coupling weight");
  solve->add_option("--phi", sol.phi, "ADMM penalty (both streams)");
  solve->add_option("--tol", sol.tol, "Relative residual tolerance");
  solve->add_option("--max-iter", sol.max_iter, "Iteration cap");
  solve->add_option("--anchor-scope", sol.anchor_scope, "all_rows or label_rows");
  solve->add_option("--checkpoint", sol.checkpoint, "Checkpoint file");
  solve->add_option("--checkpoint-every", sol.checkpoint_every, "Iterations between checkpoints");

  SweepArgs sw;
  auto add_sweep_options = [](CLI::App* cmd, SweepArgs& s, bool with_methods) {
    cmd->add_option("-d,--data", s.data, "Dataset directory")->required();
    cmd->add_option("-o,--out", s.out, "Output directory (default $HBPE_OUTPUT_DIR)");
    cmd->add_option("--config", s.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--classes", s.classes, "Pose classes");
    cmd->add_option("--fractions", s.fractions, "Comma-separated annotation fractions");
    if (with_methods) cmd->add_option("--methods", s.methods, "Comma-separated methods");
    cmd->add_option("--repeats", s.repeats, "Repeats per fraction");
    cmd->add_option("--seed", s.seed, "Base seed");
    cmd->add_option("-j,--jobs", s.jobs, "Concurrent work units");
    cmd->add_option("--folds", s.folds, "Cross-validation folds");
    cmd->add_option("--anchor-scope", s.anchor_scope, "all_rows or label_rows");
    cmd->add_flag("--fixed-cv", s.fixed_cv, "Cross-validate once per fraction, not per repeat");
  };
  auto* sweep = app.add_subcommand("sweep", "Accuracy sweep over annotation fractions");
  add_sweep_options(sweep, sw, true);
  SweepArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Sweep comparing all four methods");
  add_sweep_options(ablate, ab, false);

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Plot-ready CSV from a sweep.json");
  report->add_option("input", report_in, "sweep.json")->required();
  report->add_option("-o,--out", report_out, "Output CSV (default: next to input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  verbosity = quiet ? 0 : 1 + verbose;
  const std::vector<std::string> args(argv, argv + argc);

  try {
    if (*generate) return cmd_generate(gen, args);
    if (*solve) return cmd_solve(sol, args);
    if (*sweep) return cmd_sweep(sw, "sweep", false, args);
    if (*ablate) return cmd_sweep(ab, "ablate", true, args);
    if (*report) return cmd_report(report_in, report_out);
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "hbpe: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hbpe: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
