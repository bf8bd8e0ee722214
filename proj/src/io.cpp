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

#include "hbpe/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "hbpe/error.hpp"

namespace hbpe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based line in file for each row
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " columns, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ParseError(path.string() + ": missing header row");
  return table;
}

double parse_real(const std::string& cell, const fs::path& path, int line, std::size_t col) {
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(path.string() + ": row " + std::to_string(line) + ", column " +
                     std::to_string(col + 1) + ": '" + cell + "' is not a finite real");
  }
  return value;
}

long long parse_integer(const std::string& cell, const fs::path& path, int line,
                        std::size_t col) {
  long long value = 0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(path.string() + ": row " + std::to_string(line) + ", column " +
                     std::to_string(col + 1) + ": '" + cell + "' is not an integer");
  }
  return value;
}

// Rows are samples in the file, columns in the returned matrix.
Eigen::MatrixXd read_sample_matrix(const fs::path& path, std::size_t expected_width = 0) {
  const CsvTable t = read_csv(path);
  if (expected_width != 0 && t.header.size() != expected_width) {
    throw ParseError(path.string() + ": expected " + std::to_string(expected_width) +
                     " columns, header has " + std::to_string(t.header.size()));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.header.size()),
                    static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) =
          parse_real(t.rows[r][c], path, t.line_numbers[r], c);
    }
  }
  return m;
}

// Shortest text that parses back to the same double.
std::string real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sample_matrix(const fs::path& path, const Eigen::MatrixXd& m,
                         const std::string& prefix) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << (r ? "," : "") << prefix << r;
  }
  out << '\n';
  for (Eigen::Index t = 0; t < m.cols(); ++t) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) out << (r ? "," : "") << real(m(r, t));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void check_length(const fs::path& path, Eigen::Index got, std::size_t want) {
  if (static_cast<std::size_t>(got) != want) {
    throw ParseError(path.string() + ": " + std::to_string(got) + " data rows, but labels.csv has " +
                     std::to_string(want) + " (T mismatch)");
  }
}

}  // namespace

PersonDataset load_person(const std::string& dir, int classes) {
  const fs::path root(dir);
  PersonDataset person;
  person.person_id = root.filename().string();
  if (person.person_id.empty()) person.person_id = root.parent_path().filename().string();
  person.classes = classes;

  const fs::path labels_path = root / "labels.csv";
  const CsvTable labels = read_csv(labels_path);
  if (labels.header != std::vector<std::string>{"t", "head_class", "body_class"}) {
    throw ParseError(labels_path.string() + ": row 1: header must be t,head_class,body_class");
  }
  long long previous_t = 0;
  for (std::size_t r = 0; r < labels.rows.size(); ++r) {
    const int line = labels.line_numbers[r];
    const long long t = parse_integer(labels.rows[r][0], labels_path, line, 0);
    if (r > 0 && t <= previous_t) {
      throw ParseError(labels_path.string() + ": row " + std::to_string(line) +
                       ", column 1: t must be strictly increasing");
    }
    previous_t = t;
    for (std::size_t c = 1; c <= 2; ++c) {
      const long long k = parse_integer(labels.rows[r][c], labels_path, line, c);
      if (k < 0 || k >= classes) {
        throw ParseError(labels_path.string() + ": row " + std::to_string(line) + ", column " +
                         std::to_string(c + 1) + ": unknown class index " + std::to_string(k));
      }
      (c == 1 ? person.head_truth : person.body_truth).push_back(static_cast<int>(k));
    }
  }
  const std::size_t length = person.head_truth.size();
  if (length == 0) throw ParseError(labels_path.string() + ": no label rows");

  const fs::path head_path = root / "features_head.csv";
  const fs::path body_path = root / "features_body.csv";
  person.head_features = read_sample_matrix(head_path);
  check_length(head_path, person.head_features.cols(), length);
  person.body_features = read_sample_matrix(body_path);
  check_length(body_path, person.body_features.cols(), length);

  for (auto [name, slot] : {std::pair{"soft_head.csv", &person.soft_head},
                            std::pair{"soft_body.csv", &person.soft_body}}) {
    const fs::path p = root / name;
    if (!fs::exists(p)) continue;
    Eigen::MatrixXd soft = read_sample_matrix(p, static_cast<std::size_t>(classes));
    check_length(p, soft.cols(), length);
    *slot = std::move(soft);
  }
  person.validate();
  return person;
}

std::vector<PersonDataset> load_dataset(const std::string& path, int classes) {
  const fs::path root(path);
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + path);
  if (fs::exists(root / "labels.csv")) return {load_person(path, classes)};
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "labels.csv")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw ParseError(path + ": no person directories (expected */labels.csv)");
  std::vector<PersonDataset> people;
  for (const fs::path& d : dirs) people.push_back(load_person(d.string(), classes));
  return people;
}

void save_person(const std::string& dir, const PersonDataset& person) {
  person.validate();
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  write_sample_matrix(root / "features_head.csv", person.head_features, "h");
  write_sample_matrix(root / "features_body.csv", person.body_features, "b");
  {
    std::ofstream out(root / "labels.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (root / "labels.csv").string());
    out << "t,head_class,body_class\n";
    for (std::size_t t = 0; t < person.head_truth.size(); ++t) {
      out << t << ',' << person.head_truth[t] << ',' << person.body_truth[t] << '\n';
    }
  }
  if (person.soft_head) write_sample_matrix(root / "soft_head.csv", *person.soft_head, "c");
  if (person.soft_body) write_sample_matrix(root / "soft_body.csv", *person.soft_body, "c");
}

void save_dataset(const std::string& path, const std::vector<PersonDataset>& people) {
  std::set<std::string> ids;
  for (const PersonDataset& p : people) {
    if (p.person_id.empty() || p.person_id.find('/') != std::string::npos) {
      throw InvalidInput("person id '" + p.person_id + "' is not a valid directory name");
    }
    if (!ids.insert(p.person_id).second) throw InvalidInput("duplicate person id " + p.person_id);
  }
  for (const PersonDataset& p : people) save_person((fs::path(path) / p.person_id).string(), p);
}

// ---------------------------------------------------------------------------
// Config

json to_json(const SolverWeights& w) {
  return {{"nu_h", w.nu_h}, {"nu_b", w.nu_b}, {"lambda_h", w.lambda_h}, {"lambda_b", w.lambda_b},
          {"mu", w.mu},     {"phi_h", w.phi_h}, {"phi_b", w.phi_b}};
}

SolverWeights weights_from_json(const json& j, SolverWeights w) {
  if (!j.is_object()) throw ParseError("solver weights must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      double v = value.get<double>();
      if (key == "nu_h") w.nu_h = v;
      else if (key == "nu_b") w.nu_b = v;
      else if (key == "lambda_h") w.lambda_h = v;
      else if (key == "lambda_b") w.lambda_b = v;
      else if (key == "mu") w.mu = v;
      else if (key == "phi_h") w.phi_h = v;
      else if (key == "phi_b") w.phi_b = v;
      else throw ParseError("unknown solver weight '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("solver weights: ") + e.what());
  }
  return w;
}

json to_json(const RbfKernelParams& k) {
  return {{"length_scale", k.length_scale},
          {"signal_variance", k.signal_variance},
          {"noise_variance", k.noise_variance}};
}

RbfKernelParams kernel_from_json(const json& j, RbfKernelParams k) {
  if (!j.is_object()) throw ParseError("kernel parameters must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      double v = value.get<double>();
      if (key == "length_scale") k.length_scale = v;
      else if (key == "signal_variance") k.signal_variance = v;
      else if (key == "noise_variance") k.noise_variance = v;
      else throw ParseError("unknown kernel parameter '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("kernel parameters: ") + e.what());
  }
  return k;
}

json to_json(const SyntheticSpec& s) {
  return {{"length", s.length},
          {"classes", s.classes},
          {"head_features", s.head_features},
          {"body_features", s.body_features},
          {"turn_events", s.turn_events},
          {"gp_length_scale", s.gp_length_scale},
          {"feature_rank", s.feature_rank},
          {"feature_noise", s.feature_noise},
          {"head_body_offset_deg", s.head_body_offset_deg},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j, SyntheticSpec s) {
  if (!j.is_object()) throw ParseError("synthetic spec must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "length") s.length = value.get<int>();
      else if (key == "classes") s.classes = value.get<int>();
      else if (key == "head_features") s.head_features = value.get<int>();
      else if (key == "body_features") s.body_features = value.get<int>();
      else if (key == "turn_events") s.turn_events = value.get<int>();
      else if (key == "gp_length_scale") s.gp_length_scale = value.get<double>();
      else if (key == "feature_rank") s.feature_rank = value.get<int>();
      else if (key == "feature_noise") s.feature_noise = value.get<double>();
      else if (key == "head_body_offset_deg") s.head_body_offset_deg = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else throw ParseError("unknown synthetic spec key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

namespace {

json to_json(const MethodParams& p) {
  return {{"weights", to_json(p.weights)},
          {"kernel", to_json(p.kernel)},
          {"laplacian_weight", p.laplacian_weight},
          {"anchor_scope", std::string(to_string(p.anchor_scope))}};
}

MethodParams params_from_json(const json& j) {
  MethodParams p{weights_from_json(j.at("weights")), kernel_from_json(j.at("kernel")),
                 j.at("laplacian_weight").get<double>()};
  if (j.contains("anchor_scope")) p.anchor_scope = parse_anchor_scope(j["anchor_scope"].get<std::string>());
  return p;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json kernels = json::array();
  for (const auto& k : c.kernel_grid) kernels.push_back(to_json(k));
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  return {{"fractions", c.fractions},
          {"repeats", c.repeats},
          {"diversity_threshold", c.diversity_threshold},
          {"max_retries", c.max_retries},
          {"weight_grid",
           {{"nu", c.weight_grid.nu},
            {"lambda", c.weight_grid.lambda},
            {"mu", c.weight_grid.mu},
            {"phi", c.weight_grid.phi}}},
          {"kernel_grid", kernels},
          {"laplacian_weight_grid", c.laplacian_weight_grid},
          {"folds", c.folds},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"seed", c.seed},
          {"methods", methods},
          {"cv_per_repeat", c.cv_per_repeat},
          {"variance_keep", c.variance_keep},
          {"use_soft_labels", c.use_soft_labels},
          {"anchor_scope", std::string(to_string(c.anchor_scope))},
          {"jobs", c.jobs}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ParseError("experiment config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "fractions") c.fractions = value.get<std::vector<double>>();
      else if (key == "repeats") c.repeats = value.get<int>();
      else if (key == "diversity_threshold") c.diversity_threshold = value.get<double>();
      else if (key == "max_retries") c.max_retries = value.get<int>();
      else if (key == "weight_grid") {
        for (const auto& [gk, gv] : value.items()) {
          auto list = gv.get<std::vector<double>>();
          if (gk == "nu") c.weight_grid.nu = list;
          else if (gk == "lambda") c.weight_grid.lambda = list;
          else if (gk == "mu") c.weight_grid.mu = list;
          else if (gk == "phi") c.weight_grid.phi = list;
          else throw ParseError("unknown weight_grid key '" + gk + "'");
        }
      } else if (key == "kernel_grid") {
        c.kernel_grid.clear();
        for (const auto& k : value) c.kernel_grid.push_back(kernel_from_json(k));
      } else if (key == "laplacian_weight_grid") {
        c.laplacian_weight_grid = value.get<std::vector<double>>();
      } else if (key == "folds") c.folds = value.get<int>();
      else if (key == "tol") c.tol = value.get<double>();
      else if (key == "max_iter") c.max_iter = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : value) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "cv_per_repeat") c.cv_per_repeat = value.get<bool>();
      else if (key == "variance_keep") c.variance_keep = value.get<double>();
      else if (key == "use_soft_labels") c.use_soft_labels = value.get<bool>();
      else if (key == "anchor_scope") c.anchor_scope = parse_anchor_scope(value.get<std::string>());
      else if (key == "jobs") c.jobs = value.get<int>();
      else throw ParseError("unknown experiment config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Sweep results

json to_json(const SweepResult& r, const json& provenance) {
  json records = json::array();
  for (const RepeatRecord& rec : r.records) {
    records.push_back({{"person_id", rec.person_id},
                       {"fraction", rec.fraction},
                       {"method", std::string(to_string(rec.method))},
                       {"repeat", rec.repeat},
                       {"ok", rec.ok},
                       {"error", rec.error},
                       {"error_code", rec.error_code},
                       {"head_accuracy", rec.head_accuracy},
                       {"body_accuracy", rec.body_accuracy},
                       {"head_correct", rec.head_correct},
                       {"head_evaluated", rec.head_evaluated},
                       {"body_correct", rec.body_correct},
                       {"body_evaluated", rec.body_evaluated},
                       {"iterations", rec.iterations},
                       {"converged", rec.converged},
                       {"params", to_json(rec.params)},
                       {"mask_seed_h", rec.mask_seed_h},
                       {"mask_seed_b", rec.mask_seed_b}});
  }
  json rows = json::array();
  for (const SweepRow& row : r.rows) {
    rows.push_back({{"person_id", row.person_id},
                    {"fraction", row.fraction},
                    {"method", std::string(to_string(row.method))},
                    {"head_acc_mean", row.head_mean},
                    {"head_acc_std", row.head_std},
                    {"body_acc_mean", row.body_mean},
                    {"body_acc_std", row.body_std},
                    {"head_entropy", row.head_entropy},
                    {"body_entropy", row.body_entropy},
                    {"completed", row.completed},
                    {"failed", row.failed}});
  }
  json pooled = json::array();
  for (const PooledRow& p : r.pooled) {
    pooled.push_back({{"fraction", p.fraction},
                      {"method", std::string(to_string(p.method))},
                      {"head_macro", p.head_macro},
                      {"body_macro", p.body_macro},
                      {"head_micro", p.head_micro},
                      {"body_micro", p.body_micro}});
  }
  json doc = {{"schema_version", kSweepSchemaVersion},
              {"config", to_json(r.config)},
              {"records", records},
              {"summary", rows},
              {"pooled", pooled},
              {"failed_units", r.failed_units}};
  if (!provenance.is_null()) doc["provenance"] = provenance;
  return doc;
}

SweepResult sweep_from_json(const json& j) {
  try {
    if (!j.contains("schema_version")) throw ParseError("sweep.json: missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kSweepSchemaVersion) {
      throw ParseError("sweep.json: schema version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kSweepSchemaVersion) + ")");
    }
    SweepResult r;
    r.config = config_from_json(j.at("config"));
    for (const json& rec : j.at("records")) {
      RepeatRecord out;
      out.person_id = rec.at("person_id").get<std::string>();
      out.fraction = rec.at("fraction").get<double>();
      out.method = parse_method(rec.at("method").get<std::string>());
      out.repeat = rec.at("repeat").get<int>();
      out.ok = rec.at("ok").get<bool>();
      out.error = rec.at("error").get<std::string>();
      out.error_code = rec.at("error_code").get<int>();
      out.head_accuracy = rec.at("head_accuracy").get<double>();
      out.body_accuracy = rec.at("body_accuracy").get<double>();
      out.head_correct = rec.at("head_correct").get<int>();
      out.head_evaluated = rec.at("head_evaluated").get<int>();
      out.body_correct = rec.at("body_correct").get<int>();
      out.body_evaluated = rec.at("body_evaluated").get<int>();
      out.iterations = rec.at("iterations").get<int>();
      out.converged = rec.at("converged").get<bool>();
      out.params = params_from_json(rec.at("params"));
      out.mask_seed_h = rec.at("mask_seed_h").get<std::uint64_t>();
      out.mask_seed_b = rec.at("mask_seed_b").get<std::uint64_t>();
      r.records.push_back(std::move(out));
    }
    for (const json& row : j.at("summary")) {
      SweepRow out;
      out.person_id = row.at("person_id").get<std::string>();
      out.fraction = row.at("fraction").get<double>();
      out.method = parse_method(row.at("method").get<std::string>());
      out.head_mean = row.at("head_acc_mean").get<double>();
      out.head_std = row.at("head_acc_std").get<double>();
      out.body_mean = row.at("body_acc_mean").get<double>();
      out.body_std = row.at("body_acc_std").get<double>();
      out.head_entropy = row.at("head_entropy").get<double>();
      out.body_entropy = row.at("body_entropy").get<double>();
      out.completed = row.at("completed").get<int>();
      out.failed = row.at("failed").get<int>();
      r.rows.push_back(std::move(out));
    }
    for (const json& p : j.at("pooled")) {
      PooledRow out;
      out.fraction = p.at("fraction").get<double>();
      out.method = parse_method(p.at("method").get<std::string>());
      out.head_macro = p.at("head_macro").get<double>();
      out.body_macro = p.at("body_macro").get<double>();
      out.head_micro = p.at("head_micro").get<double>();
      out.body_micro = p.at("body_micro").get<double>();
      r.pooled.push_back(out);
    }
    r.failed_units = j.at("failed_units").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep.json: ") + e.what());
  }
}

void write_sweep_csv(const SweepResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "person_id,fraction,method,head_acc_mean,head_acc_std,body_acc_mean,body_acc_std,"
         "head_entropy,body_entropy\n";
  for (const SweepRow& row : r.rows) {
    out << row.person_id << ',' << real(row.fraction) << ',' << to_string(row.method) << ','
        << real(row.head_mean) << ',' << real(row.head_std) << ',' << real(row.body_mean) << ','
        << real(row.body_std) << ',' << real(row.head_entropy) << ',' << real(row.body_entropy)
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void write_sweep_json(const SweepResult& r, const std::string& path, const json& provenance) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << to_json(r, provenance).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

SweepResult read_sweep_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return sweep_from_json(j);
}

std::vector<ReportRow> report_rows(const SweepResult& result) {
  std::vector<ReportRow> rows;
  for (double fraction : result.config.fractions) {
    for (Method method : result.config.methods) {
      std::vector<double> head, body;
      for (const RepeatRecord& r : result.records) {
        if (!r.ok || r.fraction != fraction || r.method != method) continue;
        head.push_back(r.head_accuracy);
        body.push_back(r.body_accuracy);
      }
      if (head.empty()) continue;
      for (auto [stream, values] : {std::pair{"head", &head}, std::pair{"body", &body}}) {
        ReportRow row{fraction, method, stream};
        for (double v : *values) row.mean += v;
        row.count = static_cast<int>(values->size());
        row.mean /= row.count;
        row.std = sample_std(*values);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "fraction,method,stream,mean,std,count\n";
  for (const ReportRow& r : rows) {
    out << real(r.fraction) << ',' << to_string(r.method) << ',' << r.stream << ','
        << real(r.mean) << ',' << real(r.std) << ',' << r.count << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

std::string format_person_table(const SweepResult& result, double fraction) {
  std::ostringstream os;
  std::vector<std::string> people;
  for (const SweepRow& row : result.rows) {
    if (row.fraction == fraction &&
        std::find(people.begin(), people.end(), row.person_id) == people.end()) {
      people.push_back(row.person_id);
    }
  }
  auto cell = [](double mean, double sd) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f (%.1e)", mean, sd);
    return std::string(buf);
  };
  os << "Annotation " << std::setprecision(3) << fraction * 100.0 << "%\n";
  os << std::left << std::setw(16) << "person";
  for (Method m : result.config.methods) {
    os << std::setw(18) << (std::string(to_string(m)) + " HPE") << std::setw(18)
       << (std::string(to_string(m)) + " BPE");
  }
  os << std::setw(8) << "H_head" << "H_body\n";
  for (const std::string& id : people) {
    os << std::setw(16) << id;
    double he = 0.0, be = 0.0;
    for (Method m : result.config.methods) {
      const auto it = std::find_if(result.rows.begin(), result.rows.end(), [&](const SweepRow& r) {
        return r.person_id == id && r.fraction == fraction && r.method == m;
      });
      if (it == result.rows.end() || it->completed == 0) {
        os << std::setw(18) << "failed" << std::setw(18) << "failed";
        if (it != result.rows.end()) {
          he = it->head_entropy;
          be = it->body_entropy;
        }
        continue;
      }
      os << std::setw(18) << cell(it->head_mean, it->head_std) << std::setw(18)
         << cell(it->body_mean, it->body_std);
      he = it->head_entropy;
      be = it->body_entropy;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-8.2f%.2f", he, be);
    os << buf << '\n';
  }
  return os.str();
}

}  // namespace hbpe
