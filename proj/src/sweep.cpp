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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "hbpe/error.hpp"
#include "hbpe/experiment.hpp"

namespace hbpe {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Unit {
  int person = 0;
  int fraction = 0;
  int repeat = 0;
};

struct PreparedPerson {
  PersonDataset data;
  double head_entropy = 0.0;
  double body_entropy = 0.0;
};

PreparedPerson prepare(const PersonDataset& person, const ExperimentConfig& config) {
  person.validate();
  PreparedPerson out;
  out.data = person;
  out.data.head_features = preprocess_features(person.head_features, config.variance_keep).features;
  out.data.body_features = preprocess_features(person.body_features, config.variance_keep).features;
  if (!config.use_soft_labels) {
    out.data.soft_head.reset();
    out.data.soft_body.reset();
  }
  out.head_entropy = label_entropy(person.head_truth, person.classes).value;
  out.body_entropy = label_entropy(person.body_truth, person.classes).value;
  return out;
}

std::pair<ObservationMask, ObservationMask> draw_masks(const PreparedPerson& p, const Unit& u,
                                                       const ExperimentConfig& config,
                                                       std::uint64_t* seed_h,
                                                       std::uint64_t* seed_b) {
  const double fraction = config.fractions[static_cast<std::size_t>(u.fraction)];
  MaskOptions opts{config.diversity_threshold, config.max_retries};
  *seed_h = mask_seed(config.seed, u.person, u.fraction, u.repeat, 0);
  *seed_b = mask_seed(config.seed, u.person, u.fraction, u.repeat, 1);
  return {generate_mask(p.data.length(), fraction, p.data.head_truth, *seed_h, opts),
          generate_mask(p.data.length(), fraction, p.data.body_truth, *seed_b, opts)};
}

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

int error_code_of(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->kind());
  return static_cast<int>(ErrorKind::kNumerical);
}

}  // namespace

std::uint64_t mask_seed(std::uint64_t base, int person, int fraction_index, int repeat,
                        int stream) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t v : {static_cast<std::uint64_t>(person), static_cast<std::uint64_t>(fraction_index),
                          static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(stream)}) {
    h = splitmix64(h ^ v);
  }
  return h;
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

void aggregate(SweepResult& result, const std::vector<PersonDataset>& datasets) {
  result.rows.clear();
  result.pooled.clear();
  result.failed_units = 0;

  std::map<std::string, std::pair<double, double>> entropy;
  for (const PersonDataset& p : datasets) {
    entropy[p.person_id] = {label_entropy(p.head_truth, p.classes).value,
                            label_entropy(p.body_truth, p.classes).value};
  }

  // Keys keep first-seen order of people; fractions and methods follow config order.
  std::vector<std::string> people;
  for (const RepeatRecord& r : result.records) {
    if (std::find(people.begin(), people.end(), r.person_id) == people.end()) {
      people.push_back(r.person_id);
    }
    if (!r.ok) ++result.failed_units;
  }

  for (double fraction : result.config.fractions) {
    for (Method method : result.config.methods) {
      PooledRow pooled{fraction, method};
      double hc = 0, he = 0, bc = 0, be = 0;
      int persons_with_data = 0;
      for (const std::string& id : people) {
        SweepRow row;
        row.person_id = id;
        row.fraction = fraction;
        row.method = method;
        if (auto it = entropy.find(id); it != entropy.end()) {
          row.head_entropy = it->second.first;
          row.body_entropy = it->second.second;
        }
        std::vector<double> head, body;
        for (const RepeatRecord& r : result.records) {
          if (r.person_id != id || r.fraction != fraction || r.method != method) continue;
          if (!r.ok) {
            ++row.failed;
            continue;
          }
          head.push_back(r.head_accuracy);
          body.push_back(r.body_accuracy);
          hc += r.head_correct;
          he += r.head_evaluated;
          bc += r.body_correct;
          be += r.body_evaluated;
        }
        row.completed = static_cast<int>(head.size());
        if (row.completed == 0 && row.failed == 0) continue;
        if (row.completed > 0) {
          for (double v : head) row.head_mean += v;
          for (double v : body) row.body_mean += v;
          row.head_mean /= row.completed;
          row.body_mean /= row.completed;
          row.head_std = sample_std(head);
          row.body_std = sample_std(body);
          pooled.head_macro += row.head_mean;
          pooled.body_macro += row.body_mean;
          ++persons_with_data;
        }
        result.rows.push_back(row);
      }
      if (persons_with_data == 0) continue;
      pooled.head_macro /= persons_with_data;
      pooled.body_macro /= persons_with_data;
      pooled.head_micro = he > 0 ? hc / he : 0.0;
      pooled.body_micro = be > 0 ? bc / be : 0.0;
      result.pooled.push_back(pooled);
    }
  }
}

SweepResult run_sweep(const std::vector<PersonDataset>& datasets, const ExperimentConfig& config,
                      const RecordSink& sink) {
  config.validate();
  if (datasets.empty()) throw InvalidInput("sweep needs at least one person");

  std::vector<PreparedPerson> people;
  people.reserve(datasets.size());
  for (const PersonDataset& p : datasets) people.push_back(prepare(p, config));

  const int n_fractions = static_cast<int>(config.fractions.size());
  const int n_methods = static_cast<int>(config.methods.size());
  std::vector<Unit> units;
  for (int p = 0; p < static_cast<int>(people.size()); ++p) {
    for (int f = 0; f < n_fractions; ++f) {
      for (int r = 0; r < config.repeats; ++r) units.push_back({p, f, r});
    }
  }

  SolveOptions options;
  options.tol = config.tol;
  options.max_iter = config.max_iter;

  // Hyperparameters fixed once per (person, fraction, method) from repeat 0.
  std::map<std::tuple<int, int, int>, MethodParams> fixed;
  std::map<std::tuple<int, int, int>, std::string> fixed_errors;
  if (!config.cv_per_repeat) {
    std::vector<std::tuple<int, int, int>> keys;
    for (int p = 0; p < static_cast<int>(people.size()); ++p) {
      for (int f = 0; f < n_fractions; ++f) {
        for (int m = 0; m < n_methods; ++m) keys.emplace_back(p, f, m);
      }
    }
    std::vector<std::optional<MethodParams>> chosen(keys.size());
    std::vector<std::string> errors(keys.size());
    parallel_for(keys.size(), config.jobs, [&](std::size_t i) {
      const auto [p, f, m] = keys[i];
      try {
        std::uint64_t sh = 0, sb = 0;
        const auto masks = draw_masks(people[static_cast<std::size_t>(p)], Unit{p, f, 0}, config, &sh, &sb);
        chosen[i] = cross_validate(people[static_cast<std::size_t>(p)].data, masks.first,
                                   masks.second, config.methods[static_cast<std::size_t>(m)], config)
                        .params;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (chosen[i]) {
        fixed[keys[i]] = *chosen[i];
      } else {
        fixed_errors[keys[i]] = errors[i];
      }
    }
  }

  std::vector<std::vector<RepeatRecord>> per_unit(units.size());
  std::mutex sink_mutex;
  parallel_for(units.size(), config.jobs, [&](std::size_t i) {
    const Unit& u = units[i];
    const PreparedPerson& person = people[static_cast<std::size_t>(u.person)];
    std::vector<RepeatRecord>& out = per_unit[i];

    RepeatRecord base;
    base.person_id = person.data.person_id;
    base.fraction = config.fractions[static_cast<std::size_t>(u.fraction)];
    base.repeat = u.repeat;

    std::optional<std::pair<ObservationMask, ObservationMask>> masks;
    std::string mask_error;
    int mask_code = 0;
    try {
      masks = draw_masks(person, u, config, &base.mask_seed_h, &base.mask_seed_b);
    } catch (const std::exception& e) {
      mask_error = e.what();
      mask_code = error_code_of(e);
    }

    for (int m = 0; m < n_methods; ++m) {
      RepeatRecord rec = base;
      rec.method = config.methods[static_cast<std::size_t>(m)];
      if (!masks) {
        rec.error = mask_error;
        rec.error_code = mask_code;
      } else {
        try {
          MethodParams params;
          if (config.cv_per_repeat) {
            params = cross_validate(person.data, masks->first, masks->second, rec.method, config)
                         .params;
          } else {
            const auto key = std::make_tuple(u.person, u.fraction, m);
            if (auto it = fixed_errors.find(key); it != fixed_errors.end()) {
              throw NumericalError("hyperparameter selection failed: " + it->second);
            }
            params = fixed.at(key);
          }
          const RunResult run =
              run_single(person.data, masks->first, masks->second, rec.method, params, options);
          rec.ok = true;
          rec.params = params;
          rec.head_accuracy = run.head_accuracy;
          rec.body_accuracy = run.body_accuracy;
          rec.head_correct = run.head_correct;
          rec.head_evaluated = run.head_evaluated;
          rec.body_correct = run.body_correct;
          rec.body_evaluated = run.body_evaluated;
          if (run.report) {
            rec.iterations = run.report->iterations;
            rec.converged = run.report->converged;
          }
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.error = e.what();
          rec.error_code = error_code_of(e);
        }
      }
      if (sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(rec);
      }
      out.push_back(std::move(rec));
    }
  });

  SweepResult result;
  result.config = config;
  for (auto& unit_records : per_unit) {
    for (auto& r : unit_records) result.records.push_back(std::move(r));
  }
  aggregate(result, datasets);
  return result;
}

}  // namespace hbpe
