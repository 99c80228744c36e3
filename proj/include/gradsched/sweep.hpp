// Copyright 2026 The gradsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRADSCHED_SWEEP_HPP_
#define GRADSCHED_SWEEP_HPP_

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradsched/comm_model.hpp"
#include "gradsched/errors.hpp"
#include "gradsched/planner.hpp"
#include "gradsched/timeline.hpp"
#include "gradsched/trace.hpp"

namespace gradsched {

enum class Strategy { kNaive, kWfbp, kSyncEasgd, kMgWfbp };

inline const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kNaive:
      return "naive";
    case Strategy::kWfbp:
      return "wfbp";
    case Strategy::kSyncEasgd:
      return "synceasgd";
    case Strategy::kMgWfbp:
      return "mgwfbp";
  }
  return "unknown";
}

inline Strategy strategy_from_string(const std::string& name) {
  if (name == "naive") return Strategy::kNaive;
  if (name == "wfbp") return Strategy::kWfbp;
  if (name == "synceasgd") return Strategy::kSyncEasgd;
  if (name == "mgwfbp") return Strategy::kMgWfbp;
  throw ValidationError("unknown strategy: '" + name +
                        "' (expected naive, wfbp, synceasgd or mgwfbp)");
}

constexpr Strategy kAllStrategies[] = {Strategy::kNaive, Strategy::kWfbp,
                                       Strategy::kSyncEasgd, Strategy::kMgWfbp};

/// One (worker count, strategy) evaluation. `error` is empty on success;
/// a failed row keeps its identity fields and the error text.
struct SweepRow {
  int n_workers = 0;
  Strategy strategy = Strategy::kNaive;
  AllReduceAlgorithm algo = AllReduceAlgorithm::kRing;
  double iter_time_sec = 0.0;
  double comm_nonoverlap_sec = 0.0;
  double speedup = 0.0;
  std::size_t n_merged = 0;
  std::size_t n_groups = 0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

inline std::size_t merged_layer_count(const MergePlan& plan) {
  return plan.merged_count();
}

/// Evaluates every strategy at every worker count, instantiating the cost
/// model from `net` (its n_workers field is overridden per count) and the
/// chosen all-reduce algorithm. Failures are recorded per row rather than
/// aborting the sweep. Rows come out ordered by (n_workers, strategy).
inline SweepResult run_sweep(const ModelTrace& trace, NetworkParams net,
                             AllReduceAlgorithm algo,
                             std::vector<int> worker_counts,
                             DbtStartup dbt_mode = DbtStartup::kAlphaCorrected) {
  trace.validate();
  std::sort(worker_counts.begin(), worker_counts.end());
  SweepResult result;
  const double backward = trace.total_backward_time();

  for (const int n_workers : worker_counts) {
    AllReduceModel model;
    std::string row_error;
    try {
      if (n_workers < 2) {
        throw ValidationError("n_workers must be >= 2, got " +
                              std::to_string(n_workers));
      }
      net.n_workers = n_workers;
      std::vector<std::string> warnings;
      model = coefficients_for(algo, net, dbt_mode, &warnings);
      for (const auto& w : warnings) {
        result.warnings.push_back("N=" + std::to_string(n_workers) + ": " + w);
      }
    } catch (const Error& e) {
      row_error = e.what();
    }

    for (const Strategy strategy : kAllStrategies) {
      SweepRow row;
      row.n_workers = n_workers;
      row.strategy = strategy;
      row.algo = algo;
      if (!row_error.empty()) {
        row.error = row_error;
        result.rows.push_back(std::move(row));
        continue;
      }
      try {
        switch (strategy) {
          case Strategy::kNaive: {
            row.iter_time_sec = naive_time(trace, model);
            row.comm_nonoverlap_sec = row.iter_time_sec - compute_time(trace);
            row.n_merged = 0;
            row.n_groups = trace.n_layers();
            break;
          }
          case Strategy::kWfbp: {
            const Timeline tl = iteration_time(
                trace, MergePlan::all_normal(trace.n_layers()), model);
            row.iter_time_sec = tl.iteration_time;
            row.comm_nonoverlap_sec = tl.comm_nonoverlap;
            row.n_merged = 0;
            row.n_groups = trace.n_layers();
            break;
          }
          case Strategy::kSyncEasgd: {
            row.iter_time_sec = synceasgd_time(trace, model);
            row.comm_nonoverlap_sec = row.iter_time_sec - compute_time(trace);
            row.n_merged = trace.n_layers() - 1;
            row.n_groups = 1;
            break;
          }
          case Strategy::kMgWfbp: {
            const MergePlan plan = optimal_plan(trace, model);
            const Timeline tl = iteration_time(trace, plan, model);
            row.iter_time_sec = tl.iteration_time;
            row.comm_nonoverlap_sec = tl.comm_nonoverlap;
            row.n_merged = merged_layer_count(plan);
            row.n_groups = trace.n_layers() - row.n_merged;
            break;
          }
        }
        row.speedup =
            speedup(n_workers, trace.forward_time, backward, row.comm_nonoverlap_sec);
      } catch (const Error& e) {
        row.error = "N=" + std::to_string(n_workers) + ": " + e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace detail {

// Shortest round-trip formatting; keeps sweep output bit-identical across
// runs without pinning a digit count.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace detail

/// CSV export (microseconds). Failed rows carry no numbers and are skipped;
/// they stay visible in the JSON export and SweepResult itself.
inline void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "n_workers,strategy,algo,iter_time_us,comm_nonoverlap_us,speedup,n_merged\n";
  for (const auto& row : result.rows) {
    if (!row.ok()) continue;
    out << row.n_workers << ',' << to_string(row.strategy) << ','
        << to_string(row.algo) << ','
        << detail::format_double(row.iter_time_sec * 1e6) << ','
        << detail::format_double(row.comm_nonoverlap_sec * 1e6) << ','
        << detail::format_double(row.speedup) << ',' << row.n_merged << '\n';
  }
}

/// Long-format JSON: one flat record per row (plot-tool friendly), plus any
/// sweep-level warnings.
inline nlohmann::json sweep_to_json(const SweepResult& result) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : result.rows) {
    nlohmann::json item;
    item["n_workers"] = row.n_workers;
    item["strategy"] = to_string(row.strategy);
    item["algo"] = to_string(row.algo);
    if (row.ok()) {
      item["iter_time_us"] = row.iter_time_sec * 1e6;
      item["comm_nonoverlap_us"] = row.comm_nonoverlap_sec * 1e6;
      item["speedup"] = row.speedup;
      item["n_merged"] = row.n_merged;
      item["n_groups"] = row.n_groups;
    } else {
      item["error"] = row.error;
    }
    doc["rows"].push_back(std::move(item));
  }
  doc["warnings"] = result.warnings;
  return doc;
}

}  // namespace gradsched

#endif  // GRADSCHED_SWEEP_HPP_
