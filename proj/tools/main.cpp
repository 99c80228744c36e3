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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradsched/gradsched.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPlanner = 3;
constexpr int kExitGuard = 4;
constexpr int kExitAllRowsFailed = 5;

void write_json_file(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw gradsched::ParseError("cannot open output file: " + path);
  }
  out << doc.dump(2) << '\n';
}

gradsched::AllReduceModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw gradsched::ParseError("cannot open model file: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw gradsched::ParseError("model file " + path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("a_sec") || !doc["a_sec"].is_number() ||
      !doc.contains("b_sec_per_byte") || !doc["b_sec_per_byte"].is_number()) {
    throw gradsched::ParseError(
        "model file " + path + ": expected numeric fields a_sec and b_sec_per_byte");
  }
  gradsched::AllReduceModel model;
  model.a = doc["a_sec"].get<double>();
  model.b = doc["b_sec_per_byte"].get<double>();
  return model;
}

// "4..2048" expands to the powers of two in that range; otherwise a
// comma-separated list of counts.
std::vector<int> parse_worker_spec(const std::string& spec) {
  std::vector<int> counts;
  const auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(spec.substr(0, dots));
      const int hi = std::stoi(spec.substr(dots + 2));
      for (long long p = 1; p <= hi; p *= 2) {
        if (p >= lo) counts.push_back(static_cast<int>(p));
      }
    } else {
      std::size_t start = 0;
      while (start <= spec.size()) {
        const auto comma = spec.find(',', start);
        const std::string token =
            spec.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!token.empty()) counts.push_back(std::stoi(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
  } catch (const std::exception&) {
    throw gradsched::ValidationError("invalid --workers spec: '" + spec + "'");
  }
  if (counts.empty()) {
    throw gradsched::ValidationError("--workers spec '" + spec +
                                     "' yields no worker counts");
  }
  return counts;
}

struct FitArgs {
  std::string csv_path;
  std::string algo;
  int workers = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool dbt_literal = false;
  std::string out_path;
};

int run_fit(const FitArgs& args) {
  gradsched::AllReduceModel model;
  std::vector<std::string> warnings;
  std::string source;
  if (!args.csv_path.empty() && !args.algo.empty()) {
    throw gradsched::ValidationError(
        "fit: give either a measurements CSV or --algo, not both");
  }
  if (!args.csv_path.empty()) {
    model = gradsched::fit_model(gradsched::load_measurements_csv(args.csv_path));
    source = "fit";
  } else if (!args.algo.empty()) {
    gradsched::NetworkParams net;
    net.alpha = args.alpha;
    net.beta = args.beta;
    net.gamma = args.gamma;
    net.n_workers = args.workers;
    model = gradsched::coefficients_for(
        gradsched::algorithm_from_string(args.algo), net,
        args.dbt_literal ? gradsched::DbtStartup::kLiteral
                         : gradsched::DbtStartup::kAlphaCorrected,
        &warnings);
    source = "table2";
  } else {
    throw gradsched::ValidationError(
        "fit: need a measurements CSV or --algo with network parameters");
  }
  nlohmann::json doc;
  doc["a_sec"] = model.a;
  doc["b_sec_per_byte"] = model.b;
  doc["source"] = source;
  doc["warnings"] = warnings;
  if (args.out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(doc, args.out_path);
  }
  return kExitOk;
}

struct PlanArgs {
  std::string trace_path;
  std::string model_path;
  bool oracle = false;
  std::string out_path;
};

int run_plan(const PlanArgs& args) {
  const gradsched::ModelTrace trace = gradsched::load_trace(args.trace_path);
  const gradsched::AllReduceModel model = load_model_file(args.model_path);
  const gradsched::MergePlan plan = gradsched::optimal_plan(trace, model);
  const double plan_time =
      gradsched::iteration_time(trace, plan, model).iteration_time;
  if (args.oracle) {
    const auto brute = gradsched::brute_force_plan(trace, model);
    if (std::abs(brute.iteration_time - plan_time) > 1e-9) {
      std::cerr << "plan: oracle mismatch: planner " << plan_time * 1e6
                << " us vs exhaustive minimum " << brute.iteration_time * 1e6
                << " us\n";
      return kExitPlanner;
    }
  }
  const nlohmann::json doc = gradsched::plan_to_json(trace, plan, model);
  if (args.out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(doc, args.out_path);
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string trace_path;
  std::string model_path;
  std::string strategy;
  int workers = 0;
  std::string out_path;
};

int run_simulate(const SimulateArgs& args) {
  const gradsched::ModelTrace trace = gradsched::load_trace(args.trace_path);
  const gradsched::AllReduceModel model = load_model_file(args.model_path);
  const gradsched::Strategy strategy = gradsched::strategy_from_string(args.strategy);

  gradsched::Timeline timeline;
  switch (strategy) {
    case gradsched::Strategy::kNaive:
      timeline = gradsched::naive_timeline(trace, model);
      break;
    case gradsched::Strategy::kWfbp:
      timeline = gradsched::iteration_time(
          trace, gradsched::MergePlan::all_normal(trace.n_layers()), model);
      break;
    case gradsched::Strategy::kSyncEasgd:
      timeline = gradsched::iteration_time(
          trace, gradsched::MergePlan::all_merged(trace.n_layers()), model);
      break;
    case gradsched::Strategy::kMgWfbp:
      timeline = gradsched::iteration_time(
          trace, gradsched::optimal_plan(trace, model), model);
      break;
  }

  std::cout << std::setprecision(15) << "iter_time_us="
            << timeline.iteration_time * 1e6
            << " comm_nonoverlap_us=" << timeline.comm_nonoverlap * 1e6;
  if (args.workers > 0) {
    std::cout << " speedup="
              << gradsched::speedup(args.workers, trace.forward_time,
                                    trace.total_backward_time(),
                                    timeline.comm_nonoverlap);
  }
  std::cout << '\n';
  if (!args.out_path.empty()) {
    write_json_file(gradsched::timeline_to_json(timeline), args.out_path);
  }
  return kExitOk;
}

struct SweepArgs {
  std::string trace_path;
  std::string algo;
  std::string workers_spec = "4..2048";
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool dbt_literal = false;
  std::string out_path;
  std::string json_path;
};

int run_sweep_cmd(const SweepArgs& args) {
  const gradsched::ModelTrace trace = gradsched::load_trace(args.trace_path);
  gradsched::NetworkParams net;
  net.alpha = args.alpha;
  net.beta = args.beta;
  net.gamma = args.gamma;
  net.n_workers = 2;  // replaced per row
  const std::vector<int> counts = parse_worker_spec(args.workers_spec);
  const gradsched::SweepResult result = gradsched::run_sweep(
      trace, net, gradsched::algorithm_from_string(args.algo), counts,
      args.dbt_literal ? gradsched::DbtStartup::kLiteral
                       : gradsched::DbtStartup::kAlphaCorrected);

  bool any_ok = false;
  for (const auto& row : result.rows) {
    if (row.ok()) {
      any_ok = true;
    } else {
      std::cerr << "sweep row failed: " << row.error << '\n';
    }
  }
  for (const auto& warning : result.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
  if (!any_ok) {
    std::cerr << "sweep: every row failed\n";
    return kExitAllRowsFailed;
  }
  if (args.out_path.empty()) {
    gradsched::write_sweep_csv(result, std::cout);
  } else {
    std::ofstream out(args.out_path);
    if (!out) {
      throw gradsched::ParseError("cannot open output file: " + args.out_path);
    }
    gradsched::write_sweep_csv(result, out);
  }
  if (!args.json_path.empty()) {
    write_json_file(gradsched::sweep_to_json(result), args.json_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradsched: plan and simulate gradient merge schedules for "
               "communication/computation overlap in data-parallel training"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand(
      "fit", "Build a linear all-reduce cost model from measurements or "
             "closed-form algorithm costs");
  fit->add_option("csv", fit_args.csv_path,
                  "CSV of measurements (header: size_bytes,time_us)");
  fit->add_option("--algo", fit_args.algo,
                  "closed-form algorithm: binary_tree, recursive_doubling, "
                  "recursive_halving_doubling, double_binary_trees, ring");
  fit->add_option("--workers", fit_args.workers, "number of workers (with --algo)");
  fit->add_option("--alpha", fit_args.alpha, "point-to-point latency, seconds");
  fit->add_option("--beta", fit_args.beta, "transmission time per byte, seconds");
  fit->add_option("--gamma", fit_args.gamma, "reduction time per byte, seconds");
  fit->add_flag("--dbt-literal", fit_args.dbt_literal,
                "use the literal double-binary-trees startup 2*log2(N) "
                "instead of 2*alpha*log2(N)");
  fit->add_option("--out", fit_args.out_path, "output model.json (default stdout)");

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Compute the optimal merge plan");
  plan->add_option("trace", plan_args.trace_path, "trace.json")->required();
  plan->add_option("model", plan_args.model_path, "model.json")->required();
  plan->add_flag("--oracle", plan_args.oracle,
                 "verify against exhaustive enumeration (traces up to 20 layers)");
  plan->add_option("--out", plan_args.out_path, "output plan.json (default stdout)");

  SimulateArgs sim_args;
  auto* simulate =
      app.add_subcommand("simulate", "Evaluate one strategy's iteration timeline");
  simulate->add_option("trace", sim_args.trace_path, "trace.json")->required();
  simulate->add_option("model", sim_args.model_path, "model.json")->required();
  simulate
      ->add_option("--strategy", sim_args.strategy,
                   "naive | wfbp | synceasgd | mgwfbp")
      ->required();
  simulate->add_option("--workers", sim_args.workers,
                       "worker count, enables the speedup column");
  simulate->add_option("--out", sim_args.out_path, "output timeline.json");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand(
      "sweep", "Evaluate all strategies across worker counts");
  sweep->add_option("trace", sweep_args.trace_path, "trace.json")->required();
  sweep->add_option("--algo", sweep_args.algo, "all-reduce algorithm")->required();
  sweep->add_option("--workers", sweep_args.workers_spec,
                    "e.g. 4..2048 (powers of two) or 4,8,12");
  sweep->add_option("--alpha", sweep_args.alpha, "point-to-point latency, seconds")
      ->required();
  sweep->add_option("--beta", sweep_args.beta, "transmission time per byte, seconds");
  sweep->add_option("--gamma", sweep_args.gamma, "reduction time per byte, seconds");
  sweep->add_flag("--dbt-literal", sweep_args.dbt_literal,
                  "literal double-binary-trees startup");
  sweep->add_option("--out", sweep_args.out_path, "output CSV (default stdout)");
  sweep->add_option("--json", sweep_args.json_path, "also write long-format JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (plan->parsed()) return run_plan(plan_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (sweep->parsed()) return run_sweep_cmd(sweep_args);
  } catch (const gradsched::GuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGuard;
  } catch (const gradsched::PlannerError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPlanner;
  } catch (const gradsched::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
