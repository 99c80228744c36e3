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

#ifndef GRADSCHED_PLANNER_HPP_
#define GRADSCHED_PLANNER_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradsched/comm_model.hpp"
#include "gradsched/errors.hpp"
#include "gradsched/timeline.hpp"
#include "gradsched/trace.hpp"

namespace gradsched {

namespace detail {

inline void require_planner_model(const AllReduceModel& model) {
  if (!(model.a > 0.0)) {
    throw PlannerError("planner: cost model startup a must be > 0 (got " +
                       std::to_string(model.a) +
                       "); merging has no benefit without a startup term");
  }
  if (!(model.b >= 0.0)) {
    throw PlannerError("planner: cost model per-byte b must be >= 0");
  }
}

}  // namespace detail

/// Exact minimizer of the iteration time over all 2^(L-1) merge plans.
///
/// A plan is equivalent to its set of group heads (normal layers); the
/// schedule is a chain of all-reduces, one per head, each starting at
/// max(previous finish, head gradients ready). Minimizing the completion of
/// head g's all-reduce over all head structures above g has optimal
/// substructure because the transition is monotone in the predecessor's
/// completion time. One O(L^2) pass from the last layer down yields the
/// global minimum at layer 1, which is always a head.
///
/// Candidate values are computed with the same float operations the
/// timeline engine uses (group bytes folded in ascending layer order), so
/// the returned plan's engine-evaluated time is exactly, not approximately,
/// minimal among all plans. Ties keep the smaller group.
inline MergePlan optimal_plan(const ModelTrace& trace, const AllReduceModel& model) {
  detail::require_planner_model(model);
  const std::vector<double> tau_b = backward_starts(trace);
  const std::size_t n = trace.n_layers();
  std::vector<double> ready(n);  // gradients of layer i available
  for (std::size_t i = 0; i < n; ++i) {
    ready[i] = tau_b[i] + trace.layers[i].backward_time;
  }

  constexpr double kNoCommAbove = -std::numeric_limits<double>::infinity();
  std::vector<double> best_finish(n + 1);
  std::vector<std::size_t> next_head(n + 1, n);
  best_finish[n] = kNoCommAbove;
  for (std::size_t g = n; g-- > 0;) {
    double best = 0.0;
    std::size_t choice = n;
    double group_bytes = 0.0;
    for (std::size_t u = g + 1; u <= n; ++u) {
      group_bytes += layer_bytes(trace, u - 1);
      const double finish = std::max(best_finish[u], ready[g]) +
                            allreduce_cost(model, group_bytes);
      if (u == g + 1 || finish < best) {
        best = finish;
        choice = u;
      }
    }
    best_finish[g] = best;
    next_head[g] = choice;
  }

  MergePlan plan{std::vector<LayerTag>(n, LayerTag::kMerged)};
  for (std::size_t g = 0; g < n; g = next_head[g]) {
    plan.tags[g] = LayerTag::kNormal;
  }
  return plan;
}

/// The top-down conditional-merge procedure: walk layers from the last to
/// the second; merge layer l into l-1 whenever the gradients of l-1 become
/// ready less than one startup time after l's communication could begin
/// (the waiting added by merging is smaller than the startup saved), then
/// recompute every communication start before testing the next layer.
/// O(L^2).
///
/// The decision at each layer is locally optimal given the layers above,
/// but local decisions interact: a merge can flip the condition at the next
/// layer and end up re-paying the startup it saved. `optimal_plan` is the
/// exact minimizer; this procedure matches it on most instances but not all
/// (see the frozen counterexample in the test suite).
inline MergePlan greedy_plan(const ModelTrace& trace, const AllReduceModel& model) {
  detail::require_planner_model(model);
  const std::vector<double> tau_b = backward_starts(trace);
  const std::size_t n = trace.n_layers();
  std::vector<double> t_b(n);
  std::vector<double> bytes(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_b[i] = trace.layers[i].backward_time;
    bytes[i] = layer_bytes(trace, i);
  }
  std::vector<double> t_c(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_c[i] = allreduce_cost(model, bytes[i]);
  }

  const auto comm_start_times = [&]() {
    std::vector<double> tau_c(n);
    tau_c[n - 1] = tau_b[n - 1] + t_b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      tau_c[i] = std::max(tau_c[i + 1] + t_c[i + 1], tau_b[i] + t_b[i]);
    }
    return tau_c;
  };

  MergePlan plan = MergePlan::all_normal(n);
  std::vector<double> tau_c = comm_start_times();
  for (std::size_t i = n - 1; i >= 1; --i) {
    if (tau_b[i - 1] + t_b[i - 1] - tau_c[i] < model.a) {
      t_c[i] = 0.0;
      bytes[i - 1] += bytes[i];
      t_c[i - 1] = allreduce_cost(model, bytes[i - 1]);
      tau_c = comm_start_times();
      plan.tags[i] = LayerTag::kMerged;
    }
  }
  return plan;
}

struct PlanSearchResult {
  MergePlan plan;
  double iteration_time = 0.0;
};

/// Exhaustive search over all 2^(L-1) plans, evaluating each through the
/// timeline engine. Ties prefer fewer merged layers, then the
/// lexicographically smaller tag vector (normal < merged). Refuses traces
/// longer than `max_layers`.
inline PlanSearchResult brute_force_plan(const ModelTrace& trace,
                                         const AllReduceModel& model,
                                         std::size_t max_layers = 20) {
  detail::require_planner_model(model);
  trace.validate();
  const std::size_t n = trace.n_layers();
  if (n > max_layers) {
    throw GuardError("brute_force_plan: " + std::to_string(n) +
                     " layers would enumerate 2^" + std::to_string(n - 1) +
                     " plans (limit is " + std::to_string(max_layers) +
                     " layers)");
  }
  PlanSearchResult best;
  std::size_t best_merged = 0;
  const std::uint64_t plan_count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 0; mask < plan_count; ++mask) {
    MergePlan plan = MergePlan::all_normal(n);
    for (std::size_t bit = 0; bit + 1 < n; ++bit) {
      if ((mask >> bit) & 1u) plan.tags[bit + 1] = LayerTag::kMerged;
    }
    const double time = iteration_time(trace, plan, model).iteration_time;
    const std::size_t merged = plan.merged_count();
    bool take = best.plan.tags.empty();
    if (!take && time < best.iteration_time) take = true;
    if (!take && time == best.iteration_time) {
      if (merged < best_merged) {
        take = true;
      } else if (merged == best_merged &&
                 std::lexicographical_compare(plan.tags.begin(), plan.tags.end(),
                                              best.plan.tags.begin(),
                                              best.plan.tags.end())) {
        take = true;
      }
    }
    if (take) {
      best.plan = std::move(plan);
      best.iteration_time = time;
      best_merged = merged;
    }
  }
  return best;
}

/// How layer `index`'s communication relates to the computation of the
/// layer below it, on an all-normal timeline.
enum class OverlapCase {
  kFullyHidden,       // communication ends before the lower layer's gradients
  kPartialMergeHelps,  // partial overlap; merging saves more than it waits
  kPartialMergeHurts,  // partial overlap; merging waits more than it saves
  kNotOverlapped,      // communication cannot start before the lower layer ends
};

/// Classifies layer `index` (0-based, >= 1) against layer index-1 on an
/// all-normal timeline. Merging layer `index` reduces the iteration's
/// communication tail exactly in the kPartialMergeHelps and kNotOverlapped
/// cases (the merge condition in greedy_plan fires on those two).
inline OverlapCase case_classify(const Timeline& timeline, std::size_t index,
                                 double startup) {
  if (index == 0) {
    throw ValidationError("case_classify: the first layer has no layer below it");
  }
  if (index >= timeline.tau_c.size()) {
    throw ValidationError("case_classify: layer index out of range");
  }
  if (timeline.tags[index] != LayerTag::kNormal) {
    throw ValidationError("case_classify: expects an all-normal timeline");
  }
  const double comm_start = timeline.tau_c[index];
  const double comm_end = comm_start + timeline.t_c[index];
  const double below_done = timeline.tau_b[index - 1] + timeline.t_b[index - 1];
  if (comm_end <= below_done) return OverlapCase::kFullyHidden;
  if (comm_start >= below_done) return OverlapCase::kNotOverlapped;
  return below_done - comm_start < startup ? OverlapCase::kPartialMergeHelps
                                           : OverlapCase::kPartialMergeHurts;
}

/// Plan export: tags, communication groups (1-based layer indices, heads
/// first), and the engine-predicted iteration time in microseconds.
inline nlohmann::json plan_to_json(const ModelTrace& trace, const MergePlan& plan,
                                   const AllReduceModel& model) {
  const Timeline timeline = iteration_time(trace, plan, model);
  const CommGroups groups = apply_merge(trace, plan);
  nlohmann::json doc;
  doc["tags"] = nlohmann::json::array();
  for (const LayerTag tag : plan.tags) {
    doc["tags"].push_back(tag == LayerTag::kNormal ? "normal" : "merged");
  }
  doc["groups"] = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.tags.size(); ++i) {
    if (groups.head[i] != i) continue;
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t j = i; j < plan.tags.size() && groups.head[j] == i; ++j) {
      members.push_back(j + 1);
    }
    doc["groups"].push_back(std::move(members));
  }
  doc["predicted_iter_time_us"] = timeline.iteration_time * 1e6;
  return doc;
}

}  // namespace gradsched

#endif  // GRADSCHED_PLANNER_HPP_
