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

#ifndef GRADSCHED_TIMELINE_HPP_
#define GRADSCHED_TIMELINE_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradsched/comm_model.hpp"
#include "gradsched/errors.hpp"
#include "gradsched/trace.hpp"

namespace gradsched {

enum class LayerTag { kNormal, kMerged };

/// Per-layer merge decision, indexed like ModelTrace::layers (forward
/// order). A merged layer's gradients fold into the next lower layer and it
/// communicates nothing itself; the first layer has no lower layer, so its
/// tag is always Normal.
struct MergePlan {
  std::vector<LayerTag> tags;

  static MergePlan all_normal(std::size_t n_layers) {
    return MergePlan{std::vector<LayerTag>(n_layers, LayerTag::kNormal)};
  }

  /// Every layer except the first merged: single all-reduce at layer 1.
  static MergePlan all_merged(std::size_t n_layers) {
    MergePlan plan{std::vector<LayerTag>(n_layers, LayerTag::kMerged)};
    if (!plan.tags.empty()) plan.tags[0] = LayerTag::kNormal;
    return plan;
  }

  std::size_t merged_count() const {
    return static_cast<std::size_t>(
        std::count(tags.begin(), tags.end(), LayerTag::kMerged));
  }

  void validate_for(std::size_t n_layers) const {
    if (tags.size() != n_layers) {
      throw ValidationError("MergePlan: plan has " + std::to_string(tags.size()) +
                            " tags for a trace of " + std::to_string(n_layers) +
                            " layers");
    }
    if (!tags.empty() && tags[0] != LayerTag::kNormal) {
      throw ValidationError("MergePlan: the first layer cannot be merged");
    }
  }
};

/// Result of folding merged layers into their group heads. `head[i]` is the
/// index of the normal layer whose all-reduce carries layer i's gradients;
/// `bytes[i]` is the folded message size at head i (zero for non-heads).
struct CommGroups {
  std::vector<std::size_t> head;
  std::vector<double> bytes;
};

/// Per-layer communication schedule: start timestamps and durations.
struct CommSchedule {
  std::vector<double> tau_c;
  std::vector<double> t_c;
};

/// Full schedule of one iteration: per-layer backward start/duration and
/// communication start/duration (merged layers carry a bookkeeping tau_c
/// and zero duration), plus the derived totals.
struct Timeline {
  std::vector<double> tau_b;
  std::vector<double> t_b;
  std::vector<double> tau_c;
  std::vector<double> t_c;
  std::vector<LayerTag> tags;
  double forward_time = 0.0;
  double iteration_time = 0.0;
  double comm_nonoverlap = 0.0;
};

/// Backward computation start per layer: the last layer starts when the
/// forward pass ends, each lower layer when the one above it finishes.
inline std::vector<double> backward_starts(const ModelTrace& trace) {
  trace.validate();
  const std::size_t n = trace.n_layers();
  std::vector<double> tau_b(n);
  tau_b[n - 1] = trace.forward_time;
  for (std::size_t i = n - 1; i-- > 0;) {
    tau_b[i] = tau_b[i + 1] + trace.layers[i + 1].backward_time;
  }
  return tau_b;
}

/// Folds each chain of consecutive merged layers into the nearest lower
/// normal layer. Group bytes accumulate in ascending layer order, which
/// makes an all-merged plan's single group reproduce total_bytes() exactly.
inline CommGroups apply_merge(const ModelTrace& trace, const MergePlan& plan) {
  plan.validate_for(trace.n_layers());
  const std::size_t n = trace.n_layers();
  CommGroups groups;
  groups.head.resize(n);
  groups.bytes.assign(n, 0.0);
  std::size_t current_head = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (plan.tags[i] == LayerTag::kNormal) current_head = i;
    groups.head[i] = current_head;
    groups.bytes[current_head] += layer_bytes(trace, i);
  }
  return groups;
}

/// Communication start times under serialized all-reduces in backward
/// order: a group head may start once its own gradients are ready and the
/// previous (higher) communication has finished. Merged layers keep the
/// bookkeeping timestamp max(previous finish, own gradients ready) with
/// zero duration, so the recursion carries the constraint down to the head.
inline CommSchedule comm_starts(const CommGroups& groups,
                                std::span<const double> tau_b,
                                std::span<const double> t_b,
                                const AllReduceModel& model) {
  const std::size_t n = groups.head.size();
  if (tau_b.size() != n || t_b.size() != n) {
    throw ValidationError("comm_starts: array sizes disagree");
  }
  CommSchedule sched;
  sched.t_c.resize(n);
  sched.tau_c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sched.t_c[i] =
        groups.head[i] == i ? allreduce_cost(model, groups.bytes[i]) : 0.0;
  }
  sched.tau_c[n - 1] = tau_b[n - 1] + t_b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    sched.tau_c[i] =
        std::max(sched.tau_c[i + 1] + sched.t_c[i + 1], tau_b[i] + t_b[i]);
  }
  return sched;
}

/// Evaluates the full pipelined timeline of one iteration under `plan`.
/// The iteration ends when the first layer's group finishes communicating.
inline Timeline iteration_time(const ModelTrace& trace, const MergePlan& plan,
                               const AllReduceModel& model) {
  Timeline timeline;
  timeline.forward_time = trace.forward_time;
  timeline.tau_b = backward_starts(trace);
  timeline.t_b.resize(trace.n_layers());
  for (std::size_t i = 0; i < trace.n_layers(); ++i) {
    timeline.t_b[i] = trace.layers[i].backward_time;
  }
  const CommGroups groups = apply_merge(trace, plan);
  CommSchedule sched = comm_starts(groups, timeline.tau_b, timeline.t_b, model);
  timeline.tau_c = std::move(sched.tau_c);
  timeline.t_c = std::move(sched.t_c);
  timeline.tags = plan.tags;
  timeline.iteration_time = timeline.tau_c[0] + timeline.t_c[0];
  // tau_c[0] >= compute_time(trace) holds bitwise, so this never dips
  // below zero even on a free network.
  timeline.comm_nonoverlap = timeline.iteration_time - compute_time(trace);
  return timeline;
}

/// Layer-wise communication with no overlap: every all-reduce waits for the
/// full backward pass, then runs serialized in backward order.
inline Timeline naive_timeline(const ModelTrace& trace, const AllReduceModel& model) {
  Timeline timeline;
  timeline.forward_time = trace.forward_time;
  timeline.tau_b = backward_starts(trace);
  const std::size_t n = trace.n_layers();
  timeline.t_b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    timeline.t_b[i] = trace.layers[i].backward_time;
  }
  timeline.tags.assign(n, LayerTag::kNormal);
  timeline.tau_c.resize(n);
  timeline.t_c.resize(n);
  double cursor = compute_time(trace);
  for (std::size_t i = n; i-- > 0;) {
    timeline.tau_c[i] = cursor;
    timeline.t_c[i] = allreduce_cost(model, layer_bytes(trace, i));
    cursor += timeline.t_c[i];
  }
  timeline.iteration_time = timeline.tau_c[0] + timeline.t_c[0];
  timeline.comm_nonoverlap = timeline.iteration_time - compute_time(trace);
  return timeline;
}

/// Iteration time of fully sequential S-SGD:
/// t_f + sum(t_b) + sum over layers of (a + b * layer bytes).
inline double naive_time(const ModelTrace& trace, const AllReduceModel& model) {
  trace.validate();
  double t = compute_time(trace);
  for (std::size_t i = trace.n_layers(); i-- > 0;) {
    t += allreduce_cost(model, layer_bytes(trace, i));
  }
  return t;
}

/// Iteration time of single-tensor communication: the whole gradient is
/// all-reduced once after the full backward pass. Identical (bitwise) to
/// iteration_time under the all-merged plan.
inline double synceasgd_time(const ModelTrace& trace, const AllReduceModel& model) {
  trace.validate();
  return compute_time(trace) + allreduce_cost(model, total_bytes(trace));
}

/// Speedup over single-worker training: N / (1 + r) with
/// r = non-overlapped communication / compute time.
inline double speedup(int n_workers, double forward_time, double backward_time,
                      double comm_nonoverlap) {
  const double compute = forward_time + backward_time;
  if (!(compute > 0.0)) {
    throw ValidationError("speedup: forward + backward time must be > 0");
  }
  const double r = comm_nonoverlap / compute;
  return static_cast<double>(n_workers) / (1.0 + r);
}

/// Per-layer schedule export for plotting; times in microseconds, layers
/// numbered from 1.
inline nlohmann::json timeline_to_json(const Timeline& timeline) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < timeline.tau_b.size(); ++i) {
    nlohmann::json row;
    row["layer"] = i + 1;
    row["tau_b_us"] = timeline.tau_b[i] * 1e6;
    row["t_b_us"] = timeline.t_b[i] * 1e6;
    row["tau_c_us"] = timeline.tau_c[i] * 1e6;
    row["t_c_us"] = timeline.t_c[i] * 1e6;
    row["merged"] = timeline.tags[i] == LayerTag::kMerged;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gradsched

#endif  // GRADSCHED_TIMELINE_HPP_
