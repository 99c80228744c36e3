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

#ifndef GRADSCHED_TRACE_HPP_
#define GRADSCHED_TRACE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradsched/errors.hpp"

namespace gradsched {

/// One learnable layer (or tensor): gradient element count and the time its
/// backward computation takes.
struct LayerProfile {
  std::string name;
  std::uint64_t params = 0;
  double backward_time = 0.0;  // seconds
};

/// Per-layer profile of one training iteration. Layers are stored in
/// forward order: index 0 is the first layer of the network, index L-1 the
/// last. The backward pass visits them in reverse.
struct ModelTrace {
  std::vector<LayerProfile> layers;
  double forward_time = 0.0;  // seconds
  int bytes_per_element = 4;  // 4 = fp32, 2 = fp16

  std::size_t n_layers() const { return layers.size(); }

  void validate() const {
    if (layers.empty()) {
      throw ValidationError("ModelTrace: must have at least one layer");
    }
    if (!(forward_time >= 0.0)) {
      throw ValidationError("ModelTrace: forward_time must be >= 0");
    }
    if (bytes_per_element != 2 && bytes_per_element != 4) {
      throw ValidationError("ModelTrace: bytes_per_element must be 2 or 4, got " +
                            std::to_string(bytes_per_element));
    }
    bool any_params = false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (!(layers[i].backward_time >= 0.0)) {
        throw ValidationError("ModelTrace: layer " + std::to_string(i + 1) +
                              " ('" + layers[i].name +
                              "') has negative backward_time");
      }
      if (layers[i].params > 0) any_params = true;
    }
    if (!any_params) {
      throw ValidationError("ModelTrace: at least one layer must have params > 0");
    }
  }

  std::uint64_t total_params() const {
    std::uint64_t total = 0;
    for (const auto& l : layers) total += l.params;
    return total;
  }

  // Summed in backward order (last layer first) so the result is
  // bitwise-identical to the timeline recursion's accumulated timestamps.
  double total_backward_time() const {
    double total = 0.0;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
      total += it->backward_time;
    }
    return total;
  }
};

/// End of the backward pass: forward time plus every backward duration,
/// accumulated in the exact order the timeline recursion uses, so the
/// timeline's "gradients of layer 1 ready" timestamp equals this bitwise.
inline double compute_time(const ModelTrace& trace) {
  double t = trace.forward_time;
  for (auto it = trace.layers.rbegin(); it != trace.layers.rend(); ++it) {
    t += it->backward_time;
  }
  return t;
}

/// Message size of layer `index` (0-based) in bytes: params * element size.
inline double layer_bytes(const ModelTrace& trace, std::size_t index) {
  if (index >= trace.layers.size()) {
    throw ValidationError("layer_bytes: index " + std::to_string(index) +
                          " out of range for " +
                          std::to_string(trace.layers.size()) + " layers");
  }
  return static_cast<double>(trace.layers[index].params) *
         static_cast<double>(trace.bytes_per_element);
}

/// Total gradient bytes, accumulated in ascending layer order (the same
/// order merge groups fold in, so an all-merged group reproduces this sum
/// bitwise).
inline double total_bytes(const ModelTrace& trace) {
  double total = 0.0;
  for (std::size_t i = 0; i < trace.layers.size(); ++i) {
    total += layer_bytes(trace, i);
  }
  return total;
}

namespace detail {

inline double json_number(const nlohmann::json& obj, const char* field,
                          const std::string& where) {
  if (!obj.contains(field)) {
    throw ParseError("trace: missing field '" + std::string(field) + "' " + where);
  }
  if (!obj[field].is_number()) {
    throw ParseError("trace: field '" + std::string(field) + "' " + where +
                     " must be a number");
  }
  return obj[field].get<double>();
}

}  // namespace detail

/// Parses and validates a trace file. Times in the file are microseconds
/// and are converted to seconds. `warnings` (optional) collects non-fatal
/// notes such as a defaulted bytes_per_element.
inline ModelTrace load_trace(std::istream& in,
                             std::vector<std::string>* warnings = nullptr) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trace: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("trace: top-level value must be an object");
  }

  ModelTrace trace;
  trace.forward_time = detail::json_number(doc, "forward_time_us", "at top level") / 1e6;

  if (doc.contains("bytes_per_element")) {
    if (!doc["bytes_per_element"].is_number_integer()) {
      throw ParseError("trace: field 'bytes_per_element' must be an integer");
    }
    trace.bytes_per_element = doc["bytes_per_element"].get<int>();
  } else {
    trace.bytes_per_element = 4;
    if (warnings != nullptr) {
      warnings->push_back("trace: bytes_per_element missing, defaulting to 4 "
                          "(single precision)");
    }
  }

  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError("trace: missing or non-array field 'layers'");
  }
  std::size_t index = 0;
  for (const auto& item : doc["layers"]) {
    ++index;
    const std::string where = "in layer " + std::to_string(index);
    if (!item.is_object()) {
      throw ParseError("trace: layer " + std::to_string(index) +
                       " must be an object");
    }
    LayerProfile layer;
    if (!item.contains("name") || !item["name"].is_string()) {
      throw ParseError("trace: missing or non-string field 'name' " + where);
    }
    layer.name = item["name"].get<std::string>();
    if (!item.contains("params") || !item["params"].is_number_integer()) {
      throw ParseError("trace: missing or non-integer field 'params' " + where);
    }
    const std::int64_t params = item["params"].get<std::int64_t>();
    if (params < 0) {
      throw ValidationError("trace: field 'params' " + where + " must be >= 0");
    }
    layer.params = static_cast<std::uint64_t>(params);
    const double backward_us = detail::json_number(item, "backward_time_us", where);
    if (backward_us < 0.0) {
      throw ValidationError("trace: field 'backward_time_us' " + where +
                            " must be >= 0");
    }
    layer.backward_time = backward_us / 1e6;
    trace.layers.push_back(std::move(layer));
  }
  trace.validate();
  return trace;
}

inline ModelTrace load_trace(const std::string& path,
                             std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open trace file: " + path);
  }
  return load_trace(in, warnings);
}

inline nlohmann::json trace_to_json(const ModelTrace& trace) {
  nlohmann::json doc;
  doc["forward_time_us"] = trace.forward_time * 1e6;
  doc["bytes_per_element"] = trace.bytes_per_element;
  doc["layers"] = nlohmann::json::array();
  for (const auto& layer : trace.layers) {
    nlohmann::json item;
    item["name"] = layer.name;
    item["params"] = layer.params;
    item["backward_time_us"] = layer.backward_time * 1e6;
    doc["layers"].push_back(std::move(item));
  }
  return doc;
}

/// Canonical serialization: alphabetical keys, two-space indent, trailing
/// newline. save(load(x)) is byte-stable.
inline void save_trace(const ModelTrace& trace, std::ostream& out) {
  out << trace_to_json(trace).dump(2) << '\n';
}

inline void save_trace(const ModelTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open trace file for writing: " + path);
  }
  save_trace(trace, out);
}

/// Parameters for the synthetic trace generator.
///
/// `size_skew` shapes the parameter distribution across layers: weights are
/// u^size_skew with u uniform in [0,1), so larger values concentrate the
/// parameters in a few layers and leave a long tail of small tensors, the
/// shape real DNNs exhibit. Backward time is spread with mild (at most 5x)
/// variation, independent of layer size.
struct SynthSpec {
  std::size_t n_layers = 0;
  std::uint64_t total_params = 0;
  double total_backward_time = 0.0;  // seconds
  double forward_time = 0.0;         // seconds
  double size_skew = 8.0;
  int bytes_per_element = 4;
  std::uint64_t seed = 0;
};

namespace detail {

// Uniform in [0, 1) from the top 53 bits; keeps the stream independent of
// any library distribution implementation.
inline double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic synthetic trace: same spec (including seed) yields an
/// identical trace. Total params are conserved exactly; total backward time
/// up to float rounding.
inline ModelTrace synth_trace(const SynthSpec& spec) {
  if (spec.n_layers == 0) {
    throw ValidationError("synth_trace: n_layers must be positive");
  }
  if (spec.total_params == 0) {
    throw ValidationError("synth_trace: total_params must be positive");
  }
  if (!(spec.total_backward_time > 0.0)) {
    throw ValidationError("synth_trace: total_backward_time must be positive");
  }
  if (!(spec.forward_time >= 0.0)) {
    throw ValidationError("synth_trace: forward_time must be >= 0");
  }
  if (!(spec.size_skew >= 0.0)) {
    throw ValidationError("synth_trace: size_skew must be >= 0");
  }

  const std::size_t n = spec.n_layers;
  std::mt19937_64 rng(spec.seed);
  std::vector<double> size_weight(n);
  std::vector<double> time_weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    size_weight[i] = std::pow(detail::next_uniform(rng), spec.size_skew);
  }
  for (std::size_t i = 0; i < n; ++i) {
    time_weight[i] = 0.25 + detail::next_uniform(rng);
  }
  double size_total = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  if (!(size_total > 0.0)) {
    size_weight[0] = 1.0;  // degenerate draw; park everything in layer 1
    size_total = 1.0;
  }
  const double time_total =
      std::accumulate(time_weight.begin(), time_weight.end(), 0.0);

  // Integer split of total_params proportional to the weights: floor each
  // share, then hand the remainder to the largest fractional parts.
  ModelTrace trace;
  trace.forward_time = spec.forward_time;
  trace.bytes_per_element = spec.bytes_per_element;
  std::vector<double> frac(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share =
        static_cast<double>(spec.total_params) * size_weight[i] / size_total;
    const double floored = std::floor(share);
    frac[i] = share - floored;
    LayerProfile layer;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "layer_%03zu", i + 1);
    layer.name = buf;
    layer.params = static_cast<std::uint64_t>(floored);
    layer.backward_time = spec.total_backward_time * time_weight[i] / time_total;
    assigned += layer.params;
    trace.layers.push_back(std::move(layer));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  std::uint64_t remainder = spec.total_params - assigned;
  for (std::size_t i = 0; remainder > 0; i = (i + 1) % n, --remainder) {
    trace.layers[order[i]].params += 1;
  }
  trace.validate();
  return trace;
}

}  // namespace gradsched

#endif  // GRADSCHED_TRACE_HPP_
