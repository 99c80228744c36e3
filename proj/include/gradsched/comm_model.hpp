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

#ifndef GRADSCHED_COMM_MODEL_HPP_
#define GRADSCHED_COMM_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "gradsched/errors.hpp"

namespace gradsched {

/// Linear all-reduce cost model: T(M) = a + b*M for a message of M bytes.
/// `a` is the size-independent startup time in seconds, `b` the per-byte
/// time in seconds/byte.
struct AllReduceModel {
  double a = 0.0;
  double b = 0.0;

  void validate() const {
    if (!(a > 0.0)) {
      throw ValidationError("AllReduceModel: startup a must be > 0, got " +
                            std::to_string(a));
    }
    if (!(b >= 0.0)) {
      throw ValidationError("AllReduceModel: per-byte b must be >= 0, got " +
                            std::to_string(b));
    }
  }
};

/// Point-to-point network parameters used to instantiate closed-form
/// all-reduce costs: alpha is the per-message latency (s), beta the
/// transmission time per byte (s/B), gamma the local reduction time per
/// byte (s/B), n_workers the cluster size.
struct NetworkParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int n_workers = 0;

  void validate() const {
    if (!(alpha > 0.0)) {
      throw ValidationError("NetworkParams: alpha must be > 0");
    }
    if (!(beta >= 0.0)) {
      throw ValidationError("NetworkParams: beta must be >= 0");
    }
    if (!(gamma >= 0.0)) {
      throw ValidationError("NetworkParams: gamma must be >= 0");
    }
    if (n_workers < 2) {
      throw ValidationError("NetworkParams: n_workers must be >= 2, got " +
                            std::to_string(n_workers));
    }
  }
};

enum class AllReduceAlgorithm {
  kBinaryTree,
  kRecursiveDoubling,
  kRecursiveHalvingDoubling,
  kDoubleBinaryTrees,
  kRing,
};

/// The double-binary-trees startup row is published as 2*log2(N), which is a
/// pure count rather than a time; the corrected form multiplies by alpha.
enum class DbtStartup {
  kAlphaCorrected,  // a = 2 * alpha * log2(N)
  kLiteral,         // a = 2 * log2(N), as published
};

inline const char* to_string(AllReduceAlgorithm algo) {
  switch (algo) {
    case AllReduceAlgorithm::kBinaryTree:
      return "binary_tree";
    case AllReduceAlgorithm::kRecursiveDoubling:
      return "recursive_doubling";
    case AllReduceAlgorithm::kRecursiveHalvingDoubling:
      return "recursive_halving_doubling";
    case AllReduceAlgorithm::kDoubleBinaryTrees:
      return "double_binary_trees";
    case AllReduceAlgorithm::kRing:
      return "ring";
  }
  return "unknown";
}

inline AllReduceAlgorithm algorithm_from_string(const std::string& name) {
  if (name == "binary_tree") return AllReduceAlgorithm::kBinaryTree;
  if (name == "recursive_doubling") return AllReduceAlgorithm::kRecursiveDoubling;
  if (name == "recursive_halving_doubling") {
    return AllReduceAlgorithm::kRecursiveHalvingDoubling;
  }
  if (name == "double_binary_trees") return AllReduceAlgorithm::kDoubleBinaryTrees;
  if (name == "ring") return AllReduceAlgorithm::kRing;
  throw ValidationError("unknown all-reduce algorithm: '" + name +
                        "' (expected one of binary_tree, recursive_doubling, "
                        "recursive_halving_doubling, double_binary_trees, ring)");
}

/// One timed all-reduce sample: message size in bytes, elapsed seconds.
struct CommMeasurement {
  std::uint64_t size_bytes = 0;
  double time_sec = 0.0;

  void validate() const {
    if (!(time_sec > 0.0)) {
      throw ValidationError("CommMeasurement: time_sec must be > 0");
    }
  }
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Evaluates the closed-form (a, b) pair of a given all-reduce algorithm.
///
/// log2(N) is evaluated as a real for any N >= 2; the tree/recursive rows
/// assume power-of-two N, so a warning is appended (never an error) when N
/// is not one. For kDoubleBinaryTrees the chosen startup form is always
/// reported as a warning so downstream metadata records which was used.
inline AllReduceModel coefficients_for(
    AllReduceAlgorithm algo, const NetworkParams& net,
    DbtStartup dbt_mode = DbtStartup::kAlphaCorrected,
    std::vector<std::string>* warnings = nullptr) {
  net.validate();
  const double n = static_cast<double>(net.n_workers);
  const double log_n = std::log2(n);
  const auto warn = [&](const std::string& msg) {
    if (warnings != nullptr) warnings->push_back(msg);
  };

  const bool pow2 = is_power_of_two(net.n_workers);
  AllReduceModel model;
  switch (algo) {
    case AllReduceAlgorithm::kBinaryTree:
      model.a = 2.0 * net.alpha * log_n;
      model.b = (2.0 * net.beta + net.gamma) * log_n;
      break;
    case AllReduceAlgorithm::kRecursiveDoubling:
      model.a = net.alpha * log_n;
      model.b = (net.beta + net.gamma) * log_n;
      break;
    case AllReduceAlgorithm::kRecursiveHalvingDoubling:
      model.a = 2.0 * net.alpha * log_n;
      model.b = 2.0 * net.beta - (2.0 * net.beta + net.gamma) / n + net.gamma;
      break;
    case AllReduceAlgorithm::kDoubleBinaryTrees:
      if (dbt_mode == DbtStartup::kAlphaCorrected) {
        model.a = 2.0 * net.alpha * log_n;
        warn("double_binary_trees: using alpha-corrected startup "
             "2*alpha*log2(N); pass the literal mode for 2*log2(N)");
      } else {
        model.a = 2.0 * log_n;
        warn("double_binary_trees: using literal startup 2*log2(N), "
             "which carries no latency unit");
      }
      model.b = net.beta + net.gamma;
      break;
    case AllReduceAlgorithm::kRing:
      model.a = 2.0 * (n - 1.0) * net.alpha;
      model.b = 2.0 * (n - 1.0) / n * net.beta + (n - 1.0) / n * net.gamma;
      break;
  }
  if (!pow2 && algo != AllReduceAlgorithm::kRing) {
    std::ostringstream oss;
    oss << to_string(algo) << ": n_workers=" << net.n_workers
        << " is not a power of two; cost evaluated with log2(N)=" << log_n;
    warn(oss.str());
  }
  model.validate();
  return model;
}

/// T(M) = a + b*M.
inline double allreduce_cost(const AllReduceModel& model, double size_bytes) {
  if (!(size_bytes >= 0.0)) {
    throw ValidationError("allreduce_cost: size_bytes must be >= 0");
  }
  return model.a + model.b * size_bytes;
}

/// Fits the linear model to measured (size, time) samples.
///
/// Least squares with inverse-square weights (1/time^2), i.e. relative
/// residuals are weighted equally across the size range. Measurement noise
/// on collectives is multiplicative, and the samples span several decades;
/// unweighted residuals would let the largest messages drown out the
/// startup term entirely. On noiseless linear data the fit is exact
/// regardless of weighting.
inline AllReduceModel fit_model(const std::vector<CommMeasurement>& samples) {
  if (samples.size() < 2) {
    throw FitError("fit_model: need at least 2 measurements, got " +
                   std::to_string(samples.size()));
  }
  bool distinct = false;
  for (const auto& s : samples) {
    s.validate();
    if (s.size_bytes != samples.front().size_bytes) distinct = true;
  }
  if (!distinct) {
    throw FitError("fit_model: need at least 2 distinct message sizes");
  }

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& s : samples) {
    const double w = 1.0 / (s.time_sec * s.time_sec);
    sw += w;
    sx += w * static_cast<double>(s.size_bytes);
    sy += w * s.time_sec;
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double w = 1.0 / (s.time_sec * s.time_sec);
    const double dx = static_cast<double>(s.size_bytes) - xbar;
    sxx += w * dx * dx;
    sxy += w * dx * (s.time_sec - ybar);
  }
  AllReduceModel model;
  model.b = sxy / sxx;
  model.a = ybar - model.b * xbar;
  if (!(model.a > 0.0)) {
    throw FitError("fit_model: fitted startup a=" + std::to_string(model.a) +
                   " is not > 0; data is inconsistent with the cost model");
  }
  if (!(model.b >= 0.0)) {
    throw FitError("fit_model: fitted per-byte b=" + std::to_string(model.b) +
                   " is negative; data is inconsistent with the cost model");
  }
  return model;
}

/// Reads measurements from CSV with header `size_bytes,time_us`.
/// Times are microseconds in the file and converted to seconds.
inline std::vector<CommMeasurement> load_measurements_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("measurement CSV: empty input");
  }
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "size_bytes,time_us") {
    throw ParseError("measurement CSV: expected header 'size_bytes,time_us', got '" +
                     strip(line) + "'");
  }
  std::vector<CommMeasurement> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("measurement CSV line " + std::to_string(lineno) +
                       ": expected 'size_bytes,time_us'");
    }
    CommMeasurement m;
    try {
      std::size_t used = 0;
      const long long size = std::stoll(line.substr(0, comma), &used);
      if (used != comma || size < 0) throw std::invalid_argument("size");
      m.size_bytes = static_cast<std::uint64_t>(size);
      const std::string time_str = line.substr(comma + 1);
      const double time_us = std::stod(time_str, &used);
      if (used != time_str.size()) throw std::invalid_argument("time");
      m.time_sec = time_us / 1e6;
    } catch (const std::exception&) {
      throw ParseError("measurement CSV line " + std::to_string(lineno) +
                       ": malformed row '" + line + "'");
    }
    if (!(m.time_sec > 0.0)) {
      throw ParseError("measurement CSV line " + std::to_string(lineno) +
                       ": time_us must be > 0");
    }
    samples.push_back(m);
  }
  return samples;
}

inline std::vector<CommMeasurement> load_measurements_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open measurement CSV: " + path);
  }
  return load_measurements_csv(in);
}

}  // namespace gradsched

#endif  // GRADSCHED_COMM_MODEL_HPP_
