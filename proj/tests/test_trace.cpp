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

#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "gradsched/trace.hpp"
#include "oracles.hpp"

using gradsched::layer_bytes;
using gradsched::load_trace;
using gradsched::ModelTrace;
using gradsched::save_trace;
using gradsched::synth_trace;
using gradsched::SynthSpec;

namespace {

constexpr const char* kThreeLayerJson = R"({
  "forward_time_us": 1000.0,
  "bytes_per_element": 4,
  "layers": [
    {"name": "conv1", "params": 1000, "backward_time_us": 500.0},
    {"name": "conv2", "params": 0, "backward_time_us": 200.0},
    {"name": "fc", "params": 250000, "backward_time_us": 800.0}
  ]
})";

}  // namespace

TEST_CASE("load_trace: valid three-layer file") {
  std::istringstream in(kThreeLayerJson);
  const ModelTrace trace = load_trace(in);
  REQUIRE(trace.n_layers() == 3);
  REQUIRE(trace.forward_time == Catch::Approx(1e-3).epsilon(1e-12));
  REQUIRE(trace.layers[0].name == "conv1");
  REQUIRE(trace.layers[0].params == 1000);
  REQUIRE(trace.layers[2].backward_time == Catch::Approx(8e-4).epsilon(1e-12));
  REQUIRE(trace.bytes_per_element == 4);
}

TEST_CASE("load_trace: error paths") {
  SECTION("negative backward time is a validation error naming the layer") {
    std::istringstream in(R"({"forward_time_us": 0, "layers": [
      {"name": "a", "params": 10, "backward_time_us": -1}]})");
    try {
      load_trace(in);
      FAIL("expected ValidationError");
    } catch (const gradsched::ValidationError& e) {
      REQUIRE(std::string(e.what()).find("layer 1") != std::string::npos);
      REQUIRE(std::string(e.what()).find("backward_time_us") != std::string::npos);
    }
  }
  SECTION("missing params is a parse error naming field and layer") {
    std::istringstream in(R"({"forward_time_us": 0, "layers": [
      {"name": "a", "backward_time_us": 3}]})");
    try {
      load_trace(in);
      FAIL("expected ParseError");
    } catch (const gradsched::ParseError& e) {
      REQUIRE(std::string(e.what()).find("params") != std::string::npos);
      REQUIRE(std::string(e.what()).find("layer 1") != std::string::npos);
    }
  }
  SECTION("missing bytes_per_element defaults to 4 with a warning") {
    std::istringstream in(R"({"forward_time_us": 0, "layers": [
      {"name": "a", "params": 10, "backward_time_us": 3}]})");
    std::vector<std::string> warnings;
    const ModelTrace trace = load_trace(in, &warnings);
    REQUIRE(trace.bytes_per_element == 4);
    REQUIRE(warnings.size() == 1);
    REQUIRE(warnings[0].find("bytes_per_element") != std::string::npos);
  }
  SECTION("bytes_per_element outside {2,4}") {
    std::istringstream in(R"({"forward_time_us": 0, "bytes_per_element": 3,
      "layers": [{"name": "a", "params": 10, "backward_time_us": 3}]})");
    REQUIRE_THROWS_AS(load_trace(in), gradsched::ValidationError);
  }
  SECTION("empty layer list") {
    std::istringstream in(R"({"forward_time_us": 0, "layers": []})");
    REQUIRE_THROWS_AS(load_trace(in), gradsched::ValidationError);
  }
  SECTION("all layers zero parameters") {
    std::istringstream in(R"({"forward_time_us": 0, "layers": [
      {"name": "a", "params": 0, "backward_time_us": 3}]})");
    REQUIRE_THROWS_AS(load_trace(in), gradsched::ValidationError);
  }
  SECTION("negative forward time") {
    std::istringstream in(R"({"forward_time_us": -10, "layers": [
      {"name": "a", "params": 10, "backward_time_us": 3}]})");
    REQUIRE_THROWS_AS(load_trace(in), gradsched::ValidationError);
  }
  SECTION("not JSON at all") {
    std::istringstream in("definitely, not json");
    REQUIRE_THROWS_AS(load_trace(in), gradsched::ParseError);
  }
}

TEST_CASE("layer_bytes") {
  ModelTrace trace;
  trace.forward_time = 0.0;
  trace.layers = {{"fc", 25500000, 1e-3}, {"none", 0, 1e-3}, {"small", 1000, 1e-3}};
  SECTION("single precision ResNet-50-sized model is 102 MB") {
    REQUIRE(layer_bytes(trace, 0) == Catch::Approx(1.02e8).epsilon(1e-12));
  }
  SECTION("zero parameters, zero bytes") {
    REQUIRE(layer_bytes(trace, 1) == 0.0);
  }
  SECTION("half precision halves the bytes") {
    trace.bytes_per_element = 2;
    REQUIRE(layer_bytes(trace, 2) == 2000.0);
  }
  SECTION("out of range") {
    REQUIRE_THROWS_AS(layer_bytes(trace, 3), gradsched::ValidationError);
  }
}

TEST_CASE("trace round-trip is byte-identical on canonical files") {
  oracle::Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    SynthSpec spec;
    spec.n_layers = 1 + rng.below(40);
    spec.total_params = 1 + rng.below(10000000);
    spec.total_backward_time = rng.log_uniform(1e-4, 1e-1);
    spec.forward_time = rng.log_uniform(1e-4, 1e-1);
    spec.size_skew = rng.uniform(0.0, 10.0);
    spec.seed = rng.eng();
    const ModelTrace trace = synth_trace(spec);

    std::ostringstream first;
    save_trace(trace, first);
    std::istringstream back(first.str());
    const ModelTrace reloaded = load_trace(back);
    std::ostringstream second;
    save_trace(reloaded, second);
    REQUIRE(first.str() == second.str());
  }
}

TEST_CASE("byte conservation: sum of layer bytes equals elements times params") {
  oracle::Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    SynthSpec spec;
    spec.n_layers = 1 + rng.below(64);
    spec.total_params = 1 + rng.below(50000000);
    spec.total_backward_time = 0.1;
    spec.size_skew = rng.uniform(0.0, 12.0);
    spec.bytes_per_element = rng.coin() ? 4 : 2;
    spec.seed = trial;
    const ModelTrace trace = synth_trace(spec);
    double total = 0.0;
    for (std::size_t i = 0; i < trace.n_layers(); ++i) {
      total += layer_bytes(trace, i);
    }
    REQUIRE(total == static_cast<double>(trace.total_params()) *
                         trace.bytes_per_element);
    REQUIRE(trace.total_params() == spec.total_params);
  }
}

TEST_CASE("synth_trace") {
  SECTION("ResNet-50-shaped spec conserves totals") {
    SynthSpec spec;
    spec.n_layers = 161;
    spec.total_params = 25500000;
    spec.total_backward_time = 0.25;
    spec.forward_time = 0.125;
    spec.size_skew = 8.0;
    spec.seed = 7;
    const ModelTrace trace = synth_trace(spec);
    REQUIRE(trace.n_layers() == 161);
    REQUIRE(trace.total_params() == 25500000);
    double t_b = 0.0;
    for (const auto& layer : trace.layers) t_b += layer.backward_time;
    REQUIRE(t_b == Catch::Approx(0.25).epsilon(1e-9));
    // skewed size distribution: more than half the layers sit below the mean
    const double mean =
        static_cast<double>(trace.total_params()) / trace.n_layers();
    std::size_t below = 0;
    for (const auto& layer : trace.layers) {
      if (static_cast<double>(layer.params) < mean) ++below;
    }
    REQUIRE(below > trace.n_layers() / 2);
  }
  SECTION("single layer holds everything") {
    SynthSpec spec;
    spec.n_layers = 1;
    spec.total_params = 12345;
    spec.total_backward_time = 0.5;
    spec.seed = 3;
    const ModelTrace trace = synth_trace(spec);
    REQUIRE(trace.n_layers() == 1);
    REQUIRE(trace.layers[0].params == 12345);
    REQUIRE(trace.layers[0].backward_time == Catch::Approx(0.5));
  }
  SECTION("same seed, same trace") {
    SynthSpec spec;
    spec.n_layers = 33;
    spec.total_params = 999999;
    spec.total_backward_time = 0.05;
    spec.size_skew = 5.0;
    spec.seed = 42;
    const ModelTrace one = synth_trace(spec);
    const ModelTrace two = synth_trace(spec);
    std::ostringstream a, b;
    save_trace(one, a);
    save_trace(two, b);
    REQUIRE(a.str() == b.str());
  }
  SECTION("invalid specs") {
    SynthSpec spec;
    spec.n_layers = 0;
    spec.total_params = 10;
    spec.total_backward_time = 1.0;
    REQUIRE_THROWS_AS(synth_trace(spec), gradsched::ValidationError);
    spec.n_layers = 3;
    spec.total_params = 0;
    REQUIRE_THROWS_AS(synth_trace(spec), gradsched::ValidationError);
    spec.total_params = 10;
    spec.total_backward_time = 0.0;
    REQUIRE_THROWS_AS(synth_trace(spec), gradsched::ValidationError);
  }
}
