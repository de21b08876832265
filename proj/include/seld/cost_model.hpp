// Copyright 2026 The seld-rt Authors.
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

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "seld/errors.hpp"

namespace seld {

/// Analytic parameter/multiply-accumulate accounting for common layer types.
///
/// Convolutions operate on (channels, height, width) activations; recurrent
/// and linear layers operate on (time, features). When a recurrent or linear
/// layer follows a convolutional shape, the activation is flattened to
/// time = height and features = channels * width.

struct Conv2d {
  int in_channels = 0, out_channels = 0;
  int kernel_h = 3, kernel_w = 3;
  int stride_h = 1, stride_w = 1;
  bool same_padding = true;
  bool bias = true;
};

struct DepthwiseSeparableConv2d {
  int in_channels = 0, out_channels = 0;
  int kernel_h = 3, kernel_w = 3;
  int stride_h = 1, stride_w = 1;
  bool same_padding = true;
  bool bias = true;
};

struct Pool2d {
  int kernel_h = 2, kernel_w = 2;
};

struct Gru {
  int hidden = 0;
  bool bias = true;
};

struct Lstm {
  int hidden = 0;
  bool bias = true;
};

struct Linear {
  int out_features = 0;
  bool bias = true;
};

using Layer = std::variant<Conv2d, DepthwiseSeparableConv2d, Pool2d, Gru, Lstm, Linear>;

struct LayerGraph {
  std::vector<Layer> layers;
};

/// Activation shape flowing through the graph: spatial (C, H, W) until a
/// recurrent/linear layer flattens it to sequential (T, F).
struct ActivationShape {
  bool sequential = false;
  std::int64_t channels = 0, height = 0, width = 0;  // when spatial
  std::int64_t time = 0, features = 0;               // when sequential

  static ActivationShape spatial(std::int64_t c, std::int64_t h, std::int64_t w) {
    return {false, c, h, w, 0, 0};
  }
  static ActivationShape seq(std::int64_t t, std::int64_t f) { return {true, 0, 0, 0, t, f}; }

  ActivationShape as_sequential() const {
    if (sequential) return *this;
    return seq(height, channels * width);
  }
};

struct LayerCost {
  std::string type;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
};

/// Parameter count and multiply-accumulate operations for one forward pass.
struct CostReport {
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::vector<LayerCost> per_layer;
};

namespace detail {

inline std::int64_t conv_out_dim(std::int64_t in, int kernel, int stride, bool same_padding,
                                 const char* what) {
  if (in <= 0) throw ShapeInconsistent(std::string(what) + ": non-positive input dimension");
  if (same_padding) return (in + stride - 1) / stride;
  if (in < kernel) throw ShapeInconsistent(std::string(what) + ": kernel larger than input");
  return (in - kernel) / stride + 1;
}

}  // namespace detail

inline CostReport count_cost(const LayerGraph& graph, ActivationShape shape) {
  CostReport report;
  for (const Layer& layer : graph.layers) {
    LayerCost cost;
    if (const auto* conv = std::get_if<Conv2d>(&layer)) {
      if (shape.sequential) throw ShapeInconsistent("conv2d after a sequential layer");
      if (shape.channels != conv->in_channels) {
        throw ShapeInconsistent("conv2d expects " + std::to_string(conv->in_channels) +
                                " channels, got " + std::to_string(shape.channels));
      }
      const std::int64_t out_h = detail::conv_out_dim(shape.height, conv->kernel_h,
                                                      conv->stride_h, conv->same_padding,
                                                      "conv2d");
      const std::int64_t out_w = detail::conv_out_dim(shape.width, conv->kernel_w,
                                                      conv->stride_w, conv->same_padding,
                                                      "conv2d");
      const std::uint64_t kernel = static_cast<std::uint64_t>(conv->in_channels) *
                                   conv->out_channels * conv->kernel_h * conv->kernel_w;
      cost.type = "conv2d";
      cost.params = kernel + (conv->bias ? static_cast<std::uint64_t>(conv->out_channels) : 0);
      cost.macs = kernel * static_cast<std::uint64_t>(out_h) * static_cast<std::uint64_t>(out_w);
      shape = ActivationShape::spatial(conv->out_channels, out_h, out_w);
    } else if (const auto* dsc = std::get_if<DepthwiseSeparableConv2d>(&layer)) {
      if (shape.sequential) throw ShapeInconsistent("ds_conv2d after a sequential layer");
      if (shape.channels != dsc->in_channels) {
        throw ShapeInconsistent("ds_conv2d expects " + std::to_string(dsc->in_channels) +
                                " channels, got " + std::to_string(shape.channels));
      }
      const std::int64_t out_h = detail::conv_out_dim(shape.height, dsc->kernel_h, dsc->stride_h,
                                                      dsc->same_padding, "ds_conv2d");
      const std::int64_t out_w = detail::conv_out_dim(shape.width, dsc->kernel_w, dsc->stride_w,
                                                      dsc->same_padding, "ds_conv2d");
      const std::uint64_t spatial =
          static_cast<std::uint64_t>(out_h) * static_cast<std::uint64_t>(out_w);
      const std::uint64_t depthwise_kernel =
          static_cast<std::uint64_t>(dsc->in_channels) * dsc->kernel_h * dsc->kernel_w;
      const std::uint64_t pointwise_kernel =
          static_cast<std::uint64_t>(dsc->in_channels) * dsc->out_channels;
      cost.type = "ds_conv2d";
      cost.params = depthwise_kernel + pointwise_kernel +
                    (dsc->bias ? static_cast<std::uint64_t>(dsc->in_channels + dsc->out_channels)
                               : 0);
      cost.macs = (depthwise_kernel + pointwise_kernel) * spatial;
      shape = ActivationShape::spatial(dsc->out_channels, out_h, out_w);
    } else if (const auto* pool = std::get_if<Pool2d>(&layer)) {
      if (shape.sequential) throw ShapeInconsistent("pool2d after a sequential layer");
      if (shape.height < pool->kernel_h || shape.width < pool->kernel_w) {
        throw ShapeInconsistent("pool2d kernel larger than input");
      }
      cost.type = "pool2d";
      shape = ActivationShape::spatial(shape.channels, shape.height / pool->kernel_h,
                                       shape.width / pool->kernel_w);
    } else if (const auto* gru = std::get_if<Gru>(&layer)) {
      shape = shape.as_sequential();
      const std::uint64_t h = static_cast<std::uint64_t>(gru->hidden);
      const std::uint64_t f = static_cast<std::uint64_t>(shape.features);
      if (h == 0 || f == 0) throw ShapeInconsistent("gru with empty dimensions");
      cost.type = "gru";
      cost.params = 3 * (f * h + h * h) + (gru->bias ? 6 * h : 0);
      cost.macs = static_cast<std::uint64_t>(shape.time) * 3 * h * (f + h);
      shape = ActivationShape::seq(shape.time, static_cast<std::int64_t>(h));
    } else if (const auto* lstm = std::get_if<Lstm>(&layer)) {
      shape = shape.as_sequential();
      const std::uint64_t h = static_cast<std::uint64_t>(lstm->hidden);
      const std::uint64_t f = static_cast<std::uint64_t>(shape.features);
      if (h == 0 || f == 0) throw ShapeInconsistent("lstm with empty dimensions");
      cost.type = "lstm";
      cost.params = 4 * (f * h + h * h) + (lstm->bias ? 8 * h : 0);
      cost.macs = static_cast<std::uint64_t>(shape.time) * 4 * h * (f + h);
      shape = ActivationShape::seq(shape.time, static_cast<std::int64_t>(h));
    } else if (const auto* linear = std::get_if<Linear>(&layer)) {
      shape = shape.as_sequential();
      const std::uint64_t f = static_cast<std::uint64_t>(shape.features);
      const std::uint64_t out = static_cast<std::uint64_t>(linear->out_features);
      if (f == 0 || out == 0) throw ShapeInconsistent("linear with empty dimensions");
      cost.type = "linear";
      cost.params = f * out + (linear->bias ? out : 0);
      cost.macs = static_cast<std::uint64_t>(shape.time) * f * out;
      shape = ActivationShape::seq(shape.time, static_cast<std::int64_t>(out));
    }
    report.params += cost.params;
    report.macs += cost.macs;
    report.per_layer.push_back(std::move(cost));
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON layer-graph description
// ---------------------------------------------------------------------------

inline LayerGraph layer_graph_from_json(const nlohmann::json& doc) {
  LayerGraph graph;
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ShapeInconsistent("layer graph JSON needs a 'layers' array");
  }
  for (const auto& item : doc["layers"]) {
    const std::string type = item.at("type").get<std::string>();
    auto kernel_of = [&](int& kh, int& kw) {
      if (item.contains("kernel")) {
        kh = item["kernel"].at(0).get<int>();
        kw = item["kernel"].at(1).get<int>();
      }
    };
    auto stride_of = [&](int& sh, int& sw) {
      if (item.contains("stride")) {
        sh = item["stride"].at(0).get<int>();
        sw = item["stride"].at(1).get<int>();
      }
    };
    if (type == "conv2d" || type == "ds_conv2d") {
      Conv2d base;
      base.in_channels = item.at("in_channels").get<int>();
      base.out_channels = item.at("out_channels").get<int>();
      kernel_of(base.kernel_h, base.kernel_w);
      stride_of(base.stride_h, base.stride_w);
      if (item.contains("padding")) base.same_padding = item["padding"] == "same";
      if (item.contains("bias")) base.bias = item["bias"].get<bool>();
      if (type == "conv2d") {
        graph.layers.push_back(base);
      } else {
        graph.layers.push_back(
            DepthwiseSeparableConv2d{base.in_channels, base.out_channels, base.kernel_h,
                                     base.kernel_w, base.stride_h, base.stride_w,
                                     base.same_padding, base.bias});
      }
    } else if (type == "pool2d") {
      Pool2d pool;
      kernel_of(pool.kernel_h, pool.kernel_w);
      graph.layers.push_back(pool);
    } else if (type == "gru" || type == "lstm") {
      const int hidden = item.at("hidden").get<int>();
      const bool bias = item.contains("bias") ? item["bias"].get<bool>() : true;
      if (type == "gru") graph.layers.push_back(Gru{hidden, bias});
      else graph.layers.push_back(Lstm{hidden, bias});
    } else if (type == "linear") {
      Linear linear;
      linear.out_features = item.at("out_features").get<int>();
      if (item.contains("bias")) linear.bias = item["bias"].get<bool>();
      graph.layers.push_back(linear);
    } else {
      throw ShapeInconsistent("unknown layer type '" + type + "'");
    }
  }
  return graph;
}

inline ActivationShape activation_shape_from_json(const nlohmann::json& doc) {
  return ActivationShape::spatial(doc.at("channels").get<std::int64_t>(),
                                  doc.at("time").get<std::int64_t>(),
                                  doc.at("freq").get<std::int64_t>());
}

inline nlohmann::json cost_report_to_json(const CostReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : report.per_layer) {
    layers.push_back({{"type", layer.type}, {"params", layer.params}, {"macs", layer.macs}});
  }
  return {{"params", report.params},
          {"macs", report.macs},
          {"params_millions", static_cast<double>(report.params) / 1e6},
          {"macs_giga", static_cast<double>(report.macs) / 1e9},
          {"per_layer", layers}};
}

}  // namespace seld
