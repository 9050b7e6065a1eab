// Copyright 2026 The fusesc Authors.
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

#pragma once

// Joint full-batch training of the GCN stack, the fusion weights and the two
// self-expressive matrices with Adam.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adam.hpp"
#include "feature_io.hpp"
#include "gcn.hpp"
#include "knn_graph.hpp"
#include "self_expressive.hpp"

namespace fusesc {

enum class Mode { kFused, kContentOnly, kRawBaseline };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kFused: return "fused";
    case Mode::kContentOnly: return "content_only";
    case Mode::kRawBaseline: return "raw_baseline";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "fused") return Mode::kFused;
  if (s == "content_only") return Mode::kContentOnly;
  if (s == "raw_baseline") return Mode::kRawBaseline;
  throw Error("unknown mode '" + std::string(s) + "' (expected fused, content_only, raw_baseline)");
}

struct TrainConfig {
  Index k = 10;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lr = 1e-5;
  int epochs = 2000;
  std::uint64_t seed = 0;
  Index clusters = 0;
  Mode mode = Mode::kFused;
  bool zero_diagonal = false;
  Index hidden = 0;  // 0: min layer width
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  AdamConfig adam;

  void validate(Index n) const {
    if (!(lr > 0.0)) throw Error("lr must be > 0");
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (clusters < 2) throw Error("clusters must be >= 2");
    if (clusters > n) {
      throw Error("clusters must be <= n (" + std::to_string(clusters) + " > " +
                  std::to_string(n) + ")");
    }
    if (lambda1 < 0.0 || lambda2 < 0.0) throw Error("lambda1 and lambda2 must be >= 0");
    if (mode == Mode::kFused && (k < 1 || k >= n)) {
      throw Error("K must satisfy 1 <= K < n");
    }
    if (checkpoint_every < 0) throw Error("checkpoint interval must be >= 0");
  }
};

// Everything the loop needs that stays fixed across epochs.
struct TrainInputs {
  Matrix content;                  // d x n
  std::vector<Matrix> propagation;  // P_i, n x n
  std::vector<Matrix> propagated;   // P_i H_i, n x d_i
};

struct TrainResult {
  SelfExpressiveState state;
  StructureModel structure;  // empty unless mode is fused
  std::vector<LossBreakdown> trace;  // epochs + 1 rows; last row is after the final step
  Mode mode = Mode::kFused;

  Matrix fused() const { return mode == Mode::kFused ? state.fused() : state.c_a; }
};

inline TrainInputs prepare_inputs(const FeatureBundle& bundle, const TrainConfig& config) {
  validate_bundle(bundle);
  TrainInputs in;
  in.content = config.mode == Mode::kRawBaseline ? to_columns(bundle.layer_features.front())
                                                 : to_columns(bundle.content);
  if (config.mode == Mode::kFused) {
    for (const auto& layer : bundle.layer_features) {
      const Matrix h = to_rows(layer);
      auto graph = build_knn_graph(h, config.k);
      in.propagated.push_back(graph.norm_propagation * h);
      in.propagation.push_back(std::move(graph.norm_propagation));
    }
  }
  return in;
}

namespace detail {

inline void write_checkpoint(const TrainResult& r, int epoch, const std::filesystem::path& root) {
  const auto dir = root / ("checkpoint_" + std::to_string(epoch));
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["epoch"] = epoch;
  manifest["dtype"] = kBundleDtype;
  manifest["tensors"] = nlohmann::ordered_json::array();
  auto put = [&](const std::string& name, const Matrix& m) {
    write_f32_matrix(dir / (name + ".bin"), m.cast<float>());
    manifest["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  };
  put("c_a", r.state.c_a);
  if (r.mode == Mode::kFused) {
    put("c_s", r.state.c_s);
    for (std::size_t i = 0; i < r.structure.gcn.streams.size(); ++i) {
      put("gcn_" + std::to_string(i) + "_w1", r.structure.gcn.streams[i].w1);
      put("gcn_" + std::to_string(i) + "_w2", r.structure.gcn.streams[i].w2);
      put("fusion_" + std::to_string(i), r.structure.fusion.w[i]);
    }
  }
  std::ofstream(dir / "manifest.json", std::ios::trunc) << manifest.dump(2) << "\n";
}

}  // namespace detail

// Adam moments for every trainable tensor.
struct TrainOptimizer {
  AdamState c_a;
  AdamState c_s;
  std::vector<AdamState> w1;
  std::vector<AdamState> w2;
  std::vector<AdamState> fusion;
};

inline TrainResult init_training(const TrainInputs& in, const TrainConfig& config) {
  TrainResult r;
  r.mode = config.mode;
  const Index n = in.content.cols();
  r.state.lambda1 = config.lambda1;
  r.state.lambda2 = config.lambda2;
  r.state.c_a = Matrix::Zero(n, n);
  r.state.c_s = Matrix::Zero(n, n);
  if (config.mode == Mode::kFused) {
    std::vector<Index> dims;
    for (const auto& ph : in.propagated) dims.push_back(ph.cols());
    r.structure = init_structure_model(dims, config.hidden, config.seed);
  }
  return r;
}

/// Evaluates the loss at the current parameters and, when `opt` is given,
/// applies one Adam step to every trainable tensor.
inline LossBreakdown train_step(const TrainInputs& in, const TrainConfig& config, TrainResult& r,
                                TrainOptimizer* opt) {
  if (config.mode != Mode::kFused) {
    auto loss = content_loss(in.content, r.state);
    if (opt) {
      opt->c_a.config = config.adam;
      adam_step(r.state.c_a, content_loss_grad(in.content, r.state), opt->c_a, config.lr, "C_A");
    }
    return loss;
  }
  auto fwd = structure_forward(r.structure, in.propagated, in.propagation);
  const Matrix f_s = fwd.fused.transpose();
  auto loss = total_loss(in.content, f_s, r.state);
  if (!opt) return loss;

  auto grad = total_loss_grad(in.content, f_s, r.state);
  auto sgrad = structure_backward(r.structure, fwd, grad.f_s.transpose());
  const std::size_t t = r.structure.gcn.num_streams();
  opt->w1.resize(t);
  opt->w2.resize(t);
  opt->fusion.resize(t);
  for (auto* s : {&opt->c_a, &opt->c_s}) s->config = config.adam;
  adam_step(r.state.c_a, grad.c_a, opt->c_a, config.lr, "C_A");
  adam_step(r.state.c_s, grad.c_s, opt->c_s, config.lr, "C_S");
  for (std::size_t i = 0; i < t; ++i) {
    const auto tag = std::to_string(i);
    opt->w1[i].config = opt->w2[i].config = opt->fusion[i].config = config.adam;
    adam_step(r.structure.gcn.streams[i].w1, sgrad.gcn[i].w1, opt->w1[i], config.lr,
              "gcn[" + tag + "].w1");
    adam_step(r.structure.gcn.streams[i].w2, sgrad.gcn[i].w2, opt->w2[i], config.lr,
              "gcn[" + tag + "].w2");
    adam_step(r.structure.fusion.w[i], sgrad.fusion[i], opt->fusion[i], config.lr,
              "fusion[" + tag + "]");
  }
  return loss;
}

inline TrainResult train(const FeatureBundle& bundle, const TrainConfig& config) {
  config.validate(bundle.n());
  const TrainInputs in = prepare_inputs(bundle, config);
  TrainResult r = init_training(in, config);
  TrainOptimizer opt;
  r.trace.reserve(static_cast<std::size_t>(config.epochs) + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    r.trace.push_back(train_step(in, config, r, &opt));
    if (config.zero_diagonal) {
      r.state.c_a.diagonal().setZero();
      r.state.c_s.diagonal().setZero();
    }
    if (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0) {
      detail::write_checkpoint(r, epoch + 1, config.checkpoint_dir);
    }
  }
  r.trace.push_back(train_step(in, config, r, nullptr));
  return r;
}

/// Loss trace as CSV. Structure columns are omitted for content-only runs.
inline void write_loss_csv(const std::vector<LossBreakdown>& trace,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const bool structure = trace.empty() || trace.front().has_structure;
  out << (structure ? "epoch,l1_content,recon_content,l1_structure,recon_structure,l1_fused,total\n"
                    : "epoch,l1_content,recon_content,total\n");
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t e = 0; e < trace.size(); ++e) {
    const auto& b = trace[e];
    out << e << ',' << num(b.l1_content) << ',' << num(b.recon_content) << ',';
    if (structure) {
      out << num(b.l1_structure) << ',' << num(b.recon_structure) << ',' << num(b.l1_fused) << ',';
    }
    out << num(b.total()) << '\n';
  }
}

}  // namespace fusesc
