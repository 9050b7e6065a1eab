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

// Two-layer graph convolution per intermediate feature stream, followed by a
// learned linear fusion of the streams:
//
//   H1 = relu(P H W1),  H2 = relu(P H1 W2),  F_S = sum_i H2_i Wf_i
//
// Samples are rows here (n x d). Gradients are hand-derived; the relu
// subderivative at 0 is taken as 0.

#include <algorithm>
#include <random>
#include <vector>

#include "common.hpp"

namespace fusesc {

struct StreamWeights {
  Matrix w1;  // d_i x d_i
  Matrix w2;  // d_i x h
};

struct GcnStack {
  std::vector<StreamWeights> streams;

  std::size_t num_streams() const { return streams.size(); }
  Index hidden() const { return streams.empty() ? 0 : streams.front().w2.cols(); }
};

struct FusionWeights {
  std::vector<Matrix> w;  // h x h per stream
};

struct GcnCache {
  const Matrix* propagation = nullptr;  // not owned; must outlive the cache
  Matrix ph;
  Matrix z1;
  Matrix a1;
  Matrix pa1;
  Matrix z2;
};

struct StreamGrad {
  Matrix w1;
  Matrix w2;
};

inline Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

inline Matrix relu_mask(const Matrix& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

inline void check_stream_shapes(Index n, Index d, const Matrix& p, const StreamWeights& w) {
  require_shape(p, n, n, "gcn: propagation matrix");
  require_shape(w.w1, d, d, "gcn: layer-1 weights");
  if (w.w2.rows() != d) {
    throw ShapeError("gcn: layer-2 weights have " + std::to_string(w.w2.rows()) +
                     " rows, expected " + std::to_string(d));
  }
}

/// Forward pass for one stream given the precomputed product P*H, which stays
/// fixed while the input features are frozen.
inline Matrix gcn_forward_propagated(const Matrix& ph, const Matrix& p, const StreamWeights& w,
                                     GcnCache* cache = nullptr) {
  check_stream_shapes(ph.rows(), ph.cols(), p, w);
  Matrix z1 = ph * w.w1;
  Matrix a1 = relu(z1);
  Matrix pa1 = p * a1;
  Matrix z2 = pa1 * w.w2;
  Matrix out = relu(z2);
  if (cache) {
    cache->propagation = &p;
    cache->ph = ph;
    cache->z1 = std::move(z1);
    cache->a1 = std::move(a1);
    cache->pa1 = std::move(pa1);
    cache->z2 = std::move(z2);
  }
  return out;
}

inline Matrix gcn_forward(const Matrix& h, const Matrix& p, const StreamWeights& w,
                          GcnCache* cache = nullptr) {
  if (p.cols() != h.rows()) {
    throw ShapeError("gcn: propagation " + shape_str(p) + " does not match features " +
                     shape_str(h));
  }
  return gcn_forward_propagated(p * h, p, w, cache);
}

/// Reverse pass for one stream: gradients of the weights given dL/d(output).
inline StreamGrad gcn_backward(const Matrix& upstream, const GcnCache& cache,
                               const StreamWeights& w) {
  if (cache.propagation == nullptr || cache.z2.size() == 0) {
    throw Error("gcn_backward: no cached forward pass");
  }
  require_shape(upstream, cache.z2.rows(), cache.z2.cols(), "gcn_backward: upstream gradient");
  const Matrix dz2 = upstream.cwiseProduct(relu_mask(cache.z2));
  StreamGrad g;
  g.w2 = cache.pa1.transpose() * dz2;
  const Matrix da1 = cache.propagation->transpose() * (dz2 * w.w2.transpose());
  const Matrix dz1 = da1.cwiseProduct(relu_mask(cache.z1));
  g.w1 = cache.ph.transpose() * dz1;
  return g;
}

inline Matrix fuse_features(const std::vector<Matrix>& streams, const FusionWeights& fusion) {
  if (streams.empty()) throw ShapeError("fuse_features: no streams");
  if (streams.size() != fusion.w.size()) {
    throw ShapeError("fuse_features: " + std::to_string(streams.size()) + " streams but " +
                     std::to_string(fusion.w.size()) + " fusion weights");
  }
  const Index n = streams.front().rows();
  const Index h = streams.front().cols();
  Matrix out = Matrix::Zero(n, fusion.w.front().cols());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    require_shape(streams[i], n, h, "fuse_features: stream " + std::to_string(i));
    require_shape(fusion.w[i], h, out.cols(), "fuse_features: fusion weight " + std::to_string(i));
    out.noalias() += streams[i] * fusion.w[i];
  }
  return out;
}

struct FusionGrad {
  std::vector<Matrix> w;        // dL/dWf_i
  std::vector<Matrix> streams;  // dL/dH2_i
};

inline FusionGrad fuse_backward(const Matrix& upstream, const std::vector<Matrix>& streams,
                                const FusionWeights& fusion) {
  FusionGrad g;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    g.w.push_back(streams[i].transpose() * upstream);
    g.streams.push_back(upstream * fusion.w[i].transpose());
  }
  return g;
}

/// Uniform on +-sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(fan_in, fan_out);
  for (Index i = 0; i < fan_in; ++i) {
    for (Index j = 0; j < fan_out; ++j) m(i, j) = dist(rng);
  }
  return m;
}

// GCN stack and fusion weights over t streams, with forward and reverse
// passes producing F_S (n x h).
struct StructureModel {
  GcnStack gcn;
  FusionWeights fusion;

  Index hidden() const { return gcn.hidden(); }
};

/// Layer-1 width equals the stream width d_i; all streams share the layer-2
/// width `hidden` (0 selects min d_i).
inline StructureModel init_structure_model(const std::vector<Index>& stream_dims, Index hidden,
                                           std::uint64_t seed) {
  if (stream_dims.empty()) throw ShapeError("init_structure_model: no streams");
  if (hidden <= 0) hidden = *std::min_element(stream_dims.begin(), stream_dims.end());
  std::mt19937_64 rng(seed);
  StructureModel m;
  for (Index d : stream_dims) {
    StreamWeights w;
    w.w1 = glorot_uniform(d, d, rng);
    w.w2 = glorot_uniform(d, hidden, rng);
    m.gcn.streams.push_back(std::move(w));
  }
  const double share = 1.0 / static_cast<double>(stream_dims.size());
  for (std::size_t i = 0; i < stream_dims.size(); ++i) {
    m.fusion.w.push_back(share * Matrix::Identity(hidden, hidden));
  }
  return m;
}

struct StructureForward {
  std::vector<GcnCache> caches;
  std::vector<Matrix> streams;
  Matrix fused;
};

struct StructureGrad {
  std::vector<StreamGrad> gcn;
  std::vector<Matrix> fusion;
};

/// `propagated[i]` is P_i * H_i for stream i.
inline StructureForward structure_forward(const StructureModel& model,
                                          const std::vector<Matrix>& propagated,
                                          const std::vector<Matrix>& propagations) {
  if (propagated.size() != model.gcn.num_streams() || propagations.size() != propagated.size()) {
    throw ShapeError("structure_forward: stream count mismatch");
  }
  StructureForward f;
  f.caches.resize(propagated.size());
  for (std::size_t i = 0; i < propagated.size(); ++i) {
    f.streams.push_back(
        gcn_forward_propagated(propagated[i], propagations[i], model.gcn.streams[i], &f.caches[i]));
  }
  f.fused = fuse_features(f.streams, model.fusion);
  return f;
}

inline StructureGrad structure_backward(const StructureModel& model, const StructureForward& f,
                                        const Matrix& d_fused) {
  auto fg = fuse_backward(d_fused, f.streams, model.fusion);
  StructureGrad g;
  g.fusion = std::move(fg.w);
  for (std::size_t i = 0; i < f.streams.size(); ++i) {
    g.gcn.push_back(gcn_backward(fg.streams[i], f.caches[i], model.gcn.streams[i]));
  }
  return g;
}

}  // namespace fusesc
