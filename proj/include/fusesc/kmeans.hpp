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

// Lloyd k-means with k-means++ seeding and a fixed number of restarts.

#include <limits>
#include <random>
#include <vector>

#include "common.hpp"

namespace fusesc {

struct KMeansOptions {
  int restarts = 20;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;  // k x dim
  double inertia = 0.0;
  int restart = 0;
};

namespace detail {

inline Matrix kmeanspp_init(const Matrix& x, Index k, std::mt19937_64& rng) {
  const Index n = x.rows();
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  Vector dist2(n);
  for (Index i = 0; i < n; ++i) dist2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc > target && dist2(i) > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = x.row(chosen);
    for (Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i), (x.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

// Nearest center for every row; ties go to the lower center index.
inline double assign(const Matrix& x, const Matrix& centers, std::vector<int>& labels,
                     Vector& dist2) {
  double inertia = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist2(i) = best;
    inertia += best;
  }
  return inertia;
}

// Moves the point farthest from its center into each empty cluster, never
// emptying a donor cluster. Returns true if anything moved.
inline bool fill_empty_clusters(const Matrix& x, Index k, std::vector<int>& labels, Vector& dist2,
                                Matrix& centers) {
  bool moved = false;
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] != 0) continue;
    Index far = -1;
    for (Index i = 0; i < x.rows(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
      if (far < 0 || dist2(i) > dist2(far)) far = i;
    }
    if (far < 0) break;
    --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
    ++sizes[static_cast<std::size_t>(c)];
    labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
    dist2(far) = 0.0;
    centers.row(c) = x.row(far);
    moved = true;
  }
  return moved;
}

inline Matrix recompute_centers(const Matrix& x, Index k, const std::vector<int>& labels,
                                const Matrix& previous) {
  Matrix centers = Matrix::Zero(k, x.cols());
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    centers.row(l) += x.row(i);
    ++sizes[static_cast<std::size_t>(l)];
  }
  for (Index c = 0; c < k; ++c) {
    const auto s = sizes[static_cast<std::size_t>(c)];
    if (s > 0) {
      centers.row(c) /= static_cast<double>(s);
    } else {
      centers.row(c) = previous.row(c);
    }
  }
  return centers;
}

}  // namespace detail

/// Best-inertia clustering of the rows of `x` over all restarts; ties in
/// inertia keep the earliest restart.
inline KMeansResult kmeans(const Matrix& x, Index k, const KMeansOptions& opt = {}) {
  const Index n = x.rows();
  if (k < 1 || k > n) {
    throw Error("kmeans: k=" + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    Matrix centers = detail::kmeanspp_init(x, k, rng);
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<int> next(static_cast<std::size_t>(n), 0);
    Vector dist2(n);
    for (int it = 0; it < opt.max_iterations; ++it) {
      detail::assign(x, centers, next, dist2);
      detail::fill_empty_clusters(x, k, next, dist2, centers);
      if (next == labels) break;
      labels = next;
      centers = detail::recompute_centers(x, k, labels, centers);
    }
    labels = next;
    centers = detail::recompute_centers(x, k, labels, centers);
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      inertia += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centers = centers;
      best.inertia = inertia;
      best.restart = r;
    }
  }
  return best;
}

}  // namespace fusesc
