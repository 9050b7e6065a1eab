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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace fusesc {

// Undirected binary KNN graph plus its GCN propagation matrix
// P = D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
struct KnnGraph {
  Matrix adjacency;
  Matrix self_loop_adjacency;
  Matrix norm_propagation;

  Index n() const { return adjacency.rows(); }
  Index num_edges() const { return static_cast<Index>(adjacency.sum() / 2.0); }
};

/// Pairwise cosine similarity between the rows of `x` (samples as rows).
inline Matrix cosine_similarity(const Matrix& x) {
  Matrix unit = x;
  for (Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (!(norm > 0.0)) {
      throw NumericError("cosine_similarity: row " + std::to_string(i) + " has zero norm");
    }
    unit.row(i) /= norm;
  }
  Matrix s = unit * unit.transpose();
  // Force exact symmetry and unit diagonal.
  for (Index i = 0; i < s.rows(); ++i) {
    s(i, i) = 1.0;
    for (Index j = i + 1; j < s.cols(); ++j) s(j, i) = s(i, j);
  }
  return s;
}

inline Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("normalize_adjacency: adjacency is " + shape_str(a));
  const Index n = a.rows();
  for (Index i = 0; i < n; ++i) {
    if (a(i, i) != 0.0) throw Error("normalize_adjacency: nonzero diagonal at " + std::to_string(i));
    for (Index j = 0; j < n; ++j) {
      if (a(i, j) != a(j, i)) {
        throw Error("normalize_adjacency: asymmetric at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
      if (a(i, j) != 0.0 && a(i, j) != 1.0) {
        throw Error("normalize_adjacency: non-binary entry at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
    }
  }
  const Matrix tilde = a + Matrix::Identity(n, n);
  const Vector inv_sqrt = tilde.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

/// Indices of the `k` most similar entries of similarity row `i`, self
/// excluded, ties broken by smaller index.
inline std::vector<Index> nearest_neighbors(const Matrix& sim, Index i, Index k) {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(sim.cols() - 1));
  for (Index j = 0; j < sim.cols(); ++j) {
    if (j != i) order.push_back(j);
  }
  const auto first = order.begin();
  std::partial_sort(first, first + k, order.end(), [&](Index a, Index b) {
    const double sa = sim(i, a), sb = sim(i, b);
    return sa > sb || (sa == sb && a < b);
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

/// Cosine KNN graph over the rows of `x`. Directed neighbor lists are
/// symmetrized by union.
inline KnnGraph build_knn_graph(const Matrix& x, Index k) {
  const Index n = x.rows();
  if (k < 1 || k >= n) {
    throw Error("build_knn_graph: K=" + std::to_string(k) + " must satisfy 1 <= K < n=" +
                std::to_string(n));
  }
  const Matrix sim = cosine_similarity(x);
  KnnGraph g;
  g.adjacency = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j : nearest_neighbors(sim, i, k)) {
      g.adjacency(i, j) = 1.0;
      g.adjacency(j, i) = 1.0;
    }
  }
  g.self_loop_adjacency = g.adjacency + Matrix::Identity(n, n);
  g.norm_propagation = normalize_adjacency(g.adjacency);
  return g;
}

/// Writes "i j" per undirected edge with i < j.
inline void write_edge_list(const KnnGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (Index i = 0; i < g.n(); ++i) {
    for (Index j = i + 1; j < g.n(); ++j) {
      if (g.adjacency(i, j) != 0.0) out << i << ' ' << j << '\n';
    }
  }
}

}  // namespace fusesc
