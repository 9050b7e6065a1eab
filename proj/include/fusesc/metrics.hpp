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

// Clustering accuracy under the best one-to-one label matching, normalized
// mutual information, and a per-anchor coefficient neighbor report.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace fusesc {

struct Assignment {
  std::vector<int> column_of_row;  // a permutation of [0, k)
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
/// paths with row/column potentials, O(k^3)).
inline Assignment hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("hungarian: cost matrix is " + shape_str(cost));
  require_finite(cost, "hungarian");
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual root.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.column_of_row.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) a.column_of_row[match[j] - 1] = static_cast<int>(j - 1);
  for (Index i = 0; i < n; ++i) a.cost += cost(i, a.column_of_row[i]);
  return a;
}

inline int num_labels(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw Error("labels must be nonnegative");
    k = std::max(k, l + 1);
  }
  return k;
}

/// counts(i, j) = #{samples with truth i and prediction j}
inline Matrix contingency(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.size() != pred.size()) {
    throw ShapeError("label length mismatch: " + std::to_string(truth.size()) + " vs " +
                     std::to_string(pred.size()));
  }
  Matrix counts = Matrix::Zero(num_labels(truth), num_labels(pred));
  for (std::size_t i = 0; i < truth.size(); ++i) counts(truth[i], pred[i]) += 1.0;
  return counts;
}

inline double clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  const Matrix counts = contingency(truth, pred);
  if (truth.empty()) return 0.0;
  const Index k = std::max(counts.rows(), counts.cols());
  Matrix cost = Matrix::Zero(k, k);
  cost.topLeftCorner(counts.rows(), counts.cols()) = -counts;
  const auto a = hungarian(cost);
  double hits = 0.0;
  for (Index i = 0; i < counts.rows(); ++i) {
    const Index j = a.column_of_row[static_cast<std::size_t>(i)];
    if (j < counts.cols()) hits += counts(i, j);
  }
  return hits / static_cast<double>(truth.size());
}

/// I(l; c) / max(H(l), H(c)), natural logs. Two constant labelings score 1.
inline double normalized_mutual_info(const std::vector<int>& truth, const std::vector<int>& pred) {
  const Matrix counts = contingency(truth, pred);
  const double n = static_cast<double>(truth.size());
  if (n == 0) return 0.0;
  const Vector rows = counts.rowwise().sum();
  const Vector cols = counts.colwise().sum();
  auto entropy = [n](const Vector& c) {
    double h = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      if (c(i) > 0) h -= (c(i) / n) * std::log(c(i) / n);
    }
    return h;
  };
  const double h_truth = entropy(rows);
  const double h_pred = entropy(cols);
  double mi = 0.0;
  for (Index i = 0; i < counts.rows(); ++i) {
    for (Index j = 0; j < counts.cols(); ++j) {
      const double c = counts(i, j);
      if (c > 0) mi += (c / n) * std::log(c * n / (rows(i) * cols(j)));
    }
  }
  const double denom = std::max(h_truth, h_pred);
  if (denom <= 0.0) return 1.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

struct NeighborEntry {
  Index anchor = 0;
  std::vector<Index> top;     // largest |C(i, anchor)|
  std::vector<Index> bottom;  // smallest |C(i, anchor)|
  bool degenerate = false;    // column is zero off the anchor
};

/// For each anchor column of C, the `count` largest and smallest absolute
/// coefficients, excluding the anchor itself. Ties go to the smaller index.
inline std::vector<NeighborEntry> neighbor_report(const Matrix& c, const std::vector<Index>& anchors,
                                                  Index count) {
  const Index n = c.cols();
  std::vector<NeighborEntry> out;
  for (Index a : anchors) {
    if (a < 0 || a >= n) {
      throw Error("neighbor_report: anchor " + std::to_string(a) + " out of range [0, " +
                  std::to_string(n) + ")");
    }
    std::vector<Index> others;
    for (Index i = 0; i < c.rows(); ++i) {
      if (i != a) others.push_back(i);
    }
    const auto take = static_cast<std::size_t>(std::min<Index>(count, others.size()));
    NeighborEntry e;
    e.anchor = a;
    auto by_desc = [&](Index x, Index y) {
      const double ax = std::abs(c(x, a)), ay = std::abs(c(y, a));
      return ax > ay || (ax == ay && x < y);
    };
    auto by_asc = [&](Index x, Index y) {
      const double ax = std::abs(c(x, a)), ay = std::abs(c(y, a));
      return ax < ay || (ax == ay && x < y);
    };
    auto sorted = others;
    std::partial_sort(sorted.begin(), sorted.begin() + take, sorted.end(), by_desc);
    e.top.assign(sorted.begin(), sorted.begin() + take);
    sorted = others;
    std::partial_sort(sorted.begin(), sorted.begin() + take, sorted.end(), by_asc);
    e.bottom.assign(sorted.begin(), sorted.begin() + take);
    e.degenerate = std::all_of(others.begin(), others.end(), [&](Index i) { return c(i, a) == 0.0; });
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fusesc
