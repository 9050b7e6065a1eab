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

// Affinity construction and normalized spectral clustering
// (symmetric Laplacian, row-normalized eigenvector embedding, k-means).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "common.hpp"
#include "kmeans.hpp"
#include "symmetric_eigen.hpp"

namespace fusesc {

struct Affinity {
  Matrix w;  // symmetric, nonnegative
};

struct ClusterResult {
  std::vector<int> assignments;
  Matrix embedding;  // n x k, rows unit length (or zero)
  Vector eigenvalues;  // k + 1 smallest Laplacian eigenvalues (fewer if n <= k)
  Index k = 0;
  bool degenerate = false;
};

struct SpectralOptions {
  KMeansOptions kmeans;
  EigenOptions eigen;
  double degenerate_gap = 1e-8;
};

/// W = |C| + |C|^T
inline Affinity build_affinity(const Matrix& c) {
  if (c.rows() != c.cols()) throw ShapeError("build_affinity: matrix is " + shape_str(c));
  require_finite(c, "build_affinity");
  const Matrix a = c.cwiseAbs();
  Affinity out;
  out.w = a + a.transpose();
  return out;
}

/// L = I - D^{-1/2} W D^{-1/2}; isolated vertices get identity rows.
inline Matrix normalized_laplacian(const Matrix& w) {
  const Index n = w.rows();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    const double deg = w.row(i).sum();
    inv_sqrt(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Matrix l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  for (Index i = 0; i < n; ++i) {
    if (inv_sqrt(i) == 0.0) {
      l.row(i).setZero();
      l.col(i).setZero();
      l(i, i) = 1.0;
    }
  }
  return l;
}

inline void validate_affinity(const Matrix& w) {
  if (w.rows() != w.cols()) throw ShapeError("affinity is " + shape_str(w));
  require_finite(w, "affinity");
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) < 0.0) throw Error("affinity has a negative entry");
      if (w(i, j) != w(j, i)) throw Error("affinity is not symmetric");
    }
  }
}

// Flips each column so its largest-magnitude entry (first on ties) is positive.
inline void fix_eigenvector_signs(Matrix& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    for (Index i = 1; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > std::abs(v(arg, j))) arg = i;
    }
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

inline ClusterResult spectral_cluster(const Affinity& affinity, Index k,
                                      const SpectralOptions& opt = {}) {
  const Matrix& w = affinity.w;
  validate_affinity(w);
  const Index n = w.rows();
  if (k < 2) throw Error("spectral_cluster: k must be >= 2");
  if (k > n) {
    throw Error("spectral_cluster: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  }
  const auto eig = symmetric_eigen(normalized_laplacian(w), opt.eigen);

  ClusterResult r;
  r.k = k;
  r.eigenvalues = eig.values.head(std::min(k + 1, n));
  Matrix v = eig.vectors.leftCols(k);
  fix_eigenvector_signs(v);
  for (Index i = 0; i < n; ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0.0) v.row(i) /= norm;
  }
  r.embedding = std::move(v);

  const bool no_gap = k < n && (eig.values(k) - eig.values(k - 1)) < opt.degenerate_gap;
  std::set<std::vector<double>> distinct;
  for (Index i = 0; i < n && static_cast<Index>(distinct.size()) < k; ++i) {
    const Vector row = r.embedding.row(i);
    distinct.insert(std::vector<double>(row.data(), row.data() + row.size()));
  }
  r.degenerate = no_gap || static_cast<Index>(distinct.size()) < k;

  r.assignments = kmeans(r.embedding, k, opt.kmeans).labels;
  return r;
}

/// 8-bit binary PGM (P5), scaled so the largest entry maps to 255.
inline void write_affinity_pgm(const Matrix& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << w.cols() << ' ' << w.rows() << "\n255\n";
  const double max = w.size() ? w.maxCoeff() : 0.0;
  std::vector<unsigned char> row(static_cast<std::size_t>(w.cols()));
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      const double v = max > 0.0 ? std::clamp(w(i, j) / max, 0.0, 1.0) : 0.0;
      row[static_cast<std::size_t>(j)] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

inline void write_matrix_csv(const Matrix& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  char buf[64];
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", w(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace fusesc
