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

// Union-of-subspaces benchmark bundles with known ground truth.
//
// Content features are unit-norm points on k random r-dimensional subspaces
// of R^d plus isotropic noise, multiplied by `feature_scale`. Each layer
// stream maps the clean points through a per-cluster random linear map, so the
// structure stream is distinct from the content yet consistent with the
// clusters. A `structure_corruption` fraction of samples has every layer
// feature drowned in noise of the same norm as the signal.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include <json.hpp>

#include "feature_io.hpp"

namespace fusesc {

struct SubspaceSpec {
  Index ambient_dim = 50;
  Index subspace_dim = 4;
  Index clusters = 5;
  Index per_cluster = 60;
  double noise_sigma = 0.01;
  double structure_corruption = 0.1;
  std::uint64_t seed = 0;
  std::vector<int> layers = {3, 6, 9};
  Index layer_dim = 32;
  double feature_scale = 10.0;
  double min_angle_degrees = 10.0;

  Index n() const { return clusters * per_cluster; }
};

struct SyntheticData {
  FeatureBundle bundle;
  std::vector<Matrix> bases;  // d x r, orthonormal columns
};

inline constexpr double kPi = 3.14159265358979323846;

/// Smallest principal angle between the column spans of two orthonormal bases.
inline double min_principal_angle(const Matrix& a, const Matrix& b) {
  const Eigen::JacobiSVD<Matrix> svd(a.transpose() * b);
  const double cos_max = std::min(1.0, svd.singularValues()(0));
  return std::acos(cos_max);
}

inline void validate_spec(const SubspaceSpec& s) {
  auto fail = [](const std::string& why) { throw Error("infeasible subspace spec: " + why); };
  if (s.ambient_dim < 1 || s.subspace_dim < 1) fail("dimensions must be >= 1");
  if (s.subspace_dim >= s.ambient_dim) fail("subspace_dim must be < ambient_dim");
  if (s.clusters < 1 || s.per_cluster < 1) fail("clusters and per_cluster must be >= 1");
  if (s.noise_sigma < 0.0) fail("noise_sigma must be >= 0");
  if (s.structure_corruption < 0.0 || s.structure_corruption > 1.0) {
    fail("structure_corruption must be in [0, 1]");
  }
  if (s.layers.empty()) fail("at least one layer is required");
  if (s.layer_dim < 1) fail("layer_dim must be >= 1");
  if (!(s.feature_scale > 0.0)) fail("feature_scale must be > 0");
  if (s.min_angle_degrees < 0.0 || s.min_angle_degrees >= 90.0) fail("min_angle_degrees out of range");
}

inline Matrix gaussian_matrix(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline SyntheticData generate(const SubspaceSpec& spec) {
  validate_spec(spec);
  const Index d = spec.ambient_dim, r = spec.subspace_dim, k = spec.clusters, m = spec.per_cluster;
  const Index n = spec.n();
  std::mt19937_64 rng(spec.seed);

  SyntheticData out;
  const double min_angle = spec.min_angle_degrees * kPi / 180.0;
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxAttempts) {
      throw Error("infeasible subspace spec: could not separate bases by " +
                  std::to_string(spec.min_angle_degrees) + " degrees");
    }
    out.bases.clear();
    for (Index c = 0; c < k; ++c) {
      Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, r, 1.0, rng));
      out.bases.push_back(qr.householderQ() * Matrix::Identity(d, r));
    }
    bool separated = true;
    for (Index a = 0; a < k && separated; ++a) {
      for (Index b = a + 1; b < k && separated; ++b) {
        separated = min_principal_angle(out.bases[a], out.bases[b]) >= min_angle;
      }
    }
    if (separated) break;
  }

  // Clean unit-norm points, cluster-major order.
  Matrix clean(d, n);
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(n));
  for (Index c = 0; c < k; ++c) {
    for (Index j = 0; j < m; ++j) {
      Vector coef = gaussian_matrix(r, 1, 1.0, rng);
      while (coef.norm() == 0.0) coef = gaussian_matrix(r, 1, 1.0, rng);
      const Index i = c * m + j;
      clean.col(i) = out.bases[c] * coef / coef.norm();
      labels[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(c);
    }
  }
  const Matrix content = spec.feature_scale * (clean + gaussian_matrix(d, n, spec.noise_sigma, rng));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_corrupt = static_cast<std::size_t>(std::llround(spec.structure_corruption * n));
  std::vector<bool> corrupt(static_cast<std::size_t>(n), false);
  for (std::size_t i = 0; i < n_corrupt; ++i) corrupt[static_cast<std::size_t>(order[i])] = true;

  std::mt19937_64 corruption_rng(rng());

  out.bundle.content = content.transpose().cast<float>();
  out.bundle.layers = spec.layers;
  const double map_std = 1.0 / std::sqrt(static_cast<double>(spec.layer_dim));
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    std::vector<Matrix> maps;
    for (Index c = 0; c < k; ++c) maps.push_back(gaussian_matrix(spec.layer_dim, d, map_std, rng));
    Matrix layer(spec.layer_dim, n);
    for (Index i = 0; i < n; ++i) {
      Vector y = maps[labels[static_cast<std::size_t>(i)]] * clean.col(i);
      y += gaussian_matrix(spec.layer_dim, 1, spec.noise_sigma, rng);
      if (corrupt[static_cast<std::size_t>(i)]) {
        const double stddev = y.norm() / std::sqrt(static_cast<double>(spec.layer_dim));
        y += gaussian_matrix(spec.layer_dim, 1, stddev, corruption_rng);
      }
      layer.col(i) = spec.feature_scale * y;
    }
    out.bundle.layer_features.push_back(layer.transpose().cast<float>());
  }
  out.bundle.labels = std::move(labels);
  return out;
}

/// Saves the bundle plus a sidecar with the generating bases:
/// bases.json and bases.bin (k blocks of d x r float64 little-endian,
/// row-major).
inline void save_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  save_bundle(data.bundle, dir);
  if (data.bases.empty()) return;
  const Index d = data.bases.front().rows(), r = data.bases.front().cols();
  nlohmann::ordered_json j{{"k", data.bases.size()}, {"d", d}, {"r", r},
                           {"dtype", "float64-le-rowmajor"}};
  const auto text = j.dump(2) + "\n";
  detail::write_all(dir / "bases.json", std::vector<char>(text.begin(), text.end()));
  std::vector<char> bytes;
  bytes.reserve(data.bases.size() * static_cast<std::size_t>(d * r) * 8);
  for (const auto& b : data.bases) {
    for (Index i = 0; i < d; ++i) {
      for (Index c = 0; c < r; ++c) {
        std::uint64_t bits;
        const double v = b(i, c);
        std::memcpy(&bits, &v, 8);
        if constexpr (std::endian::native == std::endian::big) {
          bits = (std::uint64_t{detail::byteswap32(static_cast<std::uint32_t>(bits))} << 32) |
                 detail::byteswap32(static_cast<std::uint32_t>(bits >> 32));
        }
        const char* p = reinterpret_cast<const char*>(&bits);
        bytes.insert(bytes.end(), p, p + 8);
      }
    }
  }
  detail::write_all(dir / "bases.bin", bytes);
}

inline std::vector<Matrix> load_bases(const std::filesystem::path& dir) {
  const auto meta_bytes = detail::read_all(dir / "bases.json");
  const auto j = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  const auto k = j.at("k").get<std::size_t>();
  const auto d = j.at("d").get<Index>(), r = j.at("r").get<Index>();
  const auto bytes = detail::read_all(dir / "bases.bin");
  if (bytes.size() != k * static_cast<std::size_t>(d * r) * 8) {
    throw FormatError("bases.bin: byte length does not match bases.json");
  }
  std::vector<Matrix> bases;
  std::size_t off = 0;
  for (std::size_t c = 0; c < k; ++c) {
    Matrix b(d, r);
    for (Index i = 0; i < d; ++i) {
      for (Index col = 0; col < r; ++col) {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + off, 8);
        off += 8;
        if constexpr (std::endian::native == std::endian::big) {
          bits = (std::uint64_t{detail::byteswap32(static_cast<std::uint32_t>(bits))} << 32) |
                 detail::byteswap32(static_cast<std::uint32_t>(bits >> 32));
        }
        double v;
        std::memcpy(&v, &bits, 8);
        b(i, col) = v;
      }
    }
    bases.push_back(std::move(b));
  }
  return bases;
}

}  // namespace fusesc
