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

// Feature bundle directory format.
//
//   manifest.json     text manifest (see BundleManifest)
//   content.bin       n x d_content, float32 little-endian, row-major
//   layer_<idx>.bin   n x d_idx per intermediate layer, same encoding
//   labels.bin        optional, n x uint32 little-endian
//
// Samples are rows on disk. The self-expressive math works with samples as
// columns, so callers transpose at this boundary (see to_columns()).

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace fusesc {

inline constexpr int kBundleVersion = 1;
inline constexpr const char* kBundleDtype = "float32-le-rowmajor";

struct FeatureBundle {
  FloatRows content;
  std::vector<int> layers;
  std::vector<FloatRows> layer_features;
  std::optional<std::vector<std::uint32_t>> labels;

  Index n() const { return content.rows(); }
  Index d_content() const { return content.cols(); }
  std::size_t num_layers() const { return layers.size(); }
  std::uint32_t num_classes() const {
    if (!labels || labels->empty()) return 0;
    return *std::max_element(labels->begin(), labels->end()) + 1;
  }

  friend bool operator==(const FeatureBundle& a, const FeatureBundle& b);
};

struct LayerEntry {
  int index = 0;
  Index dim = 0;
};

struct BundleManifest {
  int version = kBundleVersion;
  Index n = 0;
  Index d_content = 0;
  std::vector<LayerEntry> layers;
  std::string dtype = kBundleDtype;
  bool has_labels = false;
  std::uint32_t num_classes = 0;
};

inline std::string layer_file_name(int index) { return "layer_" + std::to_string(index) + ".bin"; }

namespace detail {

inline std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return byteswap32(v);
  return v;
}

inline std::vector<char> read_all(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw FormatError("missing file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_all(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

inline bool bits_equal(const FloatRows& a, const FloatRows& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace detail

inline bool operator==(const FeatureBundle& a, const FeatureBundle& b) {
  if (a.layers != b.layers || a.labels != b.labels) return false;
  if (!detail::bits_equal(a.content, b.content)) return false;
  if (a.layer_features.size() != b.layer_features.size()) return false;
  for (std::size_t i = 0; i < a.layer_features.size(); ++i) {
    if (!detail::bits_equal(a.layer_features[i], b.layer_features[i])) return false;
  }
  return true;
}

/// Writes a float32 little-endian row-major matrix.
inline void write_f32_matrix(const std::filesystem::path& path, const FloatRows& m) {
  std::vector<char> bytes(static_cast<std::size_t>(m.size()) * 4);
  for (Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, m.data() + i, 4);
    bits = detail::to_le(bits);
    std::memcpy(bytes.data() + 4 * i, &bits, 4);
  }
  detail::write_all(path, bytes);
}

/// Reads a float32 matrix, checking the byte length against rows x cols and
/// rejecting non-finite values. Errors name the file and byte offset.
inline FloatRows read_f32_matrix(const std::filesystem::path& path, Index rows, Index cols) {
  const auto bytes = detail::read_all(path);
  const auto expected = static_cast<std::size_t>(rows * cols) * 4;
  if (bytes.size() != expected) {
    throw FormatError(path.filename().string() + ": byte length " + std::to_string(bytes.size()) +
                      " does not match manifest (" + std::to_string(rows) + "x" +
                      std::to_string(cols) + " float32 = " + std::to_string(expected) + " bytes)");
  }
  FloatRows m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, 4);
    bits = detail::to_le(bits);
    float v;
    std::memcpy(&v, &bits, 4);
    if (!std::isfinite(v)) {
      throw FormatError(path.filename().string() + ": non-finite value at byte offset " +
                        std::to_string(4 * i));
    }
    m.data()[i] = v;
  }
  return m;
}

inline void validate_bundle(const FeatureBundle& b) {
  const Index n = b.n();
  if (n < 1) throw FormatError("bundle: no samples");
  if (b.layers.empty()) throw FormatError("bundle: at least one layer is required");
  if (b.layers.size() != b.layer_features.size()) {
    throw FormatError("bundle: " + std::to_string(b.layers.size()) + " layer indices but " +
                      std::to_string(b.layer_features.size()) + " layer matrices");
  }
  for (std::size_t i = 1; i < b.layers.size(); ++i) {
    if (b.layers[i] <= b.layers[i - 1]) {
      throw FormatError("bundle: layer indices must be strictly increasing");
    }
  }
  auto check_finite = [](const FloatRows& m, const std::string& name) {
    for (Index i = 0; i < m.size(); ++i) {
      if (!std::isfinite(m.data()[i])) {
        throw FormatError(name + ": non-finite value at byte offset " + std::to_string(4 * i));
      }
    }
  };
  check_finite(b.content, "content");
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const auto name = layer_file_name(b.layers[i]);
    if (b.layer_features[i].rows() != n) {
      throw FormatError(name + ": has " + std::to_string(b.layer_features[i].rows()) +
                        " rows, expected " + std::to_string(n));
    }
    check_finite(b.layer_features[i], name);
  }
  if (b.labels) {
    if (static_cast<Index>(b.labels->size()) != n) {
      throw FormatError("labels: length " + std::to_string(b.labels->size()) + ", expected " +
                        std::to_string(n));
    }
    const auto k = b.num_classes();
    std::vector<bool> seen(k, false);
    for (auto l : *b.labels) seen[l] = true;
    for (std::uint32_t c = 0; c < k; ++c) {
      if (!seen[c]) throw FormatError("labels: class " + std::to_string(c) + " never occurs");
    }
  }
}

inline BundleManifest manifest_of(const FeatureBundle& b) {
  BundleManifest m;
  m.n = b.n();
  m.d_content = b.d_content();
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    m.layers.push_back({b.layers[i], b.layer_features[i].cols()});
  }
  m.has_labels = b.labels.has_value();
  m.num_classes = b.num_classes();
  return m;
}

inline nlohmann::ordered_json manifest_to_json(const BundleManifest& m) {
  nlohmann::ordered_json j;
  j["version"] = m.version;
  j["n"] = m.n;
  j["d_content"] = m.d_content;
  j["dtype"] = m.dtype;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : m.layers) {
    j["layers"].push_back({{"index", l.index}, {"dim", l.dim}});
  }
  j["has_labels"] = m.has_labels;
  if (m.has_labels) j["num_classes"] = m.num_classes;
  return j;
}

inline BundleManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  const auto bytes = detail::read_all(path);
  BundleManifest m;
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    m.version = j.at("version").get<int>();
    m.n = j.at("n").get<Index>();
    m.d_content = j.at("d_content").get<Index>();
    m.dtype = j.at("dtype").get<std::string>();
    for (const auto& l : j.at("layers")) {
      m.layers.push_back({l.at("index").get<int>(), l.at("dim").get<Index>()});
    }
    m.has_labels = j.at("has_labels").get<bool>();
    if (m.has_labels) m.num_classes = j.at("num_classes").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
  if (m.version != kBundleVersion) {
    throw FormatError("manifest.json: unsupported version " + std::to_string(m.version));
  }
  if (m.dtype != kBundleDtype) throw FormatError("manifest.json: unsupported dtype " + m.dtype);
  if (m.n < 1 || m.d_content < 1) throw FormatError("manifest.json: empty dimensions");
  for (const auto& l : m.layers) {
    if (l.dim < 1) throw FormatError("manifest.json: layer " + std::to_string(l.index) + " has dim 0");
  }
  return m;
}

inline void save_bundle(const FeatureBundle& b, const std::filesystem::path& dir) {
  validate_bundle(b);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw FormatError("cannot create bundle directory " + dir.string());
  }
  {
    const auto text = manifest_to_json(manifest_of(b)).dump(2) + "\n";
    detail::write_all(dir / "manifest.json", std::vector<char>(text.begin(), text.end()));
  }
  write_f32_matrix(dir / "content.bin", b.content);
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    write_f32_matrix(dir / layer_file_name(b.layers[i]), b.layer_features[i]);
  }
  if (b.labels) {
    std::vector<char> bytes(b.labels->size() * 4);
    for (std::size_t i = 0; i < b.labels->size(); ++i) {
      const auto v = detail::to_le((*b.labels)[i]);
      std::memcpy(bytes.data() + 4 * i, &v, 4);
    }
    detail::write_all(dir / "labels.bin", bytes);
  } else {
    std::filesystem::remove(dir / "labels.bin", ec);
  }
}

inline FeatureBundle load_bundle(const std::filesystem::path& dir) {
  const auto m = read_manifest(dir);
  FeatureBundle b;
  b.content = read_f32_matrix(dir / "content.bin", m.n, m.d_content);
  for (const auto& l : m.layers) {
    b.layers.push_back(l.index);
    b.layer_features.push_back(read_f32_matrix(dir / layer_file_name(l.index), m.n, l.dim));
  }
  if (m.has_labels) {
    const auto path = dir / "labels.bin";
    const auto bytes = detail::read_all(path);
    if (bytes.size() != static_cast<std::size_t>(m.n) * 4) {
      throw FormatError("labels.bin: byte length " + std::to_string(bytes.size()) +
                        " does not match manifest (" + std::to_string(m.n) + " uint32 = " +
                        std::to_string(m.n * 4) + " bytes)");
    }
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(m.n));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      std::uint32_t v;
      std::memcpy(&v, bytes.data() + 4 * i, 4);
      v = detail::to_le(v);
      if (v >= m.num_classes) {
        throw FormatError("labels.bin: label " + std::to_string(v) + " out of range [0, " +
                          std::to_string(m.num_classes) + ") at byte offset " +
                          std::to_string(4 * i));
      }
      labels[i] = v;
    }
    b.labels = std::move(labels);
  }
  validate_bundle(b);
  if (b.labels && b.num_classes() != m.num_classes) {
    throw FormatError("labels.bin: class " + std::to_string(m.num_classes - 1) + " never occurs");
  }
  return b;
}

/// Float32 rows (n x d) to a double matrix with samples as columns (d x n).
inline Matrix to_columns(const FloatRows& rows) { return rows.cast<double>().transpose(); }

inline Matrix to_rows(const FloatRows& rows) { return rows.cast<double>(); }

}  // namespace fusesc
