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

// End-to-end run: train, build the affinity, cluster, evaluate, and write the
// run artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "feature_io.hpp"
#include "metrics.hpp"
#include "spectral.hpp"
#include "train.hpp"

namespace fusesc {

struct PipelineResult {
  TrainResult train;
  Affinity affinity;
  ClusterResult cluster;
  std::optional<double> acc;
  std::optional<double> nmi;
  Index n = 0;
};

inline std::vector<int> to_int_labels(const std::vector<std::uint32_t>& labels) {
  return {labels.begin(), labels.end()};
}

inline PipelineResult run_pipeline(const FeatureBundle& bundle, const TrainConfig& config) {
  PipelineResult r;
  r.n = bundle.n();
  r.train = train(bundle, config);
  r.affinity = build_affinity(r.train.fused());
  SpectralOptions opt;
  opt.kmeans.seed = config.seed;
  r.cluster = spectral_cluster(r.affinity, config.clusters, opt);
  if (bundle.labels) {
    const auto truth = to_int_labels(*bundle.labels);
    r.acc = clustering_accuracy(truth, r.cluster.assignments);
    r.nmi = normalized_mutual_info(truth, r.cluster.assignments);
  }
  return r;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  return {{"mode", std::string(to_string(c.mode))},
          {"K", c.k},
          {"lambda1", c.lambda1},
          {"lambda2", c.lambda2},
          {"lr", c.lr},
          {"epochs", c.epochs},
          {"clusters", c.clusters},
          {"seed", c.seed},
          {"hidden", c.hidden},
          {"zero_diagonal", c.zero_diagonal}};
}

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
inline std::string config_hash(const TrainConfig& c, const std::string& source) {
  const std::string text = source + "\n" + config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::ordered_json metrics_json(const PipelineResult& r, Mode mode) {
  nlohmann::ordered_json j;
  j["acc"] = r.acc ? nlohmann::ordered_json(*r.acc) : nlohmann::ordered_json(nullptr);
  j["nmi"] = r.nmi ? nlohmann::ordered_json(*r.nmi) : nlohmann::ordered_json(nullptr);
  j["k"] = r.cluster.k;
  j["n"] = r.n;
  j["mode"] = std::string(to_string(mode));
  j["degenerate"] = r.cluster.degenerate;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_assignments_csv(const std::vector<int>& labels,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

struct RunArtifacts {
  std::filesystem::path assignments;
  std::filesystem::path metrics;
  std::filesystem::path loss;
  std::optional<std::filesystem::path> affinity;
  std::filesystem::path report;
};

inline RunArtifacts write_run(const PipelineResult& r, const TrainConfig& config,
                              const std::string& source, const std::filesystem::path& dir,
                              bool emit_affinity) {
  std::filesystem::create_directories(dir);
  RunArtifacts a;
  a.assignments = dir / "assignments.csv";
  write_assignments_csv(r.cluster.assignments, a.assignments);
  a.metrics = dir / "metrics.json";
  write_text(a.metrics, metrics_json(r, config.mode).dump(2) + "\n");
  a.loss = dir / "loss.csv";
  write_loss_csv(r.train.trace, a.loss);
  if (emit_affinity) {
    a.affinity = dir / "affinity.pgm";
    write_affinity_pgm(r.affinity.w, *a.affinity);
  }
  a.report = dir / "report.json";
  nlohmann::ordered_json rep;
  rep["status"] = "ok";
  rep["source"] = source;
  rep["config"] = config_to_json(config);
  rep["loss_trace"] = a.loss.filename().string();
  rep["initial_loss"] = r.train.trace.front().total();
  rep["final_loss"] = r.train.trace.back().total();
  rep["metrics"] = metrics_json(r, config.mode);
  rep["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& p : {a.assignments, a.metrics, a.loss}) {
    rep["artifacts"].push_back(p.filename().string());
  }
  if (a.affinity) rep["artifacts"].push_back(a.affinity->filename().string());
  write_text(a.report, rep.dump(2) + "\n");
  return a;
}

inline void write_failure_report(const TrainConfig& config, const std::string& source,
                                 const std::filesystem::path& dir, const std::string& message) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  nlohmann::ordered_json rep;
  rep["status"] = "error";
  rep["source"] = source;
  rep["config"] = config_to_json(config);
  rep["error"] = message;
  std::ofstream(dir / "report.json", std::ios::trunc) << rep.dump(2) << "\n";
}

}  // namespace fusesc
