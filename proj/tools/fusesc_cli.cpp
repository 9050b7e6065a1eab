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

// Command-line driver: cluster, sweep, ablate and generate.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fusesc/fusesc.hpp>

namespace fs = std::filesystem;
using namespace fusesc;

namespace {

struct CommonOptions {
  std::string features;
  std::string synthetic;
  TrainConfig config;
  std::string mode = "fused";
  std::string out = "runs";
  bool emit_affinity = false;
  std::string anchors;
  int top = 5;
};

void add_common(CLI::App* app, CommonOptions& o) {
  auto* src = app->add_option_group("source");
  src->add_option("--features", o.features, "Feature bundle directory");
  src->add_option("--synthetic", o.synthetic, "Synthetic preset (only 'default')");
  src->require_option(1);
  app->add_option("--k", o.config.k, "KNN neighbor count")->capture_default_str();
  app->add_option("--lambda1", o.config.lambda1, "Content reconstruction weight")->capture_default_str();
  app->add_option("--lambda2", o.config.lambda2, "Structure reconstruction weight")->capture_default_str();
  app->add_option("--lr", o.config.lr, "Adam learning rate")->capture_default_str();
  app->add_option("--epochs", o.config.epochs, "Full-batch training steps")->capture_default_str();
  app->add_option("--clusters", o.config.clusters,
                  "Cluster count (default: number of label classes)");
  app->add_option("--seed", o.config.seed, "Seed for initialization, k-means and synthetic data")
      ->capture_default_str();
  app->add_option("--mode", o.mode, "fused | content_only | raw_baseline")->capture_default_str();
  app->add_option("--hidden", o.config.hidden, "GCN output width (0: min layer width)");
  app->add_flag("--zero-diagonal", o.config.zero_diagonal, "Zero diag(C) after every step");
  app->add_option("--checkpoint-every", o.config.checkpoint_every,
                  "Write parameters every N epochs (0: never)");
  app->add_option("--out", o.out, "Output root; runs go to <out>/<config hash>")->capture_default_str();
  app->add_flag("--emit-affinity", o.emit_affinity, "Write affinity.pgm");
}

struct Source {
  FeatureBundle bundle;
  std::string tag;
};

Source load_source(const CommonOptions& o) {
  Source s;
  if (!o.features.empty()) {
    s.bundle = load_bundle(o.features);
    s.tag = "features:" + o.features;
  } else {
    if (o.synthetic != "default") {
      throw Error("unknown synthetic preset '" + o.synthetic + "' (expected 'default')");
    }
    SubspaceSpec spec;
    spec.seed = o.config.seed;
    s.bundle = generate(spec).bundle;
    s.tag = "synthetic:default:seed=" + std::to_string(o.config.seed);
  }
  return s;
}

TrainConfig resolve_config(const CommonOptions& o, const FeatureBundle& bundle) {
  TrainConfig c = o.config;
  c.mode = parse_mode(o.mode);
  if (c.clusters == 0) {
    if (!bundle.labels) throw Error("--clusters is required when the bundle has no labels");
    c.clusters = bundle.num_classes();
  }
  c.validate(bundle.n());
  return c;
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoll(item));
  }
  return out;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string metric_text(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

void write_neighbors(const Matrix& c, const std::vector<Index>& anchors, int top,
                     const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << "anchor,kind,rank,index,coefficient,degenerate\n";
  for (const auto& e : neighbor_report(c, anchors, top)) {
    for (std::size_t r = 0; r < e.top.size(); ++r) {
      out << e.anchor << ",top," << r << ',' << e.top[r] << ',' << format_double(c(e.top[r], e.anchor))
          << ',' << e.degenerate << '\n';
    }
    for (std::size_t r = 0; r < e.bottom.size(); ++r) {
      out << e.anchor << ",bottom," << r << ',' << e.bottom[r] << ','
          << format_double(c(e.bottom[r], e.anchor)) << ',' << e.degenerate << '\n';
    }
  }
}

int cmd_cluster(const CommonOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = load_source(o);
  TrainConfig config = resolve_config(o, src.bundle);
  const fs::path dir = fs::path(o.out) / config_hash(config, src.tag);
  if (config.checkpoint_every > 0) config.checkpoint_dir = dir;
  PipelineResult r;
  try {
    r = run_pipeline(src.bundle, config);
  } catch (const std::exception& e) {
    write_failure_report(config, src.tag, dir, e.what());
    throw;
  }
  const auto artifacts = write_run(r, config, src.tag, dir, o.emit_affinity);
  if (!o.anchors.empty()) {
    write_neighbors(r.train.fused(), parse_index_list(o.anchors), o.top, dir / "neighbors.csv");
  }
  std::cout << "mode=" << to_string(config.mode) << " n=" << r.n << " k=" << config.clusters
            << " acc=" << metric_text(r.acc) << " nmi=" << metric_text(r.nmi)
            << " loss " << format_double(r.train.trace.front().total()) << " -> "
            << format_double(r.train.trace.back().total()) << "\n"
            << "run directory: " << dir.string() << "\n"
            << "report: " << artifacts.report.string() << "\n"
            << "wall-clock: " << seconds_since(t0) << " s\n";
  if (r.cluster.degenerate) std::cout << "warning: spectral embedding is degenerate\n";
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& axis, const std::string& values_text,
              bool values_given) {
  std::vector<double> values;
  if (axis == "K") {
    values = {3, 5, 8, 10, 15, 20};
  } else if (axis == "lambda1" || axis == "lambda2") {
    values = {0.01, 0.1, 1, 10, 100};
  } else {
    throw Error("unknown sweep axis '" + axis + "' (expected K, lambda1, lambda2)");
  }
  if (values_given) values = parse_value_list(values_text);
  if (values.empty()) throw Error("sweep axis has no values");

  const auto t0 = std::chrono::steady_clock::now();
  const auto src = load_source(o);
  const TrainConfig base = resolve_config(o, src.bundle);
  std::string values_key;
  for (double v : values) values_key += format_double(v) + ",";
  const fs::path dir =
      fs::path(o.out) / config_hash(base, src.tag + "|sweep:" + axis + "=" + values_key);
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv", std::ios::trunc);
  csv << "param,value,acc,nmi\n";
  for (double v : values) {
    TrainConfig c = base;
    if (axis == "K") {
      c.k = static_cast<Index>(v);
    } else if (axis == "lambda1") {
      c.lambda1 = v;
    } else {
      c.lambda2 = v;
    }
    c.validate(src.bundle.n());
    const auto r = run_pipeline(src.bundle, c);
    csv << axis << ',' << format_double(v) << ',' << metric_text(r.acc) << ',' << metric_text(r.nmi)
        << '\n';
    std::cout << axis << "=" << format_double(v) << " acc=" << metric_text(r.acc)
              << " nmi=" << metric_text(r.nmi) << "\n";
  }
  std::cout << "sweep: " << (dir / "sweep.csv").string() << "\n"
            << "wall-clock: " << seconds_since(t0) << " s\n";
  return 0;
}

int cmd_ablate(const CommonOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = load_source(o);
  TrainConfig base = resolve_config(o, src.bundle);
  base.mode = Mode::kFused;
  const fs::path dir = fs::path(o.out) / config_hash(base, src.tag + "|ablate");
  fs::create_directories(dir);
  std::ofstream csv(dir / "ablation.csv", std::ios::trunc);
  csv << "mode,acc,nmi\n";
  for (Mode m : {Mode::kContentOnly, Mode::kFused}) {
    TrainConfig c = base;
    c.mode = m;
    const auto r = run_pipeline(src.bundle, c);
    csv << to_string(m) << ',' << metric_text(r.acc) << ',' << metric_text(r.nmi) << '\n';
    std::cout << to_string(m) << " acc=" << metric_text(r.acc) << " nmi=" << metric_text(r.nmi)
              << "\n";
  }
  std::cout << "ablation: " << (dir / "ablation.csv").string() << "\n"
            << "wall-clock: " << seconds_since(t0) << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fused self-expressive subspace clustering"};
  app.require_subcommand(1);

  CommonOptions cluster_opts;
  auto* cluster = app.add_subcommand("cluster", "Train, cluster and evaluate one configuration");
  add_common(cluster, cluster_opts);
  cluster->add_option("--anchors", cluster_opts.anchors,
                      "Comma-separated sample indices for the neighbor report");
  cluster->add_option("--top", cluster_opts.top, "Neighbors per anchor")->capture_default_str();

  CommonOptions sweep_opts;
  std::string axis, values;
  auto* sweep = app.add_subcommand("sweep", "Run one configuration per value of a parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "K | lambda1 | lambda2")->required();
  auto* values_opt = sweep->add_option("--values", values, "Comma-separated values (default grid)");

  CommonOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "Compare content_only against fused");
  add_common(ablate, ablate_opts);

  SubspaceSpec gen_spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic union-of-subspaces bundle");
  gen->add_option("--out", gen_out, "Bundle directory")->required();
  gen->add_option("--seed", gen_spec.seed)->capture_default_str();
  gen->add_option("--ambient-dim", gen_spec.ambient_dim)->capture_default_str();
  gen->add_option("--subspace-dim", gen_spec.subspace_dim)->capture_default_str();
  gen->add_option("--clusters", gen_spec.clusters)->capture_default_str();
  gen->add_option("--per-cluster", gen_spec.per_cluster)->capture_default_str();
  gen->add_option("--noise", gen_spec.noise_sigma)->capture_default_str();
  gen->add_option("--corruption", gen_spec.structure_corruption)->capture_default_str();
  gen->add_option("--feature-scale", gen_spec.feature_scale)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cluster->parsed()) return cmd_cluster(cluster_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, axis, values, values_opt->count() > 0);
    if (ablate->parsed()) return cmd_ablate(ablate_opts);
    if (gen->parsed()) {
      save_synthetic(generate(gen_spec), gen_out);
      std::cout << "bundle: " << gen_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
