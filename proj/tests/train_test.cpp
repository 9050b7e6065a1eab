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

#include <filesystem>

#include <gtest/gtest.h>

#include <fusesc/synthetic.hpp>
#include <fusesc/train.hpp>

#include "test_util.hpp"

namespace fusesc {
namespace {

SubspaceSpec small_spec(std::uint64_t seed = 0) {
  SubspaceSpec s;
  s.ambient_dim = 12;
  s.subspace_dim = 2;
  s.clusters = 3;
  s.per_cluster = 8;
  s.layer_dim = 6;
  s.seed = seed;
  return s;
}

TrainConfig small_config(Mode mode = Mode::kFused) {
  TrainConfig c;
  c.k = 4;
  c.lr = 1e-3;
  c.epochs = 40;
  c.clusters = 3;
  c.mode = mode;
  return c;
}

TEST(TrainGradients, EveryTensorMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    auto inst = testing::make_gradient_instance(seed, 10, 2);
    EXPECT_LE(testing::check_all_gradients(inst), 1e-4) << "seed " << seed;
  }
}

TEST(Train, OneEpochIsOneAdamStep) {
  const auto data = generate(small_spec());
  auto config = small_config();
  config.epochs = 1;
  const auto trained = train(data.bundle, config);

  const auto in = prepare_inputs(data.bundle, config);
  auto manual = init_training(in, config);
  const auto fwd = structure_forward(manual.structure, in.propagated, in.propagation);
  const auto lg = total_loss_grad(in.content, fwd.fused.transpose(), manual.state);
  const auto sg = structure_backward(manual.structure, fwd, lg.f_s.transpose());
  AdamState st;
  adam_step(manual.state.c_a, lg.c_a, st, config.lr);
  st = {};
  adam_step(manual.state.c_s, lg.c_s, st, config.lr);
  for (std::size_t i = 0; i < manual.structure.gcn.num_streams(); ++i) {
    st = {};
    adam_step(manual.structure.gcn.streams[i].w1, sg.gcn[i].w1, st, config.lr);
    st = {};
    adam_step(manual.structure.gcn.streams[i].w2, sg.gcn[i].w2, st, config.lr);
    st = {};
    adam_step(manual.structure.fusion.w[i], sg.fusion[i], st, config.lr);
  }
  EXPECT_TRUE(trained.state.c_a == manual.state.c_a);
  EXPECT_TRUE(trained.state.c_s == manual.state.c_s);
  for (std::size_t i = 0; i < manual.structure.gcn.num_streams(); ++i) {
    EXPECT_TRUE(trained.structure.gcn.streams[i].w1 == manual.structure.gcn.streams[i].w1);
    EXPECT_TRUE(trained.structure.gcn.streams[i].w2 == manual.structure.gcn.streams[i].w2);
    EXPECT_TRUE(trained.structure.fusion.w[i] == manual.structure.fusion.w[i]);
  }
  ASSERT_EQ(trained.trace.size(), 2u);
}

TEST(Train, DeterministicAcrossRuns) {
  const auto data = generate(small_spec(3));
  const auto a = train(data.bundle, small_config());
  const auto b = train(data.bundle, small_config());
  EXPECT_TRUE(a.state.c_a == b.state.c_a);
  EXPECT_TRUE(a.state.c_s == b.state.c_s);
  EXPECT_TRUE(a.structure.fusion.w[1] == b.structure.fusion.w[1]);
  EXPECT_EQ(a.trace.back().total(), b.trace.back().total());
}

TEST(Train, FusedMatrixIsDerived) {
  const auto data = generate(small_spec(4));
  const auto r = train(data.bundle, small_config());
  EXPECT_TRUE((r.fused() - (r.state.c_a + r.state.c_s)).isZero(0.0));
  for (const auto& b : r.trace) {
    EXPECT_NEAR(b.l1_content + b.recon_content + b.l1_structure + b.recon_structure + b.l1_fused,
                b.total(), 1e-12 * std::max(1.0, b.total()));
  }
}

TEST(Train, ContentOnlyTraceHasNoStructureTerms) {
  const auto data = generate(small_spec(5));
  const auto r = train(data.bundle, small_config(Mode::kContentOnly));
  EXPECT_TRUE(r.structure.gcn.streams.empty());
  EXPECT_TRUE(r.state.c_s.isZero(0.0));
  const Matrix fa = to_columns(data.bundle.content);
  for (const auto& b : r.trace) {
    EXPECT_FALSE(b.has_structure);
    EXPECT_EQ(b.l1_structure, 0.0);
    EXPECT_EQ(b.recon_structure, 0.0);
    EXPECT_EQ(b.l1_fused, 0.0);
  }
  EXPECT_NEAR(r.trace.back().total(), se_loss(fa, r.state.c_a, 1.0), 1e-9);
  EXPECT_TRUE(r.fused() == r.state.c_a);
}

TEST(Train, RawBaselineUsesFirstLayer) {
  const auto data = generate(small_spec(6));
  auto config = small_config(Mode::kRawBaseline);
  config.epochs = 1;
  const auto r = train(data.bundle, config);
  const Matrix raw = to_columns(data.bundle.layer_features.front());
  EXPECT_DOUBLE_EQ(r.trace.front().total(), raw.squaredNorm());
}

TEST(Train, LossDescendsOnSmallProblem) {
  const auto data = generate(small_spec(7));
  auto config = small_config();
  config.epochs = 400;
  const auto r = train(data.bundle, config);
  EXPECT_LT(r.trace.back().total(), 0.5 * r.trace.front().total());
}

TEST(Train, ZeroDiagonalSwitch) {
  const auto data = generate(small_spec(8));
  auto config = small_config();
  config.zero_diagonal = true;
  const auto r = train(data.bundle, config);
  EXPECT_TRUE(r.state.c_a.diagonal().isZero(0.0));
  EXPECT_TRUE(r.state.c_s.diagonal().isZero(0.0));
}

TEST(Train, CheckpointsWritten) {
  const auto dir = std::filesystem::temp_directory_path() / "fusesc_ckpt";
  std::filesystem::remove_all(dir);
  const auto data = generate(small_spec(9));
  auto config = small_config();
  config.epochs = 10;
  config.checkpoint_every = 5;
  config.checkpoint_dir = dir;
  train(data.bundle, config);
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint_5" / "c_a.bin"));
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint_10" / "fusion_2.bin"));
  const auto c_a = read_f32_matrix(dir / "checkpoint_10" / "c_a.bin", 24, 24);
  EXPECT_EQ(c_a.rows(), 24);
  std::filesystem::remove_all(dir);
}

TEST(TrainConfig, Validation) {
  const auto data = generate(small_spec());
  auto c = small_config();
  c.clusters = 1;
  try {
    train(data.bundle, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("clusters must be >= 2"), std::string::npos);
  }
  c = small_config();
  c.lr = 0.0;
  EXPECT_THROW(train(data.bundle, c), Error);
  c = small_config();
  c.epochs = 0;
  EXPECT_THROW(train(data.bundle, c), Error);
  c = small_config();
  c.k = 24;
  EXPECT_THROW(train(data.bundle, c), Error);
  EXPECT_THROW(parse_mode("both"), Error);
  EXPECT_EQ(parse_mode("content_only"), Mode::kContentOnly);
}

TEST(LossCsv, Columns) {
  const auto path = std::filesystem::temp_directory_path() / "fusesc_loss.csv";
  LossBreakdown b;
  b.l1_content = 1.0;
  b.recon_content = 2.0;
  b.has_structure = false;
  write_loss_csv({b}, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "epoch,l1_content,recon_content,total");
  EXPECT_EQ(row, "0,1,2,3");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fusesc
