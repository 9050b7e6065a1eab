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

#include <random>

#include <gtest/gtest.h>

#include <fusesc/metrics.hpp>
#include <fusesc/spectral.hpp>
#include <fusesc/synthetic.hpp>

#include "test_util.hpp"

namespace fusesc {
namespace {

using testing::random_matrix;

Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix a = random_matrix(n, n, rng);
  return a + a.transpose();
}

TEST(SymmetricEigen, AgreesWithReferenceSolver) {
  std::mt19937_64 rng(40);
  for (Index n : {1, 2, 3, 7, 20, 64}) {
    const Matrix a = random_symmetric(n, rng);
    const auto mine = symmetric_eigen(a);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    EXPECT_LE((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10) << "n=" << n;
    EXPECT_LE((a * mine.vectors - mine.vectors * mine.values.asDiagonal()).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LE((mine.vectors.transpose() * mine.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(SymmetricEigen, HandlesRepeatedAndDiagonal) {
  Matrix d = Matrix::Zero(4, 4);
  d.diagonal() << 3, -1, 3, 0;
  const auto e = symmetric_eigen(d);
  EXPECT_TRUE(e.values.isApprox((Vector(4) << -1, 0, 3, 3).finished()));
  const auto ones = symmetric_eigen(Matrix::Ones(4, 4));
  EXPECT_NEAR(ones.values(3), 4.0, 1e-12);
  EXPECT_NEAR(ones.values.head(3).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(SymmetricEigen, IterationCapReported) {
  std::mt19937_64 rng(41);
  EigenOptions opt;
  opt.max_iterations = 1;
  EXPECT_THROW(symmetric_eigen(random_symmetric(10, rng), opt), NumericError);
  EXPECT_THROW(symmetric_eigen(Matrix::Ones(2, 3)), ShapeError);
}

TEST(BuildAffinity, Examples) {
  EXPECT_TRUE(build_affinity(Matrix::Zero(3, 3)).w.isZero(0.0));
  Matrix c(2, 2);
  c << 0, -2, 1, 0;
  Matrix expected(2, 2);
  expected << 0, 3, 3, 0;
  EXPECT_TRUE(build_affinity(c).w == expected);

  std::mt19937_64 rng(29);
  const Matrix w = build_affinity(random_matrix(5, 5, rng)).w;
  EXPECT_TRUE(w == w.transpose());
  EXPECT_GE(w.minCoeff(), 0.0);

  c(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(build_affinity(c), NumericError);
}

TEST(NormalizedLaplacian, SpectrumInZeroTwo) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix w = build_affinity(random_matrix(15, 15, rng)).w;
    if (trial % 3 == 0) {
      w.row(4).setZero();
      w.col(4).setZero();
    }
    const auto e = symmetric_eigen(normalized_laplacian(w));
    EXPECT_GE(e.values.minCoeff(), -1e-9);
    EXPECT_LE(e.values.maxCoeff(), 2.0 + 1e-9);
  }
}

Matrix block_diagonal(const std::vector<Index>& sizes) {
  Index n = 0;
  for (auto s : sizes) n += s;
  Matrix w = Matrix::Zero(n, n);
  Index off = 0;
  for (auto s : sizes) {
    w.block(off, off, s, s).setOnes();
    off += s;
  }
  return w;
}

TEST(SpectralCluster, TwoBlocks) {
  const auto r = spectral_cluster({block_diagonal({2, 2})}, 2);
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[2], r.assignments[3]);
  EXPECT_NE(r.assignments[0], r.assignments[2]);
  EXPECT_FALSE(r.degenerate);
}

TEST(SpectralCluster, RecoversComponentsExactly) {
  std::mt19937_64 rng(43);
  for (Index k : {2, 3, 5}) {
    std::vector<Index> sizes;
    std::vector<int> truth;
    for (Index c = 0; c < k; ++c) {
      sizes.push_back(4 + 3 * c);
      truth.insert(truth.end(), static_cast<std::size_t>(4 + 3 * c), static_cast<int>(c));
    }
    // Random positive weights inside each block.
    Matrix w = block_diagonal(sizes);
    const Matrix noise = random_matrix(w.rows(), w.cols(), rng, 0.1, 1.0);
    w = w.cwiseProduct(noise + noise.transpose());
    const auto r = spectral_cluster({w}, k);
    EXPECT_EQ(clustering_accuracy(truth, r.assignments), 1.0) << "k=" << k;
  }
}

TEST(SpectralCluster, PerfectSubspaceCoefficients) {
  SubspaceSpec spec;
  spec.clusters = 3;
  spec.per_cluster = 30;
  spec.noise_sigma = 0.0;
  const auto data = generate(spec);
  const Matrix x = to_columns(data.bundle.content);
  Matrix c = Matrix::Zero(90, 90);
  for (Index k = 0; k < 3; ++k) {
    const Matrix xc = x.middleCols(30 * k, 30);
    c.block(30 * k, 30 * k, 30, 30) = xc.completeOrthogonalDecomposition().pseudoInverse() * xc;
  }
  const auto r = spectral_cluster(build_affinity(c), 3);
  const auto truth = std::vector<int>(data.bundle.labels->begin(), data.bundle.labels->end());
  EXPECT_EQ(clustering_accuracy(truth, r.assignments), 1.0);
}

TEST(SpectralCluster, AllOnesIsDegenerateButSplits) {
  const auto r = spectral_cluster({Matrix::Ones(4, 4)}, 2);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(num_labels(r.assignments), 2);
  EXPECT_NE(std::count(r.assignments.begin(), r.assignments.end(), 0), 0);
  EXPECT_NE(std::count(r.assignments.begin(), r.assignments.end(), 1), 0);
}

TEST(SpectralCluster, DeterministicAndValidated) {
  std::mt19937_64 rng(44);
  const Affinity a = build_affinity(random_matrix(25, 25, rng));
  const auto r1 = spectral_cluster(a, 4);
  const auto r2 = spectral_cluster(a, 4);
  EXPECT_EQ(r1.assignments, r2.assignments);
  EXPECT_TRUE(r1.embedding == r2.embedding);
  EXPECT_THROW(spectral_cluster(a, 26), Error);
  EXPECT_THROW(spectral_cluster(a, 1), Error);
  Matrix bad = a.w;
  bad(0, 1) += 1.0;
  EXPECT_THROW(spectral_cluster({bad}, 2), Error);
}

TEST(SpectralCluster, EmbeddingRowsUnitOrZero) {
  Matrix w = block_diagonal({3, 3});
  w.row(5).setZero();
  w.col(5).setZero();
  const auto r = spectral_cluster({w}, 3);
  for (Index i = 0; i < r.embedding.rows(); ++i) {
    const double norm = r.embedding.row(i).norm();
    EXPECT_TRUE(norm == 0.0 || std::abs(norm - 1.0) < 1e-12);
  }
}

TEST(KMeans, SeparatedBlobs) {
  std::mt19937_64 rng(45);
  Matrix x(30, 2);
  std::vector<int> truth;
  for (Index i = 0; i < 30; ++i) {
    const int c = static_cast<int>(i / 10);
    x.row(i) = random_matrix(1, 2, rng, -0.1, 0.1) + Eigen::RowVector2d(5.0 * c, -3.0 * c);
    truth.push_back(c);
  }
  const auto r = kmeans(x, 3);
  EXPECT_EQ(clustering_accuracy(truth, r.labels), 1.0);
  EXPECT_EQ(r.labels, kmeans(x, 3).labels);
  EXPECT_THROW(kmeans(x, 31), Error);
}

TEST(KMeans, IdenticalPointsStillFillEveryCluster) {
  const auto r = kmeans(Matrix::Ones(6, 2), 3);
  for (int c = 0; c < 3; ++c) EXPECT_NE(std::count(r.labels.begin(), r.labels.end(), c), 0);
  EXPECT_EQ(r.inertia, 0.0);
}

TEST(AffinityExport, PgmHeaderAndScaling) {
  const auto path = std::filesystem::temp_directory_path() / "fusesc_aff.pgm";
  Matrix w(2, 3);
  w << 0, 1, 2, 4, 2, 0;
  write_affinity_pgm(w, path);
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 6);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 3]), 255);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 1]), 64);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fusesc
