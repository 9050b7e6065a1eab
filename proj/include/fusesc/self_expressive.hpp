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

// Self-expressive objective. Features are d x n with samples as columns, so
// the reconstruction of every sample from the others is F * C.
//
//   L = |C_A|_1 + l1 |F_A - F_A C_A|_F^2
//     + |C_S|_1 + l2 |F_S - F_S C_S|_F^2
//     + |C_A + C_S|_1

#include "common.hpp"

namespace fusesc {

struct SelfExpressiveState {
  Matrix c_a;
  Matrix c_s;
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  // Always derived, never stored.
  Matrix fused() const { return c_a + c_s; }
};

struct LossBreakdown {
  double l1_content = 0.0;
  double recon_content = 0.0;
  double l1_structure = 0.0;
  double recon_structure = 0.0;
  double l1_fused = 0.0;
  bool has_structure = true;

  double total() const {
    double t = l1_content + recon_content;
    if (has_structure) t += l1_structure + recon_structure + l1_fused;
    return t;
  }
};

namespace detail {

inline void check_se_shapes(const Matrix& f, const Matrix& c, const char* what) {
  if (c.rows() != f.cols() || c.cols() != f.cols()) {
    throw ShapeError(std::string(what) + ": coefficients " + shape_str(c) + " do not match " +
                     std::to_string(f.cols()) + " samples");
  }
}

}  // namespace detail

inline double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

inline double reconstruction_error(const Matrix& f, const Matrix& c) {
  return (f - f * c).squaredNorm();
}

/// |C|_1 + lambda |F - F C|_F^2
inline double se_loss(const Matrix& f, const Matrix& c, double lambda) {
  detail::check_se_shapes(f, c, "se_loss");
  return l1_norm(c) + lambda * reconstruction_error(f, c);
}

inline LossBreakdown total_loss(const Matrix& f_a, const Matrix& f_s,
                                const SelfExpressiveState& s) {
  detail::check_se_shapes(f_a, s.c_a, "total_loss (content)");
  detail::check_se_shapes(f_s, s.c_s, "total_loss (structure)");
  LossBreakdown b;
  b.l1_content = l1_norm(s.c_a);
  b.recon_content = s.lambda1 * reconstruction_error(f_a, s.c_a);
  b.l1_structure = l1_norm(s.c_s);
  b.recon_structure = s.lambda2 * reconstruction_error(f_s, s.c_s);
  b.l1_fused = l1_norm(s.fused());
  return b;
}

/// Content-only objective: the first two terms alone.
inline LossBreakdown content_loss(const Matrix& f_a, const SelfExpressiveState& s) {
  detail::check_se_shapes(f_a, s.c_a, "content_loss");
  LossBreakdown b;
  b.has_structure = false;
  b.l1_content = l1_norm(s.c_a);
  b.recon_content = s.lambda1 * reconstruction_error(f_a, s.c_a);
  return b;
}

struct LossGrad {
  Matrix c_a;
  Matrix c_s;
  Matrix f_s;  // d x n, same layout as F_S
};

/// Subgradients use sign(0) = 0.
inline LossGrad total_loss_grad(const Matrix& f_a, const Matrix& f_s,
                                const SelfExpressiveState& s) {
  detail::check_se_shapes(f_a, s.c_a, "total_loss_grad (content)");
  detail::check_se_shapes(f_s, s.c_s, "total_loss_grad (structure)");
  const Matrix fused_sign = sign0(s.fused());
  const Matrix res_a = f_a - f_a * s.c_a;
  const Matrix res_s = f_s - f_s * s.c_s;
  const Index n = s.c_s.rows();
  LossGrad g;
  g.c_a = sign0(s.c_a) - 2.0 * s.lambda1 * (f_a.transpose() * res_a) + fused_sign;
  g.c_s = sign0(s.c_s) - 2.0 * s.lambda2 * (f_s.transpose() * res_s) + fused_sign;
  g.f_s = 2.0 * s.lambda2 * res_s * (Matrix::Identity(n, n) - s.c_s).transpose();
  return g;
}

inline Matrix content_loss_grad(const Matrix& f_a, const SelfExpressiveState& s) {
  detail::check_se_shapes(f_a, s.c_a, "content_loss_grad");
  return sign0(s.c_a) - 2.0 * s.lambda1 * (f_a.transpose() * (f_a - f_a * s.c_a));
}

}  // namespace fusesc
