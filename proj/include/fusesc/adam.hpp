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

#include <cstdint>
#include <string_view>

#include "common.hpp"

namespace fusesc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for one parameter tensor.
struct AdamState {
  AdamConfig config;
  Matrix first;
  Matrix second;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of `param` in place. Throws before touching
/// anything if `grad` has a non-finite entry.
inline void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
                      std::string_view name = "param") {
  require_shape(grad, param.rows(), param.cols(), "adam_step: gradient of " + std::string(name));
  for (Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad.data()[i])) {
      throw NumericError("adam_step: non-finite gradient in " + std::string(name) +
                         " at flat index " + std::to_string(i));
    }
  }
  if (state.step == 0) {
    state.first = Matrix::Zero(param.rows(), param.cols());
    state.second = Matrix::Zero(param.rows(), param.cols());
  }
  const auto& c = state.config;
  ++state.step;
  state.first = c.beta1 * state.first + (1.0 - c.beta1) * grad;
  state.second = c.beta2 * state.second + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  const double eps = c.epsilon;
  param.array() -= lr * (state.first.array() / corr1) /
                   ((state.second.array() / corr2).sqrt() + eps);
}

}  // namespace fusesc
