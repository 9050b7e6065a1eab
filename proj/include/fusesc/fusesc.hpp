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

#include "adam.hpp"
#include "common.hpp"
#include "feature_io.hpp"
#include "gcn.hpp"
#include "kmeans.hpp"
#include "knn_graph.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "self_expressive.hpp"
#include "spectral.hpp"
#include "symmetric_eigen.hpp"
#include "synthetic.hpp"
#include "train.hpp"
