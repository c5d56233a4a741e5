// Copyright 2026 The TIER Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TIER_OPTIMIZER_HPP_
#define TIER_OPTIMIZER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tier/tensor.hpp"

namespace tier {

struct AdamConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with L2 weight decay folded into the gradient (g += wd * p), the
// same coupling as torch.optim.Adam's weight_decay argument.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // `params` and `grads` must line up block-for-block; state is created on
  // the first step and the block layout may not change afterwards.
  void step(std::span<const ParamBlock> params, std::span<const ParamBlock> grads);

  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace tier

#endif  // TIER_OPTIMIZER_HPP_
