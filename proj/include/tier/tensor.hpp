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

#ifndef TIER_TENSOR_HPP_
#define TIER_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace tier {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)),
        data(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>()), 0.0) {}

  std::size_t size() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

using ParameterSet = std::map<std::string, Tensor>;

// A named, mutable view of one parameter block. Optimizers and gradient
// buffers line up block-for-block by position.
struct ParamBlock {
  std::string name;
  std::span<double> values;
};

}  // namespace tier

#endif  // TIER_TENSOR_HPP_
