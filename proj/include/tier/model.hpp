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

#ifndef TIER_MODEL_HPP_
#define TIER_MODEL_HPP_

// Score predictor: text and image features are concatenated (text first)
// and regressed to a scalar by a two-layer head D -> floor(D/2) -> 1.
// The baseline variant drops the text branch and regresses image features
// alone.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tier/encoders.hpp"
#include "tier/image.hpp"
#include "tier/tensor.hpp"

namespace tier {

enum class Variant { kTier, kBaseline };
enum class Activation { kRelu, kNone };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view text);
std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view text);

struct ModelSpec {
  Variant variant = Variant::kTier;
  std::optional<EncoderSpec> text_encoder;
  EncoderSpec image_encoder;
  Activation activation = Activation::kRelu;

  int fused_dim() const;
  int head_hidden_dim() const;
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

// Hidden width for fused dim D: floor(D/2), at least 1.
int hidden_dim_for(int fused_dim);

// Exact number of scalars in a head over D inputs.
long long head_parameter_count(int fused_dim);

struct RegressionHead {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  RowMatrix w1;           // hidden x D
  Eigen::VectorXd b1;     // hidden
  Eigen::RowVectorXd w2;  // 1 x hidden
  double b2 = 0.0;
  Activation activation = Activation::kRelu;

  RegressionHead() = default;
  // All-zero head.
  RegressionHead(int input_dim, Activation act);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  long long parameter_count() const;

  // w1, b1, w2, b2 in that order.
  std::vector<ParamBlock> blocks();
};

// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn
// from SplitMix64(seed) in the order w1 (row-major), b1, w2, b2.
RegressionHead init_head(int input_dim, Activation act, std::uint64_t seed);

// Text coordinates first, then image coordinates. Without text the image
// features are returned unchanged.
FeatureVector fuse_features(const std::optional<FeatureVector>& text, const FeatureVector& image);

double regress_score(const RegressionHead& head, const FeatureVector& fused);

// Intermediate activations of one forward pass, kept for backward.
struct HeadTrace {
  Eigen::VectorXd pre;   // w1 x + b1
  Eigen::VectorXd post;  // activation(pre)
  double score = 0.0;
};

HeadTrace regress_trace(const RegressionHead& head, std::span<const double> fused);

// Accumulates d(loss)/d(head) into `grad` and writes d(loss)/d(fused)
// into `grad_fused` (may be empty to skip), given d(loss)/d(score).
void regress_backward(const RegressionHead& head, std::span<const double> fused, const HeadTrace& trace,
                      double grad_score, RegressionHead& grad, std::span<double> grad_fused);

struct Sample {
  std::optional<std::string> prompt;
  const Image* image = nullptr;
};

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);
  Model(ModelSpec spec, RegressionHead head, ParameterSet encoder_params);

  const ModelSpec& spec() const { return spec_; }
  const RegressionHead& head() const { return head_; }
  RegressionHead& head() { return head_; }
  const ParameterSet& encoder_params() const { return encoder_params_; }
  ParameterSet& encoder_params() { return encoder_params_; }

  std::optional<FeatureVector> encode_text(const std::optional<std::string>& prompt) const;
  FeatureVector encode_image(const Image& image) const;
  FeatureVector fused(const std::optional<std::string>& prompt, const Image& image) const;

  double predict(const std::optional<std::string>& prompt, const Image& image) const;
  std::vector<double> predict_batch(std::span<const Sample> samples) const;

  // Blocks for the head followed by trainable encoder tensors (name order).
  // With `include_encoders` false only the head is returned.
  std::vector<ParamBlock> parameters(bool include_encoders = true);

  // Empty gradient buffer shaped like this model.
  struct Gradient {
    RegressionHead head;
    ParameterSet encoders;
    std::vector<ParamBlock> blocks(bool include_encoders = true);
  };
  Gradient zero_gradient() const;

  // Forward one sample, then backpropagate d(loss)/d(score) =
  // `grad_score(prediction)`. Returns the prediction.
  double forward_backward(const std::optional<std::string>& prompt, const Image& image,
                          const std::function<double(double)>& grad_score, Gradient& grad,
                          bool through_encoders) const;

  bool has_trainable_encoders() const { return !encoder_params_.empty(); }

 private:
  void check_prompt(const std::optional<std::string>& prompt) const;

  ModelSpec spec_;
  RegressionHead head_;
  ParameterSet encoder_params_;
  std::shared_ptr<const TextEncoder> text_;
  std::shared_ptr<const ImageEncoder> image_;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tier

#endif  // TIER_MODEL_HPP_
