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

#include "tier/model.hpp"

#include <cmath>

#include "json.hpp"
#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/json_io.hpp"
#include "tier/rng.hpp"

namespace tier {

std::string_view to_string(Variant variant) { return variant == Variant::kTier ? "tier" : "baseline"; }

Variant parse_variant(std::string_view text) {
  if (text == "tier") return Variant::kTier;
  if (text == "baseline") return Variant::kBaseline;
  throw ValidationError("unknown model variant '" + std::string(text) + "'");
}

std::string_view to_string(Activation activation) { return activation == Activation::kRelu ? "relu" : "none"; }

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::kRelu;
  if (text == "none") return Activation::kNone;
  throw ValidationError("unknown activation '" + std::string(text) + "'");
}

int ModelSpec::fused_dim() const {
  return (text_encoder ? text_encoder->output_dim : 0) + image_encoder.output_dim;
}

int ModelSpec::head_hidden_dim() const { return hidden_dim_for(fused_dim()); }

void ModelSpec::validate() const {
  if (variant == Variant::kTier && !text_encoder) throw ValidationError("tier variant requires a text encoder");
  if (variant == Variant::kBaseline && text_encoder) throw ValidationError("baseline variant takes no text encoder");
  if (text_encoder) {
    if (text_encoder->modality != Modality::kText) throw ValidationError("text_encoder must have text modality");
    tier::validate(*text_encoder);
  }
  if (image_encoder.modality != Modality::kImage) throw ValidationError("image_encoder must have image modality");
  tier::validate(image_encoder);
  if (fused_dim() < 2) throw ValidationError("fused feature dim must be at least 2");
}

int hidden_dim_for(int fused_dim) { return std::max(1, fused_dim / 2); }

long long head_parameter_count(int fused_dim) {
  const long long d = fused_dim;
  const long long h = hidden_dim_for(fused_dim);
  return d * h + h + h + 1;
}

RegressionHead::RegressionHead(int input_dim, Activation act)
    : w1(RowMatrix::Zero(hidden_dim_for(input_dim), input_dim)),
      b1(Eigen::VectorXd::Zero(hidden_dim_for(input_dim))),
      w2(Eigen::RowVectorXd::Zero(hidden_dim_for(input_dim))),
      activation(act) {
  if (input_dim < 1) throw ValidationError("head input dim must be positive");
}

long long RegressionHead::parameter_count() const {
  return static_cast<long long>(w1.size() + b1.size() + w2.size()) + 1;
}

std::vector<ParamBlock> RegressionHead::blocks() {
  return {
      {"head.fc1.weight", {w1.data(), static_cast<std::size_t>(w1.size())}},
      {"head.fc1.bias", {b1.data(), static_cast<std::size_t>(b1.size())}},
      {"head.fc2.weight", {w2.data(), static_cast<std::size_t>(w2.size())}},
      {"head.fc2.bias", {&b2, 1}},
  };
}

RegressionHead init_head(int input_dim, Activation act, std::uint64_t seed) {
  RegressionHead head(input_dim, act);
  SplitMix64 rng(seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(head.hidden_dim()));
  for (Eigen::Index i = 0; i < head.w1.size(); ++i) head.w1.data()[i] = rng.uniform(-a1, a1);
  for (Eigen::Index i = 0; i < head.b1.size(); ++i) head.b1[i] = rng.uniform(-a1, a1);
  for (Eigen::Index i = 0; i < head.w2.size(); ++i) head.w2[i] = rng.uniform(-a2, a2);
  head.b2 = rng.uniform(-a2, a2);
  return head;
}

FeatureVector fuse_features(const std::optional<FeatureVector>& text, const FeatureVector& image) {
  if (image.modality != Modality::kImage) throw ValidationError("fuse_features: image slot holds text features");
  if (!text) return image;
  if (text->modality != Modality::kText) throw ValidationError("fuse_features: text slot holds image features");
  FeatureVector out;
  out.modality = Modality::kImage;
  out.values.reserve(text->dim() + image.dim());
  out.values.insert(out.values.end(), text->values.begin(), text->values.end());
  out.values.insert(out.values.end(), image.values.begin(), image.values.end());
  return out;
}

HeadTrace regress_trace(const RegressionHead& head, std::span<const double> fused) {
  if (static_cast<Eigen::Index>(fused.size()) != head.w1.cols()) {
    throw ValidationError("regress_score: fused dim " + std::to_string(fused.size()) + " != head input dim " +
                          std::to_string(head.w1.cols()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(fused.data(), static_cast<Eigen::Index>(fused.size()));
  HeadTrace t;
  t.pre = head.w1 * x + head.b1;
  t.post = head.activation == Activation::kRelu ? Eigen::VectorXd(t.pre.cwiseMax(0.0)) : t.pre;
  t.score = head.w2.dot(t.post) + head.b2;
  return t;
}

double regress_score(const RegressionHead& head, const FeatureVector& fused) {
  return regress_trace(head, fused.values).score;
}

void regress_backward(const RegressionHead& head, std::span<const double> fused, const HeadTrace& trace,
                      double grad_score, RegressionHead& grad, std::span<double> grad_fused) {
  const Eigen::Map<const Eigen::VectorXd> x(fused.data(), static_cast<Eigen::Index>(fused.size()));
  grad.b2 += grad_score;
  grad.w2 += grad_score * trace.post.transpose();
  Eigen::VectorXd d_pre = grad_score * head.w2.transpose();
  if (head.activation == Activation::kRelu) {
    for (Eigen::Index i = 0; i < d_pre.size(); ++i) {
      if (trace.pre[i] <= 0.0) d_pre[i] = 0.0;
    }
  }
  grad.b1 += d_pre;
  grad.w1 += d_pre * x.transpose();
  if (!grad_fused.empty()) {
    Eigen::Map<Eigen::VectorXd> dx(grad_fused.data(), static_cast<Eigen::Index>(grad_fused.size()));
    dx = head.w1.transpose() * d_pre;
  }
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  head_ = init_head(spec_.fused_dim(), spec_.activation, seed);
  if (spec_.text_encoder) text_ = make_text_encoder(*spec_.text_encoder);
  image_ = make_image_encoder(spec_.image_encoder);
  if (text_) text_->init_params(encoder_params_);
  image_->init_params(encoder_params_);
}

Model::Model(ModelSpec spec, RegressionHead head, ParameterSet encoder_params)
    : spec_(std::move(spec)), head_(std::move(head)), encoder_params_(std::move(encoder_params)) {
  spec_.validate();
  if (head_.input_dim() != spec_.fused_dim() || head_.hidden_dim() != spec_.head_hidden_dim()) {
    throw ValidationError("head shape does not match fused dim " + std::to_string(spec_.fused_dim()));
  }
  if (head_.activation != spec_.activation) throw ValidationError("head activation differs from spec");
  if (spec_.text_encoder) text_ = make_text_encoder(*spec_.text_encoder);
  image_ = make_image_encoder(spec_.image_encoder);
  ParameterSet expected;
  if (text_) text_->init_params(expected);
  image_->init_params(expected);
  for (const auto& [name, t] : expected) {
    auto it = encoder_params_.find(name);
    if (it == encoder_params_.end() || it->second.shape != t.shape) {
      throw ValidationError("encoder parameter '" + name + "' missing or misshaped");
    }
  }
  if (expected.size() != encoder_params_.size()) throw ValidationError("unexpected encoder parameters");
}

void Model::check_prompt(const std::optional<std::string>& prompt) const {
  if (spec_.variant == Variant::kTier && (!prompt || prompt->empty())) {
    throw ValidationError("tier variant needs a text prompt");
  }
}

std::optional<FeatureVector> Model::encode_text(const std::optional<std::string>& prompt) const {
  if (!text_) return std::nullopt;
  check_prompt(prompt);
  return text_->encode(*prompt, encoder_params_);
}

FeatureVector Model::encode_image(const Image& image) const { return image_->encode(image, encoder_params_); }

FeatureVector Model::fused(const std::optional<std::string>& prompt, const Image& image) const {
  check_prompt(prompt);
  return fuse_features(encode_text(prompt), encode_image(image));
}

double Model::predict(const std::optional<std::string>& prompt, const Image& image) const {
  return regress_score(head_, fused(prompt, image));
}

std::vector<double> Model::predict_batch(std::span<const Sample> samples) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(s.prompt, *s.image));
  return out;
}

std::vector<ParamBlock> Model::parameters(bool include_encoders) {
  auto blocks = head_.blocks();
  if (include_encoders) {
    for (auto& [name, t] : encoder_params_) blocks.push_back({name, t.data});
  }
  return blocks;
}

std::vector<ParamBlock> Model::Gradient::blocks(bool include_encoders) {
  auto out = head.blocks();
  if (include_encoders) {
    for (auto& [name, t] : encoders) out.push_back({name, t.data});
  }
  return out;
}

Model::Gradient Model::zero_gradient() const {
  Gradient g;
  g.head = RegressionHead(head_.input_dim(), head_.activation);
  for (const auto& [name, t] : encoder_params_) g.encoders.emplace(name, Tensor(t.shape));
  return g;
}

double Model::forward_backward(const std::optional<std::string>& prompt, const Image& image,
                               const std::function<double(double)>& grad_score, Gradient& grad,
                               bool through_encoders) const {
  const FeatureVector x = fused(prompt, image);
  const HeadTrace trace = regress_trace(head_, x.values);
  const double g = grad_score(trace.score);
  const bool encoders = through_encoders && has_trainable_encoders();
  std::vector<double> dx(encoders ? x.dim() : 0);
  regress_backward(head_, x.values, trace, g, grad.head, dx);
  if (encoders) {
    const std::size_t text_dim = text_ ? static_cast<std::size_t>(spec_.text_encoder->output_dim) : 0;
    const std::span<const double> d(dx);
    if (text_) text_->backward(*prompt, d.first(text_dim), encoder_params_, grad.encoders);
    image_->backward(image, d.subspan(text_dim), encoder_params_, grad.encoders);
  }
  return trace.score;
}

namespace {

nlohmann::json tensor_json(std::vector<std::size_t> shape, std::span<const double> data) {
  return {{"shape", shape}, {"data", std::vector<double>(data.begin(), data.end())}};
}

std::vector<double> tensor_data(const nlohmann::json& j, const std::string& name,
                                const std::vector<std::size_t>& shape) {
  if (!j.contains(name)) throw ValidationError("checkpoint lacks tensor '" + name + "'");
  const auto& t = j.at(name);
  if (t.at("shape").get<std::vector<std::size_t>>() != shape) {
    throw ValidationError("checkpoint tensor '" + name + "' has the wrong shape");
  }
  auto data = t.at("data").get<std::vector<double>>();
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  if (data.size() != n) throw ValidationError("checkpoint tensor '" + name + "' has the wrong size");
  return data;
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const auto& h = model.head();
  const auto hd = static_cast<std::size_t>(h.hidden_dim());
  const auto d = static_cast<std::size_t>(h.input_dim());
  nlohmann::json tensors;
  tensors["head.fc1.weight"] = tensor_json({hd, d}, {h.w1.data(), static_cast<std::size_t>(h.w1.size())});
  tensors["head.fc1.bias"] = tensor_json({hd}, {h.b1.data(), hd});
  tensors["head.fc2.weight"] = tensor_json({1, hd}, {h.w2.data(), hd});
  tensors["head.fc2.bias"] = tensor_json({1}, {&h.b2, 1});
  for (const auto& [name, t] : model.encoder_params()) tensors[name] = tensor_json(t.shape, t.data);

  const nlohmann::json doc = {
      {"format", "tier-checkpoint"},
      {"version", kCheckpointVersion},
      {"fused_dim", model.spec().fused_dim()},
      {"spec", model.spec()},
      {"tensors", tensors},
  };
  csv::write_file(path, doc.dump(1) + "\n");
}

Model load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (doc.value("format", "") != "tier-checkpoint") throw ValidationError("not a tier checkpoint: " + path.string());
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " + doc.at("version").dump());
    }
    ModelSpec spec = doc.at("spec").get<ModelSpec>();
    spec.validate();
    if (doc.at("fused_dim").get<int>() != spec.fused_dim()) {
      throw ValidationError("checkpoint fused_dim disagrees with its model spec");
    }
    const auto& tensors = doc.at("tensors");
    RegressionHead head(spec.fused_dim(), spec.activation);
    const auto hd = static_cast<std::size_t>(head.hidden_dim());
    const auto d = static_cast<std::size_t>(head.input_dim());
    auto w1 = tensor_data(tensors, "head.fc1.weight", {hd, d});
    std::copy(w1.begin(), w1.end(), head.w1.data());
    auto b1 = tensor_data(tensors, "head.fc1.bias", {hd});
    std::copy(b1.begin(), b1.end(), head.b1.data());
    auto w2 = tensor_data(tensors, "head.fc2.weight", {1, hd});
    std::copy(w2.begin(), w2.end(), head.w2.data());
    head.b2 = tensor_data(tensors, "head.fc2.bias", {1})[0];

    ParameterSet encoder_params;
    for (const auto& [name, t] : tensors.items()) {
      if (name.starts_with("head.")) continue;
      Tensor tensor(t.at("shape").get<std::vector<std::size_t>>());
      tensor.data = tensor_data(tensors, name, tensor.shape);
      encoder_params.emplace(name, std::move(tensor));
    }
    return Model(std::move(spec), std::move(head), std::move(encoder_params));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace tier
