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

#include "tier/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/rng.hpp"

namespace tier {
namespace {

struct Registered {
  Modality modality;
  std::string_view name;
  EncoderKind kind;
  int dim;  // 0 = configurable
};

// Pretrained dims are the backbones' pooled feature widths.
constexpr Registered kRegistry[] = {
    {Modality::kText, "toy", EncoderKind::kToy, 0},
    {Modality::kText, "toy-learnable", EncoderKind::kLearnable, 0},
    {Modality::kText, "bert-base", EncoderKind::kPretrained, 768},
    {Modality::kText, "bert-large", EncoderKind::kPretrained, 1024},
    {Modality::kImage, "toy", EncoderKind::kToy, 0},
    {Modality::kImage, "toy-learnable", EncoderKind::kLearnable, 0},
    {Modality::kImage, "resnet18", EncoderKind::kPretrained, 512},
    {Modality::kImage, "resnet50", EncoderKind::kPretrained, 2048},
    {Modality::kImage, "inceptionv4", EncoderKind::kPretrained, 1536},
};

const Registered* find_registered(Modality modality, std::string_view name) {
  for (const auto& r : kRegistry) {
    if (r.modality == modality && r.name == name) return &r;
  }
  return nullptr;
}

void require_modality(const EncoderSpec& spec, Modality want) {
  if (spec.modality != want) {
    throw ValidationError("encoder '" + spec.name + "' has modality " + std::string(to_string(spec.modality)) +
                          ", expected " + std::string(to_string(want)));
  }
}

std::vector<double> toy_text_table(const EncoderSpec& spec) {
  std::vector<double> table(kToyVocabulary * static_cast<std::size_t>(spec.output_dim));
  SplitMix64 rng(spec.seed);
  for (auto& v : table) v = rng.uniform(-1.0, 1.0);
  return table;
}

std::vector<double> toy_image_weights(const EncoderSpec& spec) {
  // projection (dim x 768) followed by bias (dim)
  const std::size_t dim = static_cast<std::size_t>(spec.output_dim);
  std::vector<double> w(dim * kToyPooledDim + dim);
  const double a = 1.0 / std::sqrt(static_cast<double>(kToyPooledDim));
  SplitMix64 rng(spec.seed);
  for (auto& v : w) v = rng.uniform(-a, a);
  return w;
}

std::vector<std::size_t> token_rows(std::string_view prompt) {
  std::vector<std::size_t> rows;
  for (const auto tok : whitespace_tokens(prompt)) rows.push_back(fnv1a64(tok) % kToyVocabulary);
  if (rows.empty()) throw ValidationError("empty prompt");
  return rows;
}

FeatureVector mean_rows(std::span<const double> table, std::span<const std::size_t> rows, std::size_t dim) {
  FeatureVector out{std::vector<double>(dim, 0.0), Modality::kText};
  for (const auto r : rows) {
    for (std::size_t j = 0; j < dim; ++j) out.values[j] += table[r * dim + j];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& v : out.values) v *= inv;
  return out;
}

FeatureVector project(std::span<const double> projection, std::span<const double> bias,
                      std::span<const double> pooled) {
  const std::size_t dim = bias.size();
  FeatureVector out{std::vector<double>(dim), Modality::kImage};
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = bias[i];
    const double* row = projection.data() + i * kToyPooledDim;
    for (std::size_t k = 0; k < kToyPooledDim; ++k) acc += row[k] * pooled[k];
    out.values[i] = acc;
  }
  return out;
}

const Tensor& param(const ParameterSet& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ValidationError("missing parameter tensor '" + name + "'");
  return it->second;
}

Tensor& grad_slot(ParameterSet& grads, const std::string& name, const Tensor& like) {
  auto [it, inserted] = grads.try_emplace(name, like.shape);
  return it->second;
}

class ToyTextEncoder final : public TextEncoder {
 public:
  explicit ToyTextEncoder(EncoderSpec spec) : spec_(std::move(spec)), table_(toy_text_table(spec_)) {}
  const EncoderSpec& spec() const override { return spec_; }
  FeatureVector encode(std::string_view prompt, const ParameterSet&) const override {
    const auto rows = token_rows(prompt);
    return mean_rows(table_, rows, static_cast<std::size_t>(spec_.output_dim));
  }

 private:
  EncoderSpec spec_;
  std::vector<double> table_;
};

class LearnableTextEncoder final : public TextEncoder {
 public:
  static constexpr const char* kTable = "text_encoder.embedding";

  explicit LearnableTextEncoder(EncoderSpec spec) : spec_(std::move(spec)) {}
  const EncoderSpec& spec() const override { return spec_; }

  void init_params(ParameterSet& params) const override {
    Tensor t({kToyVocabulary, static_cast<std::size_t>(spec_.output_dim)});
    t.data = toy_text_table(spec_);
    params[kTable] = std::move(t);
  }

  FeatureVector encode(std::string_view prompt, const ParameterSet& params) const override {
    const auto rows = token_rows(prompt);
    return mean_rows(param(params, kTable).data, rows, static_cast<std::size_t>(spec_.output_dim));
  }

  void backward(std::string_view prompt, std::span<const double> grad_features, const ParameterSet& params,
                ParameterSet& grads) const override {
    const auto rows = token_rows(prompt);
    Tensor& g = grad_slot(grads, kTable, param(params, kTable));
    const std::size_t dim = static_cast<std::size_t>(spec_.output_dim);
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (const auto r : rows) {
      for (std::size_t j = 0; j < dim; ++j) g.data[r * dim + j] += grad_features[j] * inv;
    }
  }

 private:
  EncoderSpec spec_;
};

class ToyImageEncoder final : public ImageEncoder {
 public:
  explicit ToyImageEncoder(EncoderSpec spec) : spec_(std::move(spec)), weights_(toy_image_weights(spec_)) {}
  const EncoderSpec& spec() const override { return spec_; }
  FeatureVector encode(const Image& image, const ParameterSet&) const override {
    const auto pooled = pool_to_grid(image);
    const std::size_t split = static_cast<std::size_t>(spec_.output_dim) * kToyPooledDim;
    const std::span<const double> w(weights_);
    return project(w.first(split), w.subspan(split), pooled);
  }

 private:
  EncoderSpec spec_;
  std::vector<double> weights_;
};

class LearnableImageEncoder final : public ImageEncoder {
 public:
  static constexpr const char* kProjection = "image_encoder.projection";
  static constexpr const char* kBias = "image_encoder.bias";

  explicit LearnableImageEncoder(EncoderSpec spec) : spec_(std::move(spec)) {}
  const EncoderSpec& spec() const override { return spec_; }

  void init_params(ParameterSet& params) const override {
    const auto dim = static_cast<std::size_t>(spec_.output_dim);
    const auto w = toy_image_weights(spec_);
    Tensor proj({dim, kToyPooledDim});
    std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(proj.size()), proj.data.begin());
    Tensor bias({dim});
    std::copy(w.begin() + static_cast<std::ptrdiff_t>(proj.size()), w.end(), bias.data.begin());
    params[kProjection] = std::move(proj);
    params[kBias] = std::move(bias);
  }

  FeatureVector encode(const Image& image, const ParameterSet& params) const override {
    return project(param(params, kProjection).data, param(params, kBias).data, pool_to_grid(image));
  }

  void backward(const Image& image, std::span<const double> grad_features, const ParameterSet& params,
                ParameterSet& grads) const override {
    const auto pooled = pool_to_grid(image);
    Tensor& gp = grad_slot(grads, kProjection, param(params, kProjection));
    Tensor& gb = grad_slot(grads, kBias, param(params, kBias));
    for (std::size_t i = 0; i < grad_features.size(); ++i) {
      gb.data[i] += grad_features[i];
      double* row = gp.data.data() + i * kToyPooledDim;
      for (std::size_t k = 0; k < kToyPooledDim; ++k) row[k] += grad_features[i] * pooled[k];
    }
  }

 private:
  EncoderSpec spec_;
};

// Rows of `key,f0,...,f{dim-1}` loaded once per adapter instance.
class FeatureTable {
 public:
  FeatureTable(const EncoderSpec& spec) : spec_(spec) {
    if (spec.feature_file.empty()) {
      throw ValidationError("pretrained encoder '" + spec.name +
                            "' needs a precomputed feature file (feature_file) in this build");
    }
    const auto rows = csv::parse(csv::read_file(spec.feature_file));
    const auto dim = static_cast<std::size_t>(spec.output_dim);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != dim + 1) {
        throw ValidationError(spec.feature_file + ": line " + std::to_string(r + 1) + " has " +
                              std::to_string(rows[r].size() - 1) + " features, expected " + std::to_string(dim));
      }
      std::vector<double> v(dim);
      for (std::size_t j = 0; j < dim; ++j) v[j] = csv::parse_double(rows[r][j + 1], spec.feature_file);
      features_.emplace(rows[r][0], std::move(v));
    }
  }

  FeatureVector lookup(const std::string& key) const {
    auto it = features_.find(key);
    if (it == features_.end()) {
      throw ValidationError("no precomputed " + spec_.name + " feature for '" + key + "'");
    }
    return {it->second, spec_.modality};
  }

 private:
  EncoderSpec spec_;
  std::unordered_map<std::string, std::vector<double>> features_;
};

class PretrainedTextEncoder final : public TextEncoder {
 public:
  explicit PretrainedTextEncoder(EncoderSpec spec) : spec_(std::move(spec)), table_(spec_) {}
  const EncoderSpec& spec() const override { return spec_; }
  FeatureVector encode(std::string_view prompt, const ParameterSet&) const override {
    if (prompt.empty()) throw ValidationError("empty prompt");
    return table_.lookup(std::string(prompt));
  }

 private:
  EncoderSpec spec_;
  FeatureTable table_;
};

class PretrainedImageEncoder final : public ImageEncoder {
 public:
  explicit PretrainedImageEncoder(EncoderSpec spec) : spec_(std::move(spec)), table_(spec_) {}
  const EncoderSpec& spec() const override { return spec_; }
  FeatureVector encode(const Image& image, const ParameterSet&) const override {
    validate_image(image);
    return table_.lookup(image.source);
  }

 private:
  EncoderSpec spec_;
  FeatureTable table_;
};

}  // namespace

std::string_view to_string(Modality modality) { return modality == Modality::kText ? "text" : "image"; }

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kToy: return "toy";
    case EncoderKind::kLearnable: return "learnable";
    case EncoderKind::kPretrained: break;
  }
  return "pretrained";
}

EncoderSpec make_encoder_spec(Modality modality, std::string_view name, std::optional<int> dim) {
  const Registered* r = find_registered(modality, name);
  if (r == nullptr) {
    throw ValidationError("unknown " + std::string(to_string(modality)) + " encoder '" + std::string(name) + "'");
  }
  EncoderSpec spec;
  spec.modality = modality;
  spec.kind = r->kind;
  spec.name = std::string(name);
  spec.seed = modality == Modality::kText ? kToyTextSeed : kToyImageSeed;
  spec.trainable = r->kind == EncoderKind::kLearnable;
  if (r->dim > 0) {
    if (dim && *dim != r->dim) {
      throw ValidationError("encoder '" + spec.name + "' has fixed output dim " + std::to_string(r->dim));
    }
    spec.output_dim = r->dim;
  } else {
    spec.output_dim = dim.value_or(16);
  }
  validate(spec);
  return spec;
}

std::vector<std::string> registered_encoders(Modality modality) {
  std::vector<std::string> out;
  for (const auto& r : kRegistry) {
    if (r.modality == modality) out.emplace_back(r.name);
  }
  return out;
}

void validate(const EncoderSpec& spec) {
  const Registered* r = find_registered(spec.modality, spec.name);
  if (r == nullptr) {
    throw ValidationError("unknown " + std::string(to_string(spec.modality)) + " encoder '" + spec.name + "'");
  }
  if (r->kind != spec.kind) throw ValidationError("encoder '" + spec.name + "' registered with a different kind");
  if (spec.output_dim <= 0) throw ValidationError("encoder output_dim must be positive");
  if (r->dim > 0 && spec.output_dim != r->dim) {
    throw ValidationError("encoder '" + spec.name + "' has fixed output dim " + std::to_string(r->dim));
  }
  if (spec.kind == EncoderKind::kToy && spec.trainable) throw ValidationError("toy encoders are never trainable");
  if (spec.kind == EncoderKind::kPretrained && spec.trainable) {
    throw ValidationError("precomputed-feature adapters are frozen; fine-tuning '" + spec.name +
                          "' is not available in this build");
  }
}

std::unique_ptr<TextEncoder> make_text_encoder(const EncoderSpec& spec) {
  validate(spec);
  require_modality(spec, Modality::kText);
  switch (spec.kind) {
    case EncoderKind::kToy: return std::make_unique<ToyTextEncoder>(spec);
    case EncoderKind::kLearnable: return std::make_unique<LearnableTextEncoder>(spec);
    case EncoderKind::kPretrained: break;
  }
  return std::make_unique<PretrainedTextEncoder>(spec);
}

std::unique_ptr<ImageEncoder> make_image_encoder(const EncoderSpec& spec) {
  validate(spec);
  require_modality(spec, Modality::kImage);
  switch (spec.kind) {
    case EncoderKind::kToy: return std::make_unique<ToyImageEncoder>(spec);
    case EncoderKind::kLearnable: return std::make_unique<LearnableImageEncoder>(spec);
    case EncoderKind::kPretrained: break;
  }
  return std::make_unique<PretrainedImageEncoder>(spec);
}

FeatureVector encode_text(const EncoderSpec& spec, std::string_view prompt, const ParameterSet& params) {
  auto enc = make_text_encoder(spec);
  if (params.empty()) {
    ParameterSet init;
    enc->init_params(init);
    return enc->encode(prompt, init);
  }
  return enc->encode(prompt, params);
}

FeatureVector encode_image(const EncoderSpec& spec, const Image& image, const ParameterSet& params) {
  auto enc = make_image_encoder(spec);
  if (params.empty()) {
    ParameterSet init;
    enc->init_params(init);
    return enc->encode(image, init);
  }
  return enc->encode(image, params);
}

std::vector<std::string_view> whitespace_tokens(std::string_view text) {
  constexpr std::string_view kSpace = " \t\n\v\f\r";
  std::vector<std::string_view> out;
  std::size_t pos = text.find_first_not_of(kSpace);
  while (pos != std::string_view::npos) {
    const std::size_t end = text.find_first_of(kSpace, pos);
    out.push_back(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = text.find_first_not_of(kSpace, end);
  }
  return out;
}

std::vector<double> pool_to_grid(const Image& image) {
  validate_image(image);
  auto span_of = [](int i, int extent) {
    const int lo = static_cast<int>(static_cast<long long>(i) * extent / kToyGrid);
    const int hi = std::max(lo + 1, static_cast<int>(static_cast<long long>(i + 1) * extent / kToyGrid));
    return std::pair{lo, hi};
  };
  std::vector<double> out(kToyPooledDim, 0.0);
  for (int gy = 0; gy < kToyGrid; ++gy) {
    const auto [y0, y1] = span_of(gy, image.height);
    for (int gx = 0; gx < kToyGrid; ++gx) {
      const auto [x0, x1] = span_of(gx, image.width);
      const double inv = 1.0 / static_cast<double>((y1 - y0) * (x1 - x0));
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) acc += image.at(y, x, c);
        }
        out[(static_cast<std::size_t>(gy) * kToyGrid + gx) * 3 + c] = acc * inv;
      }
    }
  }
  return out;
}

}  // namespace tier
