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

#ifndef TIER_ENCODERS_HPP_
#define TIER_ENCODERS_HPP_

// Text and image feature extractors.
//
// Three kinds are registered per modality:
//   toy            fixed, seeded, weight-free maps (never trainable)
//   toy-learnable  the same maps with their tables exposed as parameters
//   pretrained     BERT / CNN backbones served from a precomputed feature
//                  file (see tools/extract_features.py)
//
// Toy text encoder: split the prompt on ASCII whitespace, hash every token
// with 64-bit FNV-1a, index row (hash mod 1024) of a (1024, dim) table and
// average the rows. The table is filled row-major with SplitMix64(seed)
// uniforms in [-1, 1).
//
// Toy image encoder: average-pool the HxWx3 image onto a 16x16x3 grid
// (cell i covers rows floor(i*H/16) .. max(that+1, floor((i+1)*H/16)) - 1,
// likewise for columns), flatten as (y, x, c), then apply
// projection (dim, 768) and bias (dim). Projection then bias are filled
// from SplitMix64(seed) with uniforms in [-a, a), a = 1/sqrt(768).

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tier/image.hpp"
#include "tier/tensor.hpp"

namespace tier {

enum class Modality { kText, kImage };
enum class EncoderKind { kToy, kLearnable, kPretrained };

std::string_view to_string(Modality modality);
std::string_view to_string(EncoderKind kind);

struct FeatureVector {
  std::vector<double> values;
  Modality modality = Modality::kImage;

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

inline constexpr std::uint64_t kToyTextSeed = 0x54455854ULL;   // "TEXT"
inline constexpr std::uint64_t kToyImageSeed = 0x494D4147ULL;  // "IMAG"
inline constexpr std::size_t kToyVocabulary = 1024;
inline constexpr int kToyGrid = 16;
inline constexpr std::size_t kToyPooledDim = kToyGrid * kToyGrid * 3;

struct EncoderSpec {
  Modality modality = Modality::kImage;
  EncoderKind kind = EncoderKind::kToy;
  std::string name = "toy";
  int output_dim = 16;
  bool trainable = false;
  std::uint64_t seed = 0;
  // Precomputed features for pretrained adapters.
  std::string feature_file;

  bool operator==(const EncoderSpec&) const = default;
};

// Registry lookup by (modality, name). Toy kinds accept any positive
// `dim` (default 16); pretrained names have fixed published dims and
// reject a conflicting `dim`. Unknown names throw ValidationError.
EncoderSpec make_encoder_spec(Modality modality, std::string_view name, std::optional<int> dim = std::nullopt);

std::vector<std::string> registered_encoders(Modality modality);

void validate(const EncoderSpec& spec);

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual const EncoderSpec& spec() const = 0;
  // Adds this encoder's trainable tensors (if any) to `params`.
  virtual void init_params(ParameterSet& /*params*/) const {}
  virtual FeatureVector encode(std::string_view prompt, const ParameterSet& params) const = 0;
  // Accumulates d(loss)/d(params) given d(loss)/d(features).
  virtual void backward(std::string_view /*prompt*/, std::span<const double> /*grad_features*/,
                        const ParameterSet& /*params*/, ParameterSet& /*grads*/) const {}
};

class ImageEncoder {
 public:
  virtual ~ImageEncoder() = default;
  virtual const EncoderSpec& spec() const = 0;
  virtual void init_params(ParameterSet& /*params*/) const {}
  virtual FeatureVector encode(const Image& image, const ParameterSet& params) const = 0;
  virtual void backward(const Image& /*image*/, std::span<const double> /*grad_features*/,
                        const ParameterSet& /*params*/, ParameterSet& /*grads*/) const {}
};

std::unique_ptr<TextEncoder> make_text_encoder(const EncoderSpec& spec);
std::unique_ptr<ImageEncoder> make_image_encoder(const EncoderSpec& spec);

// Convenience wrappers matching the free-function form of the encoders.
FeatureVector encode_text(const EncoderSpec& spec, std::string_view prompt, const ParameterSet& params = {});
FeatureVector encode_image(const EncoderSpec& spec, const Image& image, const ParameterSet& params = {});

// Building blocks of the toy encoders, exposed for tests.
std::vector<std::string_view> whitespace_tokens(std::string_view text);
std::vector<double> pool_to_grid(const Image& image);

}  // namespace tier

#endif  // TIER_ENCODERS_HPP_
