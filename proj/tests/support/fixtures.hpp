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

#ifndef TIER_TESTS_FIXTURES_HPP_
#define TIER_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "tier/data.hpp"
#include "tier/image.hpp"
#include "tier/model.hpp"
#include "tier/rng.hpp"

namespace tier::testing {

Image noise_image(int height, int width, SplitMix64& rng);

// pixel (y, x, c) = ((y*W + x)*3 + c) % 256 / 255
Image ramp_image(int height, int width);

struct SyntheticSet {
  DatasetManifest manifest;
  std::shared_ptr<MemoryImageSource> images = std::make_shared<MemoryImageSource>();
};

// Random prompts over a small vocabulary, pure-noise 16x16 images, and
// labels 3 + w . toy_text(prompt) for a fixed random w. Dimension "MOS".
SyntheticSet text_signal_set(int prompts, int images_per_prompt, int text_dim, std::uint64_t seed);

// Labels are u . fuse(toy_text(prompt), toy_image(image)) for a fixed
// random u, one image per prompt.
SyntheticSet linear_label_set(int samples, const ModelSpec& spec, std::uint64_t seed);

ModelSpec toy_spec(Variant variant, int text_dim = 16, int image_dim = 16,
                   Activation activation = Activation::kRelu, bool learnable = false);

// Writes images as PNG under dir/images and the manifest as dir/<name>.csv.
std::filesystem::path write_to_disk(const SyntheticSet& set, const std::filesystem::path& dir,
                                    const std::string& name);

// Source tree for the aigciqa2023 converter: prompts.csv (100 prompts) and
// mos.csv (2400 rows of random scores). No image files.
void write_aigciqa2023_source(const std::filesystem::path& dir, std::uint64_t seed);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace tier::testing

#endif  // TIER_TESTS_FIXTURES_HPP_
