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

#ifndef TIER_IMAGE_HPP_
#define TIER_IMAGE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tier/data.hpp"

namespace tier {

// Decoded pixels, row-major HxWxC, RGB, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<float> pixels;
  // Where the pixels came from (file path or sample id); used by
  // precomputed-feature adapters as a lookup key.
  std::string source;

  Image() = default;
  Image(int h, int w, int c = 3) : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c) {}

  float& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

// Throws ValidationError unless the tensor is HxWx3 with H, W >= 1 and all
// pixel values in [0, 1].
void validate_image(const Image& image);

Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual Image load(const DatasetManifest& manifest, const SampleRecord& record) const = 0;
};

// Decodes image files relative to the manifest root. Decoded images are
// kept in memory when `cache` is set.
class DiskImageSource final : public ImageSource {
 public:
  explicit DiskImageSource(bool cache = true) : cache_enabled_(cache) {}
  Image load(const DatasetManifest& manifest, const SampleRecord& record) const override;

 private:
  bool cache_enabled_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const Image>> cache_;
};

// Images held in memory, keyed by sample id.
class MemoryImageSource final : public ImageSource {
 public:
  void add(std::string sample_id, Image image) { images_[std::move(sample_id)] = std::move(image); }
  Image load(const DatasetManifest& manifest, const SampleRecord& record) const override;

 private:
  std::map<std::string, Image> images_;
};

}  // namespace tier

#endif  // TIER_IMAGE_HPP_
