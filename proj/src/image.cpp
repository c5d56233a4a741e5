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

#include "tier/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>

#include "tier/error.hpp"

namespace tier {

void validate_image(const Image& image) {
  if (image.channels != 3) {
    throw ValidationError("image must have 3 channels (HxWx3), got " + std::to_string(image.channels));
  }
  if (image.height < 1 || image.width < 1) throw ValidationError("image must be at least 1x1");
  if (image.pixels.size() != static_cast<std::size_t>(image.height) * image.width * image.channels) {
    throw ValidationError("image buffer size does not match its shape");
  }
  for (const float v : image.pixels) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("pixel value outside [0, 1]");
  }
}

Image read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image " + path.string());
  Image img(bgr.rows, bgr.cols, 3);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(y, x, 0) = row[x][2] / 255.0f;
      img.at(y, x, 1) = row[x][1] / 255.0f;
      img.at(y, x, 2) = row[x][0] / 255.0f;
    }
  }
  img.source = path.string();
  return img;
}

void write_image(const std::filesystem::path& path, const Image& image) {
  validate_image(image);
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        row[x][2 - c] = static_cast<unsigned char>(std::lround(image.at(y, x, c) * 255.0f));
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write image " + path.string());
}

Image DiskImageSource::load(const DatasetManifest& manifest, const SampleRecord& record) const {
  const std::string key = manifest.resolve_image(record).string();
  if (cache_enabled_) {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return *it->second;
  }
  Image img = read_image(key);
  img.source = record.image_path;
  if (cache_enabled_) {
    std::lock_guard lock(mu_);
    cache_.emplace(key, std::make_shared<const Image>(img));
  }
  return img;
}

Image MemoryImageSource::load(const DatasetManifest&, const SampleRecord& record) const {
  auto it = images_.find(record.sample_id);
  if (it == images_.end()) throw ValidationError("no in-memory image for sample '" + record.sample_id + "'");
  Image img = it->second;
  if (img.source.empty()) img.source = record.image_path;
  return img;
}

}  // namespace tier
