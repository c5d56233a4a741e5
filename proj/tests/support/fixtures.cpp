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

#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <set>

#include "tier/csv.hpp"
#include "tier/encoders.hpp"

namespace tier::testing {
namespace {

constexpr const char* kWords[] = {
    "cat",     "dog",      "bird",   "castle", "river",  "forest",  "city",    "robot",  "dragon", "flower",
    "portrait", "mountain", "ocean",  "car",    "bicycle", "tree",   "house",   "woman",  "man",    "kid",
    "red",     "blue",     "green",  "golden", "dark",   "bright",  "misty",   "ancient", "modern", "tiny",
    "giant",   "painting", "photo",  "sketch", "neon",   "watercolor", "sunset", "night", "winter", "summer",
    "on",      "under",    "beside", "with",   "a",      "the",     "of",      "in",     "and",    "detailed"};

std::string random_prompt(SplitMix64& rng) {
  const int len = 3 + static_cast<int>(rng.below(6));
  std::string p;
  for (int i = 0; i < len; ++i) {
    if (i) p += ' ';
    p += kWords[rng.below(std::size(kWords))];
  }
  return p;
}

std::vector<std::string> unique_prompts(int n, SplitMix64& rng) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < n) {
    auto p = random_prompt(rng);
    if (seen.insert(p).second) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

Image noise_image(int height, int width, SplitMix64& rng) {
  Image img(height, width, 3);
  for (auto& v : img.pixels) v = static_cast<float>(rng.uniform());
  return img;
}

Image ramp_image(int height, int width) {
  Image img(height, width, 3);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    img.pixels[p] = static_cast<float>(static_cast<double>(p % 256) / 255.0);
  }
  return img;
}

ModelSpec toy_spec(Variant variant, int text_dim, int image_dim, Activation activation, bool learnable) {
  ModelSpec spec;
  spec.variant = variant;
  spec.activation = activation;
  const char* name = learnable ? "toy-learnable" : "toy";
  spec.image_encoder = make_encoder_spec(Modality::kImage, name, image_dim);
  if (variant == Variant::kTier) spec.text_encoder = make_encoder_spec(Modality::kText, name, text_dim);
  return spec;
}

SyntheticSet text_signal_set(int prompts, int images_per_prompt, int text_dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const EncoderSpec text = make_encoder_spec(Modality::kText, "toy", text_dim);
  std::vector<double> w(static_cast<std::size_t>(text_dim));
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);

  SyntheticSet set;
  std::vector<SampleRecord> records;
  const auto texts = unique_prompts(prompts, rng);
  for (int p = 0; p < prompts; ++p) {
    const auto f = encode_text(text, texts[static_cast<std::size_t>(p)]);
    double score = 3.0;
    for (int j = 0; j < text_dim; ++j) score += w[static_cast<std::size_t>(j)] * f.values[static_cast<std::size_t>(j)];
    for (int k = 0; k < images_per_prompt; ++k) {
      SampleRecord r;
      r.sample_id = "s" + std::to_string(p) + "_" + std::to_string(k);
      r.image_path = "images/" + r.sample_id + ".png";
      r.prompt = texts[static_cast<std::size_t>(p)];
      r.generator = "gen" + std::to_string(k);
      r.scores["MOS"] = score;
      set.images->add(r.sample_id, noise_image(16, 16, rng));
      records.push_back(std::move(r));
    }
  }
  set.manifest = make_manifest("text_signal", {"MOS"}, std::move(records));
  return set;
}

SyntheticSet linear_label_set(int samples, const ModelSpec& spec, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Model probe(spec, 0);
  std::vector<double> u(static_cast<std::size_t>(spec.fused_dim()));
  for (auto& v : u) v = rng.uniform(-1.0, 1.0);

  SyntheticSet set;
  std::vector<SampleRecord> records;
  const auto texts = unique_prompts(samples, rng);
  for (int i = 0; i < samples; ++i) {
    SampleRecord r;
    r.sample_id = "lin" + std::to_string(i);
    r.image_path = "images/" + r.sample_id + ".png";
    r.prompt = texts[static_cast<std::size_t>(i)];
    Image img = noise_image(16, 16, rng);
    const auto x = probe.fused(r.prompt, img);
    double score = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) score += u[j] * x.values[j];
    r.scores["MOS"] = score;
    set.images->add(r.sample_id, std::move(img));
    records.push_back(std::move(r));
  }
  set.manifest = make_manifest("linear", {"MOS"}, std::move(records));
  return set;
}

std::filesystem::path write_to_disk(const SyntheticSet& set, const std::filesystem::path& dir,
                                    const std::string& name) {
  std::filesystem::create_directories(dir);
  for (const auto& r : set.manifest.records) {
    write_image(dir / r.image_path, set.images->load(set.manifest, r));
  }
  DatasetManifest m = set.manifest;
  m.name = name;
  const auto path = dir / (name + ".csv");
  write_manifest(m, path);
  return path;
}

void write_aigciqa2023_source(const std::filesystem::path& dir, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::filesystem::create_directories(dir);
  std::string prompts = csv::format_row({"prompt_id", "prompt"});
  const auto texts = unique_prompts(100, rng);
  for (int p = 0; p < 100; ++p) {
    // Some prompts carry commas and quotes to exercise CSV quoting.
    std::string text = texts[static_cast<std::size_t>(p)];
    if (p % 7 == 0) text += ", \"highly detailed\"";
    prompts += csv::format_row({std::to_string(p), text});
  }
  csv::write_file(dir / "prompts.csv", prompts);

  std::string mos = csv::format_row({"image", "quality", "authenticity", "correspondence"});
  for (int n = 0; n < 2400; ++n) {
    mos += csv::format_row({std::to_string(n), csv::format_double(rng.uniform(20.0, 80.0)),
                            csv::format_double(rng.uniform(20.0, 80.0)), csv::format_double(rng.uniform(20.0, 80.0))});
  }
  csv::write_file(dir / "mos.csv", mos);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("tier-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace tier::testing
