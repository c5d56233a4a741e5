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

#ifndef TIER_DATA_HPP_
#define TIER_DATA_HPP_

// Dataset manifests: one flat CSV per database with a header
//
//   sample_id,image_path,prompt,generator,<dim1>[,<dim2>...]
//
// plus an optional split sidecar `sample_id,split`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tier {

enum class Split { kUnassigned, kTrain, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SampleRecord {
  std::string sample_id;
  std::string image_path;  // relative to the manifest directory unless absolute
  std::string prompt;
  std::map<std::string, double> scores;
  std::optional<std::string> generator;
  Split split = Split::kUnassigned;

  bool operator==(const SampleRecord&) const = default;
};

// Database layouts recognised by their declared score columns.
enum class Layout { kAgiqa1k, kAgiqa3k, kAigciqa2023 };

std::string_view to_string(Layout layout);
// Throws ValidationError("unknown score dimension ...") when `dims` matches
// none of {MOS}, {MOS_quality[, MOS_align]}, {quality, authenticity, correspondence}.
Layout layout_for(const std::vector<std::string>& dims);

struct DatasetManifest {
  std::string name;
  std::vector<std::string> score_dimensions;
  std::vector<SampleRecord> records;
  // Exact-string prompt -> sample ids in record order.
  std::map<std::string, std::vector<std::string>> prompt_groups;
  // Base directory for relative image paths. Not part of equality.
  std::filesystem::path root;

  bool operator==(const DatasetManifest& other) const {
    return name == other.name && score_dimensions == other.score_dimensions &&
           records == other.records && prompt_groups == other.prompt_groups;
  }

  bool has_dimension(std::string_view dim) const;
  std::filesystem::path resolve_image(const SampleRecord& record) const;
  std::vector<std::size_t> indices(Split split) const;
};

// Validates records against dims and fills prompt_groups.
DatasetManifest make_manifest(std::string name, std::vector<std::string> dims,
                              std::vector<SampleRecord> records, std::filesystem::path root = {});

struct LoadOptions {
  bool check_images = false;
};

DatasetManifest parse_manifest(std::string_view csv_text, std::string name,
                               std::filesystem::path root = {});
DatasetManifest load_manifest(const std::filesystem::path& path, const LoadOptions& options = {});

std::string manifest_to_csv(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

enum class SplitMode { kRandom, kByPrompt };

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);

struct SplitSpec {
  SplitMode mode = SplitMode::kByPrompt;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Assigns every record to train or test. Random mode puts exactly
// round(test_fraction * N) records in test. By-prompt mode shuffles the
// prompt groups and takes the prefix whose record count is nearest to
// test_fraction * N, so no prompt string lands on both sides.
DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitSpec& spec);

std::string splits_to_csv(const DatasetManifest& manifest);
void write_splits(const DatasetManifest& manifest, const std::filesystem::path& path);
// Every manifest record must be listed exactly once.
DatasetManifest apply_splits(const DatasetManifest& manifest, std::string_view splits_csv);
DatasetManifest load_splits(const DatasetManifest& manifest, const std::filesystem::path& path);

// Git blob id: SHA-1 over "blob <len>\0" followed by the bytes.
std::string git_blob_hash(std::string_view bytes);
std::string manifest_hash(const DatasetManifest& manifest);

}  // namespace tier

#endif  // TIER_DATA_HPP_
