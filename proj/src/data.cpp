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

#include "tier/data.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/rng.hpp"

namespace tier {
namespace {

constexpr std::string_view kFixedColumns[] = {"sample_id", "image_path", "prompt", "generator"};

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnassigned: break;
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  if (text == "unassigned") return Split::kUnassigned;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::kAgiqa1k: return "agiqa1k";
    case Layout::kAgiqa3k: return "agiqa3k";
    case Layout::kAigciqa2023: break;
  }
  return "aigciqa2023";
}

Layout layout_for(const std::vector<std::string>& dims) {
  const std::set<std::string> got(dims.begin(), dims.end());
  if (got.size() != dims.size()) throw ValidationError("duplicate score dimension");
  if (got == std::set<std::string>{"MOS"}) return Layout::kAgiqa1k;
  if (got == std::set<std::string>{"MOS_quality"} ||
      got == std::set<std::string>{"MOS_quality", "MOS_align"}) {
    return Layout::kAgiqa3k;
  }
  if (got == std::set<std::string>{"quality", "authenticity", "correspondence"}) {
    return Layout::kAigciqa2023;
  }
  std::string list;
  for (const auto& d : dims) list += (list.empty() ? "" : ",") + d;
  throw ValidationError("unknown score dimension set [" + list +
                        "]; expected MOS | MOS_quality[,MOS_align] | quality,authenticity,correspondence");
}

bool DatasetManifest::has_dimension(std::string_view dim) const {
  return std::find(score_dimensions.begin(), score_dimensions.end(), dim) != score_dimensions.end();
}

std::filesystem::path DatasetManifest::resolve_image(const SampleRecord& record) const {
  const std::filesystem::path p(record.image_path);
  return p.is_absolute() ? p : root / p;
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

DatasetManifest make_manifest(std::string name, std::vector<std::string> dims,
                              std::vector<SampleRecord> records, std::filesystem::path root) {
  if (dims.empty()) throw ValidationError("manifest declares no score dimensions");
  layout_for(dims);

  DatasetManifest m;
  m.name = std::move(name);
  m.score_dimensions = std::move(dims);
  m.root = std::move(root);

  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.sample_id.empty()) throw ValidationError("empty sample_id");
    if (!seen.insert(r.sample_id).second) {
      throw ValidationError("duplicate sample_id '" + r.sample_id + "'");
    }
    if (r.prompt.empty()) throw ValidationError("empty prompt for sample '" + r.sample_id + "'");
    if (r.scores.size() != m.score_dimensions.size()) {
      throw ValidationError("sample '" + r.sample_id + "' does not carry exactly the declared dimensions");
    }
    for (const auto& d : m.score_dimensions) {
      auto it = r.scores.find(d);
      if (it == r.scores.end()) {
        throw ValidationError("sample '" + r.sample_id + "' is missing dimension '" + d + "'");
      }
      if (!std::isfinite(it->second)) {
        throw ValidationError("non-finite score for sample '" + r.sample_id + "' dimension '" + d + "'");
      }
    }
    m.prompt_groups[r.prompt].push_back(r.sample_id);
  }
  m.records = std::move(records);
  return m;
}

DatasetManifest parse_manifest(std::string_view csv_text, std::string name, std::filesystem::path root) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) throw ValidationError("manifest has no header row");
  const csv::Row& header = rows.front();

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) {
      throw ValidationError("duplicate column '" + header[i] + "'");
    }
  }
  for (const auto fixed : kFixedColumns) {
    if (!column.contains(std::string(fixed))) {
      throw ValidationError("missing column '" + std::string(fixed) + "'");
    }
  }
  std::vector<std::string> dims;
  std::vector<std::size_t> dim_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::find(std::begin(kFixedColumns), std::end(kFixedColumns), header[i]) == std::end(kFixedColumns)) {
      dims.push_back(header[i]);
      dim_cols.push_back(i);
    }
  }

  std::vector<SampleRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::string line = "manifest line " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw ValidationError(line + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(row.size()));
    }
    SampleRecord rec;
    rec.sample_id = row[column.at("sample_id")];
    rec.image_path = row[column.at("image_path")];
    rec.prompt = row[column.at("prompt")];
    if (const auto& g = row[column.at("generator")]; !g.empty()) rec.generator = g;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const double v = csv::parse_double(row[dim_cols[k]], line + " column " + dims[k]);
      if (!std::isfinite(v)) throw ValidationError(line + ": non-finite score in column " + dims[k]);
      rec.scores.emplace(dims[k], v);
    }
    records.push_back(std::move(rec));
  }
  return make_manifest(std::move(name), std::move(dims), std::move(records), std::move(root));
}

DatasetManifest load_manifest(const std::filesystem::path& path, const LoadOptions& options) {
  auto m = parse_manifest(csv::read_file(path), path.stem().string(), path.parent_path());
  if (options.check_images) {
    for (const auto& r : m.records) {
      const auto p = m.resolve_image(r);
      std::ifstream probe(p, std::ios::binary);
      if (!probe) throw ValidationError("image for '" + r.sample_id + "' not readable: " + p.string());
    }
  }
  return m;
}

std::string manifest_to_csv(const DatasetManifest& manifest) {
  csv::Row header(std::begin(kFixedColumns), std::end(kFixedColumns));
  header.insert(header.end(), manifest.score_dimensions.begin(), manifest.score_dimensions.end());
  std::string out = csv::format_row(header);
  for (const auto& r : manifest.records) {
    csv::Row row{r.sample_id, r.image_path, r.prompt, r.generator.value_or("")};
    for (const auto& d : manifest.score_dimensions) row.push_back(csv::format_double(r.scores.at(d)));
    out += csv::format_row(row);
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  csv::write_file(path, manifest_to_csv(manifest));
}

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::kRandom ? "random" : "by_prompt";
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "random") return SplitMode::kRandom;
  if (text == "by_prompt") return SplitMode::kByPrompt;
  throw ValidationError("unknown split mode '" + std::string(text) + "'");
}

DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = manifest.records.size();
  const auto target = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (target == 0 || target >= n) {
    throw ValidationError("degenerate split: " + std::to_string(target) + " of " + std::to_string(n) +
                          " records would go to test");
  }

  DatasetManifest out = manifest;
  for (auto& r : out.records) r.split = Split::kTrain;
  SplitMix64 rng(spec.seed);

  if (spec.mode == SplitMode::kRandom) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(std::span(order), rng);
    for (std::size_t k = 0; k < target; ++k) out.records[order[k]].split = Split::kTest;
    return out;
  }

  // Groups in order of first appearance.
  std::vector<std::string> prompts;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = members[manifest.records[i].prompt];
    if (list.empty()) prompts.push_back(manifest.records[i].prompt);
    list.push_back(i);
  }
  if (prompts.size() < 2) throw ValidationError("by_prompt split needs at least 2 distinct prompts");
  shuffle(std::span(prompts), rng);

  const double want = spec.test_fraction * static_cast<double>(n);
  std::size_t best_k = 1;
  double best_gap = INFINITY;
  std::size_t cumulative = 0;
  for (std::size_t k = 1; k < prompts.size(); ++k) {
    cumulative += members[prompts[k - 1]].size();
    const double gap = std::abs(static_cast<double>(cumulative) - want);
    if (gap < best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  for (std::size_t k = 0; k < best_k; ++k) {
    for (const auto i : members[prompts[k]]) out.records[i].split = Split::kTest;
  }
  return out;
}

std::string splits_to_csv(const DatasetManifest& manifest) {
  std::string out = csv::format_row({"sample_id", "split"});
  for (const auto& r : manifest.records) out += csv::format_row({r.sample_id, std::string(to_string(r.split))});
  return out;
}

void write_splits(const DatasetManifest& manifest, const std::filesystem::path& path) {
  csv::write_file(path, splits_to_csv(manifest));
}

DatasetManifest apply_splits(const DatasetManifest& manifest, std::string_view splits_csv) {
  const auto rows = csv::parse(splits_csv);
  if (rows.empty() || rows.front() != csv::Row{"sample_id", "split"}) {
    throw ValidationError("split sidecar must start with header 'sample_id,split'");
  }
  std::unordered_map<std::string, Split> assigned;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) throw ValidationError("split sidecar line " + std::to_string(r + 1) + " malformed");
    if (!assigned.emplace(rows[r][0], parse_split(rows[r][1])).second) {
      throw ValidationError("split sidecar lists '" + rows[r][0] + "' twice");
    }
  }
  DatasetManifest out = manifest;
  for (auto& rec : out.records) {
    auto it = assigned.find(rec.sample_id);
    if (it == assigned.end()) throw ValidationError("split sidecar misses '" + rec.sample_id + "'");
    rec.split = it->second;
  }
  if (assigned.size() != out.records.size()) {
    throw ValidationError("split sidecar lists samples that are not in the manifest");
  }
  return out;
}

DatasetManifest load_splits(const DatasetManifest& manifest, const std::filesystem::path& path) {
  return apply_splits(manifest, csv::read_file(path));
}

std::string git_blob_hash(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha1 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string manifest_hash(const DatasetManifest& manifest) { return git_blob_hash(manifest_to_csv(manifest)); }

}  // namespace tier
