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

#include "tier/convert.hpp"

#include <map>

#include "tier/csv.hpp"
#include "tier/error.hpp"

namespace tier {
namespace {

constexpr const char* kAigciqa2023Generators[] = {"Glide", "Lafite", "DALLE", "Stable-diffusion", "Unidiffusion",
                                                  "Controlnet"};

struct Table {
  std::map<std::string, std::size_t> column;
  std::vector<csv::Row> rows;
  std::filesystem::path path;

  const std::string& get(const csv::Row& row, const std::string& name) const {
    return row.at(column.at(name));
  }
  bool has(const std::string& name) const { return column.contains(name); }
};

Table read_table(const std::filesystem::path& path, std::initializer_list<const char*> required) {
  if (!std::filesystem::exists(path)) throw ValidationError("missing source file " + path.string());
  auto rows = csv::parse(csv::read_file(path));
  if (rows.empty()) throw ValidationError(path.string() + " is empty");
  Table t;
  t.path = path;
  for (std::size_t i = 0; i < rows.front().size(); ++i) t.column.emplace(rows.front()[i], i);
  for (const char* name : required) {
    if (!t.column.contains(name)) throw ValidationError(path.string() + ": missing column '" + name + "'");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      throw ValidationError(path.string() + ": line " + std::to_string(r + 1) + " has the wrong number of fields");
    }
    t.rows.push_back(std::move(rows[r]));
  }
  return t;
}

std::string relative_to(const std::filesystem::path& file, const std::filesystem::path& base) {
  const auto abs_file = std::filesystem::absolute(file).lexically_normal();
  const auto abs_base = std::filesystem::absolute(base).lexically_normal();
  return abs_file.lexically_relative(abs_base).generic_string();
}

std::string stem_of(const std::string& file) { return std::filesystem::path(file).stem().string(); }

DatasetManifest convert_agiqa1k(const std::filesystem::path& src, const std::filesystem::path& out_dir) {
  const Table t = read_table(src / "AIGC_MOS_Zscore.csv", {"Image", "Prompt", "MOS"});
  std::vector<SampleRecord> records;
  for (const auto& row : t.rows) {
    SampleRecord r;
    r.sample_id = stem_of(t.get(row, "Image"));
    r.image_path = relative_to(src / "file" / t.get(row, "Image"), out_dir);
    r.prompt = t.get(row, "Prompt");
    if (t.has("Model") && !t.get(row, "Model").empty()) r.generator = t.get(row, "Model");
    r.scores["MOS"] = csv::parse_double(t.get(row, "MOS"), t.path.string());
    records.push_back(std::move(r));
  }
  return make_manifest("agiqa1k", {"MOS"}, std::move(records), out_dir);
}

DatasetManifest convert_agiqa3k(const std::filesystem::path& src, const std::filesystem::path& out_dir,
                                const ConvertOptions& options) {
  const Table t = read_table(src / "data.csv", {"name", "prompt", "mos_quality"});
  if (options.include_align && !t.has("mos_align")) {
    throw ValidationError(t.path.string() + ": missing column 'mos_align'");
  }
  std::vector<SampleRecord> records;
  for (const auto& row : t.rows) {
    SampleRecord r;
    const std::string& name = t.get(row, "name");
    r.sample_id = stem_of(name);
    r.image_path = relative_to(src / "images" / name, out_dir);
    r.prompt = t.get(row, "prompt");
    if (const auto cut = name.find('_'); cut != std::string::npos && cut > 0) r.generator = name.substr(0, cut);
    r.scores["MOS_quality"] = csv::parse_double(t.get(row, "mos_quality"), t.path.string());
    if (options.include_align) r.scores["MOS_align"] = csv::parse_double(t.get(row, "mos_align"), t.path.string());
    records.push_back(std::move(r));
  }
  std::vector<std::string> dims{"MOS_quality"};
  if (options.include_align) dims.emplace_back("MOS_align");
  return make_manifest("agiqa3k", std::move(dims), std::move(records), out_dir);
}

DatasetManifest convert_aigciqa2023(const std::filesystem::path& src, const std::filesystem::path& out_dir) {
  const Table prompts = read_table(src / "prompts.csv", {"prompt_id", "prompt"});
  const Table mos = read_table(src / "mos.csv", {"image", "quality", "authenticity", "correspondence"});
  std::map<long, std::string> prompt_of;
  for (const auto& row : prompts.rows) {
    const double id = csv::parse_double(prompts.get(row, "prompt_id"), prompts.path.string());
    prompt_of[static_cast<long>(id)] = prompts.get(row, "prompt");
  }
  constexpr long kPerGenerator = 400;
  constexpr long kPerPrompt = 4;
  std::vector<SampleRecord> records;
  for (const auto& row : mos.rows) {
    const double idx_real = csv::parse_double(mos.get(row, "image"), mos.path.string());
    const long n = static_cast<long>(idx_real);
    if (static_cast<double>(n) != idx_real || n < 0 || n >= 6 * kPerGenerator) {
      throw ValidationError(mos.path.string() + ": image index out of range: " + mos.get(row, "image"));
    }
    const long prompt_id = (n % kPerGenerator) / kPerPrompt;
    auto it = prompt_of.find(prompt_id);
    if (it == prompt_of.end()) {
      throw ValidationError(prompts.path.string() + ": no prompt with id " + std::to_string(prompt_id));
    }
    SampleRecord r;
    r.sample_id = std::to_string(n);
    r.image_path = relative_to(src / "Image" / "allimg" / (std::to_string(n) + ".png"), out_dir);
    r.prompt = it->second;
    r.generator = kAigciqa2023Generators[n / kPerGenerator];
    for (const char* dim : {"quality", "authenticity", "correspondence"}) {
      r.scores[dim] = csv::parse_double(mos.get(row, dim), mos.path.string());
    }
    records.push_back(std::move(r));
  }
  return make_manifest("aigciqa2023", {"quality", "authenticity", "correspondence"}, std::move(records), out_dir);
}

}  // namespace

Layout parse_layout(std::string_view text) {
  if (text == "agiqa1k") return Layout::kAgiqa1k;
  if (text == "agiqa3k") return Layout::kAgiqa3k;
  if (text == "aigciqa2023") return Layout::kAigciqa2023;
  throw ValidationError("unknown layout '" + std::string(text) + "' (agiqa1k | agiqa3k | aigciqa2023)");
}

DatasetManifest convert_layout(Layout layout, const std::filesystem::path& src,
                               const std::filesystem::path& out_manifest, const ConvertOptions& options) {
  if (!std::filesystem::is_directory(src)) throw ValidationError("source directory not found: " + src.string());
  const auto out_dir = out_manifest.has_parent_path() ? out_manifest.parent_path() : std::filesystem::path(".");
  DatasetManifest m;
  switch (layout) {
    case Layout::kAgiqa1k: m = convert_agiqa1k(src, out_dir); break;
    case Layout::kAgiqa3k: m = convert_agiqa3k(src, out_dir, options); break;
    case Layout::kAigciqa2023: m = convert_aigciqa2023(src, out_dir); break;
  }
  m.name = out_manifest.stem().string();
  write_manifest(m, out_manifest);
  return m;
}

}  // namespace tier
