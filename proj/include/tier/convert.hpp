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

#ifndef TIER_CONVERT_HPP_
#define TIER_CONVERT_HPP_

// One-time converters from each database's distribution layout to a
// manifest CSV. Expected source layouts (CSV exports of the original
// spreadsheets / .mat files):
//
// agiqa1k      <src>/AIGC_MOS_Zscore.csv  columns Image, Prompt, MOS [, Model]
//              images under <src>/file/<Image>
// agiqa3k      <src>/data.csv  columns name, prompt, mos_quality [, mos_align]
//              images under <src>/images/<name>; generator = name up to '_'
// aigciqa2023  <src>/prompts.csv  columns prompt_id, prompt   (100 prompts)
//              <src>/mos.csv      columns image, quality, authenticity, correspondence
//              images under <src>/Image/allimg/<image>.png. Image index n
//              maps to generator n / 400 (Glide, Lafite, DALLE,
//              Stable-diffusion, Unidiffusion, Controlnet) and prompt_id
//              (n % 400) / 4.
//
// Image paths in the output are relative to the output manifest's folder.

#include <filesystem>
#include <string_view>

#include "tier/data.hpp"

namespace tier {

Layout parse_layout(std::string_view text);

struct ConvertOptions {
  // AGIQA-3K only: also ingest the alignment MOS column as MOS_align.
  bool include_align = false;
};

DatasetManifest convert_layout(Layout layout, const std::filesystem::path& src,
                               const std::filesystem::path& out_manifest, const ConvertOptions& options = {});

}  // namespace tier

#endif  // TIER_CONVERT_HPP_
