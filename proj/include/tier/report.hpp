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

#ifndef TIER_REPORT_HPP_
#define TIER_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "tier/evaluation.hpp"

namespace tier {

// Table-style CSV, one row per (dataset, dimension, model).
std::string report_to_csv(const EvalReport& report);

// Plain-text tables, one block per (dataset, dimension). "^" marks a
// TIER row that beats its matched baseline, "*" the best value in a column.
std::string report_to_text(const EvalReport& report);

// Grouped bar chart (SVG) of SRCC and PLCC for one (dataset, dimension).
std::string report_chart_svg(const EvalReport& report, const std::string& dataset, const std::string& dimension);

// Writes report.csv, report.txt, report.json and charts/<dataset>__<dim>.svg
// into out_dir. Returns the paths written.
std::vector<std::filesystem::path> render_report(const EvalReport& report, const std::filesystem::path& out_dir);

}  // namespace tier

#endif  // TIER_REPORT_HPP_
