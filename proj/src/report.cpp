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

#include "tier/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "tier/csv.hpp"
#include "tier/error.hpp"

namespace tier {
namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string opt_double(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }

std::vector<std::pair<std::string, std::string>> columns(const EvalReport& report) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : report.rows) {
    std::pair key{r.dataset, r.dimension};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool is_correspondence(std::string_view dim) { return dim == "correspondence" || dim == "MOS_align"; }

}  // namespace

std::string report_to_csv(const EvalReport& report) {
  std::string out = csv::format_row({"dataset", "dimension", "model", "variant", "baseline", "runs", "srcc_mean",
                                     "srcc_sd", "plcc_mean", "plcc_sd", "delta_srcc", "delta_plcc", "improved_srcc",
                                     "improved_plcc", "best_srcc", "best_plcc", "status"});
  for (const auto& r : report.rows) {
    const bool failed = r.failed();
    out += csv::format_row({
        r.dataset,
        r.dimension,
        r.label,
        std::string(to_string(r.variant)),
        r.baseline.value_or(""),
        std::to_string(r.runs),
        failed ? "" : csv::format_double(r.srcc_mean),
        failed ? "" : csv::format_double(r.srcc_sd),
        failed ? "" : csv::format_double(r.plcc_mean),
        failed ? "" : csv::format_double(r.plcc_sd),
        opt_double(r.delta_srcc),
        opt_double(r.delta_plcc),
        r.improved_srcc ? "1" : "0",
        r.improved_plcc ? "1" : "0",
        r.best_srcc ? "1" : "0",
        r.best_plcc ? "1" : "0",
        failed ? "failed: " + r.error : (r.failures ? "partial: " + r.error : "ok"),
    });
  }
  return out;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  bool any_correspondence = false;
  for (const auto& [dataset, dim] : columns(report)) {
    std::size_t width = 5;
    for (const auto& r : report.rows) {
      if (r.dataset == dataset && r.dimension == dim) width = std::max(width, r.label.size());
    }
    out << dataset << " / " << dim << "\n";
    char head[256];
    std::snprintf(head, sizeof head, "  %-*s  %-17s  %-17s\n", static_cast<int>(width), "Model", "SRCC", "PLCC");
    out << head << "  " << std::string(width + 40, '-') << "\n";
    for (const auto& r : report.rows) {
      if (r.dataset != dataset || r.dimension != dim) continue;
      auto cell = [&](double mean, double sd, bool improved, bool best) {
        if (r.failed()) return std::string("FAILED");
        std::string s = fixed4(mean);
        if (r.runs > 1) s += "+-" + fixed4(sd);
        if (best) s += "*";
        if (improved) s += "^";
        return s;
      };
      char line[512];
      std::snprintf(line, sizeof line, "  %-*s  %-17s  %-17s\n", static_cast<int>(width), r.label.c_str(),
                    cell(r.srcc_mean, r.srcc_sd, r.improved_srcc, r.best_srcc).c_str(),
                    cell(r.plcc_mean, r.plcc_sd, r.improved_plcc, r.best_plcc).c_str());
      out << line;
      if (r.failed()) out << "    error: " << r.error << "\n";
    }
    out << "\n";
    any_correspondence = any_correspondence || is_correspondence(dim);
  }
  out << "^ better than the matched image-only baseline; * best in column.\n";
  if (any_correspondence) {
    out << "Note: adding the prompt does not reliably improve text-image correspondence scores; "
           "gains on that dimension are not expected in every configuration.\n";
  }
  return out.str();
}

std::string report_chart_svg(const EvalReport& report, const std::string& dataset, const std::string& dimension) {
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.rows) {
    if (r.dataset == dataset && r.dimension == dimension) rows.push_back(&r);
  }
  if (rows.empty()) throw ValidationError("no rows for " + dataset + "/" + dimension);

  // Groups: image encoder (the matched baseline label); bars: each model.
  std::vector<std::string> groups;
  std::map<std::string, std::vector<const ReportRow*>> members;
  for (const auto* r : rows) {
    const std::string g = r->baseline.value_or(r->label);
    if (!members.contains(g)) groups.push_back(g);
    members[g].push_back(r);
  }
  std::size_t max_bars = 1;
  for (const auto& [g, v] : members) max_bars = std::max(max_bars, v.size());

  double lo = 0.0;
  for (const auto* r : rows) {
    if (!r->failed()) lo = std::min({lo, r->srcc_mean, r->plcc_mean});
  }
  const double hi = 1.0;
  const int bar_w = 18;
  const int group_gap = 24;
  const int panel_h = 220;
  const int top = 40;
  const int left = 50;
  const int group_w = static_cast<int>(max_bars) * bar_w + group_gap;
  const int panel_w = static_cast<int>(groups.size()) * group_w + 20;
  const int width = left + 2 * panel_w + 60;
  const int height = top + panel_h + 50 + 18 * static_cast<int>(rows.size());
  const char* palette[] = {"#9e9e9e", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  auto y_of = [&](double v) { return top + panel_h - (v - lo) / (hi - lo) * panel_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(dataset) << " / "
      << xml_escape(dimension) << "</text>\n";
  const char* metric_names[] = {"SRCC", "PLCC"};
  for (int panel = 0; panel < 2; ++panel) {
    const int x0 = left + panel * (panel_w + 30);
    svg << "<text x=\"" << x0 << "\" y=\"" << top - 6 << "\">" << metric_names[panel] << "</text>\n";
    svg << "<line x1=\"" << x0 << "\" y1=\"" << y_of(lo) << "\" x2=\"" << x0 + panel_w << "\" y2=\"" << y_of(lo)
        << "\" stroke=\"black\"/>\n";
    for (double t = std::ceil(lo * 5) / 5; t <= hi + 1e-9; t += 0.2) {
      svg << "<line x1=\"" << x0 - 4 << "\" y1=\"" << y_of(t) << "\" x2=\"" << x0 + panel_w << "\" y2=\"" << y_of(t)
          << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << x0 - 34 << "\" y=\"" << y_of(t) + 4 << "\">" << fixed4(t).substr(0, 4) << "</text>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& bars = members[groups[g]];
      for (std::size_t b = 0; b < bars.size(); ++b) {
        const ReportRow* r = bars[b];
        if (r->failed()) continue;
        const double v = panel == 0 ? r->srcc_mean : r->plcc_mean;
        const double base_y = y_of(std::max(lo, 0.0));
        const double y = y_of(v);
        const int x = x0 + 10 + static_cast<int>(g) * group_w + static_cast<int>(b) * bar_w;
        svg << "<rect x=\"" << x << "\" y=\"" << std::min(y, base_y) << "\" width=\"" << bar_w - 2
            << "\" height=\"" << std::abs(base_y - y) << "\" fill=\"" << palette[b % 7] << "\"><title>"
            << xml_escape(r->label) << ": " << fixed4(v) << "</title></rect>\n";
      }
    }
  }
  // Legend.
  int ly = top + panel_h + 30;
  for (const auto& g : groups) {
    const auto& bars = members[g];
    for (std::size_t b = 0; b < bars.size(); ++b) {
      svg << "<rect x=\"" << left << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << palette[b % 7]
          << "\"/><text x=\"" << left + 16 << "\" y=\"" << ly << "\">" << xml_escape(bars[b]->label)
          << (bars[b]->failed() ? " (failed)" : "") << "</text>\n";
      ly += 18;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> render_report(const EvalReport& report, const std::filesystem::path& out_dir) {
  if (report.rows.empty()) throw ValidationError("cannot render an empty report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "charts", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& p, const std::string& text) {
    csv::write_file(p, text);
    written.push_back(p);
  };
  emit(out_dir / "report.csv", report_to_csv(report));
  emit(out_dir / "report.txt", report_to_text(report));

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"dataset", r.dataset},       {"dimension", r.dimension},   {"model", r.label},
                        {"variant", to_string(r.variant)}, {"runs", r.runs},         {"failures", r.failures},
                        {"improved_srcc", r.improved_srcc}, {"improved_plcc", r.improved_plcc}};
    if (!r.failed()) {
      j["srcc_mean"] = r.srcc_mean;
      j["srcc_sd"] = r.srcc_sd;
      j["plcc_mean"] = r.plcc_mean;
      j["plcc_sd"] = r.plcc_sd;
    }
    if (r.baseline) j["baseline"] = *r.baseline;
    if (r.delta_srcc) j["delta_srcc"] = *r.delta_srcc;
    if (r.delta_plcc) j["delta_plcc"] = *r.delta_plcc;
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  emit(out_dir / "report.json", nlohmann::json{{"rows", rows}, {"metadata", report.metadata}}.dump(2) + "\n");

  std::set<std::string> used;
  for (const auto& [dataset, dim] : columns(report)) {
    std::string name = dataset + "__" + dim;
    for (auto& c : name) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    }
    while (!used.insert(name).second) name += "_";
    emit(out_dir / "charts" / (name + ".svg"), report_chart_svg(report, dataset, dim));
  }
  return written;
}

}  // namespace tier
