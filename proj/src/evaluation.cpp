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

#include "tier/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <thread>

#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/json_io.hpp"

namespace tier {
namespace {

std::string slug(std::string_view text) {
  std::string out;
  for (const char c : text) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '.';
    out.push_back(keep ? c : '_');
  }
  return out.empty() ? "_" : out;
}

std::string dataset_name(const ExperimentMatrix& m, std::size_t d) { return m.datasets[d].manifest.stem().string(); }

std::filesystem::path cell_dir(const ExperimentMatrix& m, std::size_t d, const std::string& dim, std::size_t model,
                               int repeat) {
  return std::filesystem::path("cells") / (std::to_string(d) + "-" + slug(dataset_name(m, d))) / slug(dim) /
         (std::to_string(model) + "-" + slug(m.models[model].label)) / ("rep" + std::to_string(repeat));
}

nlohmann::json cell_json(const CellResult& c) {
  nlohmann::json j = {
      {"dataset", c.dataset}, {"dimension", c.dimension}, {"label", c.label},
      {"repeat", c.repeat},   {"ok", c.ok},               {"error", c.error},
      {"best_epoch", c.best_epoch}, {"predictions", c.predictions},
  };
  // NaN is not representable in JSON; failed cells store null.
  j["srcc"] = c.ok ? nlohmann::json(c.srcc) : nlohmann::json(nullptr);
  j["plcc"] = c.ok ? nlohmann::json(c.plcc) : nlohmann::json(nullptr);
  return j;
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult c;
  c.dataset = j.at("dataset").get<std::string>();
  c.dimension = j.at("dimension").get<std::string>();
  c.label = j.at("label").get<std::string>();
  c.repeat = j.at("repeat").get<int>();
  c.ok = j.at("ok").get<bool>();
  c.error = j.value("error", "");
  c.best_epoch = j.value("best_epoch", 0);
  c.predictions = j.value("predictions", "");
  if (c.ok) {
    c.srcc = j.at("srcc").get<double>();
    c.plcc = j.at("plcc").get<double>();
  }
  return c;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  if (v.empty()) return r;
  for (const double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (const double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

EvalResult evaluate(const Model& model, const DatasetManifest& manifest, const std::string& dimension,
                    const ImageSource& images, Split split, int batch_size) {
  if (!manifest.has_dimension(dimension)) {
    throw ValidationError("unknown dimension '" + dimension + "' for manifest '" + manifest.name + "'");
  }
  const auto idx = manifest.indices(split);
  if (idx.empty()) {
    throw ValidationError("manifest '" + manifest.name + "' has no " + std::string(to_string(split)) +
                          " split; assign splits first");
  }
  EvalResult r;
  r.predictions = predict_indices(model, LabeledData{&manifest, &images, dimension}, idx, batch_size);
  const auto c = correlate(r.predictions);
  r.srcc = c.srcc;
  r.plcc = c.plcc;
  return r;
}

EvalResult evaluate(const std::filesystem::path& checkpoint, const DatasetManifest& manifest,
                    const std::string& dimension, const ImageSource& images, Split split, int batch_size) {
  const Model model = load_checkpoint(checkpoint);
  try {
    return evaluate(model, manifest, dimension, images, split, batch_size);
  } catch (const UndefinedCorrelation& e) {
    throw UndefinedCorrelation(std::string(e.what()) + " [checkpoint " + checkpoint.string() + "]");
  }
}

std::string predictions_to_csv(const std::vector<Prediction>& predictions) {
  std::string out = csv::format_row({"sample_id", "truth", "pred"});
  for (const auto& p : predictions) {
    out += csv::format_row({p.sample_id, csv::format_double(p.truth), csv::format_double(p.pred)});
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions) {
  csv::write_file(path, predictions_to_csv(predictions));
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  const auto rows = csv::parse(csv::read_file(path));
  if (rows.empty() || rows.front() != csv::Row{"sample_id", "truth", "pred"}) {
    throw ValidationError(path.string() + ": expected header 'sample_id,truth,pred'");
  }
  std::vector<Prediction> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw ValidationError(path.string() + ": malformed line " + std::to_string(r + 1));
    out.push_back({rows[r][0], csv::parse_double(rows[r][1], path.string()), csv::parse_double(rows[r][2], path.string())});
  }
  return out;
}

metrics::CorrelationResult correlate(const std::vector<Prediction>& predictions) {
  std::vector<double> truth;
  std::vector<double> pred;
  truth.reserve(predictions.size());
  pred.reserve(predictions.size());
  for (const auto& p : predictions) {
    truth.push_back(p.truth);
    pred.push_back(p.pred);
  }
  return metrics::correlate(truth, pred);
}

void ExperimentMatrix::validate() const {
  if (datasets.empty()) throw ValidationError("matrix lists no datasets");
  if (models.empty()) throw ValidationError("matrix lists no models");
  if (repeats < 1) throw ValidationError("repeats must be positive");
  if (jobs < 1) throw ValidationError("jobs must be positive");
  config.validate();
  for (const auto& d : datasets) {
    if (d.dimensions.empty()) throw ValidationError("dataset " + d.manifest.string() + " lists no dimensions");
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i].spec.validate();
    for (std::size_t k = 0; k < i; ++k) {
      if (models[k].label == models[i].label) throw ValidationError("duplicate model label '" + models[i].label + "'");
    }
    if (models[i].spec.variant == Variant::kTier && !matched_baseline(i)) {
      throw ValidationError("model '" + models[i].label + "' has no baseline with image encoder '" +
                            models[i].spec.image_encoder.name + "'");
    }
  }
}

std::optional<std::string> ExperimentMatrix::matched_baseline(std::size_t i) const {
  if (models[i].spec.variant != Variant::kTier) return std::nullopt;
  for (const auto& m : models) {
    if (m.spec.variant == Variant::kBaseline && m.spec.image_encoder == models[i].spec.image_encoder) return m.label;
  }
  return std::nullopt;
}

ExperimentMatrix parse_matrix(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentMatrix m;
  try {
    for (const auto& d : j.at("datasets")) {
      std::filesystem::path p = d.at("manifest").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      m.datasets.push_back({p.lexically_normal(), d.at("dimensions").get<std::vector<std::string>>()});
    }
    const Activation default_act = parse_activation(j.value("activation", "relu"));
    for (const auto& e : j.at("models")) {
      MatrixModel mm;
      mm.label = e.at("label").get<std::string>();
      if (e.contains("spec")) {
        mm.spec = e.at("spec").get<ModelSpec>();
      } else {
        mm.spec.image_encoder = encoder_from_config(e.at("image_encoder"), Modality::kImage, base_dir);
        if (e.contains("text_encoder") && !e.at("text_encoder").is_null()) {
          mm.spec.text_encoder = encoder_from_config(e.at("text_encoder"), Modality::kText, base_dir);
          mm.spec.variant = Variant::kTier;
        } else {
          mm.spec.variant = Variant::kBaseline;
        }
        mm.spec.activation = e.contains("activation") ? parse_activation(e.at("activation").get<std::string>())
                                                      : default_act;
      }
      m.models.push_back(std::move(mm));
    }
    if (j.contains("train")) m.config = j.at("train").get<TrainConfig>();
    if (j.contains("split")) m.split = j.at("split").get<SplitSpec>();
    m.repeats = j.value("repeats", 1);
    m.jobs = j.value("jobs", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed matrix spec: ") + e.what());
  }
  m.validate();
  return m;
}

ExperimentMatrix load_matrix(const std::filesystem::path& path) {
  return parse_matrix(parse_json_file(path), path.parent_path());
}

nlohmann::json matrix_to_json(const ExperimentMatrix& m) {
  nlohmann::json j;
  j["datasets"] = nlohmann::json::array();
  for (const auto& d : m.datasets) {
    j["datasets"].push_back({{"manifest", std::filesystem::absolute(d.manifest).lexically_normal().string()},
                             {"dimensions", d.dimensions}});
  }
  j["models"] = nlohmann::json::array();
  for (const auto& mm : m.models) j["models"].push_back({{"label", mm.label}, {"spec", mm.spec}});
  j["train"] = m.config;
  j["split"] = m.split;
  j["repeats"] = m.repeats;
  j["jobs"] = m.jobs;
  return j;
}

CellResult run_cell(const ExperimentMatrix& matrix, std::size_t dataset, const std::string& dimension,
                    std::size_t model, int repeat, const ImageSource& images,
                    const std::filesystem::path& results_dir) {
  CellResult c;
  c.dataset = dataset_name(matrix, dataset);
  c.dimension = dimension;
  c.label = matrix.models[model].label;
  c.repeat = repeat;
  const auto rel = cell_dir(matrix, dataset, dimension, model, repeat);
  const auto dir = results_dir / rel;
  try {
    std::filesystem::create_directories(dir);
    SplitSpec split = matrix.split;
    split.seed += static_cast<std::uint64_t>(repeat);
    TrainConfig config = matrix.config;
    config.seed += static_cast<std::uint64_t>(repeat);

    const DatasetManifest manifest = split_dataset(load_manifest(matrix.datasets[dataset].manifest), split);
    RunOptions opts;
    opts.out_dir = dir / "run";
    opts.split = split;
    const TrainResult tr = train(manifest, matrix.models[model].spec, config, dimension, images, opts);
    const EvalResult ev = evaluate(tr.best_model, manifest, dimension, images, Split::kTest, config.eval_batch_size);
    write_predictions(dir / "predictions.csv", ev.predictions);
    c.ok = true;
    c.srcc = ev.srcc;
    c.plcc = ev.plcc;
    c.best_epoch = tr.best_epoch;
    c.predictions = (rel / "predictions.csv").generic_string();
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
  }
  try {
    csv::write_file(dir / "result.json", cell_json(c).dump(2) + "\n");
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
  }
  return c;
}

EvalReport aggregate(const ExperimentMatrix& matrix, const std::vector<CellResult>& cells) {
  EvalReport report;
  for (std::size_t d = 0; d < matrix.datasets.size(); ++d) {
    const std::string dname = dataset_name(matrix, d);
    for (const auto& dim : matrix.datasets[d].dimensions) {
      const std::size_t first = report.rows.size();
      for (std::size_t mi = 0; mi < matrix.models.size(); ++mi) {
        ReportRow row;
        row.dataset = dname;
        row.dimension = dim;
        row.label = matrix.models[mi].label;
        row.variant = matrix.models[mi].spec.variant;
        row.baseline = matrix.matched_baseline(mi);
        std::vector<double> s;
        std::vector<double> p;
        for (const auto& c : cells) {
          if (c.dataset != dname || c.dimension != dim || c.label != row.label) continue;
          if (c.ok) {
            s.push_back(c.srcc);
            p.push_back(c.plcc);
          } else {
            if (row.failures++ == 0) row.error = c.error;
          }
        }
        row.runs = static_cast<int>(s.size());
        const auto ms = mean_sd(s);
        const auto mp = mean_sd(p);
        row.srcc_mean = ms.mean;
        row.srcc_sd = ms.sd;
        row.plcc_mean = mp.mean;
        row.plcc_sd = mp.sd;
        report.rows.push_back(std::move(row));
      }
      auto begin = report.rows.begin() + static_cast<std::ptrdiff_t>(first);
      auto end = report.rows.end();
      for (auto it = begin; it != end; ++it) {
        if (!it->baseline || it->failed()) continue;
        auto base = std::find_if(begin, end, [&](const ReportRow& r) { return r.label == *it->baseline; });
        if (base == end || base->failed()) continue;
        it->delta_srcc = it->srcc_mean - base->srcc_mean;
        it->delta_plcc = it->plcc_mean - base->plcc_mean;
        it->improved_srcc = *it->delta_srcc > 0.0;
        it->improved_plcc = *it->delta_plcc > 0.0;
      }
      double best_s = -INFINITY;
      double best_p = -INFINITY;
      for (auto it = begin; it != end; ++it) {
        if (it->failed()) continue;
        best_s = std::max(best_s, it->srcc_mean);
        best_p = std::max(best_p, it->plcc_mean);
      }
      for (auto it = begin; it != end; ++it) {
        if (it->failed()) continue;
        it->best_srcc = it->srcc_mean == best_s;
        it->best_plcc = it->plcc_mean == best_p;
      }
    }
  }
  report.metadata = {
      {"train", matrix.config},
      {"split", matrix.split},
      {"repeats", matrix.repeats},
      {"train_seeds_start", matrix.config.seed},
      {"split_seeds_start", matrix.split.seed},
      {"generated_at", utc_timestamp()},
  };
  return report;
}

EvalReport run_matrix(const ExperimentMatrix& matrix, const std::filesystem::path& results_dir,
                      const ImageSource& images) {
  matrix.validate();
  for (const auto& d : matrix.datasets) {
    const auto m = load_manifest(d.manifest);
    for (const auto& dim : d.dimensions) {
      if (!m.has_dimension(dim)) throw ValidationError("dataset " + d.manifest.string() + " has no dimension " + dim);
    }
  }
  std::filesystem::create_directories(results_dir);
  csv::write_file(results_dir / "matrix.json", matrix_to_json(matrix).dump(2) + "\n");

  struct Job {
    std::size_t dataset;
    std::string dimension;
    std::size_t model;
    int repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < matrix.datasets.size(); ++d) {
    for (const auto& dim : matrix.datasets[d].dimensions) {
      for (std::size_t mi = 0; mi < matrix.models.size(); ++mi) {
        for (int r = 0; r < matrix.repeats; ++r) jobs.push_back({d, dim, mi, r});
      }
    }
  }

  std::vector<CellResult> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& j = jobs[k];
      cells[k] = run_cell(matrix, j.dataset, j.dimension, j.model, j.repeat, images, results_dir);
    }
  };
  const int n_threads = std::max(1, std::min<int>(matrix.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return aggregate(matrix, cells);
}

EvalReport load_results(const std::filesystem::path& results_dir) {
  const ExperimentMatrix matrix = parse_matrix(parse_json_file(results_dir / "matrix.json"), results_dir);
  std::vector<CellResult> cells;
  for (std::size_t d = 0; d < matrix.datasets.size(); ++d) {
    for (const auto& dim : matrix.datasets[d].dimensions) {
      for (std::size_t mi = 0; mi < matrix.models.size(); ++mi) {
        for (int r = 0; r < matrix.repeats; ++r) {
          const auto file = results_dir / cell_dir(matrix, d, dim, mi, r) / "result.json";
          if (std::filesystem::exists(file)) {
            cells.push_back(cell_from_json(parse_json_file(file)));
          } else {
            CellResult c;
            c.dataset = dataset_name(matrix, d);
            c.dimension = dim;
            c.label = matrix.models[mi].label;
            c.repeat = r;
            c.error = "missing " + file.string();
            cells.push_back(std::move(c));
          }
        }
      }
    }
  }
  return aggregate(matrix, cells);
}

}  // namespace tier
