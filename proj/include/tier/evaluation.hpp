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

#ifndef TIER_EVALUATION_HPP_
#define TIER_EVALUATION_HPP_

// Checkpoint evaluation and the baseline-vs-TIER experiment matrix.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tier/data.hpp"
#include "tier/image.hpp"
#include "tier/metrics.hpp"
#include "tier/model.hpp"
#include "tier/training.hpp"

namespace tier {

struct EvalResult {
  double srcc = 0.0;
  double plcc = 0.0;
  std::vector<Prediction> predictions;
};

// Predicts the requested split in batches of `batch_size` and correlates.
EvalResult evaluate(const Model& model, const DatasetManifest& manifest, const std::string& dimension,
                    const ImageSource& images, Split split = Split::kTest, int batch_size = 20);

// As above, loading the checkpoint first. An undefined correlation is
// rethrown naming the checkpoint.
EvalResult evaluate(const std::filesystem::path& checkpoint, const DatasetManifest& manifest,
                    const std::string& dimension, const ImageSource& images, Split split = Split::kTest,
                    int batch_size = 20);

// Prediction dump: `sample_id,truth,pred`.
std::string predictions_to_csv(const std::vector<Prediction>& predictions);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
metrics::CorrelationResult correlate(const std::vector<Prediction>& predictions);

struct MatrixDataset {
  std::filesystem::path manifest;
  std::vector<std::string> dimensions;
};

struct MatrixModel {
  std::string label;
  ModelSpec spec;
};

struct ExperimentMatrix {
  std::vector<MatrixDataset> datasets;
  std::vector<MatrixModel> models;
  TrainConfig config;
  SplitSpec split;
  int repeats = 1;
  int jobs = 1;

  // Every TIER model needs a baseline with the same image encoder.
  void validate() const;
  // Label of the baseline matched to models[i], or nullopt for baselines.
  std::optional<std::string> matched_baseline(std::size_t i) const;
};

// JSON matrix spec:
// {
//   "datasets": [{"manifest": "agiqa1k.csv", "dimensions": ["MOS"]}, ...],
//   "models": [{"label": "ResNet50(Baseline)", "image_encoder": "resnet50"},
//              {"label": "BERT-base+ResNet50", "text_encoder": "bert-base",
//               "image_encoder": "resnet50"}],
//   "train": {...}, "split": {...}, "repeats": 1, "jobs": 1, "activation": "relu"
// }
// A model is a baseline iff it has no text_encoder. Relative manifest paths
// resolve against `base_dir`.
ExperimentMatrix parse_matrix(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentMatrix load_matrix(const std::filesystem::path& path);
nlohmann::json matrix_to_json(const ExperimentMatrix& matrix);

// Repeat r uses train seed config.seed + r and split seed split.seed + r.
struct CellResult {
  std::string dataset;
  std::string dimension;
  std::string label;
  int repeat = 0;
  bool ok = false;
  std::string error;
  double srcc = 0.0;
  double plcc = 0.0;
  int best_epoch = 0;
  std::string predictions;  // dump path relative to the results dir
};

struct ReportRow {
  std::string dataset;
  std::string dimension;
  std::string label;
  Variant variant = Variant::kBaseline;
  std::optional<std::string> baseline;  // matched baseline label
  int runs = 0;                         // successful repeats
  int failures = 0;
  std::string error;                    // first failure message
  double srcc_mean = 0.0;
  double srcc_sd = 0.0;
  double plcc_mean = 0.0;
  double plcc_sd = 0.0;
  std::optional<double> delta_srcc;  // tier - matched baseline, means
  std::optional<double> delta_plcc;
  bool improved_srcc = false;        // delta_srcc > 0
  bool improved_plcc = false;
  bool best_srcc = false;            // best in its (dataset, dimension) column
  bool best_plcc = false;

  bool failed() const { return runs == 0; }
};

struct EvalReport {
  std::vector<ReportRow> rows;
  nlohmann::json metadata;
};

// Trains and evaluates one cell; writes its run directory, prediction dump
// and result.json under results_dir/cells/. Never throws for cell-level
// failures; they are recorded in the result.
CellResult run_cell(const ExperimentMatrix& matrix, std::size_t dataset, const std::string& dimension,
                    std::size_t model, int repeat, const ImageSource& images,
                    const std::filesystem::path& results_dir);

EvalReport aggregate(const ExperimentMatrix& matrix, const std::vector<CellResult>& cells);

// Runs every (dataset, dimension, model, repeat) cell, writes results_dir
// (matrix.json, cells/...) and returns the aggregated report.
EvalReport run_matrix(const ExperimentMatrix& matrix, const std::filesystem::path& results_dir,
                      const ImageSource& images);

// Rebuilds the report from a results directory written by run_matrix.
EvalReport load_results(const std::filesystem::path& results_dir);

}  // namespace tier

#endif  // TIER_EVALUATION_HPP_
