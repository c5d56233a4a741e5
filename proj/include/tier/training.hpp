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

#ifndef TIER_TRAINING_HPP_
#define TIER_TRAINING_HPP_

// Mean-squared-error training of the head and any trainable encoders with
// Adam. Defaults: train batch 8, eval batch 20, lr 1e-4, weight decay 1e-5.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tier/data.hpp"
#include "tier/image.hpp"
#include "tier/model.hpp"
#include "tier/optimizer.hpp"
#include "tier/rng.hpp"

namespace tier {

enum class SelectOn { kTest, kValidation };

struct TrainConfig {
  int train_batch_size = 8;
  int eval_batch_size = 20;
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  std::string optimizer = "adam";
  int epochs = 50;
  std::uint64_t seed = 0;
  bool freeze_encoders = false;
  bool shuffle = true;
  // Best-checkpoint selection. kValidation holds out validation_fraction of
  // the train split (seeded) and selects on it instead of the test split.
  SelectOn select_on = SelectOn::kTest;
  double validation_fraction = 0.1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct HistoryEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double srcc = 0.0;  // NaN when undefined (e.g. constant predictions)
  double plcc = 0.0;
};

struct TrainState {
  int epoch = 0;
  std::int64_t step = 0;
  Model model;
  Adam optimizer;
  SplitMix64 rng;
  std::vector<HistoryEntry> history;
};

// Head weights come from the run seed; shuffles use an independent stream.
TrainState init_train_state(const ModelSpec& spec, const TrainConfig& config);

struct Batch {
  std::vector<std::optional<std::string>> prompts;
  std::vector<Image> images;
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
};

// Yields batches until exhausted.
using BatchStream = std::function<std::optional<Batch>()>;

double mse_loss(std::span<const double> pred, std::span<const double> truth);

// One optimizer step on `batch`; returns the batch loss before the update.
double train_step(TrainState& state, const TrainConfig& config, const Batch& batch);

// One pass over `batches`. Appends {epoch, mean batch loss, NaN, NaN} to the
// history and returns the mean loss. Throws TrainingDiverged on a
// non-finite loss, naming the global step.
double train_epoch(TrainState& state, const TrainConfig& config, const BatchStream& batches);

// Labeled samples of one score dimension.
struct LabeledData {
  const DatasetManifest* manifest = nullptr;
  const ImageSource* images = nullptr;
  std::string dimension;
};

BatchStream make_batch_stream(const LabeledData& data, std::vector<std::size_t> indices, int batch_size);

struct Prediction {
  std::string sample_id;
  double truth = 0.0;
  double pred = 0.0;
};

std::vector<Prediction> predict_indices(const Model& model, const LabeledData& data,
                                        std::span<const std::size_t> indices, int batch_size);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  // Recorded in the run metadata when known.
  std::optional<SplitSpec> split;
};

struct TrainResult {
  TrainState state;
  Model best_model;
  int best_epoch = 0;  // 0: initialization
  std::optional<std::filesystem::path> best_checkpoint;
};

// Runs config.epochs epochs over the train split, evaluating SRCC/PLCC on
// the test split after each. With out_dir set, writes
//   config  history.csv  best.ckpt  last.ckpt  meta  split.csv
TrainResult train(const DatasetManifest& manifest, const ModelSpec& spec, const TrainConfig& config,
                  const std::string& dimension, const ImageSource& images, const RunOptions& options = {});

std::string history_to_csv(std::span<const HistoryEntry> history);

}  // namespace tier

#endif  // TIER_TRAINING_HPP_
