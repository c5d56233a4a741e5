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

#include "tier/training.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/json_io.hpp"
#include "tier/metrics.hpp"

namespace tier {
namespace {

constexpr std::uint64_t kHeadSeedSalt = 0x48454144ULL;     // "HEAD"
constexpr std::uint64_t kShuffleSeedSalt = 0x53485546ULL;  // "SHUF"
constexpr std::uint64_t kHoldoutSeedSalt = 0x56414C49ULL;  // "VALI"

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

AdamConfig adam_config(const TrainConfig& c) {
  AdamConfig a;
  a.learning_rate = c.learning_rate;
  a.weight_decay = c.weight_decay;
  return a;
}

std::pair<double, double> metrics_or_nan(const std::vector<Prediction>& preds) {
  std::vector<double> truth;
  std::vector<double> pred;
  for (const auto& p : preds) {
    truth.push_back(p.truth);
    pred.push_back(p.pred);
  }
  try {
    const auto r = metrics::correlate(truth, pred);
    return {r.srcc, r.plcc};
  } catch (const UndefinedCorrelation&) {
    return {kNaN, kNaN};
  } catch (const ValidationError&) {
    return {kNaN, kNaN};
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (train_batch_size <= 0) throw ValidationError("train_batch_size must be positive");
  if (eval_batch_size <= 0) throw ValidationError("eval_batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ValidationError("weight_decay must be >= 0");
  if (optimizer != "adam") throw ValidationError("unsupported optimizer '" + optimizer + "'");
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (select_on == SelectOn::kValidation && !(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ValidationError("validation_fraction must lie strictly between 0 and 1");
  }
}

TrainState init_train_state(const ModelSpec& spec, const TrainConfig& config) {
  config.validate();
  return TrainState{0, 0, Model(spec, config.seed ^ kHeadSeedSalt), Adam(adam_config(config)),
                    SplitMix64(config.seed ^ kShuffleSeedSalt), {}};
}

double mse_loss(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError("mse_loss: length mismatch " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  if (pred.empty()) throw ValidationError("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

double train_step(TrainState& state, const TrainConfig& config, const Batch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw ValidationError("empty batch");
  if (batch.prompts.size() != n || batch.images.size() != n) throw ValidationError("ragged batch");

  const bool through_encoders = !config.freeze_encoders && state.model.has_trainable_encoders();
  Model::Gradient grad = state.model.zero_gradient();
  std::vector<double> preds(n);
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = batch.scores[i];
    preds[i] = state.model.forward_backward(
        batch.prompts[i], batch.images[i], [&](double p) { return scale * (p - target); }, grad, through_encoders);
  }
  const double loss = mse_loss(preds, batch.scores);
  if (!std::isfinite(loss)) {
    throw TrainingDiverged("non-finite loss at step " + std::to_string(state.step + 1) + " (epoch " +
                           std::to_string(state.epoch + 1) + ")");
  }
  auto params = state.model.parameters(through_encoders);
  auto grads = grad.blocks(through_encoders);
  state.optimizer.step(params, grads);
  ++state.step;
  return loss;
}

double train_epoch(TrainState& state, const TrainConfig& config, const BatchStream& batches) {
  double total = 0.0;
  std::size_t count = 0;
  while (auto batch = batches()) {
    total += train_step(state, config, *batch);
    ++count;
  }
  ++state.epoch;
  const double mean = count ? total / static_cast<double>(count) : kNaN;
  state.history.push_back({state.epoch, mean, kNaN, kNaN});
  return mean;
}

BatchStream make_batch_stream(const LabeledData& data, std::vector<std::size_t> indices, int batch_size) {
  if (batch_size <= 0) throw ValidationError("batch size must be positive");
  auto cursor = std::make_shared<std::size_t>(0);
  auto order = std::make_shared<std::vector<std::size_t>>(std::move(indices));
  return [data, cursor, order, batch_size]() -> std::optional<Batch> {
    if (*cursor >= order->size()) return std::nullopt;
    Batch b;
    const std::size_t end = std::min(order->size(), *cursor + static_cast<std::size_t>(batch_size));
    for (; *cursor < end; ++*cursor) {
      const SampleRecord& r = data.manifest->records[(*order)[*cursor]];
      b.prompts.emplace_back(r.prompt);
      b.images.push_back(data.images->load(*data.manifest, r));
      b.scores.push_back(r.scores.at(data.dimension));
    }
    return b;
  };
}

std::vector<Prediction> predict_indices(const Model& model, const LabeledData& data,
                                        std::span<const std::size_t> indices, int batch_size) {
  std::vector<Prediction> out;
  out.reserve(indices.size());
  auto stream = make_batch_stream(data, {indices.begin(), indices.end()}, batch_size);
  std::size_t k = 0;
  while (auto batch = stream()) {
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < batch->size(); ++i) {
      samples.push_back({model.spec().variant == Variant::kTier ? batch->prompts[i] : std::nullopt,
                         &batch->images[i]});
    }
    const auto preds = model.predict_batch(samples);
    for (std::size_t i = 0; i < preds.size(); ++i, ++k) {
      out.push_back({data.manifest->records[indices[k]].sample_id, batch->scores[i], preds[i]});
    }
  }
  return out;
}

std::string history_to_csv(std::span<const HistoryEntry> history) {
  std::string out = csv::format_row({"epoch", "train_loss", "srcc", "plcc"});
  for (const auto& h : history) {
    out += csv::format_row({std::to_string(h.epoch), csv::format_double(h.train_loss), csv::format_double(h.srcc),
                            csv::format_double(h.plcc)});
  }
  return out;
}

TrainResult train(const DatasetManifest& manifest, const ModelSpec& spec, const TrainConfig& config,
                  const std::string& dimension, const ImageSource& images, const RunOptions& options) {
  config.validate();
  if (!manifest.has_dimension(dimension)) {
    throw ValidationError("unknown dimension '" + dimension + "' for manifest '" + manifest.name + "'");
  }
  std::vector<std::size_t> train_idx = manifest.indices(Split::kTrain);
  const std::vector<std::size_t> test_idx = manifest.indices(Split::kTest);
  if (train_idx.empty()) throw ValidationError("train split is empty (is the manifest split?)");
  if (test_idx.empty()) throw ValidationError("test split is empty (is the manifest split?)");

  std::vector<std::size_t> select_idx = test_idx;
  if (config.select_on == SelectOn::kValidation) {
    SplitMix64 holdout(config.seed ^ kHoldoutSeedSalt);
    shuffle(std::span(train_idx), holdout);
    const auto n_val = static_cast<std::size_t>(
        std::llround(config.validation_fraction * static_cast<double>(train_idx.size())));
    if (n_val == 0 || n_val >= train_idx.size()) throw ValidationError("degenerate validation holdout");
    select_idx.assign(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.erase(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(select_idx.begin(), select_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }

  const LabeledData data{&manifest, &images, dimension};
  TrainState state = init_train_state(spec, config);
  Model best = state.model;
  int best_epoch = 0;
  double best_srcc = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int e = 0; e < config.epochs; ++e) {
    std::vector<std::size_t> order = train_idx;
    if (config.shuffle) shuffle(std::span(order), state.rng);
    train_epoch(state, config, make_batch_stream(data, std::move(order), config.train_batch_size));

    const auto [srcc, plcc] = metrics_or_nan(predict_indices(state.model, data, test_idx, config.eval_batch_size));
    state.history.back().srcc = srcc;
    state.history.back().plcc = plcc;

    double select_srcc = srcc;
    if (config.select_on == SelectOn::kValidation) {
      select_srcc = metrics_or_nan(predict_indices(state.model, data, select_idx, config.eval_batch_size)).first;
    }
    if (std::isfinite(select_srcc) && select_srcc > best_srcc) {
      best_srcc = select_srcc;
      best = state.model;
      best_epoch = state.epoch;
      have_best = true;
    }
  }
  if (!have_best) {
    best = state.model;
    best_epoch = state.epoch;
  }

  TrainResult result{std::move(state), std::move(best), best_epoch, std::nullopt};
  if (options.out_dir) {
    const auto& dir = *options.out_dir;
    std::filesystem::create_directories(dir);
    nlohmann::json cfg = {{"train", config}, {"model", spec}, {"dimension", dimension}};
    if (options.split) cfg["split"] = *options.split;
    csv::write_file(dir / "config", cfg.dump(2) + "\n");
    csv::write_file(dir / "history.csv", history_to_csv(result.state.history));
    save_checkpoint(result.best_model, dir / "best.ckpt");
    save_checkpoint(result.state.model, dir / "last.ckpt");
    write_splits(manifest, dir / "split.csv");
    nlohmann::json meta = {
        {"manifest", manifest.name},
        {"manifest_hash", manifest_hash(manifest)},
        {"dimension", dimension},
        {"seed", config.seed},
        {"best_epoch", result.best_epoch},
        {"epochs", config.epochs},
        {"steps", result.state.step},
    };
    meta["split_seed"] = options.split ? nlohmann::json(options.split->seed) : nlohmann::json(nullptr);
    csv::write_file(dir / "meta", meta.dump(2) + "\n");
    result.best_checkpoint = dir / "best.ckpt";
  }
  return result;
}

}  // namespace tier
