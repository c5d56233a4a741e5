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

// tier: train, evaluate and compare text+image score regressors.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tier/convert.hpp"
#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/evaluation.hpp"
#include "tier/json_io.hpp"
#include "tier/report.hpp"
#include "tier/training.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct TrainArgs {
  std::string manifest;
  std::string dimension;
  std::string config;
  std::string out;
  bool baseline = false;
  std::optional<std::string> text_encoder;
  std::optional<std::string> image_encoder;
  std::optional<std::uint64_t> seed;
  bool freeze_encoders = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string dimension;
  std::optional<std::string> dump;
  std::optional<std::string> splits;
  std::string split = "test";
  int batch_size = 20;
};

tier::EncoderSpec encoder_arg(const nlohmann::json& cfg, const char* key, const std::optional<std::string>& cli,
                              tier::Modality modality, const std::filesystem::path& base_dir) {
  nlohmann::json j = cfg.contains(key) ? cfg.at(key) : nlohmann::json("toy");
  if (cli) {
    if (j.is_object()) {
      j["name"] = *cli;
      // A dim configured for one encoder does not carry over to a
      // pretrained backbone with a fixed width.
      if (tier::make_encoder_spec(modality, *cli).kind == tier::EncoderKind::kPretrained) j.erase("dim");
    } else {
      j = *cli;
    }
  }
  return tier::encoder_from_config(j, modality, base_dir);
}

int run_train(const TrainArgs& a) {
  const nlohmann::json cfg = tier::parse_json_file(a.config);
  tier::TrainConfig config = cfg.contains("train") ? cfg.at("train").get<tier::TrainConfig>() : tier::TrainConfig{};
  tier::SplitSpec split = cfg.contains("split") ? cfg.at("split").get<tier::SplitSpec>() : tier::SplitSpec{};
  if (a.seed) {
    config.seed = *a.seed;
    split.seed = *a.seed;
  }
  if (a.freeze_encoders) config.freeze_encoders = true;

  const nlohmann::json model_cfg = cfg.value("model", nlohmann::json::object());
  const auto config_dir = std::filesystem::absolute(a.config).parent_path();
  tier::ModelSpec spec;
  spec.activation = tier::parse_activation(model_cfg.value("activation", "relu"));
  spec.image_encoder = encoder_arg(model_cfg, "image_encoder", a.image_encoder, tier::Modality::kImage, config_dir);
  if (a.baseline) {
    spec.variant = tier::Variant::kBaseline;
  } else {
    spec.variant = tier::Variant::kTier;
    spec.text_encoder = encoder_arg(model_cfg, "text_encoder", a.text_encoder, tier::Modality::kText, config_dir);
  }

  tier::LoadOptions load;
  load.check_images = true;
  const auto manifest = tier::split_dataset(tier::load_manifest(a.manifest, load), split);
  tier::DiskImageSource images;
  tier::RunOptions opts;
  opts.out_dir = a.out;
  opts.split = split;
  const auto result = tier::train(manifest, spec, config, a.dimension, images, opts);

  nlohmann::json summary = {{"best_epoch", result.best_epoch}, {"out", a.out}, {"steps", result.state.step}};
  if (!result.state.history.empty()) {
    const auto& last = result.state.history.back();
    summary["last"] = {{"epoch", last.epoch}, {"train_loss", last.train_loss}};
    if (std::isfinite(last.srcc)) summary["last"]["srcc"] = last.srcc;
    if (std::isfinite(last.plcc)) summary["last"]["plcc"] = last.plcc;
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_eval(const EvalArgs& a) {
  auto manifest = tier::load_manifest(a.manifest);
  std::filesystem::path splits = a.splits ? std::filesystem::path(*a.splits)
                                          : std::filesystem::path(a.checkpoint).parent_path() / "split.csv";
  if (!std::filesystem::exists(splits)) {
    throw tier::ValidationError("split assignment missing: " + splits.string() + " (pass --splits)");
  }
  manifest = tier::load_splits(manifest, splits);
  tier::DiskImageSource images(false);
  const auto r = tier::evaluate(std::filesystem::path(a.checkpoint), manifest, a.dimension, images,
                                tier::parse_split(a.split), a.batch_size);
  if (a.dump) tier::write_predictions(*a.dump, r.predictions);
  std::cout << nlohmann::json{{"srcc", r.srcc}, {"plcc", r.plcc}, {"n", r.predictions.size()}}.dump() << "\n";
  return 0;
}

int run_matrix(const std::string& spec_path, const std::string& out) {
  const auto matrix = tier::load_matrix(spec_path);
  tier::DiskImageSource images;
  const auto report = tier::run_matrix(matrix, out, images);
  tier::render_report(report, std::filesystem::path(out) / "report");
  std::cout << tier::report_to_text(report);
  int failed = 0;
  for (const auto& r : report.rows) failed += r.failures;
  if (failed > 0) std::cerr << failed << " cell run(s) failed; see report.csv\n";
  return 0;
}

int run_report(const std::string& results, const std::string& out) {
  const auto report = tier::load_results(results);
  for (const auto& p : tier::render_report(report, out)) std::cout << p.string() << "\n";
  return 0;
}

int run_convert(const std::string& layout, const std::string& src, const std::string& out, bool include_align) {
  tier::ConvertOptions opts;
  opts.include_align = include_align;
  const auto m = tier::convert_layout(tier::parse_layout(layout), src, out, opts);
  std::cout << nlohmann::json{{"records", m.records.size()},
                              {"prompt_groups", m.prompt_groups.size()},
                              {"dimensions", m.score_dimensions},
                              {"out", out}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-image encoder regression for AI-generated image quality assessment"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one model on one score dimension");
  train->add_option("--manifest", ta.manifest, "Manifest CSV")->required();
  train->add_option("--dimension", ta.dimension, "Score dimension to regress")->required();
  train->add_option("--config", ta.config, "JSON config (train, split, model sections)")->required();
  train->add_option("--out", ta.out, "Run directory")->required();
  train->add_flag("--baseline", ta.baseline, "Image-only baseline (no text encoder)");
  train->add_option("--text-encoder", ta.text_encoder, "Text encoder name");
  train->add_option("--image-encoder", ta.image_encoder, "Image encoder name");
  train->add_option("--seed", ta.seed, "Seed for splitting, initialization and shuffling");
  train->add_flag("--freeze-encoders", ta.freeze_encoders, "Do not update encoder parameters");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint (SRCC/PLCC)");
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--manifest", ea.manifest, "Manifest CSV")->required();
  eval->add_option("--dimension", ea.dimension, "Score dimension")->required();
  eval->add_option("--dump-predictions", ea.dump, "Write sample_id,truth,pred CSV");
  eval->add_option("--splits", ea.splits, "Split sidecar (default: split.csv next to the checkpoint)");
  eval->add_option("--split", ea.split, "Split to evaluate")->check(CLI::IsMember({"test", "train"}));
  eval->add_option("--batch-size", ea.batch_size, "Evaluation batch size");

  std::string matrix_spec;
  std::string matrix_out;
  auto* matrix = app.add_subcommand("matrix", "Run a baseline-vs-TIER experiment matrix");
  matrix->add_option("--spec", matrix_spec, "Matrix spec (JSON)")->required();
  matrix->add_option("--out", matrix_out, "Results directory")->required();

  std::string results_dir;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render tables and charts from matrix results");
  report->add_option("--results", results_dir, "Results directory written by 'matrix'")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::string layout;
  std::string src;
  std::string manifest_out;
  bool include_align = false;
  auto* convert = app.add_subcommand("convert", "Convert a database layout to a manifest CSV");
  convert->add_option("--layout", layout, "agiqa1k | agiqa3k | aigciqa2023")->required();
  convert->add_option("--src", src, "Database root directory")->required();
  convert->add_option("--out", manifest_out, "Output manifest CSV")->required();
  convert->add_flag("--include-align", include_align, "AGIQA-3K: also ingest alignment MOS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*train) return run_train(ta);
    if (*eval) return run_eval(ea);
    if (*matrix) return run_matrix(matrix_spec, matrix_out);
    if (*report) return run_report(results_dir, report_out);
    if (*convert) return run_convert(layout, src, manifest_out, include_align);
  } catch (const tier::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
