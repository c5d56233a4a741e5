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

#include "tier/json_io.hpp"

#include "tier/csv.hpp"
#include "tier/error.hpp"

namespace tier {
namespace {

Modality parse_modality(const std::string& s) {
  if (s == "text") return Modality::kText;
  if (s == "image") return Modality::kImage;
  throw ValidationError("unknown modality '" + s + "'");
}

EncoderKind parse_kind(const std::string& s) {
  if (s == "toy") return EncoderKind::kToy;
  if (s == "learnable") return EncoderKind::kLearnable;
  if (s == "pretrained") return EncoderKind::kPretrained;
  throw ValidationError("unknown encoder kind '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const EncoderSpec& spec) {
  j = {
      {"modality", to_string(spec.modality)},
      {"kind", to_string(spec.kind)},
      {"name", spec.name},
      {"output_dim", spec.output_dim},
      {"trainable", spec.trainable},
      {"seed", spec.seed},
  };
  if (!spec.feature_file.empty()) j["feature_file"] = spec.feature_file;
}

void from_json(const nlohmann::json& j, EncoderSpec& spec) {
  spec.modality = parse_modality(j.at("modality").get<std::string>());
  spec.kind = parse_kind(j.at("kind").get<std::string>());
  spec.name = j.at("name").get<std::string>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.trainable = j.at("trainable").get<bool>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.feature_file = j.value("feature_file", "");
}

void to_json(nlohmann::json& j, const ModelSpec& spec) {
  j = {
      {"variant", to_string(spec.variant)},
      {"image_encoder", spec.image_encoder},
      {"activation", to_string(spec.activation)},
      {"head_hidden_dim", spec.head_hidden_dim()},
  };
  j["text_encoder"] = spec.text_encoder ? nlohmann::json(*spec.text_encoder) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ModelSpec& spec) {
  spec.variant = parse_variant(j.at("variant").get<std::string>());
  spec.image_encoder = j.at("image_encoder").get<EncoderSpec>();
  spec.activation = parse_activation(j.value("activation", "relu"));
  if (j.contains("text_encoder") && !j.at("text_encoder").is_null()) {
    spec.text_encoder = j.at("text_encoder").get<EncoderSpec>();
  } else {
    spec.text_encoder.reset();
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {
      {"train_batch_size", c.train_batch_size},
      {"eval_batch_size", c.eval_batch_size},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"optimizer", c.optimizer},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"freeze_encoders", c.freeze_encoders},
      {"shuffle", c.shuffle},
      {"select_on", c.select_on == SelectOn::kTest ? "test" : "validation"},
      {"validation_fraction", c.validation_fraction},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.train_batch_size = j.value("train_batch_size", d.train_batch_size);
  c.eval_batch_size = j.value("eval_batch_size", d.eval_batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.optimizer = j.value("optimizer", d.optimizer);
  c.epochs = j.value("epochs", d.epochs);
  c.seed = j.value("seed", d.seed);
  c.freeze_encoders = j.value("freeze_encoders", d.freeze_encoders);
  c.shuffle = j.value("shuffle", d.shuffle);
  const std::string select = j.value("select_on", std::string("test"));
  if (select == "test") {
    c.select_on = SelectOn::kTest;
  } else if (select == "validation") {
    c.select_on = SelectOn::kValidation;
  } else {
    throw ValidationError("select_on must be 'test' or 'validation'");
  }
  c.validation_fraction = j.value("validation_fraction", d.validation_fraction);
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"mode", to_string(s.mode)}, {"test_fraction", s.test_fraction}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  const SplitSpec d;
  s.mode = parse_split_mode(j.value("mode", std::string(to_string(d.mode))));
  s.test_fraction = j.value("test_fraction", d.test_fraction);
  s.seed = j.value("seed", d.seed);
}

EncoderSpec encoder_from_config(const nlohmann::json& j, Modality modality, const std::filesystem::path& base_dir) {
  if (j.is_string()) return make_encoder_spec(modality, j.get<std::string>());
  if (!j.is_object()) throw ValidationError("encoder config must be a name or an object");
  std::optional<int> dim;
  if (j.contains("dim")) dim = j.at("dim").get<int>();
  EncoderSpec spec = make_encoder_spec(modality, j.at("name").get<std::string>(), dim);
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("feature_file")) {
    std::filesystem::path file = j.at("feature_file").get<std::string>();
    if (file.is_relative() && !base_dir.empty()) file = std::filesystem::absolute(base_dir / file).lexically_normal();
    spec.feature_file = file.string();
  }
  return spec;
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace tier
