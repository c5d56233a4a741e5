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

#ifndef TIER_JSON_IO_HPP_
#define TIER_JSON_IO_HPP_

// JSON forms of the configuration types, shared by checkpoints, run
// directories, train configs and matrix specs. Readers fill unspecified
// fields with defaults and reject unknown enum spellings.

#include <filesystem>

#include "json.hpp"
#include "tier/data.hpp"
#include "tier/encoders.hpp"
#include "tier/model.hpp"
#include "tier/training.hpp"

namespace tier {

void to_json(nlohmann::json& j, const EncoderSpec& spec);
void from_json(const nlohmann::json& j, EncoderSpec& spec);

void to_json(nlohmann::json& j, const ModelSpec& spec);
void from_json(const nlohmann::json& j, ModelSpec& spec);

void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);

void to_json(nlohmann::json& j, const SplitSpec& spec);
void from_json(const nlohmann::json& j, SplitSpec& spec);

// Accepts either a bare registry name ("toy", "resnet50") or an object
// {"name": ..., "dim": ..., "seed": ..., "feature_file": ...}.
// Relative feature_file paths are resolved against `base_dir` when given.
EncoderSpec encoder_from_config(const nlohmann::json& j, Modality modality,
                                const std::filesystem::path& base_dir = {});

nlohmann::json parse_json_file(const std::filesystem::path& path);

}  // namespace tier

#endif  // TIER_JSON_IO_HPP_
