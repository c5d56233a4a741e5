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

#include "tier/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/rng.hpp"

namespace tier {
namespace {

using testing::toy_spec;

FeatureVector text_vec(std::vector<double> v) { return {std::move(v), Modality::kText}; }
FeatureVector image_vec(std::vector<double> v) { return {std::move(v), Modality::kImage}; }

RegressionHead random_head(int dim, Activation act, SplitMix64& rng) {
  RegressionHead head(dim, act);
  for (auto& block : head.blocks()) {
    for (auto& v : block.values) v = rng.uniform(-1, 1);
  }
  return head;
}

TEST(Fuse, TextThenImage) {
  const auto f = fuse_features(text_vec({1, 2, 3, 4}), image_vec({9, 8}));
  EXPECT_EQ(f.values, (std::vector<double>{1, 2, 3, 4, 9, 8}));
  EXPECT_EQ(f.dim(), 6u);
}

TEST(Fuse, BaselineIsIdentity) {
  EXPECT_EQ(fuse_features(std::nullopt, image_vec({9, 8})).values, (std::vector<double>{9, 8}));
}

TEST(Fuse, PretrainedDimsFromRegistry) {
  ModelSpec spec;
  spec.text_encoder = make_encoder_spec(Modality::kText, "bert-base");
  spec.image_encoder = make_encoder_spec(Modality::kImage, "resnet50");
  EXPECT_EQ(spec.fused_dim(), spec.text_encoder->output_dim + spec.image_encoder.output_dim);
  EXPECT_EQ(spec.fused_dim(), 2816);
  EXPECT_EQ(spec.head_hidden_dim(), 1408);
  const auto f = fuse_features(text_vec(std::vector<double>(768, 1.0)), image_vec(std::vector<double>(2048, 2.0)));
  EXPECT_EQ(f.dim(), 2816u);
}

TEST(Fuse, ModalityMismatch) {
  EXPECT_THROW(fuse_features(image_vec({1}), image_vec({2})), ValidationError);
  EXPECT_THROW(fuse_features(text_vec({1}), text_vec({2})), ValidationError);
}

TEST(ModelSpec, VariantConsistency) {
  auto spec = toy_spec(Variant::kTier, 4, 4);
  EXPECT_NO_THROW(spec.validate());
  spec.text_encoder.reset();
  EXPECT_THROW(spec.validate(), ValidationError);
  auto base = toy_spec(Variant::kBaseline, 4, 4);
  EXPECT_NO_THROW(base.validate());
  base.text_encoder = make_encoder_spec(Modality::kText, "toy", 4);
  EXPECT_THROW(base.validate(), ValidationError);
  auto tiny = toy_spec(Variant::kBaseline, 4, 1);
  EXPECT_THROW(tiny.validate(), ValidationError);
}

TEST(Head, ParameterCountFormula) {
  for (int d : {2, 3, 4, 7, 10, 33, 2816}) {
    const long long h = d / 2;
    const long long want = d * h + h + h + 1;
    EXPECT_EQ(head_parameter_count(d), want);
    EXPECT_EQ(RegressionHead(d, Activation::kRelu).parameter_count(), want);
    EXPECT_EQ(init_head(d, Activation::kRelu, 1).parameter_count(), want);
  }
  EXPECT_EQ(hidden_dim_for(3), 1);
  EXPECT_EQ(hidden_dim_for(1), 1);
}

TEST(Head, ZeroHeadGivesZero) {
  const RegressionHead head(5, Activation::kRelu);
  EXPECT_EQ(regress_score(head, image_vec({1, -2, 3, 4, 100})), 0.0);
}

TEST(Head, AffineComposition) {
  RegressionHead head(2, Activation::kNone);
  head.w1 << 1, 1;
  head.w2 << 1;
  EXPECT_EQ(regress_score(head, image_vec({2, 3})), 5.0);
  head.activation = Activation::kRelu;
  EXPECT_EQ(regress_score(head, image_vec({-2, -3})), 0.0);
  head.activation = Activation::kNone;
  EXPECT_EQ(regress_score(head, image_vec({-2, -3})), -5.0);
}

TEST(Head, SeedZeroMatchesReferenceEvaluator) {
  const auto head = init_head(4, Activation::kRelu, 0);
  const std::vector<double> x{1, 0, 0, 1};
  EXPECT_NEAR(regress_score(head, image_vec(x)), testing::reference_head(head, x), 1e-12);
  // Exact rational evaluation in tests/oracles/toy_reference.py.
  EXPECT_NEAR(regress_score(head, image_vec(x)), 0.06783293155906099, 1e-15);
}

TEST(Head, RandomHeadsMatchReferenceEvaluator) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(30));
    const auto head = random_head(d, trial % 3 == 0 ? Activation::kNone : Activation::kRelu, rng);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = rng.uniform(-3, 3);
    EXPECT_NEAR(regress_score(head, image_vec(x)), testing::reference_head(head, x), 1e-12);
  }
}

TEST(Head, DimensionMismatch) {
  const auto head = init_head(4, Activation::kRelu, 0);
  EXPECT_THROW(regress_score(head, image_vec({1, 2, 3})), ValidationError);
}

TEST(Head, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(9));
    auto head = random_head(d, trial % 4 == 0 ? Activation::kNone : Activation::kRelu, rng);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = rng.uniform(-2, 2);
    const auto trace = regress_trace(head, x);
    RegressionHead grad(d, head.activation);
    std::vector<double> grad_x(x.size(), 0.0);
    regress_backward(head, x, trace, 1.0, grad, grad_x);

    std::vector<double> analytic;
    for (auto& b : grad.blocks()) analytic.insert(analytic.end(), b.values.begin(), b.values.end());
    const auto numeric = testing::central_differences(head.blocks(), [&] { return regress_score(head, image_vec(x)); }, 1e-4);
    ASSERT_EQ(analytic.size(), numeric.size());
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      // ReLU kinks can sit inside the stencil; skip those entries.
      bool near_kink = false;
      for (int h = 0; h < trace.pre.size(); ++h) near_kink |= std::abs(trace.pre[h]) < 1e-3;
      if (near_kink) continue;
      const double scale = std::max(1.0, std::abs(numeric[i]));
      EXPECT_LE(std::abs(analytic[i] - numeric[i]) / scale, 1e-3) << "trial " << trial << " param " << i;
    }

    std::vector<ParamBlock> input{{"x", std::span<double>(x)}};
    const auto numeric_x = testing::central_differences(input, [&] { return regress_score(head, image_vec(x)); }, 1e-4);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(grad_x[i], numeric_x[i], 1e-6);
  }
}

TEST(Model, GoldenPrediction) {
  const auto spec = toy_spec(Variant::kTier, 8, 8);
  const Model model(spec, 0);
  const auto img = testing::ramp_image(32, 32);
  // Exact rational evaluation in tests/oracles/toy_reference.py.
  EXPECT_NEAR(model.predict("a red bicycle leaning on a wall", img), 0.3993778184911608, 1e-14);
}

TEST(Model, CompositionLaw) {
  const auto spec = toy_spec(Variant::kTier, 6, 5);
  const Model model(spec, 9);
  SplitMix64 rng(2);
  for (const char* prompt : {"a", "two words", "an oil painting of a lighthouse at dusk"}) {
    const auto img = testing::noise_image(11, 19, rng);
    const auto want = regress_score(model.head(), fuse_features(encode_text(*spec.text_encoder, prompt),
                                                                  encode_image(spec.image_encoder, img)));
    EXPECT_EQ(model.predict(std::string(prompt), img), want);
  }
}

TEST(Model, BaselineZeroHead) {
  const auto spec = toy_spec(Variant::kBaseline, 0, 6);
  const Model model(spec, RegressionHead(spec.fused_dim(), Activation::kRelu), {});
  SplitMix64 rng(6);
  EXPECT_EQ(model.predict(std::nullopt, testing::noise_image(8, 8, rng)), 0.0);
  EXPECT_EQ(model.predict(std::string("ignored"), testing::noise_image(8, 8, rng)), 0.0);
}

TEST(Model, TierRequiresPrompt) {
  const Model model(toy_spec(Variant::kTier, 4, 4), 1);
  EXPECT_THROW(model.predict(std::nullopt, Image(4, 4)), ValidationError);
  EXPECT_THROW(model.predict(std::string(""), Image(4, 4)), ValidationError);
}

TEST(Model, BatchInvariance) {
  const Model model(toy_spec(Variant::kTier, 8, 8), 5);
  SplitMix64 rng(8);
  std::vector<Image> images;
  std::vector<std::string> prompts;
  for (int i = 0; i < 12; ++i) {
    images.push_back(testing::noise_image(10 + i, 12, rng));
    prompts.push_back("prompt number " + std::to_string(i * 7));
  }
  std::vector<Sample> all;
  for (int i = 0; i < 12; ++i) all.push_back({prompts[i], &images[i]});
  const auto batch = model.predict_batch(all);
  for (int i = 0; i < 12; ++i) {
    EXPECT_NEAR(batch[i], model.predict(prompts[i], images[i]), 1e-6);
    const std::vector<Sample> small{all[(i + 3) % 12], all[i]};
    EXPECT_NEAR(model.predict_batch(small)[1], batch[i], 1e-6);
  }
}

TEST(Model, PromptChangesFusedVector) {
  const Model model(toy_spec(Variant::kTier, 8, 8), 5);
  const auto img = testing::ramp_image(16, 16);
  const auto a = model.fused(std::string("a cat"), img);
  const auto b = model.fused(std::string("a dog"), img);
  EXPECT_NE(a.values, b.values);
  EXPECT_TRUE(std::equal(a.values.begin() + 8, a.values.end(), b.values.begin() + 8));
}

TEST(Model, ForwardBackwardMatchesFiniteDifferencesOfSquaredError) {
  SplitMix64 rng(31);
  const auto img = testing::noise_image(16, 16, rng);
  Model model(toy_spec(Variant::kTier, 3, 3, Activation::kRelu, true), 12);
  const std::string prompt = "learnable tables move";
  const double target = 0.7;
  auto grad = model.zero_gradient();
  model.forward_backward(prompt, img, [&](double p) { return 2 * (p - target); }, grad, true);

  std::vector<double> analytic;
  for (auto& b : grad.blocks()) analytic.insert(analytic.end(), b.values.begin(), b.values.end());
  const auto numeric = testing::central_differences(
      model.parameters(), [&] { return std::pow(model.predict(prompt, img) - target, 2); }, 1e-4);
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    EXPECT_NEAR(analytic[i], numeric[i], 1e-6 + 1e-3 * std::abs(numeric[i])) << i;
  }
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  testing::TempDir dir("ckpt");
  for (bool learnable : {false, true}) {
    const Model model(toy_spec(Variant::kTier, 5, 7, Activation::kRelu, learnable), 3);
    save_checkpoint(model, dir.path() / "m.ckpt");
    const auto back = load_checkpoint(dir.path() / "m.ckpt");
    EXPECT_EQ(back.spec(), model.spec());
    EXPECT_EQ(back.encoder_params(), model.encoder_params());
    const auto img = testing::ramp_image(9, 9);
    EXPECT_EQ(back.predict(std::string("x y z"), img), model.predict(std::string("x y z"), img));
  }
  const Model baseline(toy_spec(Variant::kBaseline, 0, 6), 3);
  save_checkpoint(baseline, dir.path() / "b.ckpt");
  EXPECT_EQ(load_checkpoint(dir.path() / "b.ckpt").spec(), baseline.spec());
}

TEST(Checkpoint, RejectsMalformedFiles) {
  testing::TempDir dir("ckpt_bad");
  const Model model(toy_spec(Variant::kTier, 4, 4), 3);
  save_checkpoint(model, dir.path() / "m.ckpt");
  const auto good = nlohmann::json::parse(csv::read_file(dir.path() / "m.ckpt"));

  auto write_and_load = [&](const nlohmann::json& doc) {
    csv::write_file(dir.path() / "bad.ckpt", doc.dump());
    return load_checkpoint(dir.path() / "bad.ckpt");
  };
  auto doc = good;
  doc["version"] = 99;
  EXPECT_THROW(write_and_load(doc), ValidationError);
  doc = good;
  doc["fused_dim"] = 9;
  EXPECT_THROW(write_and_load(doc), ValidationError);
  doc = good;
  doc["format"] = "other";
  EXPECT_THROW(write_and_load(doc), ValidationError);
  doc = good;
  doc["tensors"].erase(doc["tensors"].begin());
  EXPECT_THROW(write_and_load(doc), ValidationError);
  csv::write_file(dir.path() / "bad.ckpt", "{not json");
  EXPECT_THROW(load_checkpoint(dir.path() / "bad.ckpt"), ValidationError);
  EXPECT_THROW(load_checkpoint(dir.path() / "absent.ckpt"), std::exception);
}

}  // namespace
}  // namespace tier
