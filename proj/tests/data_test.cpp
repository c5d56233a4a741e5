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

#include "tier/data.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "tier/convert.hpp"
#include "tier/csv.hpp"
#include "tier/error.hpp"
#include "tier/rng.hpp"

namespace tier {
namespace {

using testing::TempDir;

DatasetManifest tiny_manifest(int n, int prompts) {
  std::vector<SampleRecord> records;
  for (int i = 0; i < n; ++i) {
    SampleRecord r;
    r.sample_id = "id" + std::to_string(i);
    r.image_path = "img/" + std::to_string(i) + ".png";
    r.prompt = "prompt " + std::to_string(i % prompts);
    r.scores["MOS"] = 1.0 + 0.5 * i;
    records.push_back(r);
  }
  return make_manifest("tiny", {"MOS"}, records);
}

std::set<std::string> prompts_on(const DatasetManifest& m, Split side) {
  std::set<std::string> out;
  for (const auto& r : m.records) {
    if (r.split == side) out.insert(r.prompt);
  }
  return out;
}

TEST(Csv, QuotesCommasQuotesAndNewlines) {
  const csv::Row row{"plain", "a, b", "say \"hi\"", "two\nlines", " padded ", ""};
  const auto text = csv::format_row(row);
  const auto parsed = csv::parse(text);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], row);
}

TEST(Csv, HandlesBomAndCrlf) {
  const auto rows = csv::parse("\xEF\xBB\xBF" "a,b\r\n1,2\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (csv::Row{"a", "b"}));
  EXPECT_EQ(rows[1], (csv::Row{"1", "2"}));
}

TEST(Csv, DoubleRoundTripIsExact) {
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10);
    EXPECT_EQ(csv::parse_double(csv::format_double(v), "test"), v);
  }
  EXPECT_THROW(csv::parse_double("1.5x", "test"), ValidationError);
  EXPECT_THROW(csv::parse_double("", "test"), ValidationError);
}

TEST(LoadManifest, ThreeRowCsv) {
  const auto m = parse_manifest(
      "sample_id,image_path,prompt,generator,MOS\n"
      "a,a.png,a cat,sd,3.5\n"
      "b,b.png,\"a dog, running\",,2\n"
      "c,c.png,a cat,dalle,4.25\n",
      "three");
  EXPECT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.score_dimensions, std::vector<std::string>{"MOS"});
  EXPECT_EQ(m.records[1].prompt, "a dog, running");
  EXPECT_FALSE(m.records[1].generator.has_value());
  EXPECT_EQ(m.records[2].generator, std::optional<std::string>("dalle"));
  EXPECT_EQ(m.records[2].scores.at("MOS"), 4.25);
  EXPECT_EQ(m.prompt_groups.at("a cat"), (std::vector<std::string>{"a", "c"}));
}

TEST(LoadManifest, DuplicateIdNamesTheOffender) {
  try {
    parse_manifest(
        "sample_id,image_path,prompt,generator,MOS\n"
        "a,a.png,x,,1\n"
        "dup7,b.png,y,,2\n"
        "dup7,c.png,z,,3\n",
        "bad");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("dup7"), std::string::npos);
  }
}

TEST(LoadManifest, RejectsMalformedInput) {
  const std::string header = "sample_id,image_path,prompt,generator,MOS\n";
  EXPECT_THROW(parse_manifest("sample_id,image_path,prompt,MOS\na,a.png,x,1\n", "m"), ValidationError);
  EXPECT_THROW(parse_manifest("sample_id,image_path,prompt,generator,MOS,MOS\na,a.png,x,,1,1\n", "m"),
               ValidationError);
  EXPECT_THROW(parse_manifest(header + "a,a.png,x,,nan\n", "m"), ValidationError);
  EXPECT_THROW(parse_manifest(header + "a,a.png,x,,inf\n", "m"), ValidationError);
  EXPECT_THROW(parse_manifest(header + "a,a.png,,,1\n", "m"), ValidationError);
  EXPECT_THROW(parse_manifest(header + "a,a.png,x,,1,9\n", "m"), ValidationError);
  EXPECT_THROW(parse_manifest("sample_id,image_path,prompt,generator,sharpness\na,a.png,x,,1\n", "m"),
               ValidationError);
}

TEST(LoadManifest, KnownDimensionLayouts) {
  EXPECT_EQ(layout_for({"MOS"}), Layout::kAgiqa1k);
  EXPECT_EQ(layout_for({"MOS_quality"}), Layout::kAgiqa3k);
  EXPECT_EQ(layout_for({"MOS_quality", "MOS_align"}), Layout::kAgiqa3k);
  EXPECT_EQ(layout_for({"quality", "authenticity", "correspondence"}), Layout::kAigciqa2023);
  EXPECT_THROW(layout_for({"quality", "authenticity"}), ValidationError);
  EXPECT_THROW(layout_for({"MOS_align"}), ValidationError);
}

TEST(LoadManifest, ChecksImagesWhenAsked) {
  TempDir dir("data_images");
  csv::write_file(dir.path() / "m.csv", "sample_id,image_path,prompt,generator,MOS\na,missing.png,x,,1\n");
  EXPECT_NO_THROW(load_manifest(dir.path() / "m.csv"));
  EXPECT_THROW(load_manifest(dir.path() / "m.csv", LoadOptions{.check_images = true}), ValidationError);
}

TEST(ManifestRoundTrip, RandomManifestsSurviveWriteAndLoad) {
  SplitMix64 rng(99);
  const std::vector<std::vector<std::string>> layouts{
      {"MOS"}, {"MOS_quality", "MOS_align"}, {"quality", "authenticity", "correspondence"}};
  const std::string alphabet = "ab ,\"'\n-xyz";
  TempDir dir("roundtrip");
  for (int trial = 0; trial < 30; ++trial) {
    const auto& dims = layouts[trial % layouts.size()];
    std::vector<SampleRecord> records;
    const int n = 1 + static_cast<int>(rng.below(25));
    for (int i = 0; i < n; ++i) {
      SampleRecord r;
      r.sample_id = "s" + std::to_string(trial) + "_" + std::to_string(i);
      r.image_path = "images/" + r.sample_id + ".png";
      const int len = 1 + static_cast<int>(rng.below(12));
      for (int k = 0; k < len; ++k) r.prompt += alphabet[rng.below(alphabet.size())];
      if (rng.below(2) == 0) r.generator = "gen" + std::to_string(rng.below(3));
      for (const auto& d : dims) r.scores[d] = rng.uniform(-100, 100);
      records.push_back(r);
    }
    const auto m = make_manifest("rt" + std::to_string(trial), dims, records);
    const auto path = dir.path() / (m.name + ".csv");
    write_manifest(m, path);
    EXPECT_EQ(load_manifest(path), m) << "trial " << trial;
  }
}

TEST(PromptGroups, AigciqaShapedFixtureHas100GroupsOf24) {
  TempDir dir("groups");
  testing::write_aigciqa2023_source(dir.path() / "src", 3);
  const auto m = convert_layout(Layout::kAigciqa2023, dir.path() / "src", dir.path() / "m.csv");
  ASSERT_EQ(m.records.size(), 2400u);

  // Independent group-by straight from the raw source files.
  const auto prompt_rows = csv::parse(csv::read_file(dir.path() / "src" / "prompts.csv"));
  std::map<std::string, std::set<std::string>> expected;
  for (int n = 0; n < 2400; ++n) {
    const auto& text = prompt_rows[static_cast<std::size_t>(1 + (n % 400) / 4)][1];
    expected[text].insert(std::to_string(n));
  }
  ASSERT_EQ(m.prompt_groups.size(), 100u);
  ASSERT_EQ(expected.size(), 100u);
  for (const auto& [prompt, ids] : m.prompt_groups) {
    EXPECT_EQ(ids.size(), 24u);
    ASSERT_TRUE(expected.count(prompt)) << prompt;
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()), expected[prompt]);
  }
  const auto loaded = load_manifest(dir.path() / "m.csv");
  EXPECT_EQ(loaded, m);
}

TEST(SplitDataset, RandomTenRecords) {
  const auto m = tiny_manifest(10, 10);
  const SplitSpec spec{SplitMode::kRandom, 0.2, 7};
  const auto a = split_dataset(m, spec);
  const auto b = split_dataset(m, spec);
  EXPECT_EQ(a.indices(Split::kTest).size(), 2u);
  EXPECT_EQ(a.indices(Split::kTrain).size(), 8u);
  EXPECT_EQ(a.indices(Split::kTest), b.indices(Split::kTest));
  EXPECT_EQ(splits_to_csv(a), splits_to_csv(b));
}

TEST(SplitDataset, RandomCountIsRounded) {
  for (int n : {5, 13, 40, 101}) {
    for (double f : {0.1, 0.25, 0.5, 0.77}) {
      const auto target = std::llround(f * n);
      if (target == 0 || target >= n) continue;
      const auto s = split_dataset(tiny_manifest(n, n), SplitSpec{SplitMode::kRandom, f, 1});
      EXPECT_EQ(static_cast<long long>(s.indices(Split::kTest).size()), target) << n << " " << f;
    }
  }
}

TEST(SplitDataset, ByPromptOnFixtureIsLeakFree) {
  TempDir dir("split");
  testing::write_aigciqa2023_source(dir.path() / "src", 8);
  const auto m = convert_layout(Layout::kAigciqa2023, dir.path() / "src", dir.path() / "m.csv");
  for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
    const auto s = split_dataset(m, SplitSpec{SplitMode::kByPrompt, 0.2, seed});
    EXPECT_EQ(s.indices(Split::kTest).size(), 480u);
    EXPECT_EQ(prompts_on(s, Split::kTest).size(), 20u);
    const auto train = prompts_on(s, Split::kTrain);
    const auto test = prompts_on(s, Split::kTest);
    std::vector<std::string> both;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    for (const auto& r : s.records) EXPECT_NE(r.split, Split::kUnassigned);
  }
}

TEST(SplitDataset, ByPromptPicksNearestGroupCount) {
  // Groups of sizes 3 each over 7 prompts; 0.3 * 21 = 6.3 -> two groups.
  const auto s = split_dataset(tiny_manifest(21, 7), SplitSpec{SplitMode::kByPrompt, 0.3, 4});
  EXPECT_EQ(s.indices(Split::kTest).size(), 6u);
}

TEST(SplitDataset, DegenerateAndInvalidSpecs) {
  EXPECT_THROW(split_dataset(tiny_manifest(10, 10), SplitSpec{SplitMode::kRandom, 0.01, 0}), ValidationError);
  EXPECT_THROW(split_dataset(tiny_manifest(10, 10), SplitSpec{SplitMode::kRandom, 0.99, 0}), ValidationError);
  EXPECT_THROW(split_dataset(tiny_manifest(10, 10), SplitSpec{SplitMode::kRandom, 0.0, 0}), ValidationError);
  EXPECT_THROW(split_dataset(tiny_manifest(10, 10), SplitSpec{SplitMode::kRandom, 1.0, 0}), ValidationError);
  EXPECT_THROW(split_dataset(tiny_manifest(10, 1), SplitSpec{SplitMode::kByPrompt, 0.5, 0}), ValidationError);
}

TEST(SplitDataset, DifferentSeedsGiveDifferentSplits) {
  const auto m = tiny_manifest(200, 50);
  const auto a = split_dataset(m, SplitSpec{SplitMode::kByPrompt, 0.2, 1});
  const auto b = split_dataset(m, SplitSpec{SplitMode::kByPrompt, 0.2, 2});
  EXPECT_NE(splits_to_csv(a), splits_to_csv(b));
}

TEST(SplitSidecar, RoundTripsAndValidates) {
  TempDir dir("sidecar");
  const auto m = tiny_manifest(12, 4);
  const auto s = split_dataset(m, SplitSpec{SplitMode::kRandom, 0.25, 3});
  write_splits(s, dir.path() / "split.csv");
  EXPECT_EQ(load_splits(m, dir.path() / "split.csv"), s);
  EXPECT_THROW(apply_splits(m, "sample_id,split\nid0,train\n"), ValidationError);
  EXPECT_THROW(apply_splits(m, "id,split\n"), ValidationError);
}

TEST(Hashing, MatchesGitBlobIds) {
  // Object ids printed by `git hash-object` for these contents.
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  const auto m = tiny_manifest(4, 2);
  EXPECT_EQ(manifest_hash(m), git_blob_hash(manifest_to_csv(m)));
}

}  // namespace
}  // namespace tier
