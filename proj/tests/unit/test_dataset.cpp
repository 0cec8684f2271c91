#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sanvaad/dataset.hpp"
#include "sanvaad/error.hpp"
#include "support.hpp"

namespace sanvaad {
namespace {

using testing::fixture_path;
using testing::load_fixture_json;
using testing::random_samples;
using testing::scratch_dir;

LabelNormalizer fixture_normalizer() {
  LabelNormalizer n;
  const auto aliases = load_fixture_json("aliases.json");
  for (const auto& [raw, symbol] : aliases.items()) n.add_alias(raw, symbol.get<std::string>());
  return n;
}

TEST(Dataset, EmptyFileGivesNoSamples) {
  const auto dir = scratch_dir("dataset_empty");
  std::ofstream(dir / "empty.jsonl").close();
  EXPECT_TRUE(load_dataset(dir / "empty.jsonl").empty());
}

TEST(Dataset, ThreeSampleFixture) {
  const auto samples = load_dataset(fixture_path("dataset_3.jsonl"), fixture_normalizer());
  ASSERT_EQ(samples.size(), 3u);
  EXPECT_EQ(samples[0].label, "A");
  EXPECT_EQ(samples[1].label, "9");
  EXPECT_EQ(samples[2].label, "Q");
  EXPECT_TRUE(samples[0].frame.left.has_value());
  EXPECT_FALSE(samples[0].frame.right.has_value());
  EXPECT_EQ(samples[1].frame.hand_count(), 2u);
  EXPECT_FALSE(samples[2].frame.left.has_value());
  EXPECT_DOUBLE_EQ(samples[0].frame.left->keypoints[0].x, 0.238);
}

TEST(Dataset, FixtureWithoutAliasesReportsUnmappedLabel) {
  try {
    load_dataset(fixture_path("dataset_3.jsonl"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unmapped_label);
    EXPECT_NE(std::string(e.what()).find("letter_Q"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Dataset, MalformedLineReportsLineNumber) {
  std::istringstream in("{\"label\":\"A\",\"left\":null,\"right\":null}\n\n{\"label\": \"B\", \"left\": [1,2]\n");
  try {
    read_dataset(in);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream short_hand("{\"label\":\"A\",\"left\":[[0,0,0]],\"right\":null}\n");
  EXPECT_THROW(read_dataset(short_hand), Error);
}

TEST(Dataset, RoundTripIsBitwise) {
  Rng rng = make_rng(21);
  const auto samples = random_samples(1000, rng);
  const auto dir = scratch_dir("dataset_roundtrip");
  save_dataset(samples, dir / "s.jsonl");
  const auto loaded = load_dataset(dir / "s.jsonl");
  ASSERT_EQ(loaded.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ASSERT_EQ(loaded[i], samples[i]) << "sample " << i;
  }
}

TEST(Dataset, HistogramSumsToSampleCount) {
  Rng rng = make_rng(22);
  const auto samples = random_samples(777, rng);
  const ClassHistogram h = class_histogram(samples);
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), std::size_t{0}), samples.size());
  const std::string text = format_histogram(h);
  EXPECT_NE(text.find("Z"), std::string::npos);
}

TEST(FeatureDump, RoundTripAndLayout) {
  Rng rng = make_rng(23);
  const auto samples = random_samples(5, rng);
  const FeatureDump dump = make_feature_dump(samples);
  std::stringstream buf;
  write_feature_dump(buf, dump);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 4 + 4 + 8 + 5 * 141 * 4 + 5);
  EXPECT_EQ(bytes.substr(0, 4), "SNVF");
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(static_cast<std::uint8_t>(bytes[16 + 5 * 141 * 4 + i]), *label_index(samples[i].label));
  }
  float first;
  std::memcpy(&first, bytes.data() + 16, 4);
  EXPECT_EQ(first, dump.rows[0][0]);

  std::istringstream in(bytes);
  const FeatureDump back = read_feature_dump(in);
  EXPECT_EQ(back.rows, dump.rows);
  EXPECT_EQ(back.labels, dump.labels);
}

TEST(FeatureDump, RejectsBadHeaders) {
  Rng rng = make_rng(24);
  std::stringstream buf;
  write_feature_dump(buf, make_feature_dump(random_samples(2, rng)));
  std::string bytes = buf.str();

  auto code_of = [](const std::string& b) {
    std::istringstream in(b);
    try {
      read_feature_dump(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::state;
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of(bad_magic), ErrorCode::bad_magic);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(code_of(bad_version), ErrorCode::unsupported_version);
  EXPECT_EQ(code_of(bytes.substr(0, bytes.size() - 1)), ErrorCode::corrupt);
}

}  // namespace
}  // namespace sanvaad
