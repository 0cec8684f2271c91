#include <gtest/gtest.h>

#include <map>

#include "sanvaad/error.hpp"
#include "sanvaad/preprocess.hpp"
#include "sanvaad/synthetic.hpp"
#include "support.hpp"

namespace sanvaad {
namespace {

using testing::load_fixture_json;

TEST(Scaler, MatchesTwoPassOracle) {
  const auto doc = load_fixture_json("numeric_oracles.json").at("scaler");
  const std::size_t dims = doc.at("mean").size();
  std::vector<FeatureVector> rows;
  for (const auto& r : doc.at("rows")) {
    FeatureVector v;
    for (std::size_t j = 0; j < dims; ++j) v[j] = r[j].get<double>();
    rows.push_back(v);
  }
  const ScalerParams p = fit_scaler(rows);
  for (std::size_t j = 0; j < dims; ++j) {
    EXPECT_NEAR(p.mean[j], doc.at("mean")[j].get<double>(), 1e-12);
    EXPECT_NEAR(p.std[j], doc.at("std")[j].get<double>(), 1e-12);
  }
  FeatureVector probe;
  for (std::size_t j = 0; j < dims; ++j) probe[j] = doc.at("probe")[j].get<double>();
  const FeatureVector z = standardize(p, probe);
  for (std::size_t j = 0; j < dims; ++j) EXPECT_NEAR(z[j], doc.at("standardized")[j].get<double>(), 1e-12) << j;
  for (std::size_t j = dims; j < kFeatureDim; ++j) EXPECT_EQ(z[j], 0.0);
}

TEST(Scaler, ConstantColumnsMapToZeroAndFitNeedsTwoRows) {
  std::vector<FeatureVector> rows(3);
  for (auto& r : rows) r.values.fill(4.25);
  const ScalerParams p = fit_scaler(rows);
  const FeatureVector z = standardize(p, rows[0]);
  for (double x : z.values) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(fit_scaler(std::span<const FeatureVector>(rows.data(), 1)), Error);
}

TEST(Scaler, StandardizedTrainingSetHasZeroMeanUnitStd) {
  Rng rng = make_rng(31);
  std::vector<FeatureVector> rows;
  for (const auto& s : testing::random_samples(400, rng)) rows.push_back(extract_features(s.frame));
  const ScalerParams p = fit_scaler(rows);
  std::vector<FeatureVector> z;
  for (const auto& r : rows) z.push_back(standardize(p, r));
  const ScalerParams q = fit_scaler(z);
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    EXPECT_NEAR(q.mean[j], 0.0, 1e-9);
    if (p.std[j] > kScalerEpsilon) {
      EXPECT_NEAR(q.std[j], 1.0, 1e-9);
    }
  }
}

TEST(LabelCodec, OneHotAndRoundTrip) {
  LabelCodec codec;
  ASSERT_EQ(codec.size(), kNumClasses);
  for (std::size_t i = 0; i < codec.size(); ++i) {
    const std::string& label = codec.decode(i);
    EXPECT_EQ(codec.encode(label), i);
    const auto hot = codec.one_hot(label);
    for (std::size_t j = 0; j < kNumClasses; ++j) EXPECT_EQ(hot[j], i == j ? 1.0 : 0.0);
  }
  EXPECT_THROW(codec.encode("0"), Error);
  EXPECT_THROW(codec.decode(35), Error);
}

TEST(StratifiedSplit, FourHundredFortyGivesEightyTwentyPerClass) {
  SyntheticSpec spec;
  spec.classes = 4;
  spec.per_class = 110;
  const auto data = make_blob_dataset(spec);
  ASSERT_EQ(data.samples.size(), 440u);
  const Split split = stratified_split(data.samples, {0.8, 5});
  EXPECT_EQ(split.train.size(), 352u);
  EXPECT_EQ(split.test.size(), 88u);
  std::map<std::string, std::size_t> train_counts;
  for (const auto& s : split.train) ++train_counts[s.label];
  for (const auto& [label, n] : train_counts) EXPECT_EQ(n, 88u) << label;
}

TEST(StratifiedSplit, DeterministicAndDisjoint) {
  SyntheticSpec spec;
  spec.classes = 5;
  spec.per_class = 20;
  const auto data = make_blob_dataset(spec);
  const Split a = stratified_split(data.samples, {0.75, 9});
  const Split b = stratified_split(data.samples, {0.75, 9});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  for (const auto& t : a.test) {
    for (const auto& r : a.train) ASSERT_FALSE(t == r);
  }
  const Split c = stratified_split(data.samples, {0.75, 10});
  EXPECT_NE(a.train, c.train);
}

TEST(StratifiedSplit, TooSmallClassIsNamed) {
  SyntheticSpec spec;
  spec.classes = 3;
  spec.per_class = 5;
  auto samples = make_blob_dataset(spec).samples;
  samples.push_back({samples.front().frame, "Q"});
  try {
    stratified_split(samples, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace sanvaad
