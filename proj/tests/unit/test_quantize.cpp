#include <gtest/gtest.h>

#include <fstream>

#include "sanvaad/error.hpp"
#include "sanvaad/quantize.hpp"
#include "support.hpp"

namespace sanvaad {
namespace {

ResidualMlpModel small_model(std::uint64_t seed) {
  NetworkSpec spec;
  spec.hidden_width = 24;
  spec.compression_width = 12;
  spec.residual_blocks = 2;
  ResidualMlpModel m = init_model(spec, seed);
  Rng rng = make_rng(seed, 5);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& v : m.params.views()) {
    for (double& x : v.values()) x += n(rng);
  }
  for (auto& r : m.running) {
    for (Eigen::Index i = 0; i < r.mean.size(); ++i) {
      r.mean[i] = n(rng);
      r.var[i] = 1.0 + std::abs(n(rng));
    }
  }
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    m.scaler.mean[j] = 0.3 + 0.001 * static_cast<double>(j);
    m.scaler.std[j] = 0.2;
  }
  m.meta = {12, seed, true, false};
  round_to_f32(m);
  return m;
}

std::vector<LandmarkFrame> frames(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 9);
  std::vector<LandmarkFrame> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::random_frame(rng));
  return out;
}

ErrorCode parse_error(const std::string& bytes) {
  try {
    parse_container(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::state;
}

TEST(QuantizeTensor, ScaleAndRounding) {
  Matrix w(1, 4);
  w << 1.27, -0.635, 0.0, 0.004;
  const QuantizedTensor q = quantize_tensor(w);
  EXPECT_FLOAT_EQ(q.scale, 0.01f);
  EXPECT_EQ(q.values, (std::vector<std::int8_t>{127, -64, 0, 0}));
  const Matrix back = dequantize(q);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_LE(std::abs(back(0, i) - w(0, i)), 0.5 * 0.01 + 1e-7);
  const QuantizedTensor z = quantize_tensor(Matrix::Zero(2, 2));
  EXPECT_EQ(z.scale, 1.0f);
}

TEST(Container, F32RoundTripIsBitwise) {
  const ResidualMlpModel m = small_model(1);
  const auto dir = testing::scratch_dir("quantize_roundtrip");
  save_model(pack_model(m), dir / "m.snvd");
  const ResidualMlpModel back = load_model(dir / "m.snvd");
  EXPECT_EQ(back.spec, m.spec);
  EXPECT_EQ(back.scaler, m.scaler);
  EXPECT_EQ(back.meta.epochs, 12u);
  const auto f = frames(100, 1);
  EXPECT_EQ(feature_matrix(back.scaler, f), feature_matrix(m.scaler, f));
  EXPECT_EQ(forward_infer(back, feature_matrix(back.scaler, f)), forward_infer(m, feature_matrix(m.scaler, f)));
}

TEST(Container, Int8RoundTripWithinDequantizationTolerance) {
  const ResidualMlpModel m = small_model(2);
  const ModelContainer q = quantize_model(m);
  EXPECT_EQ(q.precision, Precision::int8);
  const ResidualMlpModel back = unpack_model(parse_container(serialize_container(q)));
  for (std::size_t s = 0; s < m.params.stages.size(); ++s) {
    const Matrix& w = m.params.stages[s].dense.weight;
    const double step = w.cwiseAbs().maxCoeff() / 127.0;
    EXPECT_LE((back.params.stages[s].dense.weight - w).cwiseAbs().maxCoeff(), 0.5 * step * (1 + 1e-5));
    EXPECT_EQ(back.params.stages[s].dense.bias, m.params.stages[s].dense.bias);
    EXPECT_EQ(back.params.stages[s].norm.gamma, m.params.stages[s].norm.gamma);
  }
  EXPECT_LT(serialize_container(q).size(), serialize_container(pack_model(m)).size());
}

TEST(Container, TableOneSizeRatio) {
  const ResidualMlpModel m = init_model(NetworkSpec::table_one(), 3);
  const double f32 = static_cast<double>(serialize_container(pack_model(m)).size());
  const double i8 = static_cast<double>(serialize_container(quantize_model(m)).size());
  EXPECT_LE(i8 / f32, 0.30);
}

TEST(Container, HeaderLayout) {
  const std::string bytes = serialize_container(pack_model(small_model(4)));
  EXPECT_EQ(bytes.substr(0, 4), "SNVD");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kContainerVersion);
  std::uint64_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + 8, 8);
  const auto meta = nlohmann::json::parse(bytes.substr(16, meta_len));
  EXPECT_TRUE(meta.contains("labels"));
  EXPECT_EQ(meta.at("labels").size(), 35u);
}

TEST(Container, CorruptionGivesTypedErrors) {
  const std::string bytes = serialize_container(pack_model(small_model(5)));
  std::string magic = bytes;
  magic[1] = 'X';
  EXPECT_EQ(parse_error(magic), ErrorCode::bad_magic);
  std::string version = bytes;
  version[4] = 2;
  EXPECT_EQ(parse_error(version), ErrorCode::unsupported_version);
  std::string flipped = bytes;
  flipped[bytes.size() - 40] ^= 0x10;
  EXPECT_EQ(parse_error(flipped), ErrorCode::corrupt);
  std::string huge = bytes;
  huge[15] = 0x7f;
  EXPECT_EQ(parse_error(huge), ErrorCode::corrupt);
  EXPECT_EQ(parse_error(""), ErrorCode::corrupt);
}

TEST(Container, EveryTruncationAndByteFlipIsRejectedCleanly) {
  const std::string bytes = serialize_container(pack_model(small_model(6)));
  for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 64) {
    const ErrorCode c = parse_error(bytes.substr(0, n));
    ASSERT_TRUE(c == ErrorCode::corrupt || c == ErrorCode::bad_magic) << "length " << n;
  }
  Rng rng = make_rng(6);
  std::uniform_int_distribution<std::size_t> pos(0, bytes.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::string b = bytes;
    b[pos(rng)] ^= static_cast<char>(1 + trial % 255);
    try {
      unpack_model(parse_container(b));
    } catch (const Error&) {
    }
  }
}

TEST(Container, MissingFileIsIoError) {
  try {
    load_model(testing::scratch_dir("quantize_missing") / "none.snvd");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
    EXPECT_NE(std::string(e.what()).find("none.snvd"), std::string::npos);
  }
}

TEST(Container, MetadataSummary) {
  const nlohmann::json meta = model_metadata(small_model(7));
  EXPECT_EQ(meta.at("network").at("hidden_width"), 24);
  EXPECT_EQ(to_string(Precision::int8), "int8");
}

}  // namespace
}  // namespace sanvaad
