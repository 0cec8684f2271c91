#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanvaad/model.hpp"

namespace sanvaad {

/// Per-tensor symmetric int8: value ~= scale * q, zero point fixed at 0.
struct QuantizedTensor {
  std::vector<std::int8_t> values;
  float scale = 1.0f;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

/// scale = max|w| / 127 (1.0 for an all-zero tensor); q = round(w / scale).
QuantizedTensor quantize_tensor(const Matrix& weights);
Matrix dequantize(const QuantizedTensor& q);

enum class Precision { f32, int8 };

std::string_view to_string(Precision p) noexcept;

enum class DType { f32, i8 };

struct ContainerTensor {
  std::string name;
  DType dtype = DType::f32;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  float scale = 1.0f;  // i8 only
  std::string bytes;   // little-endian payload
};

/// In-memory form of a `.snvd` file. Layout on disk (little-endian):
/// "SNVD", u32 version, u64 metadata length, UTF-8 JSON metadata, tensor
/// blobs in metadata order, u32 CRC32 over all blobs.
struct ModelContainer {
  Precision precision = Precision::f32;
  nlohmann::json metadata;  // network, labels, training, tensor table
  std::vector<ContainerTensor> tensors;

  std::size_t blob_bytes() const;
};

inline constexpr std::uint32_t kContainerVersion = 1;

/// Every real stored as f32, or with dense weight matrices as int8 and
/// everything else (biases, batch-norm, scaler) as f32.
ModelContainer pack_model(const ResidualMlpModel& model, Precision precision = Precision::f32);
ModelContainer quantize_model(const ResidualMlpModel& model);

/// Rebuilds the model; int8 weights are dequantized here.
ResidualMlpModel unpack_model(const ModelContainer& container);

std::string serialize_container(const ModelContainer& container);
/// Error codes: bad_magic, unsupported_version, corrupt (truncation,
/// checksum mismatch, malformed metadata or tensor table).
ModelContainer parse_container(const std::string& bytes);

void save_model(const ModelContainer& container, const std::filesystem::path& path);
ModelContainer read_container(const std::filesystem::path& path);
ResidualMlpModel load_model(const std::filesystem::path& path);

/// Model summary for health checks and CLI output.
nlohmann::json model_metadata(const ResidualMlpModel& model);

}  // namespace sanvaad
