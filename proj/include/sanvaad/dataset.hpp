#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanvaad/landmarks.hpp"

namespace sanvaad {

// JSON forms shared by the dataset file and the service messages:
// a hand is [[x,y,z] x 21], an absent hand is null.
nlohmann::json hand_to_json(const std::optional<Hand>& hand);
std::optional<Hand> hand_from_json(const nlohmann::json& value);
nlohmann::json frame_to_json(const LandmarkFrame& frame);
/// Reads the "left" / "right" members of an object; missing members are absent hands.
LandmarkFrame frame_from_json(const nlohmann::json& object);

/// Parses JSONL: `{"label": "A", "left": [...] | null, "right": [...] | null}`
/// per line. Blank lines are skipped. Errors carry the 1-based line number.
std::vector<LabeledSample> read_dataset(std::istream& in, const LabelNormalizer& normalizer = {});
void write_dataset(std::ostream& out, std::span<const LabeledSample> samples);

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        const LabelNormalizer& normalizer = {});
void save_dataset(std::span<const LabeledSample> samples, const std::filesystem::path& path);

using ClassHistogram = std::array<std::size_t, kNumClasses>;

/// Per-class counts in label_set() order.
ClassHistogram class_histogram(std::span<const LabeledSample> samples);
std::string format_histogram(const ClassHistogram& histogram);

/// Binary feature dump ("SNVF"): magic, u32 version, u64 rows, rows x 141 f32,
/// then rows label bytes (class indices). All little-endian.
struct FeatureDump {
  std::vector<std::array<float, kFeatureDim>> rows;
  std::vector<std::uint8_t> labels;
};

inline constexpr std::uint32_t kFeatureDumpVersion = 1;

void write_feature_dump(std::ostream& out, const FeatureDump& dump);
FeatureDump read_feature_dump(std::istream& in);
FeatureDump make_feature_dump(std::span<const LabeledSample> samples);

}  // namespace sanvaad
