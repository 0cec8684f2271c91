#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sanvaad {

inline constexpr std::size_t kKeypointsPerHand = 21;
inline constexpr std::size_t kCoordsPerHand = kKeypointsPerHand * 3;  // 63
inline constexpr std::size_t kCoordFeatures = 2 * kCoordsPerHand;     // 126
inline constexpr std::size_t kDistanceFeatures = 15;
inline constexpr std::size_t kFeatureDim = kCoordFeatures + kDistanceFeatures;  // 141
inline constexpr std::size_t kNumClasses = 35;

// 21-point hand-tracking convention: 0 is the wrist, fingertips are
// thumb, index, middle, ring, pinky.
inline constexpr std::size_t kWristIndex = 0;
inline constexpr std::array<std::size_t, 5> kFingertipIndices = {4, 8, 12, 16, 20};

// Offsets of the distance blocks inside a FeatureVector.
inline constexpr std::size_t kLeftIntraOffset = kCoordFeatures;         // 126
inline constexpr std::size_t kRightIntraOffset = kCoordFeatures + 5;    // 131
inline constexpr std::size_t kInterHandOffset = kCoordFeatures + 10;    // 136

/// One tracked point in normalized image coordinates; z is relative depth.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool is_finite() const noexcept;
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct Hand {
  std::array<Keypoint, kKeypointsPerHand> keypoints{};

  double mean_x() const noexcept;
  friend bool operator==(const Hand&, const Hand&) = default;
};

/// Two optional hand slots. An absent hand stays absent here; zero-filling
/// happens only when features are computed.
struct LandmarkFrame {
  std::optional<Hand> left;
  std::optional<Hand> right;

  std::size_t hand_count() const noexcept {
    return static_cast<std::size_t>(left.has_value()) + static_cast<std::size_t>(right.has_value());
  }
  friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

/// Layout: left coords (63), right coords (63), left wrist-to-tip (5),
/// right wrist-to-tip (5), left-to-right tip pairs (5).
struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::span<const double, kFeatureDim> view() const { return values; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// The fixed class order: "1".."9" then "A".."Z". One-hot indices and the
/// serialized label codec follow this order.
const std::array<std::string, kNumClasses>& label_set();
std::optional<std::size_t> label_index(std::string_view symbol) noexcept;
bool is_label(std::string_view symbol) noexcept;

struct LabeledSample {
  LandmarkFrame frame;
  std::string label;
  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Throws Error(invalid_argument) for frames with no hands or non-finite
/// coordinates. Absent hands contribute zeros, and all distances are taken
/// on that zero-filled representation.
FeatureVector extract_features(const LandmarkFrame& frame);

enum class Handedness { left, right };

struct DetectedHand {
  Hand hand;
  std::optional<Handedness> handedness;
};

/// Places up to two detected hands into slots. Reported handedness wins;
/// otherwise the hand with the smaller mean x takes the left slot.
LandmarkFrame assign_hand_slots(std::span<const DetectedHand> hands);

/// Maps dataset folder names to canonical class symbols.
class LabelNormalizer {
 public:
  LabelNormalizer() = default;
  explicit LabelNormalizer(const std::unordered_map<std::string, std::string>& aliases);

  void add_alias(std::string_view raw, std::string_view symbol);

  /// Case-insensitive; surrounding whitespace ignored. Throws
  /// Error(unmapped_label) naming the input when nothing matches.
  std::string normalize(std::string_view raw) const;

 private:
  std::unordered_map<std::string, std::string> aliases_;  // key folded to lower case
};

}  // namespace sanvaad
