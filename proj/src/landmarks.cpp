#include "sanvaad/landmarks.hpp"

#include <cmath>

#include "sanvaad/error.hpp"
#include "text_util.hpp"

namespace sanvaad {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unmapped_label: return "unmapped_label";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::shape: return "shape";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::corrupt: return "corrupt";
    case ErrorCode::duplicate_phrase: return "duplicate_phrase";
    case ErrorCode::state: return "state";
  }
  return "unknown";
}

bool Keypoint::is_finite() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

double Hand::mean_x() const noexcept {
  double sum = 0.0;
  for (const auto& k : keypoints) sum += k.x;
  return sum / static_cast<double>(keypoints.size());
}

const std::array<std::string, kNumClasses>& label_set() {
  static const std::array<std::string, kNumClasses> labels = [] {
    std::array<std::string, kNumClasses> out;
    std::size_t i = 0;
    for (char c = '1'; c <= '9'; ++c) out[i++] = std::string(1, c);
    for (char c = 'A'; c <= 'Z'; ++c) out[i++] = std::string(1, c);
    return out;
  }();
  return labels;
}

std::optional<std::size_t> label_index(std::string_view symbol) noexcept {
  if (symbol.size() != 1) return std::nullopt;
  const char c = symbol.front();
  if (c >= '1' && c <= '9') return static_cast<std::size_t>(c - '1');
  if (c >= 'A' && c <= 'Z') return static_cast<std::size_t>(9 + (c - 'A'));
  return std::nullopt;
}

bool is_label(std::string_view symbol) noexcept { return label_index(symbol).has_value(); }

namespace {

const Keypoint kOrigin{};

const Keypoint& keypoint_or_origin(const std::optional<Hand>& hand, std::size_t i) {
  return hand ? hand->keypoints[i] : kOrigin;
}

double distance(const Keypoint& a, const Keypoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void check_finite(const std::optional<Hand>& hand, std::string_view slot) {
  if (!hand) return;
  for (std::size_t i = 0; i < kKeypointsPerHand; ++i) {
    if (!hand->keypoints[i].is_finite()) {
      throw Error(ErrorCode::invalid_argument,
                  "non-finite coordinate in " + std::string(slot) + " hand keypoint " + std::to_string(i));
    }
  }
}

}  // namespace

FeatureVector extract_features(const LandmarkFrame& frame) {
  if (frame.hand_count() == 0) {
    throw Error(ErrorCode::invalid_argument, "frame has no hands");
  }
  check_finite(frame.left, "left");
  check_finite(frame.right, "right");

  FeatureVector out;
  std::size_t pos = 0;
  for (const auto* hand : {&frame.left, &frame.right}) {
    for (std::size_t i = 0; i < kKeypointsPerHand; ++i) {
      const Keypoint& k = keypoint_or_origin(*hand, i);
      out[pos++] = k.x;
      out[pos++] = k.y;
      out[pos++] = k.z;
    }
  }
  for (const auto* hand : {&frame.left, &frame.right}) {
    const Keypoint& wrist = keypoint_or_origin(*hand, kWristIndex);
    for (std::size_t tip : kFingertipIndices) {
      out[pos++] = distance(wrist, keypoint_or_origin(*hand, tip));
    }
  }
  for (std::size_t tip : kFingertipIndices) {
    out[pos++] = distance(keypoint_or_origin(frame.left, tip), keypoint_or_origin(frame.right, tip));
  }
  return out;
}

LandmarkFrame assign_hand_slots(std::span<const DetectedHand> hands) {
  if (hands.size() > 2) {
    throw Error(ErrorCode::invalid_argument, "at most two hands per frame");
  }
  LandmarkFrame frame;
  if (hands.empty()) return frame;
  if (hands.size() == 1) {
    const auto& h = hands[0];
    if (h.handedness == Handedness::right) {
      frame.right = h.hand;
    } else {
      frame.left = h.hand;
    }
    return frame;
  }

  const auto& a = hands[0];
  const auto& b = hands[1];
  const bool both_reported = a.handedness && b.handedness && *a.handedness != *b.handedness;
  bool a_is_left;
  if (both_reported) {
    a_is_left = *a.handedness == Handedness::left;
  } else if (a.handedness && !b.handedness) {
    a_is_left = *a.handedness == Handedness::left;
  } else if (b.handedness && !a.handedness) {
    a_is_left = *b.handedness == Handedness::right;
  } else {
    // Unknown or contradictory reports fall back to horizontal position.
    a_is_left = a.hand.mean_x() <= b.hand.mean_x();
  }
  frame.left = a_is_left ? a.hand : b.hand;
  frame.right = a_is_left ? b.hand : a.hand;
  return frame;
}

LabelNormalizer::LabelNormalizer(const std::unordered_map<std::string, std::string>& aliases) {
  for (const auto& [raw, symbol] : aliases) add_alias(raw, symbol);
}

void LabelNormalizer::add_alias(std::string_view raw, std::string_view symbol) {
  const std::string canonical = detail::ascii_upper(detail::trim(symbol));
  if (!is_label(canonical)) {
    throw Error(ErrorCode::unmapped_label,
                "alias '" + std::string(raw) + "' targets unknown label '" + std::string(symbol) + "'");
  }
  aliases_[detail::ascii_lower(detail::trim(raw))] = canonical;
}

std::string LabelNormalizer::normalize(std::string_view raw) const {
  const std::string_view trimmed = detail::trim(raw);
  if (trimmed.empty()) {
    throw Error(ErrorCode::unmapped_label, "empty label name");
  }
  if (auto it = aliases_.find(detail::ascii_lower(trimmed)); it != aliases_.end()) {
    return it->second;
  }
  std::string upper = detail::ascii_upper(trimmed);
  if (is_label(upper)) return upper;
  throw Error(ErrorCode::unmapped_label, "unmapped label: '" + std::string(raw) + "'");
}

}  // namespace sanvaad
