#include "sanvaad/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "sanvaad/error.hpp"

namespace sanvaad {

using nlohmann::json;

json hand_to_json(const std::optional<Hand>& hand) {
  if (!hand) return nullptr;
  json points = json::array();
  for (const auto& k : hand->keypoints) points.push_back({k.x, k.y, k.z});
  return points;
}

std::optional<Hand> hand_from_json(const json& value) {
  if (value.is_null()) return std::nullopt;
  if (!value.is_array() || value.size() != kKeypointsPerHand) {
    throw Error(ErrorCode::parse, "hand must be null or an array of 21 [x,y,z] triples");
  }
  Hand hand;
  for (std::size_t i = 0; i < kKeypointsPerHand; ++i) {
    const json& p = value[i];
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
      throw Error(ErrorCode::parse, "keypoint " + std::to_string(i) + " must be [x,y,z] numbers");
    }
    hand.keypoints[i] = Keypoint{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
  }
  return hand;
}

json frame_to_json(const LandmarkFrame& frame) {
  return json{{"left", hand_to_json(frame.left)}, {"right", hand_to_json(frame.right)}};
}

LandmarkFrame frame_from_json(const json& object) {
  if (!object.is_object()) throw Error(ErrorCode::parse, "frame must be a JSON object");
  LandmarkFrame frame;
  if (auto it = object.find("left"); it != object.end()) frame.left = hand_from_json(*it);
  if (auto it = object.find("right"); it != object.end()) frame.right = hand_from_json(*it);
  return frame;
}

std::vector<LabeledSample> read_dataset(std::istream& in, const LabelNormalizer& normalizer) {
  std::vector<LabeledSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto at_line = [&](const std::string& what) {
      return "line " + std::to_string(line_no) + ": " + what;
    };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse, at_line(e.what()));
    }
    if (!obj.is_object() || !obj.contains("label") || !obj["label"].is_string()) {
      throw Error(ErrorCode::parse, at_line("expected object with string \"label\""));
    }
    LabeledSample sample;
    try {
      sample.label = normalizer.normalize(obj["label"].get<std::string>());
      sample.frame = frame_from_json(obj);
    } catch (const Error& e) {
      throw Error(e.code(), at_line(e.what()));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

void write_dataset(std::ostream& out, std::span<const LabeledSample> samples) {
  for (const auto& s : samples) {
    json obj = frame_to_json(s.frame);
    obj["label"] = s.label;
    out << obj.dump() << '\n';
  }
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path, const LabelNormalizer& normalizer) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open dataset " + path.string());
  try {
    return read_dataset(in, normalizer);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_dataset(std::span<const LabeledSample> samples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write dataset " + path.string());
  write_dataset(out, samples);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

ClassHistogram class_histogram(std::span<const LabeledSample> samples) {
  ClassHistogram counts{};
  for (const auto& s : samples) {
    auto idx = label_index(s.label);
    if (!idx) throw Error(ErrorCode::unmapped_label, "unmapped label: '" + s.label + "'");
    ++counts[*idx];
  }
  return counts;
}

std::string format_histogram(const ClassHistogram& histogram) {
  std::size_t peak = 1;
  for (auto c : histogram) peak = std::max(peak, c);
  std::ostringstream os;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const auto bar = static_cast<std::size_t>(40.0 * static_cast<double>(histogram[i]) / static_cast<double>(peak));
    os << std::setw(2) << label_set()[i] << ' ' << std::setw(7) << histogram[i] << ' '
       << std::string(bar, '#') << '\n';
  }
  return os.str();
}

namespace {
constexpr char kDumpMagic[4] = {'S', 'N', 'V', 'F'};
}

void write_feature_dump(std::ostream& out, const FeatureDump& dump) {
  if (dump.rows.size() != dump.labels.size()) {
    throw Error(ErrorCode::shape, "feature dump rows and labels differ in length");
  }
  std::string buf(kDumpMagic, 4);
  detail::append_le<std::uint32_t>(buf, kFeatureDumpVersion);
  detail::append_le<std::uint64_t>(buf, dump.rows.size());
  buf.reserve(buf.size() + dump.rows.size() * (kFeatureDim * 4 + 1));
  for (const auto& row : dump.rows) {
    for (float v : row) detail::append_f32(buf, v);
  }
  for (auto label : dump.labels) buf.push_back(static_cast<char>(label));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::io, "feature dump write failed");
}

FeatureDump read_feature_dump(std::istream& in) {
  const std::string data = detail::read_all(in);
  detail::ByteReader reader(data, ErrorCode::corrupt);
  if (std::memcmp(reader.take(4), kDumpMagic, 4) != 0) {
    throw Error(ErrorCode::bad_magic, "not a feature dump (bad magic)");
  }
  const auto version = reader.read<std::uint32_t>();
  if (version != kFeatureDumpVersion) {
    throw Error(ErrorCode::unsupported_version, "unsupported feature dump version " + std::to_string(version));
  }
  const auto rows = reader.read<std::uint64_t>();
  if (rows > reader.remaining() / (kFeatureDim * 4 + 1)) {
    throw Error(ErrorCode::corrupt, "feature dump row count exceeds file size");
  }
  FeatureDump dump;
  dump.rows.resize(rows);
  for (auto& row : dump.rows) {
    for (auto& v : row) v = reader.read_f32();
  }
  dump.labels.resize(rows);
  for (auto& label : dump.labels) {
    label = static_cast<std::uint8_t>(*reader.take(1));
    if (label >= kNumClasses) throw Error(ErrorCode::corrupt, "label index out of range");
  }
  return dump;
}

FeatureDump make_feature_dump(std::span<const LabeledSample> samples) {
  FeatureDump dump;
  dump.rows.reserve(samples.size());
  dump.labels.reserve(samples.size());
  for (const auto& s : samples) {
    const FeatureVector f = extract_features(s.frame);
    std::array<float, kFeatureDim> row;
    for (std::size_t i = 0; i < kFeatureDim; ++i) row[i] = static_cast<float>(f[i]);
    dump.rows.push_back(row);
    auto idx = label_index(s.label);
    if (!idx) throw Error(ErrorCode::unmapped_label, "unmapped label: '" + s.label + "'");
    dump.labels.push_back(static_cast<std::uint8_t>(*idx));
  }
  return dump;
}

}  // namespace sanvaad
