#include "sanvaad/quantize.hpp"

#include <zlib.h>

#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "sanvaad/error.hpp"

namespace sanvaad {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'N', 'V', 'D'};
// Upper bound on any stored dimension; rejects corrupt shapes before allocating.
constexpr Eigen::Index kMaxDim = 1 << 16;

std::string_view dtype_name(DType d) { return d == DType::f32 ? "f32" : "i8"; }

ContainerTensor f32_tensor(std::string name, const double* data, Eigen::Index rows, Eigen::Index cols) {
  ContainerTensor t{std::move(name), DType::f32, rows, cols, 1.0f, {}};
  t.bytes.reserve(static_cast<std::size_t>(rows * cols) * 4);
  for (Eigen::Index i = 0; i < rows * cols; ++i) detail::append_f32(t.bytes, static_cast<float>(data[i]));
  return t;
}

template <typename Derived>
ContainerTensor f32_tensor(std::string name, const Eigen::PlainObjectBase<Derived>& m) {
  return f32_tensor(std::move(name), m.data(), m.rows(), m.cols());
}

ContainerTensor i8_tensor(std::string name, const Matrix& m) {
  const QuantizedTensor q = quantize_tensor(m);
  ContainerTensor t{std::move(name), DType::i8, q.rows, q.cols, q.scale, {}};
  t.bytes.assign(reinterpret_cast<const char*>(q.values.data()), q.values.size());
  return t;
}

void read_into(const ContainerTensor& t, double* out, Eigen::Index rows, Eigen::Index cols) {
  if (t.rows != rows || t.cols != cols) {
    throw Error(ErrorCode::corrupt, "tensor " + t.name + " has shape " + std::to_string(t.rows) + "x" +
                                        std::to_string(t.cols) + ", expected " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
  }
  const auto n = static_cast<std::size_t>(rows * cols);
  if (t.dtype == DType::f32) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(detail::load_f32(t.bytes.data() + 4 * i));
  } else {
    const double scale = static_cast<double>(t.scale);
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * static_cast<double>(static_cast<std::int8_t>(t.bytes[i]));
  }
}

json network_to_json(const NetworkSpec& s) {
  return {{"input_dim", s.input_dim},
          {"hidden_width", s.hidden_width},
          {"residual_blocks", s.residual_blocks},
          {"compression_width", s.compression_width},
          {"num_classes", s.num_classes},
          {"dropout_rate", s.dropout_rate},
          {"bn_epsilon", s.bn_epsilon},
          {"residual", s.residual}};
}

NetworkSpec network_from_json(const json& j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.hidden_width = j.at("hidden_width").get<std::size_t>();
  s.residual_blocks = j.at("residual_blocks").get<std::size_t>();
  s.compression_width = j.at("compression_width").get<std::size_t>();
  s.num_classes = j.at("num_classes").get<std::size_t>();
  s.dropout_rate = j.at("dropout_rate").get<double>();
  s.bn_epsilon = j.at("bn_epsilon").get<double>();
  s.residual = j.at("residual").get<bool>();
  return s;
}

std::size_t payload_size(const ContainerTensor& t) {
  return static_cast<std::size_t>(t.rows * t.cols) * (t.dtype == DType::f32 ? 4 : 1);
}

}  // namespace

std::string_view to_string(Precision p) noexcept { return p == Precision::f32 ? "f32" : "int8"; }

QuantizedTensor quantize_tensor(const Matrix& weights) {
  QuantizedTensor q;
  q.rows = weights.rows();
  q.cols = weights.cols();
  const double max_abs = weights.size() == 0 ? 0.0 : weights.cwiseAbs().maxCoeff();
  q.scale = max_abs > 0.0 ? static_cast<float>(max_abs / 127.0) : 1.0f;
  const double scale = static_cast<double>(q.scale);
  q.values.resize(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double r = std::clamp(std::nearbyint(weights.data()[i] / scale), -127.0, 127.0);
    q.values[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(r);
  }
  return q;
}

Matrix dequantize(const QuantizedTensor& q) {
  Matrix out(q.rows, q.cols);
  const double scale = static_cast<double>(q.scale);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = scale * q.values[static_cast<std::size_t>(i)];
  return out;
}

std::size_t ModelContainer::blob_bytes() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.bytes.size();
  return n;
}

json model_metadata(const ResidualMlpModel& model) {
  return {{"network", network_to_json(model.spec)},
          {"labels", model.codec.classes()},
          {"training",
           {{"epochs", model.meta.epochs},
            {"seed", model.meta.seed},
            {"augmented", model.meta.augmented},
            {"on_the_fly", model.meta.on_the_fly}}}};
}

ModelContainer pack_model(const ResidualMlpModel& model, Precision precision) {
  ModelContainer c;
  c.precision = precision;
  auto weight = [&](std::string name, const Matrix& w) {
    return precision == Precision::int8 ? i8_tensor(std::move(name), w) : f32_tensor(std::move(name), w);
  };
  for (std::size_t s = 0; s < model.params.stages.size(); ++s) {
    const auto& st = model.params.stages[s];
    const std::string p = "stage" + std::to_string(s);
    c.tensors.push_back(weight(p + ".dense.weight", st.dense.weight));
    c.tensors.push_back(f32_tensor(p + ".dense.bias", st.dense.bias));
    c.tensors.push_back(f32_tensor(p + ".bn.gamma", st.norm.gamma));
    c.tensors.push_back(f32_tensor(p + ".bn.beta", st.norm.beta));
    c.tensors.push_back(f32_tensor(p + ".bn.running_mean", model.running[s].mean));
    c.tensors.push_back(f32_tensor(p + ".bn.running_var", model.running[s].var));
  }
  c.tensors.push_back(weight("output.weight", model.params.output.weight));
  c.tensors.push_back(f32_tensor("output.bias", model.params.output.bias));
  c.tensors.push_back(f32_tensor("scaler.mean", model.scaler.mean.data(), 1, static_cast<Eigen::Index>(kFeatureDim)));
  c.tensors.push_back(f32_tensor("scaler.std", model.scaler.std.data(), 1, static_cast<Eigen::Index>(kFeatureDim)));

  c.metadata = model_metadata(model);
  c.metadata["format"] = "sanvaad-model";
  c.metadata["precision"] = to_string(precision);
  json table = json::array();
  for (const auto& t : c.tensors) {
    json entry = {{"name", t.name}, {"dtype", dtype_name(t.dtype)}, {"shape", {t.rows, t.cols}}};
    if (t.dtype == DType::i8) entry["scale"] = t.scale;
    table.push_back(std::move(entry));
  }
  c.metadata["tensors"] = std::move(table);
  return c;
}

ModelContainer quantize_model(const ResidualMlpModel& model) { return pack_model(model, Precision::int8); }

ResidualMlpModel unpack_model(const ModelContainer& c) {
  NetworkSpec spec;
  std::vector<std::string> labels;
  try {
    spec = network_from_json(c.metadata.at("network"));
    labels = c.metadata.at("labels").get<std::vector<std::string>>();
    spec.validate();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt, std::string("malformed model metadata: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::corrupt, std::string("invalid network in model metadata: ") + e.what());
  }
  if (spec.input_dim != kFeatureDim) throw Error(ErrorCode::corrupt, "model input width is not 141");
  if (spec.num_classes != kNumClasses) throw Error(ErrorCode::corrupt, "model output width is not 35");
  for (std::size_t w : {spec.hidden_width, spec.compression_width, spec.num_classes, spec.residual_blocks}) {
    if (w > static_cast<std::size_t>(kMaxDim)) throw Error(ErrorCode::corrupt, "implausible network size in metadata");
  }
  ResidualMlpModel model = init_model(spec, 0);
  if (labels != model.codec.classes()) throw Error(ErrorCode::corrupt, "model label codec does not match class set");

  std::size_t k = 0;
  auto next = [&](const std::string& name) -> const ContainerTensor& {
    if (k >= c.tensors.size() || c.tensors[k].name != name) {
      throw Error(ErrorCode::corrupt, "expected tensor " + name + " at position " + std::to_string(k));
    }
    return c.tensors[k++];
  };
  auto fill = [&](const std::string& name, auto& m) { read_into(next(name), m.data(), m.rows(), m.cols()); };
  for (std::size_t s = 0; s < spec.stage_count(); ++s) {
    const std::string p = "stage" + std::to_string(s);
    auto& st = model.params.stages[s];
    fill(p + ".dense.weight", st.dense.weight);
    fill(p + ".dense.bias", st.dense.bias);
    fill(p + ".bn.gamma", st.norm.gamma);
    fill(p + ".bn.beta", st.norm.beta);
    fill(p + ".bn.running_mean", model.running[s].mean);
    fill(p + ".bn.running_var", model.running[s].var);
  }
  fill("output.weight", model.params.output.weight);
  fill("output.bias", model.params.output.bias);
  read_into(next("scaler.mean"), model.scaler.mean.data(), 1, static_cast<Eigen::Index>(kFeatureDim));
  read_into(next("scaler.std"), model.scaler.std.data(), 1, static_cast<Eigen::Index>(kFeatureDim));
  if (k != c.tensors.size()) throw Error(ErrorCode::corrupt, "unexpected trailing tensors in model");

  try {
    const json& tr = c.metadata.at("training");
    model.meta.epochs = tr.at("epochs").get<std::size_t>();
    model.meta.seed = tr.at("seed").get<std::uint64_t>();
    model.meta.augmented = tr.at("augmented").get<bool>();
    model.meta.on_the_fly = tr.at("on_the_fly").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt, std::string("malformed training metadata: ") + e.what());
  }
  return model;
}

std::string serialize_container(const ModelContainer& c) {
  const std::string meta = c.metadata.dump();
  std::string out(kMagic, 4);
  detail::append_le<std::uint32_t>(out, kContainerVersion);
  detail::append_le<std::uint64_t>(out, meta.size());
  out += meta;
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& t : c.tensors) {
    out += t.bytes;
    crc = crc32(crc, reinterpret_cast<const Bytef*>(t.bytes.data()), static_cast<uInt>(t.bytes.size()));
  }
  detail::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(crc));
  return out;
}

ModelContainer parse_container(const std::string& bytes) {
  detail::ByteReader reader(bytes, ErrorCode::corrupt);
  if (bytes.size() < 4) throw Error(ErrorCode::corrupt, "model file truncated before magic");
  if (std::memcmp(reader.take(4), kMagic, 4) != 0) throw Error(ErrorCode::bad_magic, "not a model container (bad magic)");
  const auto version = reader.read<std::uint32_t>();
  if (version != kContainerVersion) {
    throw Error(ErrorCode::unsupported_version, "unsupported model container version " + std::to_string(version) +
                                                    " (this build reads version " +
                                                    std::to_string(kContainerVersion) + ")");
  }
  const auto meta_len = reader.read<std::uint64_t>();
  if (meta_len > reader.remaining()) throw Error(ErrorCode::corrupt, "model metadata truncated");
  const char* meta_ptr = reader.take(static_cast<std::size_t>(meta_len));

  ModelContainer c;
  try {
    c.metadata = json::parse(meta_ptr, meta_ptr + meta_len);
    const std::string precision = c.metadata.at("precision").get<std::string>();
    if (precision != "f32" && precision != "int8") throw Error(ErrorCode::corrupt, "unknown precision " + precision);
    c.precision = precision == "f32" ? Precision::f32 : Precision::int8;
    for (const auto& entry : c.metadata.at("tensors")) {
      ContainerTensor t;
      t.name = entry.at("name").get<std::string>();
      const std::string dtype = entry.at("dtype").get<std::string>();
      if (dtype != "f32" && dtype != "i8") throw Error(ErrorCode::corrupt, "unknown dtype " + dtype);
      t.dtype = dtype == "f32" ? DType::f32 : DType::i8;
      const auto& shape = entry.at("shape");
      t.rows = shape.at(0).get<Eigen::Index>();
      t.cols = shape.at(1).get<Eigen::Index>();
      if (t.rows < 0 || t.cols < 0 || t.rows > kMaxDim || t.cols > kMaxDim) {
        throw Error(ErrorCode::corrupt, "implausible tensor shape for " + t.name);
      }
      if (t.dtype == DType::i8) t.scale = entry.at("scale").get<float>();
      c.tensors.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::corrupt, std::string("malformed model metadata: ") + e.what());
  }

  std::size_t expected = 4;  // trailing CRC
  for (const auto& t : c.tensors) expected += payload_size(t);
  if (reader.remaining() != expected) {
    throw Error(ErrorCode::corrupt, "model blob section is " + std::to_string(reader.remaining()) +
                                        " bytes, expected " + std::to_string(expected) + " (truncated or padded)");
  }
  uLong crc = crc32(0L, Z_NULL, 0);
  for (auto& t : c.tensors) {
    const std::size_t n = payload_size(t);
    const char* p = reader.take(n);
    t.bytes.assign(p, n);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(p), static_cast<uInt>(n));
  }
  const auto stored = reader.read<std::uint32_t>();
  if (stored != static_cast<std::uint32_t>(crc)) throw Error(ErrorCode::corrupt, "model checksum mismatch");
  return c;
}

void save_model(const ModelContainer& container, const std::filesystem::path& path) {
  const std::string bytes = serialize_container(container);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write model " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

ModelContainer read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open model " + path.string());
  try {
    return parse_container(detail::read_all(in));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ResidualMlpModel load_model(const std::filesystem::path& path) {
  ModelContainer container = read_container(path);
  try {
    return unpack_model(container);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace sanvaad
