#include "sanvaad/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "sanvaad/error.hpp"

namespace sanvaad {

namespace {

constexpr double kOutputInitStd = 0.01;

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

DenseParams make_dense(std::size_t fan_in, std::size_t fan_out, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  DenseParams d;
  d.weight.resize(idx(fan_in), idx(fan_out));
  for (Eigen::Index i = 0; i < d.weight.size(); ++i) d.weight.data()[i] = dist(rng);
  d.bias = RowVector::Zero(idx(fan_out));
  return d;
}

void add_dense_views(std::vector<TensorView>& out, const std::string& prefix, DenseParams& d) {
  out.push_back({prefix + ".weight", d.weight.data(), d.weight.rows(), d.weight.cols()});
  out.push_back({prefix + ".bias", d.bias.data(), 1, d.bias.cols()});
}

DenseParams zeros_like(const DenseParams& d) {
  return {Matrix::Zero(d.weight.rows(), d.weight.cols()), RowVector::Zero(d.bias.cols())};
}

void check_input(const ResidualMlpModel& model, const Matrix& batch) {
  if (batch.cols() != idx(model.spec.input_dim)) {
    throw Error(ErrorCode::shape, "input width " + std::to_string(batch.cols()) + " does not match network input " +
                                      std::to_string(model.spec.input_dim));
  }
  if (batch.rows() == 0) throw Error(ErrorCode::shape, "empty batch");
}

// Column sums of a row-major matrix, accumulated row by row so the inner
// loop stays contiguous.
template <typename Derived>
RowVector column_sums(const Eigen::MatrixBase<Derived>& m) {
  RowVector s = RowVector::Zero(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += m.row(i);
  return s;
}

Matrix affine(const Matrix& in, const DenseParams& d) {
  Matrix z(in.rows(), d.weight.cols());
  z.noalias() = in * d.weight;
  z.rowwise() += d.bias;
  return z;
}

Matrix sample_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  if (rate <= 0.0) return Matrix::Ones(rows, cols);
  // Two keep/drop decisions per 64-bit draw, each against a 32-bit threshold.
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(1.0 - rate, 32));
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  double* out = mask.data();
  const Eigen::Index n = mask.size();
  for (Eigen::Index i = 0; i < n; i += 2) {
    const std::uint64_t bits = rng();
    out[i] = (bits & 0xFFFFFFFFu) < threshold ? scale : 0.0;
    if (i + 1 < n) out[i + 1] = (bits >> 32) < threshold ? scale : 0.0;
  }
  return mask;
}

template <typename MaskSource>
Tape run_train_forward(const ResidualMlpModel& model, const Matrix& batch, MaskSource&& next_mask) {
  check_input(model, batch);
  const auto& spec = model.spec;
  Tape tape;
  tape.stages.resize(spec.stage_count());
  Matrix current = batch;
  for (std::size_t s = 0; s < spec.stage_count(); ++s) {
    const auto& p = model.params.stages[s];
    StageTape& st = tape.stages[s];
    st.input = std::move(current);
    st.pre = affine(st.input, p.dense);
    const Matrix relu = st.pre.cwiseMax(0.0);

    st.batch_mean = column_sums(relu) / static_cast<double>(relu.rows());
    Matrix centered = relu.rowwise() - st.batch_mean;
    st.batch_var = column_sums(centered.cwiseAbs2()) / static_cast<double>(relu.rows());
    st.inv_std = (st.batch_var.array() + spec.bn_epsilon).rsqrt().matrix();
    st.normalized = (centered.array().rowwise() * st.inv_std.array()).matrix();

    Matrix y = ((st.normalized.array().rowwise() * p.norm.gamma.array()).rowwise() + p.norm.beta.array()).matrix();
    st.mask = next_mask(s, y.rows(), y.cols());
    current = y.cwiseProduct(st.mask);
    if (spec.residual && spec.is_block(s)) current += st.input;
  }
  tape.hidden = std::move(current);
  tape.logits = affine(tape.hidden, model.params.output);
  tape.probs = softmax_rows(tape.logits);
  return tape;
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_dim == 0 || hidden_width == 0 || compression_width == 0 || num_classes < 2) {
    throw Error(ErrorCode::invalid_argument, "network widths must be positive and classes >= 2");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "dropout rate must lie in [0, 1)");
  }
  if (!(bn_epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "batch-norm epsilon must be positive");
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  for (const auto& s : stages) {
    z.stages.push_back({sanvaad::zeros_like(s.dense),
                        {RowVector::Zero(s.norm.gamma.cols()), RowVector::Zero(s.norm.beta.cols())}});
  }
  z.output = sanvaad::zeros_like(output);
  return z;
}

std::vector<TensorView> Parameters::views() {
  std::vector<TensorView> out;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string prefix = "stage" + std::to_string(s);
    add_dense_views(out, prefix + ".dense", stages[s].dense);
    out.push_back({prefix + ".bn.gamma", stages[s].norm.gamma.data(), 1, stages[s].norm.gamma.cols()});
    out.push_back({prefix + ".bn.beta", stages[s].norm.beta.data(), 1, stages[s].norm.beta.cols()});
  }
  add_dense_views(out, "output", output);
  return out;
}

std::size_t Parameters::scalar_count() const {
  auto count = [](const DenseParams& d) { return static_cast<std::size_t>(d.weight.size() + d.bias.size()); };
  std::size_t n = count(output);
  for (const auto& s : stages) n += count(s.dense) + static_cast<std::size_t>(s.norm.gamma.size() + s.norm.beta.size());
  return n;
}

ResidualMlpModel init_model(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_rng(seed, 0x1417);
  ResidualMlpModel model;
  model.spec = spec;
  std::size_t fan_in = spec.input_dim;
  for (std::size_t s = 0; s < spec.stage_count(); ++s) {
    const std::size_t width = spec.stage_width(s);
    StageParams stage;
    stage.dense = make_dense(fan_in, width, std::sqrt(2.0 / static_cast<double>(fan_in)), rng);
    stage.norm = {RowVector::Ones(idx(width)), RowVector::Zero(idx(width))};
    model.params.stages.push_back(std::move(stage));
    model.running.push_back({RowVector::Zero(idx(width)), RowVector::Ones(idx(width))});
    fan_in = width;
  }
  model.params.output = make_dense(fan_in, spec.num_classes, kOutputInitStd, rng);
  model.scaler.mean.fill(0.0);
  model.scaler.std.fill(1.0);
  model.meta.seed = seed;
  return model;
}

void round_to_f32(ResidualMlpModel& model) {
  auto round_span = [](std::span<double> values) {
    for (double& v : values) v = static_cast<double>(static_cast<float>(v));
  };
  for (auto& view : model.params.views()) round_span(view.values());
  for (auto& r : model.running) {
    round_span({r.mean.data(), static_cast<std::size_t>(r.mean.size())});
    round_span({r.var.data(), static_cast<std::size_t>(r.var.size())});
  }
  round_span(model.scaler.mean);
  round_span(model.scaler.std);
}

std::vector<Matrix> Tape::masks() const {
  std::vector<Matrix> out;
  out.reserve(stages.size());
  for (const auto& s : stages) out.push_back(s.mask);
  return out;
}

Tape forward_train(const ResidualMlpModel& model, const Matrix& batch, Rng& rng) {
  const double rate = model.spec.dropout_rate;
  return run_train_forward(model, batch, [&](std::size_t, Eigen::Index r, Eigen::Index c) {
    return sample_mask(r, c, rate, rng);
  });
}

Tape forward_train(const ResidualMlpModel& model, const Matrix& batch, const std::vector<Matrix>& masks) {
  if (masks.size() != model.spec.stage_count()) {
    throw Error(ErrorCode::shape, "expected one dropout mask per stage");
  }
  return run_train_forward(model, batch, [&](std::size_t s, Eigen::Index r, Eigen::Index c) {
    if (masks[s].rows() != r || masks[s].cols() != c) {
      throw Error(ErrorCode::shape, "dropout mask shape mismatch at stage " + std::to_string(s));
    }
    return masks[s];
  });
}

Matrix forward_infer(const ResidualMlpModel& model, const Matrix& batch) {
  check_input(model, batch);
  const auto& spec = model.spec;
  Matrix current = batch;
  for (std::size_t s = 0; s < spec.stage_count(); ++s) {
    const auto& p = model.params.stages[s];
    const auto& rs = model.running[s];
    const RowVector scale =
        (p.norm.gamma.array() * (rs.var.array() + spec.bn_epsilon).rsqrt()).matrix();
    const RowVector shift = (p.norm.beta.array() - rs.mean.array() * scale.array()).matrix();
    Matrix y = affine(current, p.dense).cwiseMax(0.0);
    y = ((y.array().rowwise() * scale.array()).rowwise() + shift.array()).matrix();
    if (spec.residual && spec.is_block(s)) y += current;
    current = std::move(y);
  }
  return softmax_rows(affine(current, model.params.output));
}

Matrix forward(const ResidualMlpModel& model, const Matrix& batch, Mode mode, Rng* rng) {
  if (mode == Mode::infer) return forward_infer(model, batch);
  if (rng == nullptr) throw Error(ErrorCode::state, "train-mode forward needs a random generator");
  return forward_train(model, batch, *rng).probs;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits.colwise() - logits.rowwise().maxCoeff();
  out = out.array().exp().matrix();
  const Eigen::VectorXd sums = out.rowwise().sum();
  out.array().colwise() /= sums.array();
  return out;
}

double cross_entropy(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw Error(ErrorCode::shape, "logits and targets differ in shape");
  }
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double lse = row_max(i) + std::log((logits.row(i).array() - row_max(i)).exp().sum());
    total += (targets.row(i).array() * (lse - logits.row(i).array())).sum();
  }
  return total / static_cast<double>(logits.rows());
}

Parameters backward(const ResidualMlpModel& model, const Tape& tape, const Matrix& targets) {
  if (tape.empty()) throw Error(ErrorCode::state, "backward called without a cached train-mode forward");
  if (targets.rows() != tape.probs.rows() || targets.cols() != tape.probs.cols()) {
    throw Error(ErrorCode::shape, "targets do not match the cached forward batch");
  }
  const auto& spec = model.spec;
  const double n = static_cast<double>(targets.rows());
  Parameters grads;
  grads.stages.resize(spec.stage_count());

  // Softmax and cross-entropy fused: dL/dlogits = (p - y) / n.
  const Matrix dlogits = (tape.probs - targets) / n;
  grads.output.weight.noalias() = tape.hidden.transpose() * dlogits;
  grads.output.bias = column_sums(dlogits);
  Matrix upstream(dlogits.rows(), model.params.output.weight.rows());
  upstream.noalias() = dlogits * model.params.output.weight.transpose();

  for (std::size_t s = spec.stage_count(); s-- > 0;) {
    const auto& p = model.params.stages[s];
    const StageTape& st = tape.stages[s];
    auto& g = grads.stages[s];

    const Matrix dy = upstream.cwiseProduct(st.mask);
    g.norm.gamma = column_sums(dy.cwiseProduct(st.normalized));
    g.norm.beta = column_sums(dy);

    const Matrix dxhat = (dy.array().rowwise() * p.norm.gamma.array()).matrix();
    const RowVector sum_dxhat = column_sums(dxhat);
    const RowVector sum_dxhat_xhat = column_sums(dxhat.cwiseProduct(st.normalized));
    Matrix drelu = (n * dxhat.array()).matrix();
    drelu.rowwise() -= sum_dxhat;
    drelu -= (st.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    drelu = (drelu.array().rowwise() * (st.inv_std.array() / n)).matrix();

    const Matrix dpre = (st.pre.array() > 0.0).select(drelu.array(), 0.0).matrix();
    g.dense.weight.noalias() = st.input.transpose() * dpre;
    g.dense.bias = column_sums(dpre);

    if (s == 0) break;
    Matrix next(dpre.rows(), p.dense.weight.rows());
    next.noalias() = dpre * p.dense.weight.transpose();
    if (spec.residual && spec.is_block(s)) next += upstream;
    upstream = std::move(next);
  }
  return grads;
}

void update_running_stats(ResidualMlpModel& model, const Tape& tape, double momentum) {
  if (tape.empty()) throw Error(ErrorCode::state, "no batch statistics to fold in");
  for (std::size_t s = 0; s < model.running.size(); ++s) {
    auto& r = model.running[s];
    r.mean = momentum * r.mean + (1.0 - momentum) * tape.stages[s].batch_mean;
    r.var = momentum * r.var + (1.0 - momentum) * tape.stages[s].batch_var;
  }
}

AdamState AdamState::for_parameters(const Parameters& params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const AdamConfig& cfg) {
  auto p_views = params.views();
  auto g_views = const_cast<Parameters&>(grads).views();
  auto m_views = state.m.views();
  auto v_views = state.v.views();
  if (g_views.size() != p_views.size() || m_views.size() != p_views.size() || v_views.size() != p_views.size()) {
    throw Error(ErrorCode::shape, "Adam state does not match parameter layout");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
  for (std::size_t k = 0; k < p_views.size(); ++k) {
    if (g_views[k].size() != p_views[k].size()) {
      throw Error(ErrorCode::shape, "gradient shape mismatch for " + p_views[k].name);
    }
    const Eigen::Index n = p_views[k].size();
    ArrayMap w(p_views[k].data, n);
    const ArrayMap g(g_views[k].data, n);
    ArrayMap m(m_views[k].data, n);
    ArrayMap v(v_views[k].data, n);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
    w -= cfg.learning_rate * (m / correction1) / ((v / correction2).sqrt() + cfg.epsilon);
  }
}

Matrix feature_matrix(const ScalerParams& scaler, std::span<const LandmarkFrame> frames) {
  Matrix out(idx(frames.size()), idx(kFeatureDim));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FeatureVector f = standardize(scaler, extract_features(frames[i]));
    for (std::size_t d = 0; d < kFeatureDim; ++d) out(idx(i), idx(d)) = f[d];
  }
  return out;
}

Matrix feature_matrix(const ScalerParams& scaler, std::span<const LabeledSample> samples) {
  std::vector<LandmarkFrame> frames;
  frames.reserve(samples.size());
  for (const auto& s : samples) frames.push_back(s.frame);
  return feature_matrix(scaler, frames);
}

Prediction decode_prediction(const LabelCodec& codec, std::span<const double> probs, std::size_t top_k) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  Prediction out;
  out.label = codec.decode(order.front());
  out.confidence = probs[order.front()];
  const std::size_t k = std::min(top_k, order.size());
  for (std::size_t i = 0; i < k; ++i) out.top_k.emplace_back(codec.decode(order[i]), probs[order[i]]);
  return out;
}

Prediction predict(const ResidualMlpModel& model, const LandmarkFrame& frame, std::size_t top_k) {
  const Matrix probs = forward_infer(model, feature_matrix(model.scaler, std::span(&frame, 1)));
  return decode_prediction(model.codec, std::span<const double>(probs.data(), static_cast<std::size_t>(probs.cols())),
                           top_k);
}

std::vector<std::size_t> predict_classes(const ResidualMlpModel& model, std::span<const LabeledSample> samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const auto chunk = samples.subspan(start, std::min(kChunk, samples.size() - start));
    const Matrix probs = forward_infer(model, feature_matrix(model.scaler, chunk));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      Eigen::Index best;
      probs.row(i).maxCoeff(&best);
      out.push_back(static_cast<std::size_t>(best));
    }
  }
  return out;
}

}  // namespace sanvaad
