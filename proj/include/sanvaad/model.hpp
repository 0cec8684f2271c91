#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sanvaad/landmarks.hpp"
#include "sanvaad/preprocess.hpp"
#include "sanvaad/random.hpp"
#include "sanvaad/tensor.hpp"

namespace sanvaad {

/// Layer widths and forward-pass constants of the classifier:
///
///   input -> dense(hidden)+ReLU -> BN -> dropout                 (stem)
///         -> [dense(hidden)+ReLU -> BN -> dropout, + shortcut] x residual_blocks
///         -> dense(compression)+ReLU -> BN -> dropout            (compression)
///         -> dense(classes) -> softmax
///
/// With `residual` false the shortcut additions are dropped and nothing else changes.
struct NetworkSpec {
  std::size_t input_dim = kFeatureDim;
  std::size_t hidden_width = 512;
  std::size_t residual_blocks = 3;
  std::size_t compression_width = 256;
  std::size_t num_classes = kNumClasses;
  double dropout_rate = 0.3;
  double bn_epsilon = 1e-5;
  bool residual = true;

  static NetworkSpec table_one() { return {}; }

  void validate() const;
  std::size_t stage_count() const noexcept { return residual_blocks + 2; }
  bool is_block(std::size_t stage) const noexcept { return stage >= 1 && stage <= residual_blocks; }
  std::size_t stage_width(std::size_t stage) const noexcept {
    return stage + 1 == stage_count() ? compression_width : hidden_width;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct DenseParams {
  Matrix weight;  // fan_in x fan_out
  RowVector bias;
};

struct NormParams {
  RowVector gamma;
  RowVector beta;
};

struct StageParams {
  DenseParams dense;
  NormParams norm;
};

/// Named, contiguous view of one tensor. Parameters, gradients and Adam
/// moments all share one layout, so views line up index by index.
struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const noexcept { return rows * cols; }
  std::span<double> values() const { return {data, static_cast<std::size_t>(size())}; }
};

/// Every trainable tensor: the stages (stem, blocks, compression) and the output layer.
struct Parameters {
  std::vector<StageParams> stages;
  DenseParams output;

  Parameters zeros_like() const;
  std::vector<TensorView> views();
  std::size_t scalar_count() const;
};

struct RunningStats {
  RowVector mean;
  RowVector var;
};

struct TrainingMeta {
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  bool augmented = false;
  bool on_the_fly = false;
};

struct ResidualMlpModel {
  NetworkSpec spec;
  Parameters params;
  std::vector<RunningStats> running;  // one per stage
  ScalerParams scaler;                // identity until training fits one
  LabelCodec codec;
  TrainingMeta meta;
};

/// He-normal (variance 2/fan_in) hidden layers; the output layer starts at
/// N(0, 0.01^2) so the initial softmax is near uniform. Biases and beta 0,
/// gamma 1, running stats (0, 1).
ResidualMlpModel init_model(const NetworkSpec& spec, std::uint64_t seed);

/// Rounds every stored real to the nearest float so the model survives the
/// f32 container bit-exactly.
void round_to_f32(ResidualMlpModel& model);

enum class Mode { train, infer };

struct StageTape {
  Matrix input;
  Matrix pre;         // dense output before ReLU
  Matrix normalized;  // batch-normalized ReLU output, before gamma/beta
  Matrix mask;        // inverted-dropout multipliers
  RowVector inv_std;
  RowVector batch_mean;
  RowVector batch_var;
};

/// Activations cached by a train-mode forward pass.
struct Tape {
  std::vector<StageTape> stages;
  Matrix hidden;  // input to the output layer
  Matrix logits;
  Matrix probs;

  bool empty() const noexcept { return stages.empty(); }
  std::vector<Matrix> masks() const;
};

/// Train mode: batch statistics and freshly sampled dropout masks.
Tape forward_train(const ResidualMlpModel& model, const Matrix& batch, Rng& rng);
/// Train mode with caller-provided dropout masks (one per stage).
Tape forward_train(const ResidualMlpModel& model, const Matrix& batch, const std::vector<Matrix>& masks);
/// Infer mode: running statistics, no dropout. Pure.
Matrix forward_infer(const ResidualMlpModel& model, const Matrix& batch);

/// Row-wise probabilities for either mode; train mode needs `rng`.
Matrix forward(const ResidualMlpModel& model, const Matrix& batch, Mode mode, Rng* rng = nullptr);

/// Stable row softmax (max-subtracted).
Matrix softmax_rows(const Matrix& logits);

/// Mean categorical cross-entropy computed from logits.
double cross_entropy(const Matrix& logits, const Matrix& targets);

/// Mean-reduced loss gradients for every trainable tensor, from a
/// train-mode tape. Throws Error(state) for an empty tape.
Parameters backward(const ResidualMlpModel& model, const Tape& tape, const Matrix& targets);

void update_running_stats(ResidualMlpModel& model, const Tape& tape, double momentum);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Parameters m;
  Parameters v;
  std::uint64_t step = 0;

  static AdamState for_parameters(const Parameters& params);
};

/// Bias-corrected Adam update; increments state.step.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state, const AdamConfig& cfg);

/// Standardized feature rows for a set of frames.
Matrix feature_matrix(const ScalerParams& scaler, std::span<const LandmarkFrame> frames);
Matrix feature_matrix(const ScalerParams& scaler, std::span<const LabeledSample> samples);

struct Prediction {
  std::string label;
  double confidence = 0.0;
  std::vector<std::pair<std::string, double>> top_k;  // descending probability
};

/// extract_features -> standardize -> infer forward -> argmax decode.
Prediction predict(const ResidualMlpModel& model, const LandmarkFrame& frame, std::size_t top_k = 3);
Prediction decode_prediction(const LabelCodec& codec, std::span<const double> probs, std::size_t top_k);

/// Argmax class index per sample.
std::vector<std::size_t> predict_classes(const ResidualMlpModel& model, std::span<const LabeledSample> samples);

}  // namespace sanvaad
