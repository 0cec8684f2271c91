#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanvaad/model.hpp"
#include "sanvaad/train.hpp"

namespace sanvaad {

/// Square count matrix; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kNumClasses);
  ConfusionMatrix(std::size_t classes, std::span<const std::size_t> truth, std::span<const std::size_t> predicted);
  /// Row-major counts, classes x classes.
  static ConfusionMatrix from_counts(std::size_t classes, std::vector<std::size_t> counts);

  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);
  /// Exact integer addition; shapes must agree.
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::size_t total() const noexcept;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t predicted) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when a 0/0 was replaced by 0.
  bool zero_division = false;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class rows cover classes that occur in the truth or the predictions;
/// macro and weighted averages run over those rows.
struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  AverageMetrics macro;
  AverageMetrics weighted;
  std::size_t total = 0;
  bool zero_division = false;
};

ClassificationReport classification_report(const ConfusionMatrix& cm, std::span<const std::string> labels);

struct ConfusionPair {
  std::string truth;
  std::string predicted;
  std::size_t count = 0;
};

/// Largest off-diagonal cells, descending.
std::vector<ConfusionPair> top_confusions(const ConfusionMatrix& cm, std::span<const std::string> labels,
                                          std::size_t k);

struct Evaluation {
  ConfusionMatrix confusion;
  ClassificationReport report;
};

/// Throws Error(invalid_argument) for an empty sample set.
Evaluation evaluate(const ResidualMlpModel& model, std::span<const LabeledSample> samples);

/// Aligned text table: class, precision, recall, f1, support, then the summary rows.
std::string format_report(const ClassificationReport& report);
nlohmann::json report_to_json(const ClassificationReport& report);
std::string confusion_to_csv(const ConfusionMatrix& cm, std::span<const std::string> labels);

struct AblationRow {
  std::string variant;
  bool augmented = false;
  bool residual = false;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;  // training epochs logged (epoch 0 excluded)
  double clean_accuracy = 0.0;
  double corrupted_accuracy = 0.0;
  double macro_f1 = 0.0;
  EpochLog log;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // full, no-augmentation, no-residual
};

/// Builds the dropout-corrupted copy of a test split: every frame gets one
/// landmark_dropout pass drawn from `seed`.
std::vector<LabeledSample> corrupt_with_dropout(std::span<const LabeledSample> samples, const AugmentConfig& cfg,
                                                std::uint64_t seed);

/// Trains {full, no-augmentation, no-residual} with the same seed and
/// scores each on the clean test split and on its dropout-corrupted copy.
AblationReport run_ablations(std::span<const LabeledSample> dataset, const TrainOptions& base);

std::string format_ablations(const AblationReport& report);
nlohmann::json ablations_to_json(const AblationReport& report);

}  // namespace sanvaad
