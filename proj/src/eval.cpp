#include "sanvaad/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "sanvaad/error.hpp"

namespace sanvaad {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::span<const std::size_t> truth,
                                 std::span<const std::size_t> predicted)
    : ConfusionMatrix(classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::shape, "truth and prediction lists differ in length");
  }
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

ConfusionMatrix ConfusionMatrix::from_counts(std::size_t classes, std::vector<std::size_t> counts) {
  if (counts.size() != classes * classes) throw Error(ErrorCode::shape, "confusion counts must be classes^2 long");
  ConfusionMatrix cm(classes);
  cm.counts_ = std::move(counts);
  return cm;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
  if (truth >= classes_ || predicted >= classes_) throw Error(ErrorCode::invalid_argument, "class index out of range");
  counts_[truth * classes_ + predicted] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw Error(ErrorCode::shape, "cannot merge confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < classes_; ++p) n += at(truth, p);
  return n;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < classes_; ++t) n += at(t, predicted);
  return n;
}

ClassificationReport classification_report(const ConfusionMatrix& cm, std::span<const std::string> labels) {
  if (labels.size() != cm.classes()) throw Error(ErrorCode::shape, "label list does not match confusion matrix");
  ClassificationReport r;
  r.total = cm.total();
  if (r.total == 0) throw Error(ErrorCode::invalid_argument, "confusion matrix is empty");

  std::size_t correct = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::size_t tp = cm.at(c, c);
    const std::size_t support = cm.row_sum(c);
    const std::size_t predicted = cm.column_sum(c);
    correct += tp;
    if (support == 0 && predicted == 0) continue;

    ClassMetrics m;
    m.label = labels[c];
    m.support = support;
    if (predicted > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    } else {
      m.zero_division = true;
    }
    if (support > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(support);
    } else {
      m.zero_division = true;
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    r.zero_division = r.zero_division || m.zero_division;
    r.classes.push_back(std::move(m));
  }

  const double n = static_cast<double>(r.total);
  r.accuracy = static_cast<double>(correct) / n;
  const double k = static_cast<double>(r.classes.size());
  for (const auto& m : r.classes) {
    r.macro.precision += m.precision / k;
    r.macro.recall += m.recall / k;
    r.macro.f1 += m.f1 / k;
    const double w = static_cast<double>(m.support) / n;
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
  }
  return r;
}

std::vector<ConfusionPair> top_confusions(const ConfusionMatrix& cm, std::span<const std::string> labels,
                                          std::size_t k) {
  std::vector<ConfusionPair> pairs;
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      if (t != p && cm.at(t, p) > 0) pairs.push_back({labels[t], labels[p], cm.at(t, p)});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  if (pairs.size() > k) pairs.resize(k);
  return pairs;
}

Evaluation evaluate(const ResidualMlpModel& model, std::span<const LabeledSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "evaluation set is empty");
  const std::vector<std::size_t> predicted = predict_classes(model, samples);
  std::vector<std::size_t> truth;
  truth.reserve(samples.size());
  for (const auto& s : samples) truth.push_back(model.codec.encode(s.label));
  ConfusionMatrix cm(model.codec.size(), truth, predicted);
  auto report = classification_report(cm, model.codec.classes());
  return {std::move(cm), std::move(report)};
}

std::string format_report(const ClassificationReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::setw(14) << "" << std::setw(11) << "precision" << std::setw(9) << "recall" << std::setw(10) << "f1-score"
     << std::setw(10) << "support" << "\n\n";
  for (const auto& m : r.classes) {
    os << std::setw(14) << m.label << std::setw(11) << m.precision << std::setw(9) << m.recall << std::setw(10) << m.f1
       << std::setw(10) << m.support << (m.zero_division ? "  (0/0 -> 0)" : "") << '\n';
  }
  os << '\n';
  os << std::setw(14) << "accuracy" << std::setw(11) << "" << std::setw(9) << "" << std::setw(10) << r.accuracy
     << std::setw(10) << r.total << '\n';
  os << std::setw(14) << "macro avg" << std::setw(11) << r.macro.precision << std::setw(9) << r.macro.recall
     << std::setw(10) << r.macro.f1 << std::setw(10) << r.total << '\n';
  os << std::setw(14) << "weighted avg" << std::setw(11) << r.weighted.precision << std::setw(9) << r.weighted.recall
     << std::setw(10) << r.weighted.f1 << std::setw(10) << r.total << '\n';
  return os.str();
}

json report_to_json(const ClassificationReport& r) {
  json classes = json::array();
  for (const auto& m : r.classes) {
    classes.push_back({{"label", m.label},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"zero_division", m.zero_division}});
  }
  auto avg = [](const AverageMetrics& a) { return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}}; };
  return {{"classes", classes},
          {"accuracy", r.accuracy},
          {"macro_avg", avg(r.macro)},
          {"weighted_avg", avg(r.weighted)},
          {"total", r.total},
          {"zero_division", r.zero_division}};
}

std::string confusion_to_csv(const ConfusionMatrix& cm, std::span<const std::string> labels) {
  std::ostringstream os;
  os << "true\\pred";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    os << labels[t];
    for (std::size_t p = 0; p < cm.classes(); ++p) os << ',' << cm.at(t, p);
    os << '\n';
  }
  return os.str();
}

std::vector<LabeledSample> corrupt_with_dropout(std::span<const LabeledSample> samples, const AugmentConfig& cfg,
                                                std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, 0xC0);
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({landmark_dropout(s.frame, cfg, rng), s.label});
  return out;
}

AblationReport run_ablations(std::span<const LabeledSample> dataset, const TrainOptions& base) {
  struct Variant {
    const char* name;
    bool augment;
    bool residual;
  };
  constexpr Variant variants[] = {{"full", true, true}, {"no-augmentation", false, true}, {"no-residual", true, false}};

  AblationReport report;
  for (const auto& v : variants) {
    TrainOptions options = base;
    options.augment_data = v.augment;
    options.network.residual = v.residual;
    TrainResult result = train(dataset, options);

    const auto corrupted = corrupt_with_dropout(result.split.test, base.augment, base.train.seed);
    const Evaluation clean = evaluate(result.model, result.split.test);
    const Evaluation noisy = evaluate(result.model, corrupted);

    AblationRow row;
    row.variant = v.name;
    row.augmented = v.augment;
    row.residual = v.residual;
    row.seed = base.train.seed;
    row.epochs = result.log.empty() ? 0 : result.log.size() - 1;
    row.clean_accuracy = clean.report.accuracy;
    row.corrupted_accuracy = noisy.report.accuracy;
    row.macro_f1 = clean.report.macro.f1;
    row.log = std::move(result.log);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_ablations(const AblationReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "variant" << std::right << std::setw(8) << "seed" << std::setw(8) << "epochs"
     << std::setw(12) << "clean acc" << std::setw(14) << "dropout acc" << std::setw(10) << "macro f1" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : report.rows) {
    os << std::left << std::setw(18) << r.variant << std::right << std::setw(8) << r.seed << std::setw(8) << r.epochs
       << std::setw(12) << r.clean_accuracy << std::setw(14) << r.corrupted_accuracy << std::setw(10) << r.macro_f1
       << '\n';
  }
  return os.str();
}

json ablations_to_json(const AblationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"variant", r.variant},
                    {"augmented", r.augmented},
                    {"residual", r.residual},
                    {"seed", r.seed},
                    {"epochs", r.epochs},
                    {"clean_accuracy", r.clean_accuracy},
                    {"corrupted_accuracy", r.corrupted_accuracy},
                    {"macro_f1", r.macro_f1}});
  }
  return {{"ablations", rows}};
}

}  // namespace sanvaad
