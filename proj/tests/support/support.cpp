#include "support.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace sanvaad::testing {

using nlohmann::json;

std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(SANVAAD_FIXTURE_DIR) / name;
}

json load_fixture_json(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return json::parse(in);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(SANVAAD_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Hand random_hand(Rng& rng) {
  std::uniform_real_distribution<double> xy(0.0, 1.0);
  std::uniform_real_distribution<double> z(-0.2, 0.2);
  Hand h;
  for (auto& k : h.keypoints) k = {xy(rng), xy(rng), z(rng)};
  return h;
}

LandmarkFrame random_frame(Rng& rng) {
  LandmarkFrame f;
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: f.left = random_hand(rng); break;
    case 1: f.right = random_hand(rng); break;
    default:
      f.left = random_hand(rng);
      f.right = random_hand(rng);
  }
  return f;
}

std::vector<LabeledSample> random_samples(std::size_t n, Rng& rng) {
  std::vector<LabeledSample> out;
  std::uniform_int_distribution<std::size_t> cls(0, kNumClasses - 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back({random_frame(rng), label_set()[cls(rng)]});
  return out;
}

Hand hand_from_rows(const json& rows) {
  Hand h;
  for (std::size_t i = 0; i < kKeypointsPerHand; ++i) {
    h.keypoints[i] = {rows[i][0].get<double>(), rows[i][1].get<double>(), rows[i][2].get<double>()};
  }
  return h;
}

namespace {

void fill(Matrix& m, Rng& rng, std::normal_distribution<double> dist) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

void fill(RowVector& v, Rng& rng, std::normal_distribution<double> dist) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
}

std::vector<std::vector<bool>> relu_pattern(const Tape& tape) {
  std::vector<std::vector<bool>> out;
  for (const auto& st : tape.stages) {
    std::vector<bool> signs(static_cast<std::size_t>(st.pre.size()));
    for (Eigen::Index i = 0; i < st.pre.size(); ++i) signs[static_cast<std::size_t>(i)] = st.pre.data()[i] > 0.0;
    out.push_back(std::move(signs));
  }
  return out;
}

}  // namespace

constexpr double kEntryFloor = 1e-6;

GradCheckResult gradient_check(std::uint64_t seed, double h) {
  NetworkSpec spec;
  spec.hidden_width = 16;
  spec.compression_width = 16;
  spec.residual_blocks = 2;
  ResidualMlpModel model = init_model(spec, seed);

  Rng rng = make_rng(seed, 77);
  for (std::size_t s = 0; s < model.params.stages.size(); ++s) {
    auto& st = model.params.stages[s];
    const double fan_in = static_cast<double>(st.dense.weight.rows());
    fill(st.dense.weight, rng, std::normal_distribution<double>(0.0, std::sqrt(2.0 / fan_in)));
    fill(st.dense.bias, rng, std::normal_distribution<double>(0.0, 0.1));
    fill(st.norm.gamma, rng, std::normal_distribution<double>(1.0, 0.2));
    fill(st.norm.beta, rng, std::normal_distribution<double>(0.0, 0.2));
  }
  fill(model.params.output.weight, rng, std::normal_distribution<double>(0.0, 0.3));
  fill(model.params.output.bias, rng, std::normal_distribution<double>(0.0, 0.1));

  const Eigen::Index batch = 8;
  Matrix x(batch, static_cast<Eigen::Index>(spec.input_dim));
  fill(x, rng, std::normal_distribution<double>(0.0, 1.0));
  Matrix y = Matrix::Zero(batch, static_cast<Eigen::Index>(spec.num_classes));
  std::uniform_int_distribution<Eigen::Index> cls(0, static_cast<Eigen::Index>(spec.num_classes) - 1);
  for (Eigen::Index i = 0; i < batch; ++i) y(i, cls(rng)) = 1.0;

  const Tape base = forward_train(model, x, rng);
  const std::vector<Matrix> masks = base.masks();
  const auto base_pattern = relu_pattern(base);
  Parameters analytic = backward(model, base, y);

  auto params = model.params.views();
  auto grads = analytic.views();
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0, worst_entry = 0.0;
    auto values = params[k].values();
    auto g = grads[k].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const Tape plus = forward_train(model, x, masks);
      values[i] = original - h;
      const Tape minus = forward_train(model, x, masks);
      values[i] = original;
      if (relu_pattern(plus) != base_pattern || relu_pattern(minus) != base_pattern) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (cross_entropy(plus.logits, y) - cross_entropy(minus.logits, y)) / (2.0 * h);
      diff_sq += (numeric - g[i]) * (numeric - g[i]);
      analytic_sq += g[i] * g[i];
      numeric_sq += numeric * numeric;
      const double scale = std::max({std::abs(numeric), std::abs(g[i]), kEntryFloor});
      worst_entry = std::max(worst_entry, std::abs(numeric - g[i]) / scale);
      ++result.checked;
    }
    const double denom = std::sqrt(std::max(analytic_sq, numeric_sq));
    const double rel = denom > 0.0 ? std::sqrt(diff_sq) / denom : 0.0;
    result.per_tensor[params[k].name] = rel;
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_tensor = params[k].name;
    }
    result.max_entry_rel_error = std::max(result.max_entry_rel_error, worst_entry);
  }
  return result;
}

std::size_t best_phrase_coverage(const std::vector<std::string>& tokens, const PhraseDictionary& dict) {
  std::function<std::size_t(std::size_t)> best = [&](std::size_t i) -> std::size_t {
    if (i >= tokens.size()) return 0;
    std::size_t top = best(i + 1);
    std::string key;
    for (std::size_t j = i; j < tokens.size(); ++j) {
      key += (j > i ? " " : "") + tokens[j];
      if (dict.find(key) != nullptr) top = std::max(top, (j - i + 1) + best(j + 1));
    }
    return top;
  };
  return best(0);
}

std::size_t plan_coverage(const SignPlan& plan) {
  std::size_t covered = 0;
  for (const auto& item : plan.items) {
    if (const auto* g = std::get_if<GifItem>(&item)) {
      std::istringstream words(g->source_phrase);
      std::string w;
      while (words >> w) ++covered;
    }
  }
  return covered;
}

}  // namespace sanvaad::testing
