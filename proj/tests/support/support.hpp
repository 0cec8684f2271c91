#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sanvaad/landmarks.hpp"
#include "sanvaad/model.hpp"
#include "sanvaad/random.hpp"
#include "sanvaad/signplan.hpp"

namespace sanvaad::testing {

std::filesystem::path fixture_path(const std::string& name);
nlohmann::json load_fixture_json(const std::string& name);

/// Scratch directory under the build tree, emptied on creation.
std::filesystem::path scratch_dir(const std::string& name);

Hand random_hand(Rng& rng);
/// Random frame with at least one hand.
LandmarkFrame random_frame(Rng& rng);
std::vector<LabeledSample> random_samples(std::size_t n, Rng& rng);

Hand hand_from_rows(const nlohmann::json& rows);

/// Per tensor: ||analytic - numeric|| / max(||analytic||, ||numeric||).
/// Entries whose perturbation flips a ReLU are left out and counted.
struct GradCheckResult {
  double max_rel_error = 0.0;  // over tensors
  double max_entry_rel_error = 0.0;  // elementwise, denominators floored at 1e-6
  std::string worst_tensor;
  std::map<std::string, double> per_tensor;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// Width-16, 2-block miniature, batch 8, fixed dropout masks, all
/// parameters randomized. Compares every analytic gradient entry with a
/// central difference.
GradCheckResult gradient_check(std::uint64_t seed, double h = 1e-4);

/// Tokens covered by dictionary phrases in the best segmentation, by
/// exhaustive search.
std::size_t best_phrase_coverage(const std::vector<std::string>& tokens, const PhraseDictionary& dict);
/// Tokens covered by the GIF items of a plan.
std::size_t plan_coverage(const SignPlan& plan);

}  // namespace sanvaad::testing
