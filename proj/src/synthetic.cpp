#include "sanvaad/synthetic.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sanvaad/error.hpp"
#include "sanvaad/random.hpp"

namespace sanvaad {

namespace {

using Coords = std::vector<double>;

LandmarkFrame frame_from_coords(const Coords& c, bool two_hands) {
  LandmarkFrame frame;
  auto fill = [&](std::size_t offset) {
    Hand h;
    for (std::size_t i = 0; i < kKeypointsPerHand; ++i) {
      h.keypoints[i] = Keypoint{c[offset + 3 * i], c[offset + 3 * i + 1], c[offset + 3 * i + 2]};
    }
    return h;
  };
  frame.left = fill(0);
  if (two_hands) frame.right = fill(kCoordsPerHand);
  return frame;
}

double euclidean(const Coords& a, const Coords& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

SyntheticDataset make_blob_dataset(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.classes > kNumClasses) {
    throw Error(ErrorCode::invalid_argument, "synthetic class count must lie in [2, 35]");
  }
  if (spec.per_class < 1 || !(spec.sigma > 0.0) || !(spec.separation > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "synthetic spec needs per_class >= 1, sigma > 0, separation > 0");
  }
  const std::size_t dims = spec.two_hands ? kCoordFeatures : kCoordsPerHand;
  Rng rng = make_rng(spec.seed, 0x5E7);
  std::uniform_real_distribution<double> xy(0.2, 0.8);
  std::uniform_real_distribution<double> depth(-0.05, 0.05);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Coords base(dims);
  for (std::size_t i = 0; i < dims; ++i) base[i] = (i % 3 == 2) ? depth(rng) : xy(rng);

  std::vector<Coords> directions(spec.classes, Coords(dims));
  for (auto& d : directions) {
    double norm = 0.0;
    for (auto& v : d) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : d) v /= norm;
  }
  double min_dir = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.classes; ++a) {
    for (std::size_t b = a + 1; b < spec.classes; ++b) min_dir = std::min(min_dir, euclidean(directions[a], directions[b]));
  }
  const double radius = spec.separation * spec.sigma / min_dir;

  SyntheticDataset out;
  std::vector<Coords> centers(spec.classes, Coords(dims));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t i = 0; i < dims; ++i) centers[c][i] = base[i] + radius * directions[c][i];
    out.centers.push_back(frame_from_coords(centers[c], spec.two_hands));
  }
  out.min_center_distance = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.classes; ++a) {
    for (std::size_t b = a + 1; b < spec.classes; ++b) {
      out.min_center_distance = std::min(out.min_center_distance, euclidean(centers[a], centers[b]));
    }
  }

  std::normal_distribution<double> noise(0.0, spec.sigma);
  out.samples.reserve(spec.classes * spec.per_class);
  Coords point(dims);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      for (std::size_t i = 0; i < dims; ++i) point[i] = centers[c][i] + noise(rng);
      out.samples.push_back(LabeledSample{frame_from_coords(point, spec.two_hands), label_set()[c]});
    }
  }
  return out;
}

}  // namespace sanvaad
