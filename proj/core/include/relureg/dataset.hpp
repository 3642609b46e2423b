#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "relureg/numerics.hpp"

// Synthetic data: isotropic marginals, exact ReLU labels, adversarial
// corruption models, CSV persistence with a JSON provenance sidecar.

namespace relureg {

struct MarginalSpec {
  enum class Kind { gaussian, uniform_ball_isotropic, laplace_product_isotropic };
  Kind kind = Kind::gaussian;
  int d = 1;
};

struct LabelModel {
  enum class Kind { clean, bounded_additive, zeroing_band, fraction_adversarial };
  Kind kind = Kind::clean;
  double rho = 0.0;  // corrupted fraction
  double b = 0.0;    // additive magnitude
  double a = 0.0;    // zeroing band half-width
  // clamp floor for corrupted labels: 0 by default, -1 opens the range to
  // [-1,1] for surrogate-only experiments
  double label_lo = 0.0;
};

struct Provenance {
  MarginalSpec marginal;
  LabelModel labels;
  Vec w_star;
  std::uint64_t seed = 0;
  double opt_ref = 0.0;
};

struct Dataset {
  int d = 0;
  Mat X;  // m x d, one sample per row
  Vec y;  // m
  std::optional<Provenance> provenance;

  Eigen::Index size() const { return X.rows(); }
};

struct GroundTruth {
  Vec w_star;
  double opt_ref = 0.0;
};

// Draws m samples of the marginal, labels them y = ReLU(<w*,x>), then applies
// the corruption model.  Corruption randomness lives on rng.substream(1) so a
// zero-strength corruption model reproduces the clean dataset byte-for-byte.
// opt_ref is the empirical square loss of ReLU_{w*} on the generated set.
std::pair<Dataset, GroundTruth> generate(const MarginalSpec& marginal,
                                         const LabelModel& labels, const Vec& w_star,
                                         Eigen::Index m, Rng& rng);

// Header `x0,...,x{d-1},y`, LF endings, shortest round-trip decimal fields.
// Writes `<path>.meta.json` alongside when the dataset carries provenance.
void write_csv(const Dataset& ds, const std::string& path);
Dataset read_csv(const std::string& path, int d);

// Draws m marginal samples and reports ||empirical mean||_2 and the largest
// absolute entry of (1/m) X'X - I.
std::pair<double, double> isotropy_check(const MarginalSpec& marginal, Eigen::Index m,
                                         Rng& rng);

// Single-sample draw of a marginal; exposed for the probe utilities.
Vec sample_marginal(const MarginalSpec& marginal, Rng& rng);

}  // namespace relureg
