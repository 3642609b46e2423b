#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relureg/dataset.hpp"
#include "relureg/surrogate.hpp"

// Localization stage: partition space around the constant-factor direction,
// polynomial regression inside the band, least squares on the positive
// region, zero on the negative region; assembly and evaluation of the
// three-piece hypothesis.

namespace relureg {

struct PtasConfig {
  double eta_accuracy = 0.5;  // target slack, in (0,1]
  double gamma = 0.0;         // band multiplier; 0 = auto: max(sqrt(ln(1/eta)), 0.25)
  int degree = 0;             // band polynomial degree; 0 = auto: min(ceil(1/eta^3), degree_cap)
  int degree_cap = 12;
  double opt_estimate = 0.0;  // explicit opt when > 0; 0 = auto (holdout estimate)
  double epsilon = 1e-6;      // statistical slack; floor for the opt estimate
};

struct RegionPartition {
  Vec w;
  double t = 0.0;
};

struct MultiPoly {
  int d = 0;
  int k = 0;
  // graded-lexicographic order, aligned with monomial_features
  std::vector<std::vector<int>> alphas;
  std::vector<double> coeffs;

  double eval(const Vec& x) const;
};

// How a hypothesis was produced, including any degradation that fired.
struct PtasProvenance {
  PtasConfig config;
  double opt_estimate_used = 0.0;
  double gamma_used = 0.0;
  int degree_used = 0;
  bool degree_capped = false;
  bool empty_plus = false;
  bool empty_minus = false;
  bool empty_band = false;
};

struct PiecewiseHypothesis {
  RegionPartition partition;
  Vec w_plus;
  MultiPoly band_poly;
  PtasProvenance provenance;
};

struct PartitionIndices {
  std::vector<Eigen::Index> minus, band, plus;
};

struct BandFit {
  MultiPoly poly;
  double l1_norm = 0.0;
  bool l1_bound_ok = true;  // l1_norm <= 4^(k+1); diagnostic only
};

// square_loss of the constant-factor model on the holdout, clamped below by
// epsilon_floor; an O(opt)+eps upper bound on the true opt.
double estimate_opt(const Dataset& ds_holdout, const LinearModel& const_factor_model,
                    double epsilon_floor = 1e-6);

// Closed band: |<w,x>| == t classifies into the band.
PartitionIndices partition(const Vec& w, double t, const Dataset& ds);

// Number of monomials of total degree <= k in d variables; SizeOverflow above 1e6.
Eigen::Index monomial_count(int d, int k);

// Exponent multi-indices in graded-lex order (constant first; within a degree
// block, lexicographically descending on (a1..ad): d=2,k=2 gives
// 1, a, b, a^2, ab, b^2).
std::vector<std::vector<int>> monomial_exponents(int d, int k);

Vec monomial_features(const Vec& x, int k);

// Least squares of y on monomial features over the band samples (features are
// standardized internally; minimum-norm on rank deficiency).
BandFit fit_band_poly(const Dataset& ds, const std::vector<Eigen::Index>& idx_band,
                      int k);

// Least squares of y on x over the plus region, projected onto the W-ball.
Vec fit_plus_region(const Dataset& ds, const std::vector<Eigen::Index>& idx_plus,
                    double W = 1.0);

PiecewiseHypothesis ptas_train(const Dataset& ds_train, const Dataset& ds_holdout,
                               const PtasConfig& cfg, const LinearModel& const_model);

double eval_piecewise(const PiecewiseHypothesis& h, const Vec& x);

// mean squared error of the piecewise hypothesis over a dataset
double piecewise_square_loss(const PiecewiseHypothesis& h, const Dataset& ds);

// {w, t, w_plus, band_poly: {d, k, terms: [{alpha, c}]}, provenance}
std::string hypothesis_to_json(const PiecewiseHypothesis& h);

}  // namespace relureg
