#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relureg/dataset.hpp"
#include "relureg/numerics.hpp"

// Losses, Chow parameters, gradient descent on the surrogate loss (projected
// and projection-free variants), min-gradient candidate selection, and Monte
// Carlo probes for strong convexity / Chow learnability.

namespace relureg {

struct Activation {
  enum class Kind { relu, identity, leaky_relu };
  Kind kind = Kind::relu;
  double alpha = 0.01;  // leaky slope, only meaningful for leaky_relu

  static Activation relu() { return {Kind::relu, 0.0}; }
  static Activation identity() { return {Kind::identity, 0.0}; }
  static Activation leaky_relu(double alpha);

  // sigma: non-decreasing, 1-Lipschitz
  double operator()(double a) const {
    switch (kind) {
      case Kind::relu: return a > 0.0 ? a : 0.0;
      case Kind::identity: return a;
      case Kind::leaky_relu: return a >= 0.0 ? a : alpha * a;
    }
    return 0.0;
  }

  // anti-derivative with antiderivative(0) == 0
  double antiderivative(double a) const {
    switch (kind) {
      case Kind::relu: return a > 0.0 ? 0.5 * a * a : 0.0;
      case Kind::identity: return 0.5 * a * a;
      case Kind::leaky_relu: return a >= 0.0 ? 0.5 * a * a : 0.5 * alpha * a * a;
    }
    return 0.0;
  }

  std::string name() const;
};

struct LinearModel {
  Vec w;
  Activation activation;

  double predict(const Vec& x) const { return activation(w.dot(x)); }
};

struct SolverConfig {
  double step_size = 0.0625;
  double weight_bound = 1.0;   // W
  Eigen::Index max_iters = 0;  // T
  double grad_tol = 0.0;
  bool use_projection = true;
  Eigen::Index record_stride = 0;  // 0 = auto: 1 if T <= 1e4, else ceil(T/1e4)
};

struct TrainTrace {
  std::vector<Vec> iterates;       // recorded (possibly thinned) iterates
  std::vector<double> grad_norms;  // in-sample gradient norm per recorded iterate
  LinearModel final;
  std::int64_t selected_iter = -1;  // set by select_min_gradient
  SolverConfig config;
  double wall_time_ms = 0.0;
};

double square_loss(const LinearModel& model, const Dataset& ds);
double surrogate_loss(const LinearModel& model, const Dataset& ds);

// (1/m) sum (sigma(<w,x_i>) - y_i) x_i == chow_model - chow_true
Vec surrogate_gradient(const LinearModel& model, const Dataset& ds);

Vec chow_true(const Dataset& ds);                            // (1/m) sum y_i x_i
Vec chow_model(const LinearModel& model, const Dataset& ds); // (1/m) sum sigma(<w,x_i>) x_i
double chow_distance(const Vec& a, const Vec& b);

// Gradient descent on the empirical surrogate loss from w = 0.  With
// use_projection, every step is projected onto the W-ball (requires
// step_size < 1/4); without it the step must satisfy step_size <= 1/16.
TrainTrace pgd_train(const Dataset& ds, const Activation& activation,
                     const SolverConfig& cfg, Rng& rng);

// Recorded iterate with the smallest gradient norm on the fresh batch (ties ->
// earliest).  Stores the winning index in trace.selected_iter.
LinearModel select_min_gradient(TrainTrace& trace, const Dataset& fresh);

struct ProbeResult {
  double value = 0.0;  // mu_hat (min ratio) or beta_hat (max ratio)
  std::vector<double> per_pair;
};

// Both probes draw `pairs` couples (u,v) from the W-ball with ||u-v|| >=
// min_sep (a violating couple is redrawn whole), then share one m-sample Monte
// Carlo batch.  Identical (activation, marginal, m, pairs, W, min_sep, seed)
// therefore means identical pairs across the two probes.
ProbeResult strong_convexity_probe(const Activation& activation,
                                   const MarginalSpec& marginal, Eigen::Index m,
                                   int pairs, double W, double min_sep, Rng& rng);
ProbeResult chow_learnability_probe(const Activation& activation,
                                    const MarginalSpec& marginal, Eigen::Index m,
                                    int pairs, double W, double min_sep, Rng& rng);

// {config, grad_norms, selected_iter, final_w, wall_time_ms}
std::string trace_to_json(const TrainTrace& trace);

}  // namespace relureg
