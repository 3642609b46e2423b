#include "relureg/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "relureg/parallel.hpp"

namespace relureg {

namespace {

void check_dims(const LinearModel& model, const Dataset& ds, const char* op) {
  if (ds.size() == 0) throw InvalidSpec(std::string(op) + ": dataset is empty");
  if (model.w.size() != ds.d)
    throw DimensionMismatch(std::string(op) + ": model dimension " +
                            std::to_string(model.w.size()) + " vs dataset " +
                            std::to_string(ds.d));
}

// Per-block partial of (1/m) X^T r, combined in block order.
Vec blocked_xt_r(const Mat& X, const Vec& r) {
  const std::size_t m = static_cast<std::size_t>(X.rows());
  const std::size_t nblocks = (m + kReductionBlock - 1) / kReductionBlock;
  Eigen::MatrixXd partials = Eigen::MatrixXd::Zero(X.cols(), static_cast<Eigen::Index>(nblocks));
  for_each_block(m, [&](std::size_t lo, std::size_t hi, std::size_t b) {
    const auto n = static_cast<Eigen::Index>(hi - lo);
    partials.col(static_cast<Eigen::Index>(b)).noalias() =
        X.middleRows(static_cast<Eigen::Index>(lo), n).transpose() *
        r.segment(static_cast<Eigen::Index>(lo), n);
  });
  Vec out = Vec::Zero(X.cols());
  for (Eigen::Index b = 0; b < partials.cols(); ++b) out += partials.col(b);
  return out / static_cast<double>(m);
}

Vec gradient_from_margin(const Mat& X, const Vec& z, const Vec& y,
                         const Activation& act) {
  Vec r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = act(z[i]) - y[i];
  return blocked_xt_r(X, r);
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.step_size > 0.0) || !(cfg.step_size < 0.25))
    throw ConfigError("solver.step_size must lie in (0, 1/4)");
  if (!cfg.use_projection && cfg.step_size > 0.0625)
    throw ConfigError(
        "solver.step_size must be <= 1/16 when use_projection is false");
  if (!(cfg.weight_bound > 0.0)) throw ConfigError("solver.weight_bound must be positive");
  if (cfg.max_iters < 0) throw ConfigError("solver.max_iters must be >= 0");
  if (cfg.grad_tol < 0.0) throw ConfigError("solver.grad_tol must be >= 0");
  if (cfg.record_stride < 0) throw ConfigError("solver.record_stride must be >= 0");
}

struct ProbePairs {
  std::vector<Vec> u, v;
  Mat X;
};

ProbePairs draw_probe_inputs(const MarginalSpec& marginal, Eigen::Index m, int pairs,
                             double W, double min_sep, Rng& rng) {
  if (m < 10000) throw InvalidSpec("probe: m must be >= 1e4");
  if (pairs < 1) throw InvalidSpec("probe: pairs must be >= 1");
  if (!(min_sep > 0.0)) throw InvalidSpec("probe: min_sep must be positive");
  if (!(W > 0.0)) throw InvalidSpec("probe: W must be positive");
  if (marginal.d <= 0) throw InvalidSpec("probe: marginal.d must be positive");

  ProbePairs out;
  out.u.reserve(static_cast<std::size_t>(pairs));
  out.v.reserve(static_cast<std::size_t>(pairs));
  for (int p = 0; p < pairs; ++p) {
    Vec u, v;
    do {
      u = uniform_ball_vec(marginal.d, W, rng);
      v = uniform_ball_vec(marginal.d, W, rng);
    } while ((u - v).norm() < min_sep);
    out.u.push_back(std::move(u));
    out.v.push_back(std::move(v));
  }
  out.X.resize(m, marginal.d);
  for (Eigen::Index i = 0; i < m; ++i) out.X.row(i) = sample_marginal(marginal, rng);
  return out;
}

}  // namespace

Activation Activation::leaky_relu(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InvalidSpec("leaky_relu: alpha must lie in (0,1)");
  return {Kind::leaky_relu, alpha};
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::relu: return "relu";
    case Kind::identity: return "identity";
    case Kind::leaky_relu: return "leaky_relu";
  }
  return "?";
}

double square_loss(const LinearModel& model, const Dataset& ds) {
  check_dims(model, ds, "square_loss");
  const Vec z = ds.X * model.w;
  const double s = blocked_sum(static_cast<std::size_t>(z.size()),
                               [&](std::size_t lo, std::size_t hi) {
                                 double acc = 0.0;
                                 for (std::size_t i = lo; i < hi; ++i) {
                                   const double r =
                                       model.activation(z[static_cast<Eigen::Index>(i)]) -
                                       ds.y[static_cast<Eigen::Index>(i)];
                                   acc += r * r;
                                 }
                                 return acc;
                               });
  return s / static_cast<double>(z.size());
}

double surrogate_loss(const LinearModel& model, const Dataset& ds) {
  check_dims(model, ds, "surrogate_loss");
  const Vec z = ds.X * model.w;
  const double s = blocked_sum(static_cast<std::size_t>(z.size()),
                               [&](std::size_t lo, std::size_t hi) {
                                 double acc = 0.0;
                                 for (std::size_t i = lo; i < hi; ++i) {
                                   const auto k = static_cast<Eigen::Index>(i);
                                   acc += model.activation.antiderivative(z[k]) -
                                          ds.y[k] * z[k];
                                 }
                                 return acc;
                               });
  return s / static_cast<double>(z.size());
}

Vec surrogate_gradient(const LinearModel& model, const Dataset& ds) {
  check_dims(model, ds, "surrogate_gradient");
  const Vec z = ds.X * model.w;
  return gradient_from_margin(ds.X, z, ds.y, model.activation);
}

Vec chow_true(const Dataset& ds) {
  if (ds.size() == 0) throw InvalidSpec("chow_true: dataset is empty");
  return blocked_xt_r(ds.X, ds.y);
}

Vec chow_model(const LinearModel& model, const Dataset& ds) {
  check_dims(model, ds, "chow_model");
  const Vec z = ds.X * model.w;
  Vec s(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) s[i] = model.activation(z[i]);
  return blocked_xt_r(ds.X, s);
}

double chow_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("chow_distance: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  return (a - b).norm();
}

TrainTrace pgd_train(const Dataset& ds, const Activation& activation,
                     const SolverConfig& cfg, Rng& rng) {
  validate_config(cfg);
  if (ds.size() == 0) throw InvalidSpec("pgd_train: dataset is empty");
  (void)rng;  // deterministic full-batch algorithm; kept for interface stability

  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index T = cfg.max_iters;
  const Eigen::Index stride =
      cfg.record_stride > 0 ? cfg.record_stride : (T <= 10000 ? 1 : (T + 9999) / 10000);

  TrainTrace trace;
  trace.config = cfg;
  trace.final.activation = activation;

  Vec w = Vec::Zero(ds.d);
  double best_norm = std::numeric_limits<double>::infinity();
  bool stopped = false;

  auto record = [&](const Vec& wt, double gnorm) {
    trace.iterates.push_back(wt);
    trace.grad_norms.push_back(gnorm);
  };

  for (Eigen::Index t = 0; t < T; ++t) {
    const Vec z = ds.X * w;
    const Vec g = gradient_from_margin(ds.X, z, ds.y, activation);
    const double gnorm = g.norm();
    const bool new_min = gnorm < best_norm;
    if (new_min) best_norm = gnorm;
    if (t % stride == 0 || new_min) record(w, gnorm);
    if (gnorm <= cfg.grad_tol) {
      if (trace.iterates.empty() || trace.iterates.back() != w) record(w, gnorm);
      stopped = true;
      break;
    }
    w -= cfg.step_size * g;
    if (cfg.use_projection) w = project_ball(w, cfg.weight_bound);
  }

  if (!stopped) {
    const Vec z = ds.X * w;
    const Vec g = gradient_from_margin(ds.X, z, ds.y, activation);
    record(w, g.norm());
  }

  trace.final.w = trace.iterates.back();
  trace.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return trace;
}

LinearModel select_min_gradient(TrainTrace& trace, const Dataset& fresh) {
  if (trace.iterates.empty()) throw EmptyTrace("select_min_gradient: no recorded iterates");
  if (fresh.size() == 0) throw InvalidSpec("select_min_gradient: fresh set is empty");

  std::size_t best = 0;
  double best_norm = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    LinearModel cand{trace.iterates[k], trace.final.activation};
    const double gn = surrogate_gradient(cand, fresh).norm();
    if (gn < best_norm) {
      best_norm = gn;
      best = k;
    }
  }
  trace.selected_iter = static_cast<std::int64_t>(best);
  return {trace.iterates[best], trace.final.activation};
}

namespace {

ProbeResult run_probe(const Activation& activation, const MarginalSpec& marginal,
                      Eigen::Index m, int pairs, double W, double min_sep, Rng& rng,
                      bool learnability) {
  const ProbePairs in = draw_probe_inputs(marginal, m, pairs, W, min_sep, rng);
  const double md = static_cast<double>(m);

  ProbeResult res;
  res.per_pair.reserve(static_cast<std::size_t>(pairs));
  res.value = learnability ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();

  Vec a(m);
  for (int p = 0; p < pairs; ++p) {
    const Vec& u = in.u[static_cast<std::size_t>(p)];
    const Vec& v = in.v[static_cast<std::size_t>(p)];
    const Vec zu = in.X * u;
    const Vec zv = in.X * v;
    for (Eigen::Index i = 0; i < m; ++i) a[i] = activation(zu[i]) - activation(zv[i]);

    double ratio;
    if (learnability) {
      const double num = blocked_sum(static_cast<std::size_t>(m),
                                     [&](std::size_t lo, std::size_t hi) {
                                       double acc = 0.0;
                                       for (std::size_t i = lo; i < hi; ++i) {
                                         const auto k = static_cast<Eigen::Index>(i);
                                         acc += a[k] * a[k];
                                       }
                                       return acc;
                                     }) /
                         md;
      const Vec dchow = blocked_xt_r(in.X, a);
      ratio = num / dchow.squaredNorm();
      if (ratio > res.value) res.value = ratio;
    } else {
      const double num = blocked_sum(static_cast<std::size_t>(m),
                                     [&](std::size_t lo, std::size_t hi) {
                                       double acc = 0.0;
                                       for (std::size_t i = lo; i < hi; ++i) {
                                         const auto k = static_cast<Eigen::Index>(i);
                                         acc += a[k] * (zu[k] - zv[k]);
                                       }
                                       return acc;
                                     }) /
                         md;
      ratio = num / (u - v).squaredNorm();
      if (ratio < res.value) res.value = ratio;
    }
    res.per_pair.push_back(ratio);
  }
  return res;
}

}  // namespace

ProbeResult strong_convexity_probe(const Activation& activation,
                                   const MarginalSpec& marginal, Eigen::Index m,
                                   int pairs, double W, double min_sep, Rng& rng) {
  return run_probe(activation, marginal, m, pairs, W, min_sep, rng, false);
}

ProbeResult chow_learnability_probe(const Activation& activation,
                                    const MarginalSpec& marginal, Eigen::Index m,
                                    int pairs, double W, double min_sep, Rng& rng) {
  return run_probe(activation, marginal, m, pairs, W, min_sep, rng, true);
}

std::string trace_to_json(const TrainTrace& trace) {
  nlohmann::json j;
  j["config"] = {{"step_size", trace.config.step_size},
                 {"weight_bound", trace.config.weight_bound},
                 {"max_iters", static_cast<std::int64_t>(trace.config.max_iters)},
                 {"grad_tol", trace.config.grad_tol},
                 {"use_projection", trace.config.use_projection},
                 {"record_stride", static_cast<std::int64_t>(trace.config.record_stride)},
                 {"activation", trace.final.activation.name()},
                 {"leaky_alpha", trace.final.activation.alpha}};
  j["grad_norms"] = trace.grad_norms;
  j["selected_iter"] = trace.selected_iter;
  j["final_w"] = std::vector<double>(trace.final.w.data(),
                                     trace.final.w.data() + trace.final.w.size());
  j["wall_time_ms"] = trace.wall_time_ms;
  return j.dump(2);
}

}  // namespace relureg
