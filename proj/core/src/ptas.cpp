#include "relureg/ptas.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "json.hpp"
#include "relureg/parallel.hpp"

namespace relureg {

namespace {

void resolve_config(const PtasConfig& cfg, int d, PtasProvenance& prov) {
  if (!(cfg.eta_accuracy > 0.0) || cfg.eta_accuracy > 1.0)
    throw ConfigError("ptas.eta_accuracy must lie in (0,1]");
  if (cfg.gamma < 0.0) throw ConfigError("ptas.gamma must be positive (or 0 for auto)");
  if (cfg.degree < 0) throw ConfigError("ptas.degree must be >= 1 (or 0 for auto)");
  if (cfg.degree_cap < 1) throw ConfigError("ptas.degree_cap must be >= 1");
  if (cfg.opt_estimate < 0.0)
    throw ConfigError("ptas.opt_estimate must be positive (or 0 for auto)");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("ptas.epsilon must be positive");

  prov.config = cfg;
  prov.gamma_used =
      cfg.gamma > 0.0 ? cfg.gamma
                      : std::max(std::sqrt(std::log(1.0 / cfg.eta_accuracy)), 0.25);
  if (cfg.degree > 0) {
    prov.degree_used = cfg.degree;
  } else {
    const double raw = std::ceil(1.0 / std::pow(cfg.eta_accuracy, 3.0));
    prov.degree_used = static_cast<int>(std::min<double>(raw, cfg.degree_cap));
    prov.degree_capped = raw > cfg.degree_cap;
    if (prov.degree_capped)
      std::cerr << "[ptas] note: band degree capped at " << cfg.degree_cap
                << " (eta_accuracy " << cfg.eta_accuracy << " asks for " << raw
                << ")\n";
  }
  (void)d;
}

void exponents_rec(int d, int remaining, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == d - 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur.push_back(a);
    exponents_rec(d, remaining - a, cur, out);
    cur.pop_back();
  }
}

}  // namespace

double MultiPoly::eval(const Vec& x) const {
  if (x.size() != d)
    throw DimensionMismatch("MultiPoly::eval: x has dimension " +
                            std::to_string(x.size()) + ", expected " + std::to_string(d));
  double acc = 0.0;
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    double term = coeffs[t];
    if (term == 0.0) continue;
    const std::vector<int>& a = alphas[t];
    for (int j = 0; j < d; ++j)
      for (int e = 0; e < a[static_cast<std::size_t>(j)]; ++e) term *= x[j];
    acc += term;
  }
  return acc;
}

double estimate_opt(const Dataset& ds_holdout, const LinearModel& const_factor_model,
                    double epsilon_floor) {
  return std::max(square_loss(const_factor_model, ds_holdout), epsilon_floor);
}

PartitionIndices partition(const Vec& w, double t, const Dataset& ds) {
  if (w.norm() == 0.0) throw ZeroDirection("partition: direction w is the zero vector");
  if (!(t > 0.0)) throw InvalidSpec("partition: threshold t must be positive");
  if (w.size() != ds.d)
    throw DimensionMismatch("partition: w dimension " + std::to_string(w.size()) +
                            " vs dataset " + std::to_string(ds.d));
  const Vec z = ds.X * w;
  PartitionIndices out;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] > t)
      out.plus.push_back(i);
    else if (z[i] < -t)
      out.minus.push_back(i);
    else
      out.band.push_back(i);
  }
  return out;
}

Eigen::Index monomial_count(int d, int k) {
  if (d <= 0) throw InvalidSpec("monomial_count: d must be positive");
  if (k < 0) throw InvalidSpec("monomial_count: k must be >= 0");
  // C(d+k, k) with an early overflow bail-out
  double count = 1.0;
  for (int j = 1; j <= k; ++j) {
    count *= static_cast<double>(d + j) / static_cast<double>(j);
    if (count > 2e6)
      throw SizeOverflow("monomial_count: C(d+k,k) exceeds 1e6 for d=" +
                         std::to_string(d) + ", k=" + std::to_string(k));
  }
  const auto n = static_cast<Eigen::Index>(std::llround(count));
  if (n > 1000000)
    throw SizeOverflow("monomial_count: C(d+k,k) exceeds 1e6 for d=" +
                       std::to_string(d) + ", k=" + std::to_string(k));
  return n;
}

std::vector<std::vector<int>> monomial_exponents(int d, int k) {
  monomial_count(d, k);  // validates and guards the size
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  for (int g = 0; g <= k; ++g) exponents_rec(d, g, cur, out);
  return out;
}

Vec monomial_features(const Vec& x, int k) {
  const int d = static_cast<int>(x.size());
  const auto alphas = monomial_exponents(d, k);
  Vec f(static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    double v = 1.0;
    for (int j = 0; j < d; ++j)
      for (int e = 0; e < alphas[t][static_cast<std::size_t>(j)]; ++e) v *= x[j];
    f[static_cast<Eigen::Index>(t)] = v;
  }
  return f;
}

BandFit fit_band_poly(const Dataset& ds, const std::vector<Eigen::Index>& idx_band,
                      int k) {
  if (idx_band.empty()) throw EmptyRegion("fit_band_poly: band region is empty");
  const auto alphas = monomial_exponents(ds.d, k);
  const auto p = static_cast<Eigen::Index>(alphas.size());
  const auto n = static_cast<Eigen::Index>(idx_band.size());

  Mat F(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    F.row(r) = monomial_features(ds.X.row(idx_band[static_cast<std::size_t>(r)]), k);
  Vec yb(n);
  for (Eigen::Index r = 0; r < n; ++r) yb[r] = ds.y[idx_band[static_cast<std::size_t>(r)]];

  // standardize the non-constant columns, solve, then map coefficients back
  Vec mu = Vec::Zero(p), scale = Vec::Ones(p);
  for (Eigen::Index j = 1; j < p; ++j) {
    mu[j] = F.col(j).mean();
    const double var = (F.col(j).array() - mu[j]).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    scale[j] = sd > 1e-300 ? sd : 1.0;
    F.col(j) = (F.col(j).array() - mu[j]) / scale[j];
  }
  const Vec c_std = least_squares(F, yb);

  Vec c(p);
  double intercept_shift = 0.0;
  for (Eigen::Index j = 1; j < p; ++j) {
    c[j] = c_std[j] / scale[j];
    intercept_shift += c_std[j] * mu[j] / scale[j];
  }
  c[0] = c_std[0] - intercept_shift;

  BandFit fit;
  fit.poly.d = ds.d;
  fit.poly.k = k;
  fit.poly.alphas = alphas;
  fit.poly.coeffs.assign(c.data(), c.data() + p);
  fit.l1_norm = c.cwiseAbs().sum();
  fit.l1_bound_ok = fit.l1_norm <= std::pow(4.0, k + 1);
  return fit;
}

Vec fit_plus_region(const Dataset& ds, const std::vector<Eigen::Index>& idx_plus,
                    double W) {
  if (idx_plus.empty()) throw EmptyRegion("fit_plus_region: plus region is empty");
  const auto n = static_cast<Eigen::Index>(idx_plus.size());
  Mat Xp(n, ds.d);
  Vec yp(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Xp.row(r) = ds.X.row(idx_plus[static_cast<std::size_t>(r)]);
    yp[r] = ds.y[idx_plus[static_cast<std::size_t>(r)]];
  }
  return project_ball(least_squares(Xp, yp), W);
}

PiecewiseHypothesis ptas_train(const Dataset& ds_train, const Dataset& ds_holdout,
                               const PtasConfig& cfg, const LinearModel& const_model) {
  if (ds_train.size() == 0) throw InvalidSpec("ptas_train: training set is empty");
  if (ds_holdout.size() == 0) throw InvalidSpec("ptas_train: holdout set is empty");

  PiecewiseHypothesis h;
  resolve_config(cfg, ds_train.d, h.provenance);

  h.provenance.opt_estimate_used =
      cfg.opt_estimate > 0.0 ? cfg.opt_estimate
                             : estimate_opt(ds_holdout, const_model, cfg.epsilon);

  h.partition.w = const_model.w;
  h.partition.t = h.provenance.gamma_used * std::sqrt(h.provenance.opt_estimate_used);

  const PartitionIndices idx = partition(h.partition.w, h.partition.t, ds_train);
  h.provenance.empty_plus = idx.plus.empty();
  h.provenance.empty_minus = idx.minus.empty();
  h.provenance.empty_band = idx.band.empty();

  h.w_plus = idx.plus.empty() ? Vec::Zero(ds_train.d).eval()
                              : fit_plus_region(ds_train, idx.plus, 1.0);

  if (!idx.band.empty()) {
    h.band_poly = fit_band_poly(ds_train, idx.band, h.provenance.degree_used).poly;
  } else {
    // no band samples: fall back to a two-piece hypothesis by extending the
    // linear part across the band
    std::cerr << "[ptas] note: band region is empty; hypothesis degrades to "
                 "linear/zero\n";
    h.band_poly.d = ds_train.d;
    h.band_poly.k = 1;
    h.band_poly.alphas = monomial_exponents(ds_train.d, 1);
    h.band_poly.coeffs.assign(static_cast<std::size_t>(ds_train.d) + 1, 0.0);
    for (int j = 0; j < ds_train.d; ++j)
      h.band_poly.coeffs[static_cast<std::size_t>(j) + 1] = h.w_plus[j];
  }
  return h;
}

double eval_piecewise(const PiecewiseHypothesis& h, const Vec& x) {
  if (x.size() != h.partition.w.size())
    throw DimensionMismatch("eval_piecewise: x has dimension " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(h.partition.w.size()));
  const double z = h.partition.w.dot(x);
  if (z > h.partition.t) return h.w_plus.dot(x);
  if (z < -h.partition.t) return 0.0;
  return h.band_poly.eval(x);
}

double piecewise_square_loss(const PiecewiseHypothesis& h, const Dataset& ds) {
  if (ds.size() == 0) throw InvalidSpec("piecewise_square_loss: dataset is empty");
  const double s = blocked_sum(
      static_cast<std::size_t>(ds.size()), [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto r = static_cast<Eigen::Index>(i);
          const double e = eval_piecewise(h, ds.X.row(r)) - ds.y[r];
          acc += e * e;
        }
        return acc;
      });
  return s / static_cast<double>(ds.size());
}

std::string hypothesis_to_json(const PiecewiseHypothesis& h) {
  nlohmann::json j;
  j["w"] = std::vector<double>(h.partition.w.data(),
                               h.partition.w.data() + h.partition.w.size());
  j["t"] = h.partition.t;
  j["w_plus"] = std::vector<double>(h.w_plus.data(), h.w_plus.data() + h.w_plus.size());
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t t = 0; t < h.band_poly.alphas.size(); ++t)
    terms.push_back({{"alpha", h.band_poly.alphas[t]}, {"c", h.band_poly.coeffs[t]}});
  j["band_poly"] = {{"d", h.band_poly.d}, {"k", h.band_poly.k}, {"terms", terms}};
  j["provenance"] = {
      {"eta_accuracy", h.provenance.config.eta_accuracy},
      {"gamma", h.provenance.gamma_used},
      {"degree", h.provenance.degree_used},
      {"degree_cap", h.provenance.config.degree_cap},
      {"degree_capped", h.provenance.degree_capped},
      {"opt_estimate_used", h.provenance.opt_estimate_used},
      {"epsilon", h.provenance.config.epsilon},
      {"empty_plus", h.provenance.empty_plus},
      {"empty_minus", h.provenance.empty_minus},
      {"empty_band", h.provenance.empty_band},
  };
  return j.dump(2);
}

}  // namespace relureg
