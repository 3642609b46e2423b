#include "relureg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace relureg {

namespace {

double relu(double a) { return a > 0.0 ? a : 0.0; }

const char* marginal_name(MarginalSpec::Kind k) {
  switch (k) {
    case MarginalSpec::Kind::gaussian: return "gaussian";
    case MarginalSpec::Kind::uniform_ball_isotropic: return "uniform_ball_isotropic";
    case MarginalSpec::Kind::laplace_product_isotropic:
      return "laplace_product_isotropic";
  }
  return "?";
}

const char* label_name(LabelModel::Kind k) {
  switch (k) {
    case LabelModel::Kind::clean: return "clean";
    case LabelModel::Kind::bounded_additive: return "bounded_additive";
    case LabelModel::Kind::zeroing_band: return "zeroing_band";
    case LabelModel::Kind::fraction_adversarial: return "fraction_adversarial";
  }
  return "?";
}

void append_shortest(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void validate(const MarginalSpec& marginal, const LabelModel& labels,
              const Vec& w_star, Eigen::Index m) {
  if (marginal.d <= 0) throw InvalidSpec("generate: marginal.d must be positive");
  if (m < 1) throw InvalidSpec("generate: m must be >= 1");
  if (w_star.size() != marginal.d)
    throw DimensionMismatch("generate: w_star has dimension " +
                            std::to_string(w_star.size()) + ", marginal.d is " +
                            std::to_string(marginal.d));
  if (w_star.norm() > 1.0 + 1e-12)
    throw InvalidSpec("generate: ||w_star|| must be <= 1");
  if (labels.rho < 0.0 || labels.rho > 1.0)
    throw InvalidSpec("generate: labels.rho must lie in [0,1]");
  if (labels.b < 0.0) throw InvalidSpec("generate: labels.b must be >= 0");
  if (labels.a < 0.0) throw InvalidSpec("generate: labels.a must be >= 0");
  if (labels.label_lo != 0.0 && labels.label_lo != -1.0)
    throw InvalidSpec("generate: labels.label_lo must be 0 or -1");
}

}  // namespace

Vec sample_marginal(const MarginalSpec& marginal, Rng& rng) {
  switch (marginal.kind) {
    case MarginalSpec::Kind::gaussian:
      return gaussian_vec(marginal.d, rng);
    case MarginalSpec::Kind::uniform_ball_isotropic:
      return uniform_ball_vec(marginal.d, std::sqrt(marginal.d + 2.0), rng);
    case MarginalSpec::Kind::laplace_product_isotropic:
      return laplace_vec(marginal.d, 1.0 / std::sqrt(2.0), rng);
  }
  throw InvalidSpec("sample_marginal: unknown marginal kind");
}

std::pair<Dataset, GroundTruth> generate(const MarginalSpec& marginal,
                                         const LabelModel& labels, const Vec& w_star,
                                         Eigen::Index m, Rng& rng) {
  validate(marginal, labels, w_star, m);
  const int d = marginal.d;

  Dataset ds;
  ds.d = d;
  ds.X.resize(m, d);
  ds.y.resize(m);
  const std::uint64_t seed = rng.seed();

  for (Eigen::Index i = 0; i < m; ++i) ds.X.row(i) = sample_marginal(marginal, rng);

  const Vec z = ds.X * w_star;
  for (Eigen::Index i = 0; i < m; ++i) ds.y[i] = relu(z[i]);

  const double hi = 1.0;
  const double lo = labels.label_lo;
  auto push = [&](Eigen::Index i) {
    // push toward the clamp boundary opposite ReLU_{w*}(x)
    const double xi = z[i] > 0.0 ? -labels.b : labels.b;
    ds.y[i] = std::clamp(relu(z[i]) + xi, lo, hi);
  };

  switch (labels.kind) {
    case LabelModel::Kind::clean:
      break;
    case LabelModel::Kind::zeroing_band:
      for (Eigen::Index i = 0; i < m; ++i)
        if (z[i] > 0.0 && z[i] < labels.a) ds.y[i] = 0.0;
      break;
    case LabelModel::Kind::bounded_additive: {
      const auto count = std::min<Eigen::Index>(
          m, static_cast<Eigen::Index>(std::llround(labels.rho * static_cast<double>(m))));
      std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(z[a]) > std::abs(z[b]);
      });
      for (Eigen::Index r = 0; r < count; ++r) push(order[static_cast<std::size_t>(r)]);
      break;
    }
    case LabelModel::Kind::fraction_adversarial: {
      Rng corrupt = rng.substream(1);
      for (Eigen::Index i = 0; i < m; ++i)
        if (corrupt.uniform01() < labels.rho) push(i);
      break;
    }
  }

  GroundTruth gt;
  gt.w_star = w_star;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = relu(z[i]) - ds.y[i];
    sq += r * r;
  }
  gt.opt_ref = sq / static_cast<double>(m);

  ds.provenance = Provenance{marginal, labels, w_star, seed, gt.opt_ref};
  return {std::move(ds), std::move(gt)};
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_csv: cannot open " + path);

  std::string buf;
  for (int j = 0; j < ds.d; ++j) {
    buf += 'x';
    buf += std::to_string(j);
    buf += ',';
  }
  buf += "y\n";
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.d; ++j) {
      append_shortest(buf, ds.X(i, j));
      buf += ',';
    }
    append_shortest(buf, ds.y[i]);
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_csv: write failed for " + path);

  if (ds.provenance) {
    const Provenance& p = *ds.provenance;
    nlohmann::json meta;
    meta["marginal"] = {{"kind", marginal_name(p.marginal.kind)}, {"d", p.marginal.d}};
    meta["labels"] = {{"kind", label_name(p.labels.kind)},
                      {"rho", p.labels.rho},
                      {"b", p.labels.b},
                      {"a", p.labels.a},
                      {"label_lo", p.labels.label_lo}};
    meta["seed"] = p.seed;
    meta["w_star"] = std::vector<double>(p.w_star.data(), p.w_star.data() + p.w_star.size());
    meta["m"] = static_cast<std::int64_t>(ds.size());
    meta["opt_ref"] = p.opt_ref;
    std::ofstream mout(path + ".meta.json", std::ios::binary);
    if (!mout) throw IoError("write_csv: cannot open " + path + ".meta.json");
    mout << meta.dump(2) << '\n';
  }
}

Dataset read_csv(const std::string& path, int d) {
  if (d <= 0) throw InvalidSpec("read_csv: d must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("read_csv: empty file " + path, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  long ncols = line.empty() ? 0 : 1 + static_cast<long>(std::count(line.begin(), line.end(), ','));
  if (ncols != d + 1)
    throw DimensionMismatch("read_csv: header has " + std::to_string(ncols) +
                            " columns, expected " + std::to_string(d + 1));

  std::vector<double> xs;
  std::vector<double> ys;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (int j = 0; j <= d; ++j) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{})
        throw ParseError("read_csv: bad numeric field in " + path, lineno);
      if (j < d) {
        if (res.ptr == end || *res.ptr != ',')
          throw ParseError("read_csv: expected " + std::to_string(d + 1) +
                               " fields in " + path,
                           lineno);
        p = res.ptr + 1;
        xs.push_back(v);
      } else {
        if (res.ptr != end)
          throw ParseError("read_csv: trailing characters in " + path, lineno);
        ys.push_back(v);
      }
    }
  }
  if (ys.empty()) throw ParseError("read_csv: no sample rows in " + path, lineno);

  Dataset ds;
  ds.d = d;
  const Eigen::Index m = static_cast<Eigen::Index>(ys.size());
  ds.X.resize(m, d);
  ds.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) ds.X(i, j) = xs[static_cast<std::size_t>(i) * d + j];
    ds.y[i] = ys[static_cast<std::size_t>(i)];
  }
  return ds;
}

std::pair<double, double> isotropy_check(const MarginalSpec& marginal, Eigen::Index m,
                                         Rng& rng) {
  if (marginal.d <= 0) throw InvalidSpec("isotropy_check: marginal.d must be positive");
  if (m < 10 * static_cast<Eigen::Index>(marginal.d) * marginal.d)
    throw InvalidSpec("isotropy_check: m must be >= 10*d^2");
  const int d = marginal.d;
  Vec mean = Vec::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec x = sample_marginal(marginal, rng);
    mean += x;
    second.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  mean /= static_cast<double>(m);
  second /= static_cast<double>(m);
  Eigen::MatrixXd cov = second.selfadjointView<Eigen::Lower>();
  cov -= Eigen::MatrixXd::Identity(d, d);
  return {mean.norm(), cov.cwiseAbs().maxCoeff()};
}

}  // namespace relureg
