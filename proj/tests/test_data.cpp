#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "relureg/dataset.hpp"

using namespace relureg;
namespace fs = std::filesystem;

namespace {

double relu(double a) { return a > 0.0 ? a : 0.0; }

// Simpson quadrature of t^2 * N(0,1) density over [0, a]; oracle for the
// zeroing-band reference loss with w* a unit vector.
double band_loss_oracle(double a) {
  const int n = 2000;
  const double h = a / n;
  auto f = [](double t) {
    return t * t * std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  };
  double s = f(0.0) + f(a);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Vec e1(int d) {
  Vec v = Vec::Zero(d);
  v[0] = 1.0;
  return v;
}

std::string tmp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("quadrature oracle itself is pinned") {
  // frozen values, independently computed; guards against edits to the oracle
  CHECK(band_loss_oracle(0.2) == doctest::Approx(1.05117064401e-3).epsilon(1e-9));
  CHECK(band_loss_oracle(0.3) == doctest::Approx(3.49507755080e-3).epsilon(1e-9));
}

TEST_CASE("clean labels are exactly the relu response") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 4};
  LabelModel labels;  // clean
  Rng rng(101);
  Vec w = gaussian_vec(4, rng);
  w /= std::max(1.0, w.norm());
  auto [ds, gt] = generate(marginal, labels, w, 1000, rng);
  CHECK(gt.opt_ref <= 1e-12);
  const Vec z = ds.X * w;  // same product expression as the generator
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    CHECK(ds.y[i] == relu(z[i]));
    CHECK(ds.y[i] >= 0.0);
  }
  CHECK(ds.provenance.has_value());
  CHECK(ds.provenance->seed == rng.seed());
}

TEST_CASE("zeroing_band matches the quadrature oracle at scale") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 3};
  LabelModel labels;
  labels.kind = LabelModel::Kind::zeroing_band;
  labels.a = 0.2;
  Rng rng(7);
  auto [ds, gt] = generate(marginal, labels, e1(3), 1000000, rng);
  const double oracle = band_loss_oracle(0.2);
  CHECK(gt.opt_ref == doctest::Approx(oracle).epsilon(0.10));
  // labels inside the open band are zeroed, outside untouched
  for (Eigen::Index i = 0; i < 2000; ++i) {
    const double z = ds.X.row(i).dot(e1(3));
    if (z > 0.0 && z < 0.2)
      CHECK(ds.y[i] == 0.0);
    else
      CHECK(ds.y[i] == relu(z));
  }
}

TEST_CASE("fraction_adversarial with rho=0 reproduces clean bytes") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 5};
  Vec w = e1(5) * 0.8;
  LabelModel clean;
  LabelModel frac;
  frac.kind = LabelModel::Kind::fraction_adversarial;
  frac.rho = 0.0;
  frac.b = 0.5;
  Rng r1(55), r2(55);
  auto [dsc, gtc] = generate(marginal, clean, w, 5000, r1);
  auto [dsf, gtf] = generate(marginal, frac, w, 5000, r2);
  CHECK(dsc.X == dsf.X);
  CHECK(dsc.y == dsf.y);
  CHECK(gtc.opt_ref == gtf.opt_ref);
}

TEST_CASE("fraction_adversarial corrupts about a rho fraction") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 3};
  Vec w = e1(3);
  LabelModel frac;
  frac.kind = LabelModel::Kind::fraction_adversarial;
  frac.rho = 0.25;
  frac.b = 0.5;
  Rng rng(99);
  auto [ds, gt] = generate(marginal, frac, w, 40000, rng);
  Eigen::Index changed = 0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const double base = relu(ds.X(i, 0));  // w = e1
    CHECK(ds.y[i] >= 0.0);
    if (ds.y[i] != base) {
      ++changed;
      CHECK(ds.y[i] <= 1.0);  // corrupted labels are clamped
    }
  }
  CHECK(changed > 0.20 * 40000);
  CHECK(changed < 0.30 * 40000);
  CHECK(gt.opt_ref > 0.0);
}

TEST_CASE("bounded_additive clamps corrupted labels and is monotone in rho") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 4};
  Vec w = e1(4) * 0.9;
  auto run = [&](double rho) {
    LabelModel lm;
    lm.kind = LabelModel::Kind::bounded_additive;
    lm.rho = rho;
    lm.b = 0.4;
    Rng rng(1234);
    auto [ds, gt] = generate(marginal, lm, w, 20000, rng);
    Eigen::Index changed = 0;
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
      const double base = relu(0.9 * ds.X(i, 0));
      CHECK(ds.y[i] >= 0.0);
      if (ds.y[i] != base) {
        ++changed;
        CHECK(ds.y[i] <= 1.0);
      }
    }
    // exactly the top-|margin| rho-fraction is pushed
    CHECK(changed == std::llround(rho * 20000));
    return gt.opt_ref;
  };
  const double o0 = run(0.0);
  const double o1 = run(0.1);
  const double o3 = run(0.3);
  CHECK(o0 <= o1);
  CHECK(o1 <= o3);
  CHECK(o0 <= 1e-12);  // rho = 0 is bitwise clean
}

TEST_CASE("generate is deterministic in the seed") {
  MarginalSpec marginal{MarginalSpec::Kind::laplace_product_isotropic, 3};
  LabelModel lm;
  lm.kind = LabelModel::Kind::zeroing_band;
  lm.a = 0.15;
  Vec w = e1(3) * 0.5;
  Rng r1(2024), r2(2024);
  auto [a, ga] = generate(marginal, lm, w, 3000, r1);
  auto [b, gb] = generate(marginal, lm, w, 3000, r2);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(ga.opt_ref == gb.opt_ref);
}

TEST_CASE("generate rejects invalid specs") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 3};
  LabelModel lm;
  Rng rng(1);
  CHECK_THROWS_AS(generate(marginal, lm, e1(3) * 1.5, 100, rng), InvalidSpec);
  CHECK_THROWS_AS(generate(marginal, lm, e1(3), 0, rng), InvalidSpec);
  CHECK_THROWS_AS(generate(marginal, lm, e1(2), 100, rng), DimensionMismatch);
  LabelModel bad;
  bad.kind = LabelModel::Kind::fraction_adversarial;
  bad.rho = 1.5;
  CHECK_THROWS_AS(generate(marginal, bad, e1(3), 100, rng), InvalidSpec);
}

TEST_CASE("csv round trip is bit exact and writes the sidecar") {
  MarginalSpec marginal{MarginalSpec::Kind::gaussian, 3};
  LabelModel lm;
  Rng rng(404);
  Vec w = e1(3) * 0.7;
  auto [ds, gt] = generate(marginal, lm, w, 500, rng);
  const std::string path = tmp_path("relureg_roundtrip.csv");
  write_csv(ds, path);

  const Dataset back = read_csv(path, 3);
  REQUIRE(back.size() == ds.size());
  CHECK(back.X == ds.X);
  CHECK(back.y == ds.y);

  const std::string meta = path + ".meta.json";
  REQUIRE(fs::exists(meta));
  std::ifstream in(meta);
  nlohmann::json j;
  in >> j;
  CHECK(j["seed"] == 404);
  CHECK(j["m"] == 500);
  CHECK(j["w_star"].size() == 3);
  CHECK(j["opt_ref"].get<double>() == gt.opt_ref);
  fs::remove(path);
  fs::remove(meta);
}

TEST_CASE("csv read failure modes") {
  const std::string path = tmp_path("relureg_badcsv.csv");

  {  // header narrower than requested dimension
    std::ofstream out(path);
    out << "x0,x1,y\n0.5,0.25,1\n";
  }
  CHECK_THROWS_AS(read_csv(path, 4), DimensionMismatch);

  {  // empty file
    std::ofstream out(path, std::ios::trunc);
  }
  CHECK_THROWS_AS(read_csv(path, 2), ParseError);
  try {
    read_csv(path, 2);
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }

  {  // unparsable field on line 3
    std::ofstream out(path, std::ios::trunc);
    out << "x0,y\n1.0,2.0\nfoo,3.0\n";
  }
  try {
    read_csv(path, 1);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }

  {  // header only, no samples
    std::ofstream out(path, std::ios::trunc);
    out << "x0,y\n";
  }
  CHECK_THROWS_AS(read_csv(path, 1), ParseError);

  CHECK_THROWS_AS(read_csv(tmp_path("relureg_does_not_exist.csv"), 2), IoError);
  fs::remove(path);
}

TEST_CASE("isotropy holds for all three marginals") {
  Rng rng(77);
  {
    MarginalSpec m{MarginalSpec::Kind::gaussian, 5};
    auto [mean_norm, cov_dev] = isotropy_check(m, 1000000, rng);
    CHECK(mean_norm < 0.02);
    CHECK(cov_dev < 0.02);
  }
  {
    MarginalSpec m{MarginalSpec::Kind::uniform_ball_isotropic, 3};
    auto [mean_norm, cov_dev] = isotropy_check(m, 1000000, rng);
    CHECK(mean_norm < 0.02);
    CHECK(cov_dev < 0.02);  // validates the sqrt(d+2) radius
  }
  {
    MarginalSpec m{MarginalSpec::Kind::laplace_product_isotropic, 4};
    auto [mean_norm, cov_dev] = isotropy_check(m, 1000000, rng);
    CHECK(mean_norm < 0.02);
    CHECK(cov_dev < 0.02);  // validates the 1/sqrt(2) scale
  }
}

TEST_CASE("isotropy_check enforces its sample floor") {
  MarginalSpec m{MarginalSpec::Kind::gaussian, 10};
  Rng rng(1);
  CHECK_THROWS_AS(isotropy_check(m, 999, rng), InvalidSpec);
}
