#include "relureg/numerics.hpp"

#include <cmath>

namespace relureg {

Vec least_squares(const Mat& A, const Vec& b) {
  if (A.rows() != b.size())
    throw DimensionMismatch("least_squares: A has " + std::to_string(A.rows()) +
                            " rows but b has " + std::to_string(b.size()));
  if (A.rows() == 0 || A.cols() == 0)
    throw DimensionMismatch("least_squares: empty system");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(b);
}

Vec project_ball(const Vec& v, double W) {
  if (W <= 0.0) throw InvalidSpec("project_ball: W must be positive");
  const double n = v.norm();
  if (n <= W) return v;
  return v * (W / n);
}

Vec gaussian_vec(int d, Rng& rng) {
  if (d <= 0) throw InvalidSpec("gaussian_vec: d must be positive");
  Vec x(d);
  int i = 0;
  for (; i + 1 < d; i += 2) rng.normal_pair(x[i], x[i + 1]);
  if (i < d) {
    double a, discard;
    rng.normal_pair(a, discard);
    x[i] = a;
  }
  return x;
}

Vec uniform_ball_vec(int d, double radius, Rng& rng) {
  if (d <= 0) throw InvalidSpec("uniform_ball_vec: d must be positive");
  if (radius <= 0.0) throw InvalidSpec("uniform_ball_vec: radius must be positive");
  Vec dir = gaussian_vec(d, rng);
  double n = dir.norm();
  while (n < 1e-12) {  // astronomically unlikely; keeps the draw well-defined
    dir = gaussian_vec(d, rng);
    n = dir.norm();
  }
  const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
  return dir * (r / n);
}

Vec laplace_vec(int d, double scale, Rng& rng) {
  if (d <= 0) throw InvalidSpec("laplace_vec: d must be positive");
  if (scale <= 0.0) throw InvalidSpec("laplace_vec: scale must be positive");
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.laplace(scale);
  return x;
}

}  // namespace relureg
