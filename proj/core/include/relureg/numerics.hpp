#pragma once

#include <Eigen/Dense>

#include "relureg/errors.hpp"
#include "relureg/rng.hpp"

// Shared numeric kernels: dense vectors/matrices (Eigen-backed), minimum-norm
// least squares, Euclidean ball projection, and the distribution samplers the
// data generators build on.

namespace relureg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Minimum-norm least-squares solution of A x ~ b via SVD; singular values
// below 1e-10 * sigma_max are treated as zero.
Vec least_squares(const Mat& A, const Vec& b);

// Euclidean projection onto the closed ball of radius W centered at origin.
// Exact no-op (bit-for-bit) when the point is already inside.
Vec project_ball(const Vec& v, double W);

// d iid standard normals drawn pairwise from rng (see rng.hpp for the pinned
// stream layout).
Vec gaussian_vec(int d, Rng& rng);

// Uniform draw from the ball of radius `radius`: normalized Gaussian direction
// scaled by radius * U^(1/d).
Vec uniform_ball_vec(int d, double radius, Rng& rng);

// d iid Laplace(0, scale) coordinates.
Vec laplace_vec(int d, double scale, Rng& rng);

}  // namespace relureg
