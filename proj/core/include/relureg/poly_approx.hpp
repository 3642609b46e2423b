#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relureg/errors.hpp"

// Univariate polynomial approximation of ReLU on [-s,s]: truncated Chebyshev
// expansion, Remez exchange minimax oracle, grid sup-error measurement, and
// the coefficient-l1 diagnostic.  Coefficients are returned in the monomial
// basis; degrees above 64 are rejected because monomial coefficients stop
// being usable in double precision well before that.

namespace relureg {

inline constexpr int kMaxPolyDegree = 64;

struct UniPoly {
  std::vector<double> coeffs;  // coeffs[i] multiplies t^i
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

double eval_unipoly(const UniPoly& p, double t);  // Horner

// Degree-n truncated Chebyshev expansion of ReLU on [-s,s] (Gauss-Chebyshev
// quadrature, 8192 nodes, mapped from [-1,1] by homogeneity).
UniPoly chebyshev_relu_approx(int n, double s);

// Minimax degree-n approximation of ReLU on [-s,s] via Remez exchange on a
// dense grid.  The exchange runs in the Chebyshev basis internally; only the
// returned polynomial is converted to monomial coefficients.  achieved_error
// is the final sup error over the grid; the error curve must show >= n+2
// alternations within 5% of it or NoConvergence is thrown.
std::pair<UniPoly, double> remez_relu_approx(int n, double s, int iters);

// max |p(t) - ReLU(t)| over `grid` uniform points on [-s,s] (grid >= 1000)
double sup_error_grid(const UniPoly& p, double s, int grid);

double coeff_l1(const UniPoly& p);

// {degree, coeffs: [...]}
std::string unipoly_to_json(const UniPoly& p);

}  // namespace relureg
