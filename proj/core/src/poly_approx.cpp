#include "relureg/poly_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "json.hpp"

namespace relureg {

namespace {

double relu(double t) { return t > 0.0 ? t : 0.0; }

// Clenshaw evaluation of sum_j c_j T_j(x)
double clenshaw(const std::vector<double>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c.size(); j-- > 1;) {
    const double b0 = 2.0 * x * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

// Monomial coefficients (in t) of sum_j c_j T_j(t/s).
std::vector<double> cheb_to_monomial(const std::vector<double>& c, double s) {
  const std::size_t n = c.size() - 1;
  std::vector<double> mono(n + 1, 0.0);
  std::vector<double> tprev{1.0};       // T_0
  std::vector<double> tcur{0.0, 1.0};   // T_1
  mono[0] += c[0] * tprev[0];
  if (n >= 1)
    for (std::size_t i = 0; i < tcur.size(); ++i) mono[i] += c[1] * tcur[i];
  for (std::size_t j = 2; j <= n; ++j) {
    std::vector<double> tnext(j + 1, 0.0);
    for (std::size_t i = 0; i < tcur.size(); ++i) tnext[i + 1] += 2.0 * tcur[i];
    for (std::size_t i = 0; i < tprev.size(); ++i) tnext[i] -= tprev[i];
    for (std::size_t i = 0; i < tnext.size(); ++i) mono[i] += c[j] * tnext[i];
    tprev = std::move(tcur);
    tcur = std::move(tnext);
  }
  double scale = 1.0;
  for (std::size_t i = 0; i <= n; ++i, scale /= s) mono[i] *= scale;
  return mono;
}

void check_degree(int n, const char* op) {
  if (n < 1) throw InvalidSpec(std::string(op) + ": degree must be >= 1");
  if (n > kMaxPolyDegree)
    throw DegreeOverflow(std::string(op) + ": degree " + std::to_string(n) +
                         " exceeds cap " + std::to_string(kMaxPolyDegree));
}

}  // namespace

double eval_unipoly(const UniPoly& p, double t) {
  double acc = 0.0;
  for (std::size_t i = p.coeffs.size(); i-- > 0;) acc = acc * t + p.coeffs[i];
  return acc;
}

UniPoly chebyshev_relu_approx(int n, double s) {
  check_degree(n, "chebyshev_relu_approx");
  if (!(s > 0.0)) throw InvalidSpec("chebyshev_relu_approx: s must be positive");

  constexpr int N = 8192;  // Gauss-Chebyshev nodes
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  constexpr double pi = 3.14159265358979323846;
  for (int k = 0; k < N; ++k) {
    const double theta = pi * (k + 0.5) / N;
    const double f = relu(std::cos(theta));
    for (int j = 0; j <= n; ++j) c[static_cast<std::size_t>(j)] += f * std::cos(j * theta);
  }
  for (int j = 0; j <= n; ++j)
    c[static_cast<std::size_t>(j)] *= (j == 0 ? 1.0 : 2.0) / N;

  // ReLU(t) on [-s,s] equals s*ReLU(t/s): scale the [-1,1] expansion by s
  for (double& cj : c) cj *= s;
  return {cheb_to_monomial(c, s)};
}

namespace {

struct RemezState {
  std::vector<double> cheb;  // coefficients in T_j(t/s)
  double E = 0.0;            // signed reference amplitude
};

RemezState solve_reference(const std::vector<double>& ref, int n, double s) {
  const int rows = static_cast<int>(ref.size());  // n + 2
  Eigen::MatrixXd A(rows, rows);
  Eigen::VectorXd b(rows);
  double sign = 1.0;
  for (int i = 0; i < rows; ++i, sign = -sign) {
    const double x = ref[static_cast<std::size_t>(i)] / s;
    double tp = 1.0, tc = x;
    A(i, 0) = 1.0;
    if (n >= 1) A(i, 1) = x;
    for (int j = 2; j <= n; ++j) {
      const double tn = 2.0 * x * tc - tp;
      tp = tc;
      tc = tn;
      A(i, j) = tc;
    }
    A(i, rows - 1) = sign;
    b(i) = relu(ref[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
  RemezState st;
  st.cheb.assign(sol.data(), sol.data() + n + 1);
  st.E = sol(rows - 1);
  return st;
}

// One extremum per maximal run of constant error sign; candidates alternate
// in sign by construction.
std::vector<int> alternation_candidates(const std::vector<double>& err) {
  std::vector<int> cand;
  int run_best = 0;
  double run_sign = err[0] >= 0.0 ? 1.0 : -1.0;
  for (int i = 1; i < static_cast<int>(err.size()); ++i) {
    const double sgn = err[static_cast<std::size_t>(i)] >= 0.0 ? 1.0 : -1.0;
    if (sgn != run_sign) {
      cand.push_back(run_best);
      run_best = i;
      run_sign = sgn;
    } else if (std::abs(err[static_cast<std::size_t>(i)]) >
               std::abs(err[static_cast<std::size_t>(run_best)])) {
      run_best = i;
    }
  }
  cand.push_back(run_best);
  return cand;
}

// Thin an alternating candidate list down to n+2 entries while preserving
// alternation: drop the weaker endpoint when one point must go, otherwise the
// weakest adjacent pair.
void thin_candidates(std::vector<int>& cand, const std::vector<double>& err, int keep) {
  auto mag = [&](int idx) { return std::abs(err[static_cast<std::size_t>(cand[static_cast<std::size_t>(idx)])]); };
  while (static_cast<int>(cand.size()) > keep) {
    const int k = static_cast<int>(cand.size());
    if (k - keep == 1) {
      if (mag(0) <= mag(k - 1))
        cand.erase(cand.begin());
      else
        cand.pop_back();
      continue;
    }
    int drop = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < k; ++i) {
      const double pair_mag = std::max(mag(i), mag(i + 1));
      if (pair_mag < best) {
        best = pair_mag;
        drop = i;
      }
    }
    cand.erase(cand.begin() + drop, cand.begin() + drop + 2);
  }
}

}  // namespace

std::pair<UniPoly, double> remez_relu_approx(int n, double s, int iters) {
  check_degree(n, "remez_relu_approx");
  if (!(s > 0.0)) throw InvalidSpec("remez_relu_approx: s must be positive");
  if (iters < 10) throw InvalidSpec("remez_relu_approx: iters must be >= 10");

  constexpr int G = 8193;  // odd => grid contains 0, the kink
  std::vector<double> grid(G);
  for (int i = 0; i < G; ++i)
    grid[static_cast<std::size_t>(i)] = -s + 2.0 * s * i / (G - 1);

  // initial reference: extrema of T_{n+1}, snapped to the grid
  std::vector<int> ref_idx;
  constexpr double pi = 3.14159265358979323846;
  for (int i = 0; i <= n + 1; ++i) {
    const double t = -std::cos(pi * i / (n + 1));  // ascending in [-1,1]
    int idx = static_cast<int>(std::lround((t + 1.0) * (G - 1) / 2.0));
    idx = std::clamp(idx, 0, G - 1);
    if (!ref_idx.empty() && idx <= ref_idx.back()) idx = ref_idx.back() + 1;
    ref_idx.push_back(idx);
  }

  RemezState st;
  std::vector<double> err(G);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> ref(ref_idx.size());
    for (std::size_t i = 0; i < ref_idx.size(); ++i)
      ref[i] = grid[static_cast<std::size_t>(ref_idx[i])];
    st = solve_reference(ref, n, s);

    for (int i = 0; i < G; ++i) {
      const double t = grid[static_cast<std::size_t>(i)];
      err[static_cast<std::size_t>(i)] = clenshaw(st.cheb, t / s) - relu(t);
    }

    std::vector<int> cand = alternation_candidates(err);
    if (static_cast<int>(cand.size()) >= n + 2) {
      thin_candidates(cand, err, n + 2);
      if (cand == ref_idx) break;  // discrete equioscillation reached
      ref_idx = std::move(cand);
      continue;
    }

    // Fewer sign runs than n+2 (the reference solve can degenerate to E ~ 0
    // on a symmetric reference): single-point exchange with the worst grid
    // point, keeping the reference sorted and sign-alternating.
    int worst = 0;
    for (int i = 1; i < G; ++i)
      if (std::abs(err[static_cast<std::size_t>(i)]) >
          std::abs(err[static_cast<std::size_t>(worst)]))
        worst = i;
    if (std::find(ref_idx.begin(), ref_idx.end(), worst) != ref_idx.end())
      break;  // no progress possible on this grid
    const auto sign_at = [&](int idx) {
      return err[static_cast<std::size_t>(idx)] >= 0.0 ? 1 : -1;
    };
    const int sw = sign_at(worst);
    const auto hi = std::upper_bound(ref_idx.begin(), ref_idx.end(), worst);
    const int right = static_cast<int>(hi - ref_idx.begin());
    const int left = right - 1;
    if (left < 0) {
      if (sign_at(ref_idx.front()) == sw) {
        ref_idx.front() = worst;
      } else {
        ref_idx.insert(ref_idx.begin(), worst);
        ref_idx.pop_back();
      }
    } else if (right == static_cast<int>(ref_idx.size())) {
      if (sign_at(ref_idx.back()) == sw) {
        ref_idx.back() = worst;
      } else {
        ref_idx.push_back(worst);
        ref_idx.erase(ref_idx.begin());
      }
    } else if (sign_at(ref_idx[static_cast<std::size_t>(left)]) == sw) {
      ref_idx[static_cast<std::size_t>(left)] = worst;
    } else {
      ref_idx[static_cast<std::size_t>(right)] = worst;
    }
  }

  double achieved = 0.0;
  for (double e : err) achieved = std::max(achieved, std::abs(e));

  // count alternating extrema within 5% of the achieved amplitude
  int strong = 0;
  for (int idx : alternation_candidates(err))
    if (std::abs(err[static_cast<std::size_t>(idx)]) >= 0.95 * achieved) ++strong;
  if (strong < n + 2)
    throw NoConvergence("remez_relu_approx: only " + std::to_string(strong) +
                        " alternations of " + std::to_string(n + 2) +
                        " required after " + std::to_string(iters) + " iterations");

  return {UniPoly{cheb_to_monomial(st.cheb, s)}, achieved};
}

double sup_error_grid(const UniPoly& p, double s, int grid) {
  if (grid < 1000) throw InvalidSpec("sup_error_grid: grid must be >= 1000");
  if (!(s > 0.0)) throw InvalidSpec("sup_error_grid: s must be positive");
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = -s + 2.0 * s * i / (grid - 1);
    worst = std::max(worst, std::abs(eval_unipoly(p, t) - relu(t)));
  }
  return worst;
}

double coeff_l1(const UniPoly& p) {
  double acc = 0.0;
  for (double c : p.coeffs) acc += std::abs(c);
  return acc;
}

std::string unipoly_to_json(const UniPoly& p) {
  nlohmann::json j;
  j["degree"] = p.degree();
  j["coeffs"] = p.coeffs;
  return j.dump(2);
}

}  // namespace relureg
