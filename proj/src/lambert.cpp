#include "cotlen/lambert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cotlen/errors.hpp"

namespace cotlen::lambert {

namespace {

constexpr double kE = 2.718281828459045235;
constexpr int kMaxIterations = 100;
constexpr double kResidualTol = 1e-12;

double residual(double w, double x) { return std::abs(w * std::exp(w) - x); }

// Series about the branch point w = -1: W = -1 + p - p^2/3 + 11 p^3/72 - ...
// with p = +sqrt(2(e x + 1)) on the principal branch, -sqrt on W_{-1}.
double branch_point_series(double x, Branch branch) {
  double p = std::sqrt(2.0 * (kE * x + 1.0));
  if (branch == Branch::MinusOne) p = -p;
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

double initial_guess(double x, Branch branch) {
  if (branch == Branch::Principal) {
    if (x < -0.25) return branch_point_series(x, branch);
    if (x <= kE) return std::log1p(x);  // tracks W0 well on (-0.25, e]
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
  }
  // W_{-1}: series near -1/e, logarithmic asymptotics toward 0-.
  if (x < -0.25) return branch_point_series(x, branch);
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

// Halley iteration on f(w) = w e^w - x, clamped to the branch's half-line so
// iterates cannot hop branches.
double halley(double x, double w, Branch branch) {
  const double tol = kResidualTol * std::fmax(1.0, std::abs(x));
  for (int i = 0; i < kMaxIterations; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= tol) return w;
    const double fp = ew * (w + 1.0);
    const double fpp = ew * (w + 2.0);
    const double step = f / (fp - 0.5 * f * fpp / fp);
    w -= step;
    if (branch == Branch::Principal) {
      if (w < -1.0) w = -1.0 + 1e-12;
    } else {
      if (w > -1.0) w = -1.0 - 1e-12;
    }
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w)) && residual(w, x) <= tol) {
      return w;
    }
  }
  if (residual(w, x) <= tol) return w;
  throw ConvergenceError("lambert: Halley iteration did not converge for x=" +
                         std::to_string(x));
}

}  // namespace

BranchedWResult solve(double x, Branch branch) {
  if (std::abs(x - kBranchPoint) <= 1e-15) {
    return {-1.0, branch, residual(-1.0, x)};
  }
  if (branch == Branch::Principal) {
    if (x < kBranchPoint) {
      throw std::domain_error("lambert_w0: x below -1/e");
    }
  } else {
    if (x < kBranchPoint || x >= 0.0) {
      throw std::domain_error("lambert_wm1: x outside [-1/e, 0)");
    }
  }
  if (branch == Branch::Principal && x == 0.0) return {0.0, branch, 0.0};
  const double w = halley(x, initial_guess(x, branch), branch);
  return {w, branch, residual(w, x)};
}

double w0(double x) { return solve(x, Branch::Principal).value; }

double wm1(double x) { return solve(x, Branch::MinusOne).value; }

}  // namespace cotlen::lambert
