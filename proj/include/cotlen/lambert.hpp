#pragma once

namespace cotlen::lambert {

// Real branches of the Lambert W function (solutions w of w * e^w = x).
// Principal: x >= -1/e, w >= -1.  MinusOne: -1/e <= x < 0, w <= -1.
enum class Branch { Principal, MinusOne };

struct BranchedWResult {
  double value;
  Branch branch;
  double residual;  // |w * e^w - x| achieved
};

// Halley iteration with branch-specific initial guesses (series near the
// branch point, logarithmic asymptotics elsewhere). Relative residual
// tolerance 1e-12, iteration cap 100. Inputs within 1e-15 of -1/e map to
// exactly -1 on both branches.
//
// Throws std::domain_error outside the branch domain and ConvergenceError
// if the iteration cap is hit. Pure function, thread-safe.
BranchedWResult solve(double x, Branch branch);

double w0(double x);
double wm1(double x);

inline constexpr double kBranchPoint = -0.36787944117144233;  // -1/e

}  // namespace cotlen::lambert
