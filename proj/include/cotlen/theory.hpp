#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace cotlen::theory {

// A reasoning task/model configuration:
//   T - total operator count (task difficulty proxy)
//   C - maximum task difficulty in the training regime (sigma = T/C)
//   M - model capability: operators solvable in a single step
// Constructor enforces T > 0, M > 0, C > T and T/C <= 0.9.
struct TheorySetting {
  double T;
  double C;
  double M;

  TheorySetting(double T, double C, double M);

  double sigma() const { return T / C; }
  // Smallest integer step count with a sub-answer error below 1.
  long long min_feasible_steps() const;
};

// sigma(T) = T/C, the per-step sub-question error rate.
double sub_question_error(const TheorySetting& s);

// E(N,M,T) = T/(N*M), capped at 1 when N*M <= T (an error rate is a
// probability; accuracy is exactly 0 there).
double sub_answer_error(const TheorySetting& s, double steps);

// (1 - sigma)^(2t + 1): accuracy of one step that spans t operators.
double subtask_accuracy(double ops_per_step, double sigma);

// A(N) = alpha * [(1 - T/C)(1 - T/(NM))]^N with alpha = (1 - T/C)^(2T).
// Shape mode (include_alpha = false, the default) drops the N-independent
// alpha factor, which can underflow for large T and never moves the argmax.
double final_accuracy(const TheorySetting& s, double steps, bool include_alpha = false);

// ln A(N); -infinity when infeasible. Argmax searches compare in log domain
// so curves survive underflow of the plain value.
double log_final_accuracy(const TheorySetting& s, double steps, bool include_alpha = false);

// N* = T Z / (M (Z + 1)) with Z = W_{-1}(-(1 - T/C)/e). Always > T/M.
double optimal_length_closed_form(const TheorySetting& s);

// Brute-force integer argmax of A(N) over [n_min, n_max], ties to smaller N.
long long optimal_length_discrete(const TheorySetting& s, long long n_min, long long n_max);

// t* = T / N* = M (1 + 1/Z).
double optimal_step_size(const TheorySetting& s);

// N_LB = error_inverse(1 - 1/(e^2 (1 - sigma))). The caller supplies the
// inverse of E in N. Throws std::domain_error when e^2 (1 - sigma) <= 1.
double general_lower_bound(double sigma, const std::function<double(double)>& error_inverse);

// general_lower_bound instantiated with the linear inverse y -> T/(M y).
double linear_lower_bound(const TheorySetting& s);

// Evaluates F(x0) at the test point x0 = (sqrt(T(C-T)) + T)/M, where
//   F(x) = ln(1 - T/(Mx)) + (T/(Mx))/(1 - T/(Mx)) + ln(1 - T/C).
// Requires sigma < 0.9 strictly; expected negative for every legal setting.
bool test_point_negative(const TheorySetting& s);

// E[(1-X)^n] for X ~ Beta(a, b): the exact product prod_{i<n} (b+i)/(a+b+i).
double beta_one_minus_moment_exact(double a, double b, int n);

// Upper bound (1 - a/(a+b+n-1))^n; >= the exact product, tight at n = 1.
double beta_moment_upper_bound(double a, double b, int n);

// Beta shape parameters for the random-error model at a given step count:
// sigma_i ~ Beta(T, C-T), e_i ~ Beta(T, NM-T).
struct StochasticErrorParams {
  double alpha1, beta1, alpha2, beta2;
  static StochasticErrorParams from(const TheorySetting& s, double steps);
};

// A-hat(N) = [(1 - T/(C+2N-1)) (1 - T/(NM+2N-1))]^N, the closed-form upper
// bound on expected accuracy under Beta-distributed per-step errors.
double stochastic_accuracy_upper_bound(const TheorySetting& s, long long steps);

struct McEstimate {
  double mean;
  double std_error;
};

// Monte Carlo estimate of E[prod_i (1-e_i)(1-sigma_i)] with all 2N factors
// sampled independently (Beta via the gamma-ratio construction in rng.hpp).
// Deterministic given seed.
McEstimate stochastic_accuracy_mc(const TheorySetting& s, long long steps,
                                  long long samples, std::uint64_t seed);

struct CurvePoint {
  long long steps;
  double accuracy;        // alpha included
  double shape_accuracy;  // alpha dropped
};

struct AccuracyCurve {
  TheorySetting setting;
  std::vector<CurvePoint> points;  // sorted by steps, strictly increasing
  long long argmax_steps;
  double n_star_closed;
  double t_star;
  double n_lb;  // NaN when the bound is inapplicable
};

// One curve per setting over integer N in [n_min, n_max], with the
// closed-form columns attached. n_max <= 0 selects 8*T per setting.
std::vector<AccuracyCurve> accuracy_sweep(const std::vector<TheorySetting>& settings,
                                          long long n_min, long long n_max);

// CSV: T,C,M,N,accuracy,shape_accuracy,is_argmax,n_star_closed,t_star,n_lb
// (header row; 12 significant digits).
void write_sweep_csv(std::ostream& out, const std::vector<AccuracyCurve>& curves);

}  // namespace cotlen::theory
