#include "cotlen/theory.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "cotlen/io.hpp"
#include "cotlen/lambert.hpp"
#include "cotlen/rng.hpp"

namespace cotlen::theory {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSigmaCap = 0.9;
}  // namespace

TheorySetting::TheorySetting(double T_, double C_, double M_) : T(T_), C(C_), M(M_) {
  if (!(T > 0.0)) throw std::invalid_argument("TheorySetting: T must be positive");
  if (!(M > 0.0)) throw std::invalid_argument("TheorySetting: M must be positive");
  if (!(C > T)) throw std::invalid_argument("TheorySetting: C must exceed T");
  if (T / C > kSigmaCap + 1e-12) {
    throw std::invalid_argument("TheorySetting: sigma = T/C = " + std::to_string(T / C) +
                                " exceeds the 0.9 training-regime cap");
  }
}

long long TheorySetting::min_feasible_steps() const {
  auto n = static_cast<long long>(std::floor(T / M)) + 1;
  while (n * M <= T) ++n;  // guards the exact-division edge
  return n;
}

double sub_question_error(const TheorySetting& s) { return s.sigma(); }

double sub_answer_error(const TheorySetting& s, double steps) {
  if (!(steps > 0.0)) throw std::invalid_argument("sub_answer_error: steps must be positive");
  const double e = s.T / (steps * s.M);
  return e >= 1.0 ? 1.0 : e;
}

double subtask_accuracy(double ops_per_step, double sigma) {
  if (!(ops_per_step > 0.0)) throw std::invalid_argument("subtask_accuracy: t must be positive");
  if (sigma < 0.0 || sigma >= 1.0) throw std::invalid_argument("subtask_accuracy: sigma outside [0,1)");
  return std::pow(1.0 - sigma, 2.0 * ops_per_step + 1.0);
}

double log_final_accuracy(const TheorySetting& s, double steps, bool include_alpha) {
  if (!(steps > 0.0)) return kNegInf;
  if (steps * s.M <= s.T) return kNegInf;
  const double log_one_minus_sigma = std::log1p(-s.sigma());
  double lg = steps * (log_one_minus_sigma + std::log1p(-s.T / (steps * s.M)));
  if (include_alpha) lg += 2.0 * s.T * log_one_minus_sigma;
  return lg;
}

double final_accuracy(const TheorySetting& s, double steps, bool include_alpha) {
  const double lg = log_final_accuracy(s, steps, include_alpha);
  return lg == kNegInf ? 0.0 : std::exp(lg);
}

double optimal_length_closed_form(const TheorySetting& s) {
  const double z = lambert::wm1(-(1.0 - s.sigma()) / std::exp(1.0));
  return s.T * z / (s.M * (z + 1.0));
}

long long optimal_length_discrete(const TheorySetting& s, long long n_min, long long n_max) {
  if (n_min > n_max) throw std::invalid_argument("optimal_length_discrete: empty range");
  if (n_min < 1) throw std::invalid_argument("optimal_length_discrete: n_min must be >= 1");
  long long best = n_min;
  double best_lg = log_final_accuracy(s, static_cast<double>(n_min));
  for (long long n = n_min + 1; n <= n_max; ++n) {
    const double lg = log_final_accuracy(s, static_cast<double>(n));
    if (lg > best_lg) {
      best_lg = lg;
      best = n;
    }
  }
  return best;
}

double optimal_step_size(const TheorySetting& s) {
  const double z = lambert::wm1(-(1.0 - s.sigma()) / std::exp(1.0));
  return s.M * (1.0 + 1.0 / z);
}

double general_lower_bound(double sigma, const std::function<double(double)>& error_inverse) {
  const double scale = std::exp(2.0) * (1.0 - sigma);
  if (scale <= 1.0) {
    throw std::domain_error("general_lower_bound: inapplicable, e^2 (1 - sigma) <= 1");
  }
  return error_inverse(1.0 - 1.0 / scale);
}

double linear_lower_bound(const TheorySetting& s) {
  return general_lower_bound(s.sigma(), [&s](double y) { return s.T / (s.M * y); });
}

bool test_point_negative(const TheorySetting& s) {
  if (s.sigma() >= kSigmaCap) {
    throw std::invalid_argument("test_point_negative: requires sigma < 0.9 strictly");
  }
  const double x0 = (std::sqrt(s.T * (s.C - s.T)) + s.T) / s.M;
  const double e = s.T / (s.M * x0);
  const double f = std::log1p(-e) + e / (1.0 - e) + std::log1p(-s.sigma());
  return f < 0.0;
}

double beta_one_minus_moment_exact(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta moment: shapes must be positive");
  if (n < 1) throw std::invalid_argument("beta moment: n must be positive");
  double prod = 1.0;
  for (int i = 0; i < n; ++i) prod *= (b + i) / (a + b + i);
  return prod;
}

double beta_moment_upper_bound(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta moment: shapes must be positive");
  if (n < 1) throw std::invalid_argument("beta moment: n must be positive");
  return std::pow(1.0 - a / (a + b + n - 1.0), n);
}

StochasticErrorParams StochasticErrorParams::from(const TheorySetting& s, double steps) {
  if (!(steps * s.M > s.T)) {
    throw std::domain_error("StochasticErrorParams: infeasible, N*M <= T");
  }
  return {s.T, s.C - s.T, s.T, steps * s.M - s.T};
}

double stochastic_accuracy_upper_bound(const TheorySetting& s, long long steps) {
  const auto n = static_cast<double>(steps);
  if (!(n * s.M > s.T)) {
    throw std::domain_error("stochastic_accuracy_upper_bound: infeasible, N*M <= T");
  }
  const double lg = n * (std::log1p(-s.T / (s.C + 2.0 * n - 1.0)) +
                         std::log1p(-s.T / (n * s.M + 2.0 * n - 1.0)));
  return std::exp(lg);
}

McEstimate stochastic_accuracy_mc(const TheorySetting& s, long long steps,
                                  long long samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("stochastic_accuracy_mc: samples must be positive");
  const auto params = StochasticErrorParams::from(s, static_cast<double>(steps));
  rng::Rng r(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (long long k = 0; k < samples; ++k) {
    double prod = 1.0;
    for (long long i = 0; i < steps; ++i) {
      const double sig = r.beta(params.alpha1, params.beta1);
      const double err = r.beta(params.alpha2, params.beta2);
      prod *= (1.0 - err) * (1.0 - sig);
    }
    const double delta = prod - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (prod - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

std::vector<AccuracyCurve> accuracy_sweep(const std::vector<TheorySetting>& settings,
                                          long long n_min, long long n_max) {
  if (settings.empty()) throw std::invalid_argument("accuracy_sweep: no settings");
  if (n_min < 1) throw std::invalid_argument("accuracy_sweep: n_min must be >= 1");
  std::vector<AccuracyCurve> curves;
  curves.reserve(settings.size());
  for (const auto& s : settings) {
    const long long hi = n_max > 0 ? n_max : static_cast<long long>(std::ceil(8.0 * s.T));
    if (n_min > hi) throw std::invalid_argument("accuracy_sweep: empty step range");
    AccuracyCurve curve{s, {}, 0, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()};
    curve.points.reserve(static_cast<std::size_t>(hi - n_min + 1));
    for (long long n = n_min; n <= hi; ++n) {
      curve.points.push_back({n, final_accuracy(s, static_cast<double>(n), true),
                              final_accuracy(s, static_cast<double>(n), false)});
    }
    curve.argmax_steps = optimal_length_discrete(s, n_min, hi);
    curve.n_star_closed = optimal_length_closed_form(s);
    curve.t_star = optimal_step_size(s);
    if (std::exp(2.0) * (1.0 - s.sigma()) > 1.0) {
      curve.n_lb = linear_lower_bound(s);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_sweep_csv(std::ostream& out, const std::vector<AccuracyCurve>& curves) {
  out << "T,C,M,N,accuracy,shape_accuracy,is_argmax,n_star_closed,t_star,n_lb\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << io::g12(c.setting.T) << ',' << io::g12(c.setting.C) << ','
          << io::g12(c.setting.M) << ',' << p.steps << ',' << io::g12(p.accuracy) << ','
          << io::g12(p.shape_accuracy) << ',' << (p.steps == c.argmax_steps ? 1 : 0) << ','
          << io::g12(c.n_star_closed) << ',' << io::g12(c.t_star) << ','
          << io::g12(c.n_lb) << '\n';
    }
  }
}

}  // namespace cotlen::theory
