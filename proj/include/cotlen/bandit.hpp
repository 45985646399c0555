#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cotlen/theory.hpp"

namespace cotlen::bandit {

// Stateless k-armed bandit over candidate reasoning-chain lengths. Arm i is
// a length N_i whose pull succeeds with probability accuracies[i].
struct ArmSet {
  std::vector<long long> lengths;
  Eigen::VectorXd accuracies;

  // Validates: matching sizes, k >= 1, distinct lengths, accuracies in (0, 1].
  // (The convergence guarantee assumes the open interval; accuracy exactly 1
  // is admitted for degenerate all-optimal configurations.)
  ArmSet(std::vector<long long> lengths, Eigen::VectorXd accuracies);

  Eigen::Index size() const { return accuracies.size(); }
};

// Softmax policy parameterized by logits theta.
struct Policy {
  Eigen::VectorXd theta;

  static Policy uniform(Eigen::Index arms) { return {Eigen::VectorXd::Zero(arms)}; }
};

// Numerically stable softmax (max-logit subtraction); sums to 1.
Eigen::VectorXd softmax_policy(const Policy& policy);

// J(theta) = sum_i pi_i A_i.
double expected_reward(const ArmSet& arms, const Policy& policy);

// Replicator/logit gradient: component i is pi_i (A_i - J). Sums to zero.
Eigen::VectorXd exact_gradient(const ArmSet& arms, const Policy& policy);

struct TrajectoryRecord {
  long long step;
  Eigen::VectorXd probabilities;
  double expected_reward;
  double lyapunov;  // -ln(mass on the argmax-accuracy arms)
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  bool converged = false;
  Eigen::Index winner = 0;  // highest-probability arm at termination
  Policy final_policy{Eigen::VectorXd()};
};

struct AscentOptions {
  double eta = 0.5;             // must satisfy eta < 1/max(A)
  long long max_steps = 50000;
  double tol = 1e-2;            // converged when best-arm mass >= 1 - tol
  long long record_stride = 1;
};

// Deterministic gradient ascent theta += eta * grad. The Lyapunov value
// -ln(pi_best) is non-increasing along the path for legal step sizes.
// Non-convergence within max_steps is reported in the trajectory, not thrown.
Trajectory gradient_ascent(const ArmSet& arms, const Policy& start, const AscentOptions& opt);

struct ReinforceOptions {
  double eta = 0.12;
  long long episodes = 20000;
  long long batch = 16;
  std::uint64_t seed = 0;
  double tol = 1e-2;
  long long record_stride = 1;
  // Step size ramps linearly from 0 to eta over the first
  // warmup_fraction * episodes updates (0 disables the ramp). Early small
  // steps average out estimator noise before the policy commits.
  double warmup_fraction = 0.5;
};

// Baseline-free batch REINFORCE: per episode, `batch` arms are drawn from
// the current policy, rewards are Bernoulli(A_i), and the update averages
// r * (e_arm - pi) over the batch. Deterministic given seed.
Trajectory reinforce_simulate(const ArmSet& arms, const Policy& start,
                              const ReinforceOptions& opt);

// Arms with lengths `lengths` and accuracies proportional to the shape
// accuracy A(N), rescaled so the best arm equals `peak`. For exact ascent
// the rescale is equivalent to running the raw accuracies with step size
// eta * max(A_shape)/peak (both sides of the proof's eta < 1/max(A) cap);
// for REINFORCE it keeps Bernoulli reward rates away from zero. Throws if
// any length is infeasible (accuracy 0).
ArmSet arms_from_theory(const theory::TheorySetting& s, const std::vector<long long>& lengths,
                        double peak = 0.9);

// Arms whose accuracy is within tol of the maximum (the "optimal face"
// reported when several maximizers tie).
std::vector<Eigen::Index> near_optimal_arms(const ArmSet& arms, double tol = 1e-12);

// CSV: step,arm_index,arm_length,probability,expected_reward,lyapunov
// (long format: one row per arm per recorded step).
void write_trajectory_csv(std::ostream& out, const ArmSet& arms, const Trajectory& traj);

}  // namespace cotlen::bandit
