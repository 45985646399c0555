#include "cotlen/bandit.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>

#include "cotlen/io.hpp"
#include "cotlen/rng.hpp"

namespace cotlen::bandit {

namespace {

double argmax_mass(const Eigen::VectorXd& probs, const std::vector<Eigen::Index>& best_arms) {
  double mass = 0.0;
  for (const auto i : best_arms) mass += probs[i];
  return mass;
}

void record(Trajectory& traj, long long step, const Eigen::VectorXd& probs,
            double reward, double lyapunov) {
  traj.records.push_back({step, probs, reward, lyapunov});
}

}  // namespace

ArmSet::ArmSet(std::vector<long long> lengths_, Eigen::VectorXd accuracies_)
    : lengths(std::move(lengths_)), accuracies(std::move(accuracies_)) {
  if (accuracies.size() < 1) throw std::invalid_argument("ArmSet: need at least one arm");
  if (static_cast<Eigen::Index>(lengths.size()) != accuracies.size()) {
    throw std::invalid_argument("ArmSet: lengths/accuracies size mismatch");
  }
  std::set<long long> uniq(lengths.begin(), lengths.end());
  if (uniq.size() != lengths.size()) throw std::invalid_argument("ArmSet: lengths must be distinct");
  for (Eigen::Index i = 0; i < accuracies.size(); ++i) {
    if (!(accuracies[i] > 0.0) || accuracies[i] > 1.0) {
      throw std::invalid_argument("ArmSet: accuracies must lie in (0, 1]");
    }
  }
}

Eigen::VectorXd softmax_policy(const Policy& policy) {
  if (policy.theta.size() < 1) throw std::invalid_argument("softmax_policy: empty logits");
  if (!policy.theta.allFinite()) throw std::invalid_argument("softmax_policy: non-finite logits");
  Eigen::VectorXd e = (policy.theta.array() - policy.theta.maxCoeff()).exp();
  return e / e.sum();
}

double expected_reward(const ArmSet& arms, const Policy& policy) {
  if (policy.theta.size() != arms.size()) {
    throw std::invalid_argument("expected_reward: dimension mismatch");
  }
  return softmax_policy(policy).dot(arms.accuracies);
}

Eigen::VectorXd exact_gradient(const ArmSet& arms, const Policy& policy) {
  if (policy.theta.size() != arms.size()) {
    throw std::invalid_argument("exact_gradient: dimension mismatch");
  }
  const Eigen::VectorXd pi = softmax_policy(policy);
  const double j = pi.dot(arms.accuracies);
  return (pi.array() * (arms.accuracies.array() - j)).matrix();
}

std::vector<Eigen::Index> near_optimal_arms(const ArmSet& arms, double tol) {
  const double top = arms.accuracies.maxCoeff();
  std::vector<Eigen::Index> best;
  for (Eigen::Index i = 0; i < arms.size(); ++i) {
    if (arms.accuracies[i] >= top - tol) best.push_back(i);
  }
  return best;
}

Trajectory gradient_ascent(const ArmSet& arms, const Policy& start, const AscentOptions& opt) {
  if (start.theta.size() != arms.size()) {
    throw std::invalid_argument("gradient_ascent: dimension mismatch");
  }
  if (!(opt.eta > 0.0) || opt.eta >= 1.0 / arms.accuracies.maxCoeff()) {
    throw std::invalid_argument("gradient_ascent: requires 0 < eta < 1/max(A)");
  }
  const auto best_arms = near_optimal_arms(arms);
  Trajectory traj;
  Policy policy = start;
  for (long long step = 0;; ++step) {
    const Eigen::VectorXd pi = softmax_policy(policy);
    const double j = pi.dot(arms.accuracies);
    const double mass = argmax_mass(pi, best_arms);
    const double lyap = -std::log(mass);
    const bool done = mass >= 1.0 - opt.tol;
    if (done || step == opt.max_steps || step % opt.record_stride == 0) {
      record(traj, step, pi, j, lyap);
    }
    if (done || step == opt.max_steps) {
      traj.converged = done;
      Eigen::Index winner;
      pi.maxCoeff(&winner);
      traj.winner = winner;
      traj.final_policy = policy;
      return traj;
    }
    policy.theta += opt.eta * (pi.array() * (arms.accuracies.array() - j)).matrix();
  }
}

Trajectory reinforce_simulate(const ArmSet& arms, const Policy& start,
                              const ReinforceOptions& opt) {
  if (start.theta.size() != arms.size()) {
    throw std::invalid_argument("reinforce_simulate: dimension mismatch");
  }
  if (!(opt.eta > 0.0) || opt.eta >= 1.0 / arms.accuracies.maxCoeff()) {
    throw std::invalid_argument("reinforce_simulate: requires 0 < eta < 1/max(A)");
  }
  if (opt.batch < 1) throw std::invalid_argument("reinforce_simulate: batch must be >= 1");
  const auto best_arms = near_optimal_arms(arms);
  const long long warmup = opt.warmup_fraction > 0.0
                               ? static_cast<long long>(opt.warmup_fraction *
                                                        static_cast<double>(opt.episodes))
                               : 0;
  rng::Rng r(opt.seed);
  Trajectory traj;
  Policy policy = start;
  Eigen::VectorXd grad(arms.size());
  for (long long episode = 0;; ++episode) {
    const Eigen::VectorXd pi = softmax_policy(policy);
    const double j = pi.dot(arms.accuracies);
    const double mass = argmax_mass(pi, best_arms);
    const bool done = episode == opt.episodes;
    if (done || episode % opt.record_stride == 0) {
      record(traj, episode, pi, j, -std::log(mass));
    }
    if (done) {
      traj.converged = mass >= 1.0 - opt.tol;
      Eigen::Index winner;
      pi.maxCoeff(&winner);
      traj.winner = winner;
      traj.final_policy = policy;
      return traj;
    }
    grad.setZero();
    const std::span<const double> probs(pi.data(), static_cast<std::size_t>(pi.size()));
    for (long long b = 0; b < opt.batch; ++b) {
      const auto arm = static_cast<Eigen::Index>(r.categorical(probs));
      if (r.bernoulli(arms.accuracies[arm])) {
        grad -= pi;
        grad[arm] += 1.0;
      }
    }
    grad /= static_cast<double>(opt.batch);
    const double eta = warmup > 0
                           ? opt.eta * std::fmin(1.0, static_cast<double>(episode + 1) /
                                                          static_cast<double>(warmup))
                           : opt.eta;
    policy.theta += eta * grad;
  }
}

ArmSet arms_from_theory(const theory::TheorySetting& s, const std::vector<long long>& lengths,
                        double peak) {
  if (lengths.empty()) throw std::invalid_argument("arms_from_theory: no lengths");
  if (!(peak > 0.0) || peak > 1.0) throw std::invalid_argument("arms_from_theory: peak must be in (0, 1]");
  Eigen::VectorXd shape(static_cast<Eigen::Index>(lengths.size()));
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const double a = theory::final_accuracy(s, static_cast<double>(lengths[i]));
    if (a <= 0.0) {
      throw std::invalid_argument("arms_from_theory: infeasible length N=" +
                                  std::to_string(lengths[i]));
    }
    shape[static_cast<Eigen::Index>(i)] = a;
  }
  return ArmSet(lengths, shape * (peak / shape.maxCoeff()));
}

void write_trajectory_csv(std::ostream& out, const ArmSet& arms, const Trajectory& traj) {
  out << "step,arm_index,arm_length,probability,expected_reward,lyapunov\n";
  for (const auto& rec : traj.records) {
    for (Eigen::Index i = 0; i < rec.probabilities.size(); ++i) {
      out << rec.step << ',' << i << ',' << arms.lengths[static_cast<std::size_t>(i)] << ','
          << io::g12(rec.probabilities[i]) << ',' << io::g12(rec.expected_reward) << ','
          << io::g12(rec.lyapunov) << '\n';
    }
  }
}

}  // namespace cotlen::bandit
