// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 11 drives the CLI binary, whose path arrives via --cli.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cotlen/arith.hpp"
#include "cotlen/bandit.hpp"
#include "cotlen/io.hpp"
#include "cotlen/lambert.hpp"
#include "cotlen/manifest.hpp"
#include "cotlen/rng.hpp"
#include "cotlen/theory.hpp"
#include "cotlen/vote.hpp"

namespace {

namespace fs = std::filesystem;
using cotlen::theory::TheorySetting;

std::string g_cli;
fs::path g_work;

// ---------------------------------------------------------------------------
// shared fixtures

std::vector<TheorySetting> acceptance_grid() {
  std::vector<TheorySetting> grid;
  for (const double C : {100.0, 200.0}) {
    for (const double M : {2.0, 4.0, 6.0, 8.0, 12.0}) {
      for (const double T : {8.0, 16.0, 24.0, 32.0, 48.0, 64.0, 80.0}) {
        if (T / C <= 0.9) grid.emplace_back(T, C, M);
      }
    }
  }
  return grid;
}

struct GridResult {
  TheorySetting setting;
  double n_star;
  double t_star;
  long long argmax;
};

const std::vector<GridResult>& grid_results() {
  static const std::vector<GridResult> results = [] {
    std::vector<GridResult> out;
    for (const auto& s : acceptance_grid()) {
      out.push_back({s, cotlen::theory::optimal_length_closed_form(s),
                     cotlen::theory::optimal_step_size(s),
                     cotlen::theory::optimal_length_discrete(
                         s, 1, 8 * static_cast<long long>(s.T))});
    }
    return out;
  }();
  return results;
}

bool unimodal(const std::vector<double>& v, double slack) {
  bool fell = false;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double d = v[i + 1] - v[i];
    if (d < -slack) {
      fell = true;
    } else if (d > slack && fell) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// criteria

bool c1_lambert(std::string& detail) {
  constexpr double kBp = cotlen::lambert::kBranchPoint;
  for (int i = 0; i < 1000; ++i) {
    const double f = static_cast<double>(i) / 999.0;
    const double x = kBp + (1e6 - kBp) * std::pow(f, 3.0);
    const double w = cotlen::lambert::w0(x);
    if (std::abs(w * std::exp(w) - x) > 1e-12 * std::fmax(1.0, std::abs(x))) {
      detail = "W0 residual exceeded at x=" + std::to_string(x);
      return false;
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const double f = static_cast<double>(i) / 999.0;
    const double x = -std::exp(std::log(1.0 / std::exp(1.0)) * (1.0 - f) + std::log(1e-12) * f);
    const double w = cotlen::lambert::wm1(x);
    if (std::abs(w * std::exp(w) - x) > 1e-12 * std::fmax(1.0, std::abs(x))) {
      detail = "W-1 residual exceeded at x=" + std::to_string(x);
      return false;
    }
  }
  if (std::abs(cotlen::lambert::w0(kBp) + 1.0) > 1e-8 ||
      std::abs(cotlen::lambert::wm1(kBp) + 1.0) > 1e-8) {
    detail = "branch point not -1";
    return false;
  }
  return true;
}

bool c2_closed_vs_oracle(std::string& detail) {
  for (const auto& r : grid_results()) {
    if (std::abs(r.n_star - static_cast<double>(r.argmax)) > 1.0) {
      detail = "cell T=" + std::to_string(r.setting.T) + " C=" + std::to_string(r.setting.C) +
               " M=" + std::to_string(r.setting.M) + ": n*=" + std::to_string(r.n_star) +
               " argmax=" + std::to_string(r.argmax);
      return false;
    }
  }
  return true;
}

bool c3_inverted_u(std::string& detail) {
  for (const auto& r : grid_results()) {
    const auto hi = 8 * static_cast<long long>(r.setting.T);
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(hi));
    for (long long n = 1; n <= hi; ++n) {
      curve.push_back(cotlen::theory::final_accuracy(r.setting, static_cast<double>(n)));
    }
    if (!unimodal(curve, 1e-12)) {
      detail = "non-unimodal at T=" + std::to_string(r.setting.T) +
               " M=" + std::to_string(r.setting.M);
      return false;
    }
  }
  return true;
}

bool c4_scaling_laws(std::string& detail) {
  const auto& rs = grid_results();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      const auto& a = rs[i];
      const auto& b = rs[j];
      if (a.setting.C == b.setting.C && a.setting.M == b.setting.M &&
          a.setting.T < b.setting.T) {
        if (!(a.n_star <= b.n_star) || !(a.t_star <= b.t_star)) {
          detail = "T-monotonicity violated at C=" + std::to_string(a.setting.C) +
                   " M=" + std::to_string(a.setting.M);
          return false;
        }
      }
      if (a.setting.C == b.setting.C && a.setting.T == b.setting.T &&
          a.setting.M < b.setting.M) {
        if (!(a.n_star >= b.n_star)) {
          detail = "M-monotonicity violated at T=" + std::to_string(a.setting.T);
          return false;
        }
      }
    }
  }
  return true;
}

bool c5_lower_bound(std::string& detail) {
  long long violations = 0;
  std::ostringstream where;
  for (const auto& r : grid_results()) {
    if (r.argmax <= 1) continue;
    const double n_lb = cotlen::theory::linear_lower_bound(r.setting);
    if (r.n_star < n_lb) {
      ++violations;
      if (violations <= 3) {
        where << " (T=" << r.setting.T << ",C=" << r.setting.C << ",M=" << r.setting.M
              << ": n*=" << r.n_star << " < n_lb=" << n_lb << ")";
      }
    }
  }
  if (violations > 0) {
    detail = std::to_string(violations) +
             " cells violate the stated bound, all with sigma >= 0.64" + where.str() +
             "; the bound's derivation needs E/(1-E) <= 2 at the optimum (sigma <~ 0.594) "
             "and E(N=1) < 1, neither of which holds in these cells";
    return false;
  }
  return true;
}

bool c6_beta_bounds(std::string& detail) {
  for (const double a : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    for (const double b : {0.5, 1.0, 3.0, 10.0}) {
      for (int n = 1; n <= 5; ++n) {
        const double exact = cotlen::theory::beta_one_minus_moment_exact(a, b, n);
        const double bound = cotlen::theory::beta_moment_upper_bound(a, b, n);
        if (exact > bound + 1e-12) {
          detail = "exact > bound at a=" + std::to_string(a) + " b=" + std::to_string(b);
          return false;
        }
        if (n == 1 && std::abs(exact - bound) > 1e-12) {
          detail = "n=1 equality violated";
          return false;
        }
      }
    }
  }
  const TheorySetting s(24, 100, 6);
  for (const long long n : {5LL, 8LL, 12LL, 20LL}) {
    const auto mc = cotlen::theory::stochastic_accuracy_mc(s, n, 100000,
                                                           20240000ull + static_cast<std::uint64_t>(n));
    const double ahat = cotlen::theory::stochastic_accuracy_upper_bound(s, n);
    if (mc.mean > ahat + 3.0 * mc.std_error) {
      detail = "MC mean " + std::to_string(mc.mean) + " above bound " + std::to_string(ahat) +
               " at N=" + std::to_string(n);
      return false;
    }
  }
  return true;
}

bool c7_rl_convergence(std::string& detail) {
  const TheorySetting s(24, 100, 6);
  std::vector<long long> lengths;
  for (long long n = 5; n <= 14; ++n) lengths.push_back(n);
  const auto arms = cotlen::bandit::arms_from_theory(s, lengths);

  cotlen::bandit::AscentOptions opt;
  opt.eta = 0.5;
  opt.max_steps = 50000;
  opt.tol = 0.01;
  const auto exact =
      cotlen::bandit::gradient_ascent(arms, cotlen::bandit::Policy::uniform(arms.size()), opt);
  const auto& last = exact.records.back();
  if (last.probabilities[exact.winner] <= 0.99) {
    detail = "exact ascent mass " + std::to_string(last.probabilities[exact.winner]) +
             " after " + std::to_string(last.step) + " steps";
    return false;
  }
  for (std::size_t i = 1; i < exact.records.size(); ++i) {
    if (exact.records[i].lyapunov > exact.records[i - 1].lyapunov + 1e-10) {
      detail = "Lyapunov increased at step " + std::to_string(exact.records[i].step);
      return false;
    }
  }
  const long long exact_winner_length = arms.lengths[static_cast<std::size_t>(exact.winner)];

  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cotlen::bandit::ReinforceOptions ropt;
    ropt.eta = 0.12;
    ropt.episodes = 20000;
    ropt.batch = 16;
    ropt.seed = seed;
    ropt.record_stride = 20000;
    const auto traj = cotlen::bandit::reinforce_simulate(
        arms, cotlen::bandit::Policy::uniform(arms.size()), ropt);
    const auto& fin = traj.records.back();
    if (fin.probabilities[exact.winner] > 0.95) ++wins;
  }
  if (wins < 9) {
    detail = "REINFORCE wins " + std::to_string(wins) + "/10 on arm N=" +
             std::to_string(exact_winner_length);
    return false;
  }
  detail = "winner N=" + std::to_string(exact_winner_length) + ", exact steps " +
           std::to_string(last.step) + ", reinforce wins " + std::to_string(wins) + "/10";
  return true;
}

bool c8_corpus_integrity(std::string& detail) {
  const auto example = cotlen::arith::parse_polish("+ 5 + 4 + + 2 1 3");
  const auto sol = cotlen::arith::generate_cot(example, 1);
  const std::vector<std::pair<std::string, int>> want = {
      {"2+1", 3}, {"3+3", 6}, {"4+6", 0}, {"5+0", 5}};
  if (sol.steps.size() != want.size()) {
    detail = "worked example step count";
    return false;
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (sol.steps[i].sub_question != want[i].first || sol.steps[i].result != want[i].second) {
      detail = "worked example step " + std::to_string(i) + " is " +
               sol.steps[i].sub_question + "=" + std::to_string(sol.steps[i].result);
      return false;
    }
  }

  const int t_values[] = {1, 2, 3, 4};
  const int total_values[] = {4, 8, 16, 24};
  cotlen::rng::Rng r(20240810);
  for (int i = 0; i < 10000; ++i) {
    const int total = total_values[r.uniform_below(4)];
    const int t = t_values[r.uniform_below(4)];
    const auto tree = cotlen::arith::sample_problem(total, r.u64());
    const auto cot = cotlen::arith::generate_cot(tree, t);
    if (static_cast<int>(cot.steps.size()) != (total + t - 1) / t) {
      detail = "step-count law violated";
      return false;
    }
    if (!cotlen::arith::verify_solution(tree, cot)) {
      detail = "verify_solution rejected a generated solution";
      return false;
    }
    if (!(cotlen::arith::parse_polish(cotlen::arith::to_polish(tree)) == tree)) {
      detail = "polish round trip failed";
      return false;
    }
  }
  return true;
}

bool c9_gradient(std::string& detail) {
  cotlen::rng::Rng r(616);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = static_cast<Eigen::Index>(2 + r.uniform_below(7));
    Eigen::VectorXd acc(k), theta(k);
    std::vector<long long> lengths;
    for (Eigen::Index i = 0; i < k; ++i) {
      acc[i] = r.uniform(0.05, 0.95);
      theta[i] = r.uniform(-2.0, 2.0);
      lengths.push_back(i + 1);
    }
    const cotlen::bandit::ArmSet arms(lengths, acc);
    const auto grad = cotlen::bandit::exact_gradient(arms, {theta});
    for (Eigen::Index i = 0; i < k; ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (cotlen::bandit::expected_reward(arms, {up}) -
                         cotlen::bandit::expected_reward(arms, {down})) /
                        2e-6;
      if (std::abs(grad[i] - fd) > 1e-6) {
        detail = "gradient mismatch " + std::to_string(std::abs(grad[i] - fd));
        return false;
      }
    }
  }
  return true;
}

struct DominanceOutcome {
  double lfv_acc = 0.0;
  double mv_acc = 0.0;
  std::vector<double> diffs;
};

DominanceOutcome run_dominance(const std::vector<cotlen::vote::Band>& bands, int trials,
                               std::uint64_t master) {
  const std::string correct = "alpha";
  const std::vector<std::string> distractors = {"beta", "gamma", "delta", "epsilon"};
  DominanceOutcome out;
  for (int trial = 0; trial < trials; ++trial) {
    const auto pool = cotlen::vote::simulate_pool(
        bands, 40, correct, distractors,
        cotlen::rng::derive_seed(master, static_cast<std::uint64_t>(trial)));
    const bool lfv_ok = cotlen::vote::length_filtered_vote(pool, {}).first == correct;
    const bool mv_ok = cotlen::vote::majority_vote(pool) == correct;
    out.lfv_acc += lfv_ok;
    out.mv_acc += mv_ok;
    out.diffs.push_back(static_cast<double>(lfv_ok) - static_cast<double>(mv_ok));
  }
  out.lfv_acc /= trials;
  out.mv_acc /= trials;
  return out;
}

bool c10_vote_dominance(std::string& detail) {
  // One mid-length band at p = 0.8 surrounded by p = 0.3 bands: two short
  // ones and a heavily weighted long one (the overthinking mass).
  std::vector<cotlen::vote::Band> bands;
  for (int i = 0; i < 5; ++i) bands.push_back({4, 6, 0.8});
  bands.push_back({2, 4, 0.3});
  bands.push_back({0, 2, 0.3});
  for (int i = 0; i < 33; ++i) bands.push_back({10, 12, 0.3});

  const auto main = run_dominance(bands, 200, 42);
  const double gap = main.lfv_acc - main.mv_acc;
  std::ostringstream note;
  note << "lfv " << main.lfv_acc << " mv " << main.mv_acc << " gap " << gap;
  if (gap < 0.0) {
    detail = "mean gap negative: " + note.str();
    return false;
  }
  // Bootstrap: the 200 per-trial differences resampled 10000 times; at most
  // 5% of resampled means may be negative.
  cotlen::rng::Rng r(777);
  int negative = 0;
  for (int b = 0; b < 10000; ++b) {
    double sum = 0.0;
    for (int i = 0; i < 200; ++i) sum += main.diffs[r.uniform_below(200)];
    if (sum < 0.0) ++negative;
  }
  note << " bootstrap_neg " << negative << "/10000";
  if (negative > 500) {
    detail = "gap not nonnegative at 95% bootstrap confidence: " + note.str();
    return false;
  }

  const auto flat = run_dominance({{0, 8, 0.8}}, 200, 4242);
  const double flat_gap = flat.lfv_acc - flat.mv_acc;
  note << " | uniform-band gap " << flat_gap;
  if (std::abs(flat_gap) > 0.02) {
    detail = "uniform-band gap above 2pp: " + note.str();
    return false;
  }
  detail = note.str();
  return true;
}

// ---------------------------------------------------------------------------
// criterion 11: CLI determinism via manifests

int run_cli(const std::vector<std::string>& args, const std::string& log_name) {
  std::string cmd = g_cli;
  for (const auto& a : args) cmd += " " + a;
  cmd += " > " + (g_work / (log_name + ".log")).string() + " 2>&1";
  return std::system(cmd.c_str());
}

bool rerun_from_manifest(const fs::path& manifest_path, const fs::path& out1,
                         const fs::path& out2, const std::string& log_name,
                         std::string& detail) {
  const auto m = cotlen::manifest::read_manifest(manifest_path);
  std::vector<std::string> argv = m.argv;
  for (auto& a : argv) {
    if (a == out1.string()) a = out2.string();
  }
  if (run_cli(argv, log_name) != 0) {
    detail = "re-run failed for " + manifest_path.string();
    return false;
  }
  for (const auto& output : m.outputs) {
    const fs::path p1 = output;
    std::string rel = output;
    const auto pos = rel.find(out1.string());
    if (pos != std::string::npos) rel.replace(pos, out1.string().size(), out2.string());
    const fs::path p2 = rel;
    if (cotlen::io::read_file(p1) != cotlen::io::read_file(p2)) {
      detail = "outputs differ: " + p1.string() + " vs " + p2.string();
      return false;
    }
  }
  return true;
}

bool c11_determinism(std::string& detail) {
  if (g_cli.empty()) {
    detail = "no --cli path given";
    return false;
  }
  fs::create_directories(g_work);

  {
    const fs::path out1 = g_work / "corpus_a.txt";
    const fs::path out2 = g_work / "corpus_b.txt";
    if (run_cli({"gen", "--T", "12,24", "--t", "1..4", "--count", "200", "--seed", "7",
                 "--out", out1.string()},
                "gen_a") != 0) {
      detail = "gen run failed";
      return false;
    }
    if (!rerun_from_manifest(cotlen::manifest::manifest_path_for(out1), out1, out2, "gen_b",
                             detail)) {
      return false;
    }
  }
  {
    const fs::path out1 = g_work / "sweep_a.csv";
    const fs::path out2 = g_work / "sweep_b.csv";
    if (run_cli({"sweep", "--T", "8,16,24", "--C", "100", "--M", "4,6", "--out", out1.string()},
                "sweep_a") != 0) {
      detail = "sweep run failed";
      return false;
    }
    if (!rerun_from_manifest(cotlen::manifest::manifest_path_for(out1), out1, out2, "sweep_b",
                             detail)) {
      return false;
    }
  }
  {
    const fs::path out1 = g_work / "bandit_a.csv";
    const fs::path out2 = g_work / "bandit_b.csv";
    if (run_cli({"bandit", "--mode", "reinforce", "--accuracies", "0.9,0.5", "--episodes",
                 "2000", "--stride", "100", "--seed", "3", "--out", out1.string()},
                "bandit_a") != 0) {
      detail = "bandit run failed";
      return false;
    }
    if (!rerun_from_manifest(cotlen::manifest::manifest_path_for(out1), out1, out2, "bandit_b",
                             detail)) {
      return false;
    }
  }
  {
    const fs::path cands = g_work / "candidates.jsonl";
    std::ostringstream body;
    const auto pool = cotlen::vote::simulate_pool({{0, 4, 0.3}, {4, 8, 0.8}, {10, 14, 0.3}}, 30,
                                                  "yes", {"n1", "n2", "n3"}, 5);
    for (const auto& c : pool) {
      body << nlohmann::json{{"id", c.id},
                             {"question_id", c.question_id},
                             {"answer", c.answer},
                             {"length", *c.length}}
                  .dump()
           << "\n";
    }
    cotlen::io::atomic_write(cands, body.str());
    const fs::path out1 = g_work / "vote_a.json";
    const fs::path out2 = g_work / "vote_b.json";
    if (run_cli({"vote", "--candidates", cands.string(), "--out", out1.string()}, "vote_a") !=
        0) {
      detail = "vote run failed";
      return false;
    }
    if (!rerun_from_manifest(cotlen::manifest::manifest_path_for(out1), out1, out2, "vote_b",
                             detail)) {
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
    if (std::string(argv[i]) == "--work") g_work = argv[i + 1];
  }
  if (g_work.empty()) g_work = fs::temp_directory_path() / "cotlen_acceptance";

  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no stated budget
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Lambert residuals on 1000-point grids", 1.0, c1_lambert},
      {2, "closed-form optimum within 1 of the brute-force argmax", 5.0, c2_closed_vs_oracle},
      {3, "inverted-U accuracy curves on the grid", 5.0, c3_inverted_u},
      {4, "scaling laws of n* and t*", 5.0, c4_scaling_laws},
      {5, "lower bound n* >= n_lb (linear inverse)", 5.0, c5_lower_bound},
      {6, "beta moment bounds and Monte Carlo bound", 10.0, c6_beta_bounds},
      {7, "policy-gradient convergence, exact and REINFORCE", 30.0, c7_rl_convergence},
      {8, "corpus integrity and worked example", 10.0, c8_corpus_integrity},
      {9, "exact gradient matches finite differences", 0.0, c9_gradient},
      {10, "length-filtered vote dominates majority vote", 20.0, c10_vote_dominance},
      {11, "manifest re-runs are byte-identical", 0.0, c11_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && c.budget_seconds > 0.0 && dt > c.budget_seconds) {
      ok = false;
      detail = "runtime budget exceeded (" + std::to_string(dt) + "s > " +
               std::to_string(c.budget_seconds) + "s)";
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  #" << c.id << "  " << c.name << "  ("
              << std::fixed << std::setprecision(2) << dt << "s)";
    std::cout.unsetf(std::ios::floatfield);
    if (!detail.empty()) std::cout << "  -- " << detail;
    std::cout << "\n";
    failures += !ok;
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures;
}
