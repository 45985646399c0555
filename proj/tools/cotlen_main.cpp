// cotlen - reasoning-chain length calculus toolbox.
//
// Subcommands: optimal, sweep, bandit, gen, vote. Every run that writes
// files also writes <out>.manifest.json recording the exact argv; re-running
// that argv reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cotlen/arith.hpp"
#include "cotlen/bandit.hpp"
#include "cotlen/errors.hpp"
#include "cotlen/io.hpp"
#include "cotlen/lambert.hpp"
#include "cotlen/manifest.hpp"
#include "cotlen/theory.hpp"
#include "cotlen/vote.hpp"

namespace {

using cotlen::io::g12;

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated list, got '" + csv + "'");
  return out;
}

// "5..14", "5-14" or "5,6,7".
std::vector<long long> parse_lengths(const std::string& text) {
  const auto range_at = [&](std::size_t pos, std::size_t sep_len) {
    const long long lo = std::stoll(text.substr(0, pos));
    const long long hi = std::stoll(text.substr(pos + sep_len));
    if (hi < lo) throw CLI::ValidationError("bad length range '" + text + "'");
    std::vector<long long> out;
    for (long long v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) return range_at(dots, 2);
  if (const auto dash = text.find('-', 1); dash != std::string::npos) return range_at(dash, 1);
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoll(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected lengths, got '" + text + "'");
  return out;
}

std::vector<int> to_ints(const std::vector<long long>& v) {
  return {v.begin(), v.end()};
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> argv;
};

cotlen::manifest::RunManifest base_manifest(const GlobalOpts& g, const std::string& command) {
  cotlen::manifest::RunManifest m;
  m.command = command;
  m.seed = g.seed;
  m.argv = g.argv;
  return m;
}

void finish_manifest(cotlen::manifest::RunManifest& m, const std::string& primary_out) {
  cotlen::manifest::write_manifest(m, primary_out);
}

// ---------------------------------------------------------------------------
// optimal

int cmd_optimal(const GlobalOpts& g, double T, double C, double M) {
  const cotlen::theory::TheorySetting s(T, C, M);
  const double sigma = cotlen::theory::sub_question_error(s);
  const double z = cotlen::lambert::wm1(-(1.0 - sigma) / std::exp(1.0));
  const double n_star = cotlen::theory::optimal_length_closed_form(s);
  const double t_star = cotlen::theory::optimal_step_size(s);
  double n_lb = std::numeric_limits<double>::quiet_NaN();
  if (std::exp(2.0) * (1.0 - sigma) > 1.0) {
    n_lb = cotlen::theory::linear_lower_bound(s);
  }
  const auto n_hi = static_cast<long long>(std::ceil(8.0 * T));
  const long long argmax = cotlen::theory::optimal_length_discrete(s, 1, n_hi);

  // Nearest feasible integer: the better of floor/ceil, clamped to feasibility.
  const long long feas = s.min_feasible_steps();
  long long lo = std::max(feas, static_cast<long long>(std::floor(n_star)));
  long long hi = std::max(feas, static_cast<long long>(std::ceil(n_star)));
  const long long n_int =
      cotlen::theory::log_final_accuracy(s, static_cast<double>(lo)) >=
              cotlen::theory::log_final_accuracy(s, static_cast<double>(hi))
          ? lo
          : hi;
  const bool agree = std::abs(n_star - static_cast<double>(argmax)) <= 1.0;

  std::cout << "T " << g12(T) << "  C " << g12(C) << "  M " << g12(M) << "\n"
            << "sigma            " << g12(sigma) << "\n"
            << "Z                " << g12(z) << "\n"
            << "n_star_closed    " << g12(n_star) << "\n"
            << "n_star_int       " << n_int << "\n"
            << "t_star           " << g12(t_star) << "\n"
            << "n_lb             " << g12(n_lb) << "\n"
            << "argmax_discrete  " << argmax << "  (range [1, " << n_hi << "])\n"
            << "agreement        " << (agree ? "ok" : "MISMATCH") << "\n";

  if (!g.out.empty()) {
    const nlohmann::json j = {{"T", T},
                              {"C", C},
                              {"M", M},
                              {"sigma", sigma},
                              {"Z", z},
                              {"n_star_closed", n_star},
                              {"n_star_int", n_int},
                              {"t_star", t_star},
                              {"n_lb", n_lb},
                              {"argmax_discrete", argmax},
                              {"agreement", agree}};
    cotlen::io::atomic_write(g.out, j.dump(2) + "\n");
    auto m = base_manifest(g, "optimal");
    m.add_param("T", g12(T));
    m.add_param("C", g12(C));
    m.add_param("M", g12(M));
    m.outputs = {g.out};
    finish_manifest(m, g.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const GlobalOpts& g, const std::vector<double>& Ts, const std::vector<double>& Cs,
              const std::vector<double>& Ms, long long n_min, long long n_max, bool envelope) {
  std::vector<cotlen::theory::TheorySetting> settings;
  for (const double C : Cs) {
    for (const double M : Ms) {
      for (const double T : Ts) {
        settings.emplace_back(T, C, M);
      }
    }
  }
  std::ostringstream csv;
  if (!envelope) {
    const auto curves = cotlen::theory::accuracy_sweep(settings, n_min, n_max);
    if (g.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& c : curves) {
        for (const auto& p : c.points) {
          rows.push_back({{"T", c.setting.T},
                          {"C", c.setting.C},
                          {"M", c.setting.M},
                          {"N", p.steps},
                          {"accuracy", p.accuracy},
                          {"shape_accuracy", p.shape_accuracy},
                          {"is_argmax", p.steps == c.argmax_steps},
                          {"n_star_closed", c.n_star_closed},
                          {"t_star", c.t_star},
                          {"n_lb", c.n_lb}});
        }
      }
      csv << rows.dump(2) << "\n";
    } else {
      cotlen::theory::write_sweep_csv(csv, curves);
    }
  } else {
    // Per-step-size curves: one row per (setting, t), N = ceil(T/t); the
    // best t per setting is flagged (the envelope of the per-t curves).
    csv << "T,C,M,t,N,accuracy,shape_accuracy,is_argmax_t\n";
    for (const auto& s : settings) {
      const int t_max = static_cast<int>(std::floor(s.T));
      int best_t = 1;
      double best_lg = -std::numeric_limits<double>::infinity();
      for (int t = 1; t <= t_max; ++t) {
        const auto steps = static_cast<double>((static_cast<long long>(s.T) + t - 1) / t);
        const double lg = cotlen::theory::log_final_accuracy(s, steps);
        if (lg > best_lg) {
          best_lg = lg;
          best_t = t;
        }
      }
      for (int t = 1; t <= t_max; ++t) {
        const auto steps = static_cast<long long>((static_cast<long long>(s.T) + t - 1) / t);
        csv << g12(s.T) << ',' << g12(s.C) << ',' << g12(s.M) << ',' << t << ',' << steps << ','
            << g12(cotlen::theory::final_accuracy(s, static_cast<double>(steps), true)) << ','
            << g12(cotlen::theory::final_accuracy(s, static_cast<double>(steps), false)) << ','
            << (t == best_t ? 1 : 0) << '\n';
      }
    }
  }
  if (g.out.empty()) {
    std::cout << csv.str();
    return 0;
  }
  cotlen::io::atomic_write(g.out, csv.str());
  auto m = base_manifest(g, "sweep");
  m.add_param("n_min", std::to_string(n_min));
  m.add_param("n_max", std::to_string(n_max));
  m.add_param("envelope", envelope ? "true" : "false");
  m.outputs = {g.out};
  finish_manifest(m, g.out);
  std::cout << "wrote " << g.out << " (" << settings.size() << " curves)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bandit

int cmd_bandit(const GlobalOpts& g, const std::string& mode, const std::string& accuracies_csv,
               const std::string& lengths_spec, double T, double C, double M, double peak,
               double eta, bool eta_set, long long max_steps, double tol, long long episodes,
               long long batch, double warmup_frac, long long stride) {
  std::optional<cotlen::bandit::ArmSet> arms;
  if (!accuracies_csv.empty()) {
    const auto accs = parse_doubles(accuracies_csv);
    std::vector<long long> lengths;
    if (!lengths_spec.empty()) {
      lengths = parse_lengths(lengths_spec);
    } else {
      for (std::size_t i = 1; i <= accs.size(); ++i) lengths.push_back(static_cast<long long>(i));
    }
    Eigen::VectorXd a(static_cast<Eigen::Index>(accs.size()));
    for (std::size_t i = 0; i < accs.size(); ++i) a[static_cast<Eigen::Index>(i)] = accs[i];
    arms.emplace(lengths, a);
  } else {
    if (lengths_spec.empty()) {
      throw CLI::ValidationError("bandit: need --accuracies or --T/--C/--M with --lengths");
    }
    const cotlen::theory::TheorySetting s(T, C, M);
    arms.emplace(cotlen::bandit::arms_from_theory(s, parse_lengths(lengths_spec), peak));
  }

  const auto start = cotlen::bandit::Policy::uniform(arms->size());
  cotlen::bandit::Trajectory traj;
  if (mode == "exact") {
    cotlen::bandit::AscentOptions opt;
    opt.eta = eta_set ? eta : 0.5;
    opt.max_steps = max_steps;
    opt.tol = tol;
    opt.record_stride = stride;
    traj = cotlen::bandit::gradient_ascent(*arms, start, opt);
  } else if (mode == "reinforce") {
    cotlen::bandit::ReinforceOptions opt;
    opt.eta = eta_set ? eta : 0.12;
    opt.episodes = episodes;
    opt.batch = batch;
    opt.seed = g.seed;
    opt.tol = tol;
    opt.record_stride = stride;
    opt.warmup_fraction = warmup_frac;
    traj = cotlen::bandit::reinforce_simulate(*arms, start, opt);
  } else {
    throw CLI::ValidationError("bandit: mode must be exact or reinforce");
  }

  const auto& last = traj.records.back();
  std::cout << "arms             " << arms->size() << "\n"
            << "mode             " << mode << "\n"
            << "steps            " << last.step << "\n"
            << "winner_length    " << arms->lengths[static_cast<std::size_t>(traj.winner)] << "\n"
            << "winner_mass      " << g12(last.probabilities[traj.winner]) << "\n"
            << "expected_reward  " << g12(last.expected_reward) << "\n"
            << "converged        " << (traj.converged ? "true" : "false") << "\n";

  if (!g.out.empty()) {
    std::ostringstream csv;
    cotlen::bandit::write_trajectory_csv(csv, *arms, traj);
    cotlen::io::atomic_write(g.out, csv.str());
    auto m = base_manifest(g, "bandit");
    m.add_param("mode", mode);
    m.add_param("eta", g12(eta_set ? eta : (mode == "exact" ? 0.5 : 0.12)));
    m.outputs = {g.out};
    finish_manifest(m, g.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const GlobalOpts& g, const std::string& T_spec, const std::string& t_spec,
            long long count, const std::string& mode, double C, double M, bool omit_token,
            bool no_verify) {
  cotlen::arith::CorpusSpec spec;
  spec.total_ops_choices = to_ints(parse_lengths(T_spec));
  spec.count = count;
  spec.seed = g.seed;
  spec.omit_control_token = omit_token;
  if (mode == "optimal") {
    spec.optimal_step_mode = true;
    spec.opt_C = C;
    spec.opt_M = M;
    if (C <= 0.0 || M <= 0.0) {
      throw CLI::ValidationError("gen: optimal mode needs --C and --M");
    }
  } else if (mode == "mixed") {
    spec.step_size_choices = to_ints(parse_lengths(t_spec));
  } else {
    throw CLI::ValidationError("gen: mode must be mixed or optimal");
  }

  {
    // Validate the spec up front (also covers the empty-corpus case).
    std::ostringstream sink;
    cotlen::arith::CorpusSpec probe = spec;
    probe.count = 0;
    (void)cotlen::arith::emit_corpus_text(probe, sink);
  }
  std::string text;
  std::string jsonl;
  for (long long i = 0; i < count; ++i) {
    const auto rec = cotlen::arith::make_record(spec, i);
    if (!no_verify) {
      const auto round_trip = cotlen::arith::parse_polish(cotlen::arith::to_polish(rec.problem));
      if (!(round_trip == rec.problem) ||
          !cotlen::arith::verify_solution(rec.problem, rec.solution)) {
        throw std::runtime_error("gen: record " + std::to_string(i) + " failed the post-check");
      }
    }
    if (i) text += '\n';
    text += cotlen::arith::record_text(rec, spec.omit_control_token);
    jsonl += cotlen::arith::record_json(rec).dump() + '\n';
  }

  const std::string out = g.out.empty() ? "corpus.txt" : g.out;
  cotlen::io::atomic_write(out, text);
  const std::string jsonl_path = out + ".jsonl";
  cotlen::io::atomic_write(jsonl_path, jsonl);
  auto m = base_manifest(g, "gen");
  m.add_param("count", std::to_string(count));
  m.add_param("mode", mode);
  m.add_param("T", T_spec);
  if (mode == "mixed") m.add_param("t", t_spec);
  m.outputs = {out, jsonl_path};
  finish_manifest(m, out);
  std::cout << "wrote " << count << " records to " << out << " and " << jsonl_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// vote

int cmd_vote(const GlobalOpts& g, const std::string& candidates_path, long long D, long long K,
             long long min_group) {
  std::vector<cotlen::vote::Candidate> pool;
  if (candidates_path == "-") {
    pool = cotlen::vote::read_candidates_jsonl(std::cin);
  } else {
    std::ifstream in(candidates_path);
    if (!in) throw std::invalid_argument("cannot open candidates file: " + candidates_path);
    pool = cotlen::vote::read_candidates_jsonl(in);
  }
  cotlen::vote::VoteConfig config;
  config.bin_width = D;
  config.selected_groups = K;
  config.min_group_size = min_group;
  const auto [answer, report] = cotlen::vote::length_filtered_vote(pool, config);
  std::cout << "candidates    " << pool.size() << "\n"
            << "groups        " << report.groups.size() << "\n"
            << "final_answer  " << answer << "\n"
            << "majority_vote " << cotlen::vote::majority_vote(pool) << "\n";
  if (!g.out.empty()) {
    cotlen::io::atomic_write(g.out, report.to_json().dump(2) + "\n");
    auto m = base_manifest(g, "vote");
    m.add_param("candidates", candidates_path);
    m.add_param("D", std::to_string(D));
    m.add_param("K", std::to_string(K));
    m.outputs = {g.out};
    finish_manifest(m, g.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reasoning-chain length calculus: accuracy curves, optimal lengths, "
               "bandit simplicity bias, synthetic corpora and length-filtered voting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cotlen::manifest::kToolVersion));

  GlobalOpts g;
  g.argv.assign(argv + 1, argv + argc);
  app.add_option("--seed", g.seed, "master seed for all randomized work")->capture_default_str();
  app.add_option("--out", g.out, "output path (a .manifest.json is written alongside)");
  app.add_option("--format", g.format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.fallthrough();

  // optimal
  double T = 0, C = 0, M = 0;
  auto* optimal = app.add_subcommand("optimal", "closed-form optimal length vs brute force");
  optimal->add_option("--T", T, "total operator count")->required();
  optimal->add_option("--C", C, "maximum training-regime difficulty")->required();
  optimal->add_option("--M", M, "model capability (operators per step)")->required();

  // sweep
  std::string Ts = "8,16,24,32,48,64,80", Cs = "100", Ms = "6";
  long long n_min = 1, n_max = 0;
  bool envelope = false;
  auto* sweep = app.add_subcommand("sweep", "accuracy curves over a (T, C, M) grid, CSV output");
  sweep->add_option("--T", Ts, "comma list of T values")->capture_default_str();
  sweep->add_option("--C", Cs, "comma list of C values")->capture_default_str();
  sweep->add_option("--M", Ms, "comma list of M values")->capture_default_str();
  sweep->add_option("--n-min", n_min, "first step count")->capture_default_str();
  sweep->add_option("--n-max", n_max, "last step count (0 = 8*T per setting)")->capture_default_str();
  sweep->add_flag("--envelope", envelope, "per-step-size mode: best t per T");

  // bandit
  std::string mode = "exact", accuracies, lengths_spec;
  double bT = 0, bC = 0, bM = 0, peak = 0.9, eta = 0.0, tol = 1e-2, warmup_frac = 0.5;
  long long max_steps = 50000, episodes = 20000, batch = 16, stride = 1;
  auto* bandit = app.add_subcommand("bandit", "softmax policy gradient over candidate lengths");
  bandit->add_option("--mode", mode, "exact|reinforce")->capture_default_str();
  bandit->add_option("--accuracies", accuracies, "explicit arm accuracies, comma list");
  bandit->add_option("--lengths", lengths_spec, "arm lengths: 'a..b' or comma list");
  bandit->add_option("--T", bT, "theory-derived arms: total operator count");
  bandit->add_option("--C", bC, "theory-derived arms: regime cap");
  bandit->add_option("--M", bM, "theory-derived arms: capability");
  bandit->add_option("--peak", peak, "rescaled accuracy of the best theory arm")->capture_default_str();
  auto* eta_opt = bandit->add_option("--eta", eta, "step size (default 0.5 exact, 0.12 reinforce)");
  bandit->add_option("--max-steps", max_steps, "exact mode step cap")->capture_default_str();
  bandit->add_option("--tol", tol, "convergence threshold on best-arm mass")->capture_default_str();
  bandit->add_option("--episodes", episodes, "reinforce episodes")->capture_default_str();
  bandit->add_option("--batch", batch, "reinforce batch size")->capture_default_str();
  bandit->add_option("--warmup-frac", warmup_frac, "reinforce step-size ramp fraction")
      ->capture_default_str();
  bandit->add_option("--stride", stride, "record every k-th step")->capture_default_str();

  // gen
  std::string gT = "12..80", gt = "1..12", gmode = "mixed";
  long long count = 1000;
  double gC = 0, gM = 0;
  bool omit_token = false, no_verify = false;
  auto* gen = app.add_subcommand("gen", "synthetic arithmetic corpus generator");
  gen->add_option("--T", gT, "T values: 'a..b' or comma list")->capture_default_str();
  gen->add_option("--t", gt, "step sizes: 'a..b' or comma list")->capture_default_str();
  gen->add_option("--count", count, "number of records")->capture_default_str();
  gen->add_option("--mode", gmode, "mixed|optimal")->capture_default_str();
  gen->add_option("--C", gC, "optimal mode: regime cap");
  gen->add_option("--M", gM, "optimal mode: capability");
  gen->add_flag("--omit-token", omit_token, "drop the <t> control token");
  gen->add_flag("--no-verify", no_verify, "skip the per-record integrity post-check");

  // vote
  std::string candidates_path;
  long long D = 2, K = 3, min_group = 1;
  auto* vote = app.add_subcommand("vote", "length-filtered vote over a candidate pool");
  vote->add_option("--candidates", candidates_path, "JSON-lines candidates ('-' = stdin)")
      ->required();
  vote->add_option("--D", D, "length bin width")->capture_default_str();
  vote->add_option("--K", K, "number of selected groups")->capture_default_str();
  vote->add_option("--min-group-size", min_group, "ignore smaller groups")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (optimal->parsed()) return cmd_optimal(g, T, C, M);
    if (sweep->parsed()) {
      return cmd_sweep(g, parse_doubles(Ts), parse_doubles(Cs), parse_doubles(Ms), n_min, n_max,
                       envelope);
    }
    if (bandit->parsed()) {
      return cmd_bandit(g, mode, accuracies, lengths_spec, bT, bC, bM, peak, eta,
                        eta_opt->count() > 0, max_steps, tol, episodes, batch, warmup_frac,
                        stride);
    }
    if (gen->parsed()) return cmd_gen(g, gT, gt, count, gmode, gC, gM, omit_token, no_verify);
    if (vote->parsed()) return cmd_vote(g, candidates_path, D, K, min_group);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cotlen::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
