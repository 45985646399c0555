#include "cotlen/vote.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "cotlen/rng.hpp"

namespace cotlen::vote {

long long segment_steps(std::string_view text) {
  long long count = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) ++count;
    if (end == text.size()) break;
    start = end + 1;
  }
  return count;
}

long long resolved_length(const Candidate& c) {
  if (c.length) return *c.length;
  if (c.text) return segment_steps(*c.text);
  throw std::invalid_argument("candidate '" + c.id + "' has neither length nor text");
}

double group_entropy(const LengthGroup& group) {
  double h = 0.0;
  for (const auto& [answer, p] : group.distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<LengthGroup> group_by_length(const std::vector<Candidate>& pool,
                                         long long bin_width) {
  if (bin_width < 1) throw std::invalid_argument("group_by_length: bin width must be >= 1");
  std::string bad;
  std::map<long long, LengthGroup> bins;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    long long len;
    try {
      len = resolved_length(pool[i]);
    } catch (const std::invalid_argument&) {
      if (!bad.empty()) bad += ", ";
      bad += pool[i].id;
      continue;
    }
    const long long j = len / bin_width + 1;
    auto& g = bins[j];
    if (g.members.empty()) {
      g.bin_index = j;
      g.bin_lo = bin_width * (j - 1);
      g.bin_hi = bin_width * j;
    }
    g.members.push_back(i);
  }
  if (!bad.empty()) {
    throw std::invalid_argument("candidates with unresolvable length: " + bad);
  }
  std::vector<LengthGroup> out;
  out.reserve(bins.size());
  for (auto& [j, g] : bins) {
    for (const std::size_t i : g.members) g.distribution[pool[i].answer] += 1.0;
    for (auto& [answer, count] : g.distribution) {
      count /= static_cast<double>(g.members.size());
    }
    g.entropy = group_entropy(g);
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

std::string majority_of_tally(const std::map<std::string, long long>& tally) {
  long long best = 0;
  for (const auto& [answer, count] : tally) best = std::max(best, count);
  for (const auto& [answer, count] : tally) {
    if (count == best) return answer;  // std::map iterates lexicographically
  }
  return {};
}

}  // namespace

std::string majority_vote(const std::vector<Candidate>& pool) {
  if (pool.empty()) throw std::invalid_argument("majority_vote: empty pool");
  std::map<std::string, long long> tally;
  for (const auto& c : pool) ++tally[c.answer];
  return majority_of_tally(tally);
}

std::pair<std::string, VoteReport> length_filtered_vote(const std::vector<Candidate>& pool,
                                                        const VoteConfig& config) {
  if (pool.empty()) throw std::invalid_argument("length_filtered_vote: empty pool");
  if (config.selected_groups < 1) throw std::invalid_argument("length_filtered_vote: K must be >= 1");
  VoteReport report;
  report.groups = group_by_length(pool, config.bin_width);

  std::vector<const LengthGroup*> eligible;
  for (const auto& g : report.groups) {
    if (static_cast<long long>(g.members.size()) >= config.min_group_size) {
      eligible.push_back(&g);
    }
  }
  if (eligible.empty()) {
    throw std::invalid_argument("length_filtered_vote: no group meets the size floor");
  }
  std::sort(eligible.begin(), eligible.end(), [](const LengthGroup* a, const LengthGroup* b) {
    if (a->entropy != b->entropy) return a->entropy < b->entropy;
    if (a->members.size() != b->members.size()) return a->members.size() > b->members.size();
    return a->bin_index < b->bin_index;
  });
  const auto take = std::min<std::size_t>(eligible.size(),
                                          static_cast<std::size_t>(config.selected_groups));
  for (std::size_t i = 0; i < take; ++i) {
    report.selected_bins.push_back(eligible[i]->bin_index);
    for (const std::size_t m : eligible[i]->members) ++report.tally[pool[m].answer];
  }
  std::sort(report.selected_bins.begin(), report.selected_bins.end());
  report.final_answer = majority_of_tally(report.tally);
  return {report.final_answer, std::move(report)};
}

nlohmann::json VoteReport::to_json() const {
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : groups) {
    gs.push_back({{"bin_index", g.bin_index},
                  {"bin_range", {g.bin_lo, g.bin_hi}},
                  {"size", g.members.size()},
                  {"entropy", g.entropy},
                  {"distribution", g.distribution}});
  }
  return {{"groups", gs},
          {"selected_bins", selected_bins},
          {"final_answer", final_answer},
          {"tally", tally}};
}

std::vector<Candidate> simulate_pool(const std::vector<Band>& bands, long long n,
                                     const std::string& correct,
                                     const std::vector<std::string>& distractors,
                                     std::uint64_t seed) {
  if (bands.empty()) throw std::invalid_argument("simulate_pool: no bands");
  if (n < 0) throw std::invalid_argument("simulate_pool: negative n");
  for (const auto& b : bands) {
    if (b.length_lo < 0 || b.length_hi <= b.length_lo) {
      throw std::invalid_argument("simulate_pool: bad band range");
    }
    if (b.p_correct < 0.0 || b.p_correct > 1.0) {
      throw std::invalid_argument("simulate_pool: p_correct outside [0,1]");
    }
    if (b.p_correct < 1.0 && distractors.empty()) {
      throw std::invalid_argument("simulate_pool: distractors required when p_correct < 1");
    }
  }
  rng::Rng r(seed);
  std::vector<Candidate> pool;
  pool.reserve(static_cast<std::size_t>(n));
  const auto nb = static_cast<long long>(bands.size());
  for (long long bi = 0; bi < nb; ++bi) {
    const long long quota = n / nb + (bi < n % nb ? 1 : 0);
    const Band& band = bands[static_cast<std::size_t>(bi)];
    for (long long k = 0; k < quota; ++k) {
      Candidate c;
      c.id = "c" + std::to_string(pool.size());
      c.question_id = "q0";
      c.length = r.uniform_int(band.length_lo, band.length_hi);
      c.answer = r.bernoulli(band.p_correct)
                     ? correct
                     : distractors[r.uniform_below(distractors.size())];
      pool.push_back(std::move(c));
    }
  }
  return pool;
}

std::vector<Candidate> read_candidates_jsonl(std::istream& in) {
  std::vector<Candidate> pool;
  std::string line;
  std::string bad;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Candidate c;
      c.id = j.contains("id") ? j.at("id").get<std::string>()
                              : "line" + std::to_string(line_no);
      c.question_id = j.value("question_id", std::string{});
      c.answer = j.at("answer").get<std::string>();
      if (j.contains("text")) c.text = j.at("text").get<std::string>();
      if (j.contains("length")) c.length = j.at("length").get<long long>();
      if (!c.text && !c.length) {
        throw std::invalid_argument("neither text nor length");
      }
      pool.push_back(std::move(c));
    } catch (const std::exception& e) {
      if (!bad.empty()) bad += "; ";
      bad += "line " + std::to_string(line_no) + ": " + e.what();
    }
  }
  if (!bad.empty()) {
    throw std::invalid_argument("bad candidate records: " + bad);
  }
  return pool;
}

}  // namespace cotlen::vote
