#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cotlen::vote {

// One sampled answer candidate. At least one of text/length must be present;
// when length is absent it is derived from text via segment_steps.
struct Candidate {
  std::string id;
  std::string question_id;
  std::string answer;
  std::optional<std::string> text;
  std::optional<long long> length;  // precomputed step count
};

// Step count of a reasoning chain: split on newline, drop empty lines,
// count the rest. Empty text segments to 0.
long long segment_steps(std::string_view text);

// The candidate's step count; throws std::invalid_argument naming the id
// when neither length nor text is available.
long long resolved_length(const Candidate& c);

struct LengthGroup {
  long long bin_index;  // j >= 1; lengths in [D*(j-1), D*j)
  long long bin_lo;
  long long bin_hi;
  std::vector<std::size_t> members;           // indices into the pool
  std::map<std::string, double> distribution;  // answer -> frequency
  double entropy;                              // natural-log Shannon entropy
};

// Nonempty bins sorted by bin_index; every candidate appears exactly once.
// Throws listing every candidate with an unresolvable length.
std::vector<LengthGroup> group_by_length(const std::vector<Candidate>& pool,
                                         long long bin_width);

// -sum p ln p over the group's answer distribution; 0 for unanimous groups.
double group_entropy(const LengthGroup& group);

struct VoteConfig {
  long long bin_width = 2;       // D
  long long selected_groups = 3; // K
  long long min_group_size = 1;  // groups below this size are ignored (off by default)
};

struct VoteReport {
  std::vector<LengthGroup> groups;
  std::vector<long long> selected_bins;
  std::map<std::string, long long> tally;  // over the selected union
  std::string final_answer;
  nlohmann::json to_json() const;
};

// Length-filtered vote: majority over the union of the K lowest-entropy
// groups. Entropy ties prefer the larger group, then the smaller bin index;
// final-tally ties resolve to the lexicographically smallest answer. With
// fewer than K nonempty groups every group is used (degenerates to plain
// majority voting).
std::pair<std::string, VoteReport> length_filtered_vote(const std::vector<Candidate>& pool,
                                                        const VoteConfig& config = {});

// Plain majority vote; ties resolve to the lexicographically smallest answer.
std::string majority_vote(const std::vector<Candidate>& pool);

// A band of chain lengths with one correctness level.
struct Band {
  long long length_lo;  // inclusive
  long long length_hi;  // exclusive
  double p_correct;
};

// Synthetic candidate pool: n candidates split evenly across the bands (in
// list order, remainders to the earliest bands), each with a length uniform
// in its band's range and an answer that is `correct` with the band's
// probability, otherwise uniform over `distractors`. Listing a band several
// times weights it accordingly. Deterministic given seed.
std::vector<Candidate> simulate_pool(const std::vector<Band>& bands, long long n,
                                     const std::string& correct,
                                     const std::vector<std::string>& distractors,
                                     std::uint64_t seed);

// JSON-lines input: fields id, question_id, answer, optional text, optional
// length. Throws std::invalid_argument listing every bad record.
std::vector<Candidate> read_candidates_jsonl(std::istream& in);

}  // namespace cotlen::vote
