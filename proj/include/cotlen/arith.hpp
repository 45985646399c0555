#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cotlen::arith {

// Binary addition tree, mod-10 leaves, with the pruning constraint that
// every plus node has at least one leaf child. Under that constraint the
// plus nodes form a chain, so a tree with T operators has T plus nodes and
// T+1 leaves. Nodes live in a flat vector; index 0 is the root.
class ExprTree {
 public:
  struct Node {
    int value = -1;  // 0..9 for leaves, -1 for plus
    int left = -1;
    int right = -1;
    bool is_leaf() const { return left < 0; }
  };

  static ExprTree leaf(int digit);
  static ExprTree plus(const ExprTree& left, const ExprTree& right);  // validates pruning

  const Node& node(int index) const { return nodes_[static_cast<std::size_t>(index)]; }
  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int op_count() const;
  int leaf_count() const { return size() - op_count(); }

  bool operator==(const ExprTree& other) const;

  // Internal builder access (parser and sampler).
  std::vector<Node>& nodes() { return nodes_; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

// Random task with exactly `total_ops` plus nodes: a chain where the forced
// leaf lands left or right uniformly at each level and leaf values are
// uniform mod-10 digits. Deterministic given seed.
ExprTree sample_problem(int total_ops, std::uint64_t seed);

// Prefix serialization: "+ left right" recursively, leaves as digit tokens.
std::vector<std::string> to_polish(const ExprTree& tree);
std::string to_polish_string(const ExprTree& tree);

// Inverse of to_polish. Throws std::invalid_argument for malformed streams
// (with the offending position) and for pruning violations.
ExprTree parse_polish(const std::vector<std::string>& tokens);
ExprTree parse_polish(std::string_view text);

// Infix rendering. Canonical mode brackets every plus child; display mode
// drops brackets on left plus children (left-associative convention).
std::string to_infix(const ExprTree& tree, bool display = false);

// Sum of all leaves mod 10 (bracketing cannot change it).
int evaluate(const ExprTree& tree);

struct Step {
  std::string sub_question;         // e.g. "(2+1)+3"
  std::vector<int> operand_values;  // the values summed, expression order
  int result;                       // sum mod 10
};

struct CoTSolution {
  int step_size = 1;                // t
  std::vector<Step> steps;          // ceil(T/t) entries
  std::string control_token;        // "<t>"
};

// t-hop execution: each step collapses the t deepest remaining plus nodes
// (the final step takes T mod t when t does not divide T). The chain shape
// makes the order unique. Throws when t is outside [1, T].
CoTSolution generate_cot(const ExprTree& tree, int step_size);

// Integrity oracle: re-derives the expected step structure, operand
// sequences, per-step mod-10 sums and final answer from the tree alone and
// checks the solution against them.
bool verify_solution(const ExprTree& tree, const CoTSolution& solution);

struct CorpusSpec {
  std::vector<int> total_ops_choices;  // candidate T values
  std::vector<int> step_size_choices;  // candidate t values (filtered to t <= T per record)
  long long count = 0;
  std::uint64_t seed = 0;
  bool omit_control_token = false;  // drop the <t> tag from the question line
  // Optimal-length mode: ignore step_size_choices and use the closed-form
  // optimal step size for (T, opt_C, opt_M), rounded and clamped to [1, T].
  bool optimal_step_mode = false;
  double opt_C = 0.0;
  double opt_M = 0.0;
};

struct CorpusRecord {
  ExprTree problem;
  CoTSolution solution;
};

// Record `index` of the corpus; seeded as derive_seed(spec.seed, index), so
// any generation order yields the same corpus.
CorpusRecord make_record(const CorpusSpec& spec, long long index);

// Text record:
//   <polish tokens> = <t>
//   <step infix>=<result>
//   ...
//   <final step infix>=<result><END>
// Records separated by one blank line. Returns the number written.
long long emit_corpus_text(const CorpusSpec& spec, std::ostream& out);
std::string record_text(const CorpusRecord& record, bool omit_control_token = false);

// JSON-lines mirror: polish, infix, T, t, steps [{question, answer}], answer.
long long emit_corpus_jsonl(const CorpusSpec& spec, std::ostream& out);
nlohmann::json record_json(const CorpusRecord& record);

// Parsed view of one text record, for round-trip checks.
struct ParsedRecord {
  std::string polish;
  bool has_control_token = false;
  int step_size = 0;
  std::vector<std::pair<std::string, int>> steps;  // (question, answer)
};
ParsedRecord parse_record_text(const std::string& text);

}  // namespace cotlen::arith
