#include "cotlen/arith.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cotlen/rng.hpp"
#include "cotlen/theory.hpp"

namespace cotlen::arith {

namespace {

using Node = ExprTree::Node;

bool is_plus(const Node& n) { return !n.is_leaf(); }

std::string render_infix(const std::vector<Node>& nodes, int idx, bool display) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  if (n.is_leaf()) return std::to_string(n.value);
  const Node& l = nodes[static_cast<std::size_t>(n.left)];
  const Node& r = nodes[static_cast<std::size_t>(n.right)];
  std::string ls = render_infix(nodes, n.left, display);
  std::string rs = render_infix(nodes, n.right, display);
  if (is_plus(l) && !display) ls = "(" + ls + ")";
  if (is_plus(r)) rs = "(" + rs + ")";
  return ls + "+" + rs;
}

void collect_leaves(const std::vector<Node>& nodes, int idx, std::vector<int>& out) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  if (n.is_leaf()) {
    out.push_back(n.value);
    return;
  }
  collect_leaves(nodes, n.left, out);
  collect_leaves(nodes, n.right, out);
}

// Indices of the plus nodes from root to deepest. Every valid pruned tree is
// such a chain; throws if the pruning constraint is violated.
std::vector<int> plus_chain(const ExprTree& tree) {
  std::vector<int> chain;
  if (tree.size() == 0 || tree.node(tree.root()).is_leaf()) return chain;
  int idx = tree.root();
  for (;;) {
    const Node& n = tree.node(idx);
    chain.push_back(idx);
    const bool lp = is_plus(tree.node(n.left));
    const bool rp = is_plus(tree.node(n.right));
    if (lp && rp) {
      throw std::invalid_argument("pruning violation: plus node with two plus children");
    }
    if (!lp && !rp) return chain;
    idx = lp ? n.left : n.right;
  }
}

// Per-chain-node leaf layout, extracted without the generation machinery;
// verify_solution rebuilds expected steps from this alone.
struct ChainLevel {
  bool leaf_left = false;
  int leaf = 0;        // the forced leaf (non-deepest levels)
  int deep_left = 0;   // the two leaves of the deepest node
  int deep_right = 0;
};

std::vector<ChainLevel> chain_levels(const ExprTree& tree, const std::vector<int>& chain) {
  std::vector<ChainLevel> levels(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Node& n = tree.node(chain[i]);
    const Node& l = tree.node(n.left);
    const Node& r = tree.node(n.right);
    if (i + 1 == chain.size()) {
      levels[i].deep_left = l.value;
      levels[i].deep_right = r.value;
    } else if (is_plus(r)) {
      levels[i].leaf_left = true;
      levels[i].leaf = l.value;
    } else {
      levels[i].leaf_left = false;
      levels[i].leaf = r.value;
    }
  }
  return levels;
}

int add_leaf(std::vector<Node>& nodes, int digit) {
  nodes.push_back({digit, -1, -1});
  return static_cast<int>(nodes.size()) - 1;
}

int add_plus(std::vector<Node>& nodes) {
  nodes.push_back({-1, -1, -1});
  return static_cast<int>(nodes.size()) - 1;
}

void append_subtree(std::vector<Node>& dst, const std::vector<Node>& src, int offset) {
  for (const Node& n : src) {
    if (n.is_leaf()) {
      dst.push_back(n);
    } else {
      dst.push_back({-1, n.left + offset, n.right + offset});
    }
  }
}

}  // namespace

ExprTree ExprTree::leaf(int digit) {
  if (digit < 0 || digit > 9) throw std::invalid_argument("leaf value must be a mod-10 digit");
  ExprTree t;
  t.nodes_.push_back({digit, -1, -1});
  return t;
}

ExprTree ExprTree::plus(const ExprTree& left, const ExprTree& right) {
  if (left.size() == 0 || right.size() == 0) throw std::invalid_argument("plus: empty child");
  if (is_plus(left.node(0)) && is_plus(right.node(0))) {
    throw std::invalid_argument("pruning violation: plus node with two plus children");
  }
  ExprTree t;
  t.nodes_.push_back({-1, 1, 1 + left.size()});
  append_subtree(t.nodes_, left.nodes_, 1);
  append_subtree(t.nodes_, right.nodes_, 1 + left.size());
  return t;
}

int ExprTree::op_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), is_plus));
}

bool ExprTree::operator==(const ExprTree& other) const {
  if (size() != other.size()) return false;
  // Node layouts may differ; compare canonical serializations.
  return to_polish(*this) == to_polish(other);
}

ExprTree sample_problem(int total_ops, std::uint64_t seed) {
  if (total_ops < 1) throw std::invalid_argument("sample_problem: need at least one operator");
  rng::Rng r(seed);
  ExprTree t;
  auto& nodes = t.nodes();
  nodes.reserve(static_cast<std::size_t>(2 * total_ops + 1));
  int cur = add_plus(nodes);
  for (int depth = 1; depth <= total_ops; ++depth) {
    if (depth == total_ops) {
      const int l = add_leaf(nodes, static_cast<int>(r.uniform_below(10)));
      const int rr = add_leaf(nodes, static_cast<int>(r.uniform_below(10)));
      nodes[static_cast<std::size_t>(cur)].left = l;
      nodes[static_cast<std::size_t>(cur)].right = rr;
    } else {
      const bool leaf_left = r.bernoulli(0.5);
      const int lf = add_leaf(nodes, static_cast<int>(r.uniform_below(10)));
      const int nxt = add_plus(nodes);
      nodes[static_cast<std::size_t>(cur)].left = leaf_left ? lf : nxt;
      nodes[static_cast<std::size_t>(cur)].right = leaf_left ? nxt : lf;
      cur = nxt;
    }
  }
  return t;
}

std::vector<std::string> to_polish(const ExprTree& tree) {
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(tree.size()));
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const Node& n = tree.node(idx);
    if (n.is_leaf()) {
      tokens.push_back(std::to_string(n.value));
    } else {
      tokens.emplace_back("+");
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return tokens;
}

std::string to_polish_string(const ExprTree& tree) {
  const auto tokens = to_polish(tree);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

namespace {

int parse_node(const std::vector<std::string>& tokens, std::size_t& pos,
               std::vector<Node>& nodes) {
  if (pos >= tokens.size()) {
    throw std::invalid_argument("malformed polish stream: unexpected end at token " +
                                std::to_string(pos));
  }
  const std::string& tok = tokens[pos];
  const std::size_t here = pos++;
  if (tok == "+") {
    const int me = add_plus(nodes);
    const int l = parse_node(tokens, pos, nodes);
    const int r = parse_node(tokens, pos, nodes);
    nodes[static_cast<std::size_t>(me)].left = l;
    nodes[static_cast<std::size_t>(me)].right = r;
    if (is_plus(nodes[static_cast<std::size_t>(l)]) &&
        is_plus(nodes[static_cast<std::size_t>(r)])) {
      throw std::invalid_argument("pruning violation at token " + std::to_string(here) +
                                  ": plus node with two plus children");
    }
    return me;
  }
  if (tok.size() == 1 && tok[0] >= '0' && tok[0] <= '9') {
    return add_leaf(nodes, tok[0] - '0');
  }
  throw std::invalid_argument("malformed polish stream: bad token '" + tok + "' at position " +
                              std::to_string(here));
}

}  // namespace

ExprTree parse_polish(const std::vector<std::string>& tokens) {
  ExprTree t;
  std::size_t pos = 0;
  parse_node(tokens, pos, t.nodes());
  if (pos != tokens.size()) {
    throw std::invalid_argument("malformed polish stream: trailing tokens from position " +
                                std::to_string(pos));
  }
  return t;
}

ExprTree parse_polish(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return parse_polish(tokens);
}

std::string to_infix(const ExprTree& tree, bool display) {
  return render_infix(tree.nodes(), tree.root(), display);
}

int evaluate(const ExprTree& tree) {
  // Recursive mod-10 evaluation; equals the flat leaf sum mod 10.
  struct Eval {
    const ExprTree& t;
    int operator()(int idx) const {
      const Node& n = t.node(idx);
      if (n.is_leaf()) return n.value;
      return ((*this)(n.left) + (*this)(n.right)) % 10;
    }
  };
  return Eval{tree}(tree.root());
}

CoTSolution generate_cot(const ExprTree& tree, int step_size) {
  const int total = tree.op_count();
  if (step_size < 1 || step_size > total) {
    throw std::invalid_argument("generate_cot: step size " + std::to_string(step_size) +
                                " outside [1, " + std::to_string(total) + "]");
  }
  const auto chain = plus_chain(tree);
  std::vector<Node> work = tree.nodes();
  CoTSolution sol;
  sol.step_size = step_size;
  sol.control_token = "<" + std::to_string(step_size) + ">";
  int remaining = total;
  while (remaining > 0) {
    const int k = std::min(step_size, remaining);
    const int top = chain[static_cast<std::size_t>(remaining - k)];
    Step st;
    st.sub_question = render_infix(work, top, false);
    collect_leaves(work, top, st.operand_values);
    int sum = 0;
    for (const int v : st.operand_values) sum += v;
    st.result = sum % 10;
    work[static_cast<std::size_t>(top)] = Node{st.result, -1, -1};
    sol.steps.push_back(std::move(st));
    remaining -= k;
  }
  return sol;
}

bool verify_solution(const ExprTree& tree, const CoTSolution& solution) {
  const int total = tree.op_count();
  const int t = solution.step_size;
  if (t < 1 || t > total) return false;
  const auto expected_steps = static_cast<std::size_t>((total + t - 1) / t);
  if (solution.steps.size() != expected_steps) return false;

  std::vector<int> chain;
  try {
    chain = plus_chain(tree);
  } catch (const std::invalid_argument&) {
    return false;
  }
  const auto levels = chain_levels(tree, chain);

  int remaining = total;
  int prev_result = -1;
  for (const Step& st : solution.steps) {
    const int k = std::min(t, remaining);
    // Expected operands, wrapped outward from the deep end of this step's
    // span; a later step starts from the previous step's collapsed value.
    std::vector<int> ops;
    int lo = remaining - k;  // chain index of the step's shallowest node
    int hi = remaining - 1;  // chain index of the step's deepest node
    if (hi == total - 1) {
      ops = {levels[static_cast<std::size_t>(hi)].deep_left,
             levels[static_cast<std::size_t>(hi)].deep_right};
      --hi;
    } else {
      ops = {prev_result};
    }
    for (int i = hi; i >= lo; --i) {
      const auto& lv = levels[static_cast<std::size_t>(i)];
      if (lv.leaf_left) {
        ops.insert(ops.begin(), lv.leaf);
      } else {
        ops.push_back(lv.leaf);
      }
    }
    if (st.operand_values != ops) return false;
    int sum = 0;
    for (const int v : ops) sum += v;
    if (st.result != sum % 10) return false;
    prev_result = sum % 10;
    remaining -= k;
  }

  // Final answer must equal the flat leaf sum mod 10.
  std::vector<int> leaves;
  collect_leaves(tree.nodes(), tree.root(), leaves);
  int flat = 0;
  for (const int v : leaves) flat += v;
  return prev_result == flat % 10;
}

namespace {

void validate_spec(const CorpusSpec& spec) {
  if (spec.total_ops_choices.empty()) throw std::invalid_argument("corpus: no T choices");
  if (spec.count < 0) throw std::invalid_argument("corpus: negative count");
  for (const int total : spec.total_ops_choices) {
    if (total < 1) throw std::invalid_argument("corpus: T must be >= 1");
  }
  if (spec.optimal_step_mode) {
    for (const int total : spec.total_ops_choices) {
      theory::TheorySetting probe(total, spec.opt_C, spec.opt_M);  // throws when illegal
      (void)probe;
    }
    return;
  }
  if (spec.step_size_choices.empty()) throw std::invalid_argument("corpus: no t choices");
  for (const int total : spec.total_ops_choices) {
    const bool any = std::any_of(spec.step_size_choices.begin(), spec.step_size_choices.end(),
                                 [&](int t) { return t >= 1 && t <= total; });
    if (!any) {
      throw std::invalid_argument("corpus: no feasible t for T=" + std::to_string(total));
    }
  }
}

int optimal_step_for(const CorpusSpec& spec, int total) {
  const theory::TheorySetting s(total, spec.opt_C, spec.opt_M);
  const auto t = static_cast<int>(std::llround(theory::optimal_step_size(s)));
  return std::clamp(t, 1, total);
}

}  // namespace

CorpusRecord make_record(const CorpusSpec& spec, long long index) {
  rng::Rng r(rng::derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
  const int total = spec.total_ops_choices[r.uniform_below(spec.total_ops_choices.size())];
  int t;
  if (spec.optimal_step_mode) {
    t = optimal_step_for(spec, total);
  } else {
    std::vector<int> feasible;
    for (const int cand : spec.step_size_choices) {
      if (cand >= 1 && cand <= total) feasible.push_back(cand);
    }
    t = feasible[r.uniform_below(feasible.size())];
  }
  const ExprTree tree = sample_problem(total, r.u64());
  return {tree, generate_cot(tree, t)};
}

std::string record_text(const CorpusRecord& record, bool omit_control_token) {
  std::string out = to_polish_string(record.problem) + " =";
  if (!omit_control_token) {
    out += ' ';
    out += record.solution.control_token;
  }
  out += '\n';
  for (std::size_t i = 0; i < record.solution.steps.size(); ++i) {
    const Step& st = record.solution.steps[i];
    out += st.sub_question + "=" + std::to_string(st.result);
    if (i + 1 == record.solution.steps.size()) out += "<END>";
    out += '\n';
  }
  return out;
}

long long emit_corpus_text(const CorpusSpec& spec, std::ostream& out) {
  validate_spec(spec);
  for (long long i = 0; i < spec.count; ++i) {
    if (i) out << '\n';
    out << record_text(make_record(spec, i), spec.omit_control_token);
  }
  return spec.count;
}

nlohmann::json record_json(const CorpusRecord& record) {
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& st : record.solution.steps) {
    steps.push_back({{"question", st.sub_question}, {"answer", st.result}});
  }
  return {{"polish", to_polish_string(record.problem)},
          {"infix", to_infix(record.problem)},
          {"T", record.problem.op_count()},
          {"t", record.solution.step_size},
          {"steps", steps},
          {"answer", record.solution.steps.back().result}};
}

long long emit_corpus_jsonl(const CorpusSpec& spec, std::ostream& out) {
  validate_spec(spec);
  for (long long i = 0; i < spec.count; ++i) {
    out << record_json(make_record(spec, i)).dump() << '\n';
  }
  return spec.count;
}

ParsedRecord parse_record_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ParsedRecord rec;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      const auto eq = line.rfind(" =");
      if (eq == std::string::npos) throw std::invalid_argument("record: missing '=' in question line");
      rec.polish = line.substr(0, eq);
      std::string tail = line.substr(eq + 2);
      if (!tail.empty() && tail.front() == ' ') tail.erase(0, 1);
      if (!tail.empty()) {
        if (tail.front() != '<' || tail.back() != '>') {
          throw std::invalid_argument("record: bad control token '" + tail + "'");
        }
        rec.has_control_token = true;
        rec.step_size = std::stoi(tail.substr(1, tail.size() - 2));
      }
      continue;
    }
    std::string body = line;
    const auto end_tag = body.find("<END>");
    if (end_tag != std::string::npos) body.erase(end_tag);
    const auto eq = body.rfind('=');
    if (eq == std::string::npos || eq + 1 >= body.size()) {
      throw std::invalid_argument("record: bad step line '" + line + "'");
    }
    rec.steps.emplace_back(body.substr(0, eq), std::stoi(body.substr(eq + 1)));
  }
  if (first) throw std::invalid_argument("record: empty");
  return rec;
}

}  // namespace cotlen::arith
