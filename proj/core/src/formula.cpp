#include "treecon/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "treecon/error.hpp"

namespace treecon {

using nlohmann::json;

namespace {

bool is_lower(Op op) { return op == Op::Gt || op == Op::Ge; }

// Lower bounds sort before upper bounds within a dimension.
int op_rank(Op op) {
  switch (op) {
    case Op::Gt: return 0;
    case Op::Ge: return 1;
    case Op::Lt: return 2;
    case Op::Le: return 3;
  }
  return 4;
}

// Sibling gaps and the path of one node while walking the tree.
void emit_rules(const TreeNode& node, std::vector<Literal>& path, std::vector<Conjunction>& out) {
  if (node.is_leaf()) return;
  const auto j = *node.split_dim;
  auto emit = [&](std::initializer_list<Literal> extra) {
    std::vector<Literal> lits = path;
    lits.insert(lits.end(), extra);
    Conjunction c(std::move(lits));
    if (c.satisfiable()) out.push_back(std::move(c));
  };

  const auto& ch = node.children;
  emit({{j, Op::Lt, ch.front().lo}});
  for (std::size_t n = 0; n + 1 < ch.size(); ++n) {
    if (ch[n].hi < ch[n + 1].lo) emit({{j, Op::Gt, ch[n].hi}, {j, Op::Lt, ch[n + 1].lo}});
  }
  emit({{j, Op::Gt, ch.back().hi}});

  for (const auto& edge : ch) {
    path.push_back({j, Op::Gt, edge.lo});
    path.push_back({j, Op::Lt, edge.hi});
    emit_rules(*edge.node, path, out);
    path.resize(path.size() - 2);
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  DnfFormula parse(std::optional<std::size_t> k) {
    std::vector<Conjunction> conjunctions;
    skip_space();
    if (consume_word("false")) {
      expect_end();
      return DnfFormula(k.value_or(1), {});
    }
    conjunctions.push_back(conjunction());
    while (consume_or()) conjunctions.push_back(conjunction());
    expect_end();
    std::size_t max_dim = 0;
    for (const auto& c : conjunctions) {
      for (const auto& l : c.literals()) max_dim = std::max(max_dim, l.dim + 1);
    }
    if (k && *k < max_dim) fail("literal dimension exceeds k = " + std::to_string(*k));
    return DnfFormula(k.value_or(max_dim), std::move(conjunctions));
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("formula text, column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool consume(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  bool consume_word(std::string_view word) {
    const auto save = pos_;
    if (!consume(word)) return false;
    if (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      pos_ = save;
      return false;
    }
    return true;
  }

  bool consume_or() { return consume("\\/") || consume("∨"); }
  bool consume_and() { return consume("/\\") || consume("∧"); }

  void expect_end() {
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
  }

  Conjunction conjunction() {
    const bool paren = consume("(");
    std::vector<Literal> lits{literal()};
    while (consume_and()) lits.push_back(literal());
    if (paren && !consume(")")) fail("expected ')'");
    return Conjunction(std::move(lits));
  }

  Literal literal() {
    Literal lit;
    if (!consume("phi")) fail("expected 'phi<index>'");
    const auto digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits) fail("expected a dimension index after 'phi'");
    const auto idx = text_.substr(digits, pos_ - digits);
    const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), lit.dim);
    if (ec != std::errc()) fail("dimension index out of range");

    if (consume("<=")) {
      lit.op = Op::Le;
    } else if (consume(">=")) {
      lit.op = Op::Ge;
    } else if (consume("<")) {
      lit.op = Op::Lt;
    } else if (consume(">")) {
      lit.op = Op::Gt;
    } else {
      fail("expected one of <, >, <=, >=");
    }

    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '-' || text_[pos_] == '+' || text_[pos_] == 'e' ||
                                   text_[pos_] == 'E')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a number");
    try {
      lit.threshold = parse_double(text_.substr(start, pos_ - start));
    } catch (const ParseError&) {
      pos_ = start;
      fail("malformed number");
    }
    if (!std::isfinite(lit.threshold)) fail("threshold must be finite");
    return lit;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void check_aligned(const DnfFormula& formula, const ConjunctionStats& stats) {
  if (stats.size() != formula.size() || stats.violations.size() != stats.evaluations.size()) {
    throw DomainError("stats hold " + std::to_string(stats.size()) + " entries for a formula of " +
                      std::to_string(formula.size()) + " conjunctions");
  }
}

}  // namespace

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
  }
  return "?";
}

Op op_from_symbol(std::string_view symbol) {
  if (symbol == ">") return Op::Gt;
  if (symbol == ">=") return Op::Ge;
  if (symbol == "<") return Op::Lt;
  if (symbol == "<=") return Op::Le;
  throw ParseError("unknown comparison operator '" + std::string(symbol) + "'");
}

bool Literal::holds(std::span<const double> point) const {
  const double v = point[dim];
  switch (op) {
    case Op::Gt: return v > threshold;
    case Op::Ge: return v >= threshold;
    case Op::Lt: return v < threshold;
    case Op::Le: return v <= threshold;
  }
  return false;
}

Conjunction::Conjunction(std::vector<Literal> literals) {
  if (literals.empty()) throw DomainError("a conjunction needs at least one literal");
  for (const auto& l : literals) {
    if (!std::isfinite(l.threshold)) throw DomainError("literal threshold must be finite");
    auto same = std::find_if(literals_.begin(), literals_.end(),
                             [&](const Literal& m) { return m.dim == l.dim && m.op == l.op; });
    if (same == literals_.end()) {
      literals_.push_back(l);
    } else if (is_lower(l.op) ? l.threshold > same->threshold : l.threshold < same->threshold) {
      same->threshold = l.threshold;
    }
  }
  std::stable_sort(literals_.begin(), literals_.end(), [](const Literal& a, const Literal& b) {
    return a.dim != b.dim ? a.dim < b.dim : op_rank(a.op) < op_rank(b.op);
  });
}

bool Conjunction::holds(std::span<const double> point) const {
  return std::all_of(literals_.begin(), literals_.end(), [&](const Literal& l) { return l.holds(point); });
}

bool Conjunction::satisfiable() const {
  // Literals are sorted by dim, so each dimension's bounds form one run.
  for (std::size_t i = 0; i < literals_.size();) {
    const auto dim = literals_[i].dim;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_strict = false;
    bool hi_strict = false;
    for (; i < literals_.size() && literals_[i].dim == dim; ++i) {
      const auto& l = literals_[i];
      if (is_lower(l.op)) {
        if (l.threshold > lo || (l.threshold == lo && l.op == Op::Gt)) {
          lo = l.threshold;
          lo_strict = l.op == Op::Gt;
        }
      } else if (l.threshold < hi || (l.threshold == hi && l.op == Op::Lt)) {
        hi = l.threshold;
        hi_strict = l.op == Op::Lt;
      }
    }
    if (lo > hi || (lo == hi && (lo_strict || hi_strict))) return false;
  }
  return true;
}

DnfFormula::DnfFormula(std::size_t k, std::vector<Conjunction> conjunctions)
    : k_(k), conjunctions_(std::move(conjunctions)) {
  if (k_ == 0) throw DomainError("formula dimension must be positive");
  for (const auto& c : conjunctions_) {
    for (const auto& l : c.literals()) {
      if (l.dim >= k_) throw DomainError("literal dimension " + std::to_string(l.dim) + " exceeds k");
    }
  }
  std::stable_sort(conjunctions_.begin(), conjunctions_.end(),
                   [](const Conjunction& a, const Conjunction& b) { return a.complexity() < b.complexity(); });
}

bool same_conjunctions(const DnfFormula& a, const DnfFormula& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& c : a.conjunctions()) {
    bool found = false;
    for (std::size_t i = 0; i < b.size() && !found; ++i) {
      if (!used[i] && b[i] == c) used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

double ConjunctionStats::ratio(std::size_t i) const {
  return evaluations[i] == 0 ? 0.0 : static_cast<double>(violations[i]) / static_cast<double>(evaluations[i]);
}

void ConjunctionStats::merge(const ConjunctionStats& other) {
  if (other.size() != size()) throw DomainError("cannot merge stats of different sizes");
  for (std::size_t i = 0; i < size(); ++i) {
    evaluations[i] += other.evaluations[i];
    violations[i] += other.violations[i];
  }
}

Evaluation evaluate(const DnfFormula& formula, std::span<const double> point, ConjunctionStats* stats,
                    CountMode mode) {
  if (point.size() != formula.dim()) {
    throw DomainError("point has dimension " + std::to_string(point.size()) + ", formula expects " +
                      std::to_string(formula.dim()));
  }
  if (stats) check_aligned(formula, *stats);
  Evaluation out;
  for (std::size_t i = 0; i < formula.size(); ++i) {
    if (stats) ++stats->evaluations[i];
    if (!formula[i].holds(point)) continue;
    if (stats) ++stats->violations[i];
    if (!out.violated) {
      out.violated = true;
      out.credited = i;
    }
    if (mode == CountMode::short_circuit) break;
  }
  return out;
}

int cost(const DnfFormula& formula, std::span<const double> point, ConjunctionStats* stats, CountMode mode) {
  return evaluate(formula, point, stats, mode).violated ? 1 : 0;
}

DnfFormula extract_formula(const Tree& tree, const FeatureBounds& bounds) {
  if (bounds.dim() != tree.dim()) throw DomainError("bounds and tree differ in dimension");
  std::vector<Conjunction> rules;
  for (std::size_t j = 0; j < bounds.dim(); ++j) {
    rules.emplace_back(std::vector<Literal>{{j, Op::Lt, bounds.min[j]}});
    rules.emplace_back(std::vector<Literal>{{j, Op::Gt, bounds.max[j]}});
  }
  std::vector<Literal> path;
  std::vector<Conjunction> from_tree;
  emit_rules(tree.root(), path, from_tree);
  for (auto& c : from_tree) {
    if (std::find(rules.begin(), rules.end(), c) == rules.end()) rules.push_back(std::move(c));
  }
  return DnfFormula(tree.dim(), std::move(rules));
}

DnfFormula prune(const DnfFormula& formula, const ConjunctionStats& stats, double threshold) {
  check_aligned(formula, stats);
  // Above 1 nothing can survive; allowed so callers can ask for the empty formula.
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw DomainError("prune threshold must be finite and >= 0");
  std::vector<Conjunction> kept;
  for (std::size_t i = 0; i < formula.size(); ++i) {
    if (stats.evaluations[i] > 0 && stats.ratio(i) >= threshold) kept.push_back(formula[i]);
  }
  return DnfFormula(formula.dim(), std::move(kept));
}

std::string render_text(const DnfFormula& formula) {
  if (formula.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < formula.size(); ++i) {
    if (i > 0) out += " \\/ ";
    const auto& lits = formula[i].literals();
    for (std::size_t n = 0; n < lits.size(); ++n) {
      if (n > 0) out += " /\\ ";
      out += "phi" + std::to_string(lits[n].dim) + " ";
      out += op_symbol(lits[n].op);
      out += " " + format_double(lits[n].threshold);
    }
  }
  return out;
}

DnfFormula parse_text(std::string_view text, std::optional<std::size_t> k) { return Parser(text).parse(k); }

std::string formula_to_json(const DnfFormula& formula) {
  json j;
  j["k"] = formula.dim();
  j["conjunctions"] = json::array();
  for (const auto& c : formula.conjunctions()) {
    json lits = json::array();
    for (const auto& l : c.literals()) {
      lits.push_back({{"dim", l.dim}, {"op", std::string(op_symbol(l.op))}, {"threshold", l.threshold}});
    }
    j["conjunctions"].push_back({{"literals", std::move(lits)}});
  }
  return j.dump(2) + "\n";
}

DnfFormula formula_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("formula JSON: ") + e.what());
  }
  try {
    std::vector<Conjunction> conjunctions;
    for (const auto& c : j.at("conjunctions")) {
      std::vector<Literal> lits;
      for (const auto& l : c.at("literals")) {
        lits.push_back({l.at("dim").get<std::size_t>(), op_from_symbol(l.at("op").get<std::string>()),
                        l.at("threshold").get<double>()});
      }
      conjunctions.emplace_back(std::move(lits));
    }
    return DnfFormula(j.at("k").get<std::size_t>(), std::move(conjunctions));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("formula JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw SchemaError(std::string("formula JSON: ") + e.what());
  } catch (const ParseError& e) {  // unknown op symbol
    throw SchemaError(std::string("formula JSON: ") + e.what());
  }
}

void save_formula(const std::filesystem::path& path, const DnfFormula& formula) {
  write_text_file(path, formula_to_json(formula));
}

DnfFormula load_formula(const std::filesystem::path& path) { return formula_from_json(read_text_file(path)); }

std::string stats_to_csv(const DnfFormula& formula, const ConjunctionStats& stats) {
  check_aligned(formula, stats);
  std::string out = "conjunction_id,complexity,evaluations,violations,ratio\n";
  for (std::size_t i = 0; i < formula.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(formula[i].complexity()) + "," +
           std::to_string(stats.evaluations[i]) + "," + std::to_string(stats.violations[i]) + "," +
           format_double(stats.ratio(i)) + "\n";
  }
  return out;
}

ConjunctionStats parse_stats_csv(std::string_view text) {
  ConjunctionStats stats;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "conjunction_id,complexity,evaluations,violations,ratio") {
        throw ParseError("stats CSV line 1: unexpected header");
      }
      header = false;
      continue;
    }
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto where = "stats CSV line " + std::to_string(line_no);
    if (cells.size() != 5) throw ParseError(where + ": expected 5 fields");
    auto as_count = [&](std::string_view cell) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ParseError(where + ": malformed count");
      return v;
    };
    if (as_count(cells[0]) != stats.size()) throw SchemaError(where + ": conjunction ids must run 0, 1, ...");
    const auto evaluations = as_count(cells[2]);
    const auto violations = as_count(cells[3]);
    if (violations > evaluations) throw SchemaError(where + ": violations exceed evaluations");
    stats.evaluations.push_back(evaluations);
    stats.violations.push_back(violations);
  }
  if (header) throw ParseError("stats CSV: missing header");
  return stats;
}

void save_stats_csv(const std::filesystem::path& path, const DnfFormula& formula, const ConjunctionStats& stats) {
  write_text_file(path, stats_to_csv(formula, stats));
}

ConjunctionStats load_stats_csv(const std::filesystem::path& path) { return parse_stats_csv(read_text_file(path)); }

}  // namespace treecon
