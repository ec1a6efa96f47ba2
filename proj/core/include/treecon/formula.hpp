#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treecon/features.hpp"
#include "treecon/octree.hpp"

namespace treecon {

enum class Op : std::uint8_t { Gt, Ge, Lt, Le };

std::string_view op_symbol(Op op);
/// Throws ParseError on anything but <, >, <=, >=.
Op op_from_symbol(std::string_view symbol);

struct Literal {
  std::size_t dim = 0;
  Op op = Op::Lt;
  double threshold = 0.0;

  bool holds(std::span<const double> point) const;

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Literals are normalised on construction: one literal per (dim, op), the tightest one,
/// sorted by dim and then lower bounds before upper bounds.
class Conjunction {
 public:
  /// Throws DomainError when empty or a threshold is not finite.
  explicit Conjunction(std::vector<Literal> literals);

  const std::vector<Literal>& literals() const { return literals_; }
  std::size_t complexity() const { return literals_.size(); }
  bool holds(std::span<const double> point) const;
  /// False when some dimension's lower and upper literals leave no admissible value.
  bool satisfiable() const;

  friend bool operator==(const Conjunction&, const Conjunction&) = default;

 private:
  std::vector<Literal> literals_;
};

/// Disjunction of conjunctions; true means the constraint is violated.
/// Conjunctions are kept in ascending complexity (stable), which is the evaluation order.
/// Immutable after construction.
class DnfFormula {
 public:
  DnfFormula() = default;
  /// Throws DomainError when k == 0 or a literal's dim >= k.
  DnfFormula(std::size_t k, std::vector<Conjunction> conjunctions);

  std::size_t dim() const { return k_; }
  std::size_t size() const { return conjunctions_.size(); }
  bool empty() const { return conjunctions_.empty(); }
  const std::vector<Conjunction>& conjunctions() const { return conjunctions_; }
  const Conjunction& operator[](std::size_t i) const { return conjunctions_[i]; }

  friend bool operator==(const DnfFormula&, const DnfFormula&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<Conjunction> conjunctions_;
};

/// True when both formulas hold the same conjunctions, ignoring conjunction order.
bool same_conjunctions(const DnfFormula& a, const DnfFormula& b);

/// Per-conjunction counters aligned with a formula. Per-worker instances combine with merge().
struct ConjunctionStats {
  std::vector<std::uint64_t> evaluations;
  std::vector<std::uint64_t> violations;

  ConjunctionStats() = default;
  explicit ConjunctionStats(std::size_t n) : evaluations(n, 0), violations(n, 0) {}

  std::size_t size() const { return evaluations.size(); }
  double ratio(std::size_t i) const;
  /// Throws DomainError on size mismatch.
  void merge(const ConjunctionStats& other);

  friend bool operator==(const ConjunctionStats&, const ConjunctionStats&) = default;
};

struct Evaluation {
  bool violated = false;
  std::optional<std::size_t> credited;
};

enum class CountMode : std::uint8_t {
  /// Stop at the first satisfied conjunction; only checked conjunctions are counted.
  short_circuit,
  /// Check every conjunction; every satisfied one records a violation. Credit still goes
  /// to the first satisfied conjunction.
  exhaustive,
};

/// Throws DomainError on dimension mismatch or stats not aligned with the formula.
Evaluation evaluate(const DnfFormula& formula, std::span<const double> point, ConjunctionStats* stats = nullptr,
                    CountMode mode = CountMode::short_circuit);
int cost(const DnfFormula& formula, std::span<const double> point, ConjunctionStats* stats = nullptr,
         CountMode mode = CountMode::short_circuit);

/// Gap rules of every split node plus two bound rules per dimension. Path literals are
/// strict, so a boundary value is never a violation. Unsatisfiable and duplicate
/// conjunctions are dropped. Throws DomainError when bounds and tree disagree in dimension.
DnfFormula extract_formula(const Tree& tree, const FeatureBounds& bounds);

/// Keeps conjunctions with evaluations > 0 and violations / evaluations >= threshold.
/// Throws DomainError on misaligned stats or a negative or non-finite threshold.
DnfFormula prune(const DnfFormula& formula, const ConjunctionStats& stats, double threshold);

/// `phi0 > 0.1 /\ phi0 < 0.7 \/ phi1 < 0.1`; "false" for the empty formula.
std::string render_text(const DnfFormula& formula);
/// Accepts the rendered form, optional parentheses around conjunctions and the Unicode
/// connectives. k defaults to one past the largest dimension mentioned (1 for "false").
/// Throws ParseError with the byte column on malformed input.
DnfFormula parse_text(std::string_view text, std::optional<std::size_t> k = std::nullopt);

std::string formula_to_json(const DnfFormula& formula);
DnfFormula formula_from_json(std::string_view text);
void save_formula(const std::filesystem::path& path, const DnfFormula& formula);
DnfFormula load_formula(const std::filesystem::path& path);

/// Header `conjunction_id,complexity,evaluations,violations,ratio`.
std::string stats_to_csv(const DnfFormula& formula, const ConjunctionStats& stats);
ConjunctionStats parse_stats_csv(std::string_view text);
void save_stats_csv(const std::filesystem::path& path, const DnfFormula& formula, const ConjunctionStats& stats);
ConjunctionStats load_stats_csv(const std::filesystem::path& path);

}  // namespace treecon
