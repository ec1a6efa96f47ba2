#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "treecon/formula.hpp"
#include "treecon/navenv.hpp"

namespace treecon::crl {

inline constexpr std::size_t kGrid = 20;
inline constexpr std::size_t kCells = kGrid * kGrid;
inline constexpr std::size_t kActions = nav::kActionCount;

/// Grid cell of a position; x picks the column, y the row. Clamped to the grid.
std::size_t cell_of(nav::Vec2 position);

/// Softmax policy with one logit per (grid cell, action); temperature 1.
class Policy {
 public:
  Policy();
  /// Throws DomainError unless logits.size() == kCells * kActions and all are finite.
  explicit Policy(std::vector<double> logits);

  const std::vector<double>& logits() const { return logits_; }
  std::vector<double>& logits() { return logits_; }
  double logit(std::size_t cell, std::size_t action) const { return logits_[cell * kActions + action]; }

  std::array<double, kActions> probabilities(std::size_t cell) const;
  /// Highest-logit action; ties go to the lowest index.
  nav::Action greedy(std::size_t cell) const;

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<double> logits_;
};

struct TrainConfig {
  double alpha = 1.0;
  double policy_lr = 0.2;
  /// Slow dual step. Faster steps make the policy safe so early that the obstacle rule
  /// is barely ever violated and gets pruned.
  double lambda_lr = 0.005;
  double lambda_init = 0.0;
  /// Weight of the per-step policy entropy bonus; keeps the constraint boundary explored.
  double entropy_coef = 0.0;
  std::size_t episodes_per_epoch = 32;
  std::size_t epochs = 16000;
  std::uint64_t seed = 0;
  /// Keeps lambda at lambda_init; the unconstrained ablation.
  bool freeze_lambda = false;
  CountMode count_mode = CountMode::short_circuit;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// One sampled or greedy episode. Per-step vectors share one length T >= 1.
struct Episode {
  std::vector<std::size_t> cells;
  std::vector<nav::Action> actions;
  std::vector<double> rewards;
  std::vector<int> formula_costs;  // cost of the state each action was taken from
  std::vector<int> gt_costs;       // obstacle membership after each action
  std::vector<nav::Vec2> positions;  // T + 1 entries, start included
  double reward_return = 0.0;        // discounted
  double formula_return = 0.0;       // discounted
  double gt_cost = 0.0;              // discounted
  bool reached_goal = false;

  std::size_t length() const { return actions.size(); }
};

/// Samples one episode from the policy; the formula is evaluated on the pre-action
/// position and, when `stats` is given, its counters are updated.
/// Throws DomainError when the formula is not two-dimensional.
Episode rollout(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula, ConjunctionStats* stats,
                std::uint64_t seed, CountMode mode = CountMode::short_circuit);
/// Argmax actions, no statistics.
Episode rollout_greedy(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula);

struct CurveRow {
  std::size_t epoch = 0;
  double mean_reward = 0.0;
  double mean_formula_cost = 0.0;
  double mean_gt_cost = 0.0;
  double lambda = 0.0;  // after this epoch's update
  double goal_rate = 0.0;
};

struct TrainResult {
  Policy policy;
  std::vector<CurveRow> curves;
  ConjunctionStats stats;
};

/// Per-step advantages: discounted return-to-go of r - lambda * c minus the epoch mean of
/// that quantity at the same time index.
std::vector<std::vector<double>> advantages(const std::vector<Episode>& batch, double lambda, double gamma);
/// Mean over episodes of sum_t [A_t log pi(a_t | s_t) + entropy_coef * H(pi(. | s_t))],
/// with the advantages held fixed.
double surrogate_objective(const Policy& policy, const std::vector<Episode>& batch,
                           const std::vector<std::vector<double>>& adv, double entropy_coef = 0.0);
/// Analytic gradient of surrogate_objective with respect to every logit.
std::vector<double> policy_gradient(const Policy& policy, const std::vector<Episode>& batch,
                                    const std::vector<std::vector<double>>& adv, double entropy_coef = 0.0);

/// Episodic Lagrangian policy gradient. Deterministic given config.seed.
/// Throws DivergenceError when a logit leaves [-1e3, 1e3].
TrainResult train(const nav::NavEnv& env, const DnfFormula& formula, const TrainConfig& config);

struct EvalResult {
  double mean_reward = 0.0;
  double mean_formula_cost = 0.0;
  double mean_gt_cost = 0.0;
  double goal_rate = 0.0;
};

/// Greedy evaluation. The environment and policy are deterministic, so every episode
/// repeats the first; the seed is accepted for interface symmetry.
EvalResult evaluate_policy(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula,
                           std::size_t episodes, std::uint64_t seed = 0);

std::string curves_to_csv(const std::vector<CurveRow>& curves);
std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);
void save_policy(const std::filesystem::path& path, const Policy& policy);
Policy load_policy(const std::filesystem::path& path);

}  // namespace treecon::crl
