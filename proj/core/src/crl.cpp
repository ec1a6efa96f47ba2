#include "treecon/crl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "treecon/error.hpp"

namespace treecon::crl {

using nlohmann::json;

namespace {

constexpr double kCellWidth = 1.0 / static_cast<double>(kGrid);
constexpr double kLogitLimit = 1e3;

// splitmix64 finaliser; decorrelates per-episode seeds drawn from one run seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t grid_index(double v) {
  // The epsilon keeps lattice positions such as 0.1 + 12 * 0.05 in the cell they name.
  const double f = std::floor(v / kCellWidth + 1e-9);
  return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(kGrid - 1)));
}

double entropy(const std::array<double, kActions>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void check_formula(const DnfFormula& formula) {
  if (formula.dim() != 2) throw DomainError("the navigation task needs a two-dimensional formula");
}

template <typename Choose>
Episode run_episode(const nav::NavEnv& env, const DnfFormula& formula, ConjunctionStats* stats, CountMode mode,
                    Choose choose) {
  check_formula(formula);
  const double gamma = env.config().gamma;
  Episode ep;
  auto state = env.reset();
  ep.positions.push_back(state.position);
  double discount = 1.0;
  while (!state.done) {
    const auto cell = cell_of(state.position);
    const auto action = choose(cell);
    const double feature[2] = {state.position.x, state.position.y};
    const int c = evaluate(formula, feature, stats, mode).violated ? 1 : 0;
    const auto r = env.step(state, action);
    ep.cells.push_back(cell);
    ep.actions.push_back(action);
    ep.rewards.push_back(r.reward);
    ep.formula_costs.push_back(c);
    ep.gt_costs.push_back(r.gt_cost);
    ep.positions.push_back(r.next.position);
    ep.reward_return += discount * r.reward;
    ep.formula_return += discount * c;
    ep.gt_cost += discount * r.gt_cost;
    ep.reached_goal = r.reached_goal;
    discount *= gamma;
    state = r.next;
  }
  return ep;
}

}  // namespace

std::size_t cell_of(nav::Vec2 position) { return grid_index(position.x) + kGrid * grid_index(position.y); }

Policy::Policy() : logits_(kCells * kActions, 0.0) {}

Policy::Policy(std::vector<double> logits) : logits_(std::move(logits)) {
  if (logits_.size() != kCells * kActions) throw DomainError("policy needs one logit per (cell, action)");
  for (double v : logits_) {
    if (!std::isfinite(v)) throw DomainError("policy logits must be finite");
  }
}

std::array<double, kActions> Policy::probabilities(std::size_t cell) const {
  std::array<double, kActions> p{};
  const double* row = logits_.data() + cell * kActions;
  const double top = *std::max_element(row, row + kActions);
  double sum = 0.0;
  for (std::size_t a = 0; a < kActions; ++a) sum += p[a] = std::exp(row[a] - top);
  for (auto& v : p) v /= sum;
  return p;
}

nav::Action Policy::greedy(std::size_t cell) const {
  const double* row = logits_.data() + cell * kActions;
  return static_cast<nav::Action>(std::max_element(row, row + kActions) - row);
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (!(policy_lr > 0.0)) throw ConfigError("policy_lr must be positive");
  if (!(lambda_lr > 0.0)) throw ConfigError("lambda_lr must be positive");
  if (!(lambda_init >= 0.0)) throw ConfigError("lambda_init must be non-negative");
  if (episodes_per_epoch == 0) throw ConfigError("episodes_per_epoch must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(entropy_coef >= 0.0)) throw ConfigError("entropy_coef must be non-negative");
}

Episode rollout(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula, ConjunctionStats* stats,
                std::uint64_t seed, CountMode mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return run_episode(env, formula, stats, mode, [&](std::size_t cell) {
    const auto p = policy.probabilities(cell);
    const double u = unit(rng);
    double acc = 0.0;
    for (std::size_t a = 0; a + 1 < kActions; ++a) {
      acc += p[a];
      if (u < acc) return static_cast<nav::Action>(a);
    }
    return static_cast<nav::Action>(kActions - 1);
  });
}

Episode rollout_greedy(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula) {
  return run_episode(env, formula, nullptr, CountMode::short_circuit,
                     [&](std::size_t cell) { return policy.greedy(cell); });
}

std::vector<std::vector<double>> advantages(const std::vector<Episode>& batch, double lambda, double gamma) {
  std::vector<std::vector<double>> out(batch.size());
  std::vector<double> baseline_sum;
  std::vector<std::size_t> baseline_n;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto& ep = batch[e];
    auto& g = out[e];
    g.resize(ep.length());
    double acc = 0.0;
    for (std::size_t t = ep.length(); t-- > 0;) {
      acc = ep.rewards[t] - lambda * ep.formula_costs[t] + gamma * acc;
      g[t] = acc;
    }
    if (baseline_sum.size() < g.size()) {
      baseline_sum.resize(g.size(), 0.0);
      baseline_n.resize(g.size(), 0);
    }
    for (std::size_t t = 0; t < g.size(); ++t) {
      baseline_sum[t] += g[t];
      ++baseline_n[t];
    }
  }
  for (auto& g : out) {
    for (std::size_t t = 0; t < g.size(); ++t) g[t] -= baseline_sum[t] / static_cast<double>(baseline_n[t]);
  }
  return out;
}

double surrogate_objective(const Policy& policy, const std::vector<Episode>& batch,
                           const std::vector<std::vector<double>>& adv, double entropy_coef) {
  double total = 0.0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto& ep = batch[e];
    for (std::size_t t = 0; t < ep.length(); ++t) {
      const auto p = policy.probabilities(ep.cells[t]);
      total += adv[e][t] * std::log(p[static_cast<std::size_t>(ep.actions[t])]);
      if (entropy_coef != 0.0) total += entropy_coef * entropy(p);
    }
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> policy_gradient(const Policy& policy, const std::vector<Episode>& batch,
                                    const std::vector<std::vector<double>>& adv, double entropy_coef) {
  std::vector<double> grad(kCells * kActions, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto& ep = batch[e];
    for (std::size_t t = 0; t < ep.length(); ++t) {
      const auto cell = ep.cells[t];
      const auto p = policy.probabilities(cell);
      const double w = adv[e][t] * scale;
      const auto taken = static_cast<std::size_t>(ep.actions[t]);
      for (std::size_t a = 0; a < kActions; ++a) grad[cell * kActions + a] += w * ((a == taken ? 1.0 : 0.0) - p[a]);
      if (entropy_coef != 0.0) {
        // dH/dz_a = -p_a (log p_a + H)
        const double h = entropy(p);
        for (std::size_t a = 0; a < kActions; ++a) {
          if (p[a] > 0.0) grad[cell * kActions + a] -= entropy_coef * scale * p[a] * (std::log(p[a]) + h);
        }
      }
    }
  }
  return grad;
}

TrainResult train(const nav::NavEnv& env, const DnfFormula& formula, const TrainConfig& config) {
  config.validate();
  check_formula(formula);
  TrainResult result;
  result.stats = ConjunctionStats(formula.size());
  double lambda = config.lambda_init;
  const double gamma = env.config().gamma;
  const double n = static_cast<double>(config.episodes_per_epoch);

  std::vector<Episode> batch(config.episodes_per_epoch);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    CurveRow row;
    row.epoch = epoch;
    std::size_t reached = 0;
    for (std::size_t e = 0; e < config.episodes_per_epoch; ++e) {
      const auto seed = mix(config.seed ^ mix(epoch * config.episodes_per_epoch + e));
      batch[e] = rollout(env, result.policy, formula, &result.stats, seed, config.count_mode);
      row.mean_reward += batch[e].reward_return / n;
      row.mean_formula_cost += batch[e].formula_return / n;
      row.mean_gt_cost += batch[e].gt_cost / n;
      reached += batch[e].reached_goal ? 1 : 0;
    }
    row.goal_rate = static_cast<double>(reached) / n;

    const auto adv = advantages(batch, lambda, gamma);
    const auto grad = policy_gradient(result.policy, batch, adv, config.entropy_coef);
    auto& logits = result.policy.logits();
    for (std::size_t i = 0; i < logits.size(); ++i) {
      logits[i] += config.policy_lr * grad[i];
      if (!(std::abs(logits[i]) <= kLogitLimit)) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ": logit " + std::to_string(i) +
                              " left [-1e3, 1e3]; lower policy_lr");
      }
    }

    if (!config.freeze_lambda) lambda = std::max(0.0, lambda + config.lambda_lr * (row.mean_formula_cost - config.alpha));
    row.lambda = lambda;
    result.curves.push_back(row);
  }
  return result;
}

EvalResult evaluate_policy(const nav::NavEnv& env, const Policy& policy, const DnfFormula& formula,
                           std::size_t episodes, std::uint64_t /*seed*/) {
  if (episodes == 0) throw DomainError("evaluate_policy needs at least one episode");
  EvalResult out;
  std::size_t reached = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto ep = rollout_greedy(env, policy, formula);
    out.mean_reward += ep.reward_return;
    out.mean_formula_cost += ep.formula_return;
    out.mean_gt_cost += ep.gt_cost;
    reached += ep.reached_goal ? 1 : 0;
  }
  const double n = static_cast<double>(episodes);
  out.mean_reward /= n;
  out.mean_formula_cost /= n;
  out.mean_gt_cost /= n;
  out.goal_rate = static_cast<double>(reached) / n;
  return out;
}

std::string curves_to_csv(const std::vector<CurveRow>& curves) {
  std::string out = "epoch,mean_reward,mean_formula_cost,mean_gt_cost,lambda,goal_rate\n";
  for (const auto& r : curves) {
    out += std::to_string(r.epoch) + "," + format_double(r.mean_reward) + "," + format_double(r.mean_formula_cost) +
           "," + format_double(r.mean_gt_cost) + "," + format_double(r.lambda) + "," + format_double(r.goal_rate) +
           "\n";
  }
  return out;
}

std::string policy_to_json(const Policy& policy) {
  json j;
  j["grid"] = kGrid;
  j["actions"] = kActions;
  j["logits"] = policy.logits();
  return j.dump() + "\n";
}

Policy policy_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("policy JSON: ") + e.what());
  }
  try {
    if (j.at("grid").get<std::size_t>() != kGrid || j.at("actions").get<std::size_t>() != kActions) {
      throw SchemaError("policy JSON: grid or action count does not match this build");
    }
    return Policy(j.at("logits").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("policy JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw SchemaError(std::string("policy JSON: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const Policy& policy) { write_text_file(path, policy_to_json(policy)); }

Policy load_policy(const std::filesystem::path& path) { return policy_from_json(read_text_file(path)); }

}  // namespace treecon::crl
