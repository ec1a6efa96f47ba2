#include "run_config.hpp"

#include <cmath>
#include <optional>
#include <set>
#include <type_traits>

#include "json.hpp"
#include "treecon/error.hpp"
#include "treecon/features.hpp"

namespace treecon::cli {

using nlohmann::json;

namespace {

// Reads known keys of one JSON object and remembers them, so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) bad(key, "a boolean");
      out = it->get<bool>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) bad(key, "a non-negative integer");
      out = it->get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) bad(key, "a number");
      out = it->get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) bad(key, "a string");
      out = it->get<std::string>();
    } else {
      static_assert(std::is_same_v<T, nav::Vec2>);
      if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) bad(key, "[x, y]");
      out = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number()) bad(key, "a number or null");
    out = it->get<double>();
  }

  const json* sub(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown config key '" + prefix() + item.key() + "'");
    }
  }

 private:
  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }
  [[noreturn]] void bad(const char* key, const char* what) const {
    throw ConfigError("config key '" + prefix() + key + "' must be " + what);
  }

  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

const char* mode_name(CountMode m) { return m == CountMode::exhaustive ? "exhaustive" : "short_circuit"; }

json vec(nav::Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace

void RunConfig::validate() const {
  if (!has_feature_map(feature_map)) throw ConfigError("unknown feature map '" + feature_map + "'");
  if (expert.count == 0) throw ConfigError("expert.count must be positive");
  if (!(expert.noise >= 0.0) || !std::isfinite(expert.noise)) throw ConfigError("expert.noise must be >= 0");
  tree.validate();
  nav.validate();
  train.validate();
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw ConfigError("prune.threshold must be finite and >= 0");
  if (eval_episodes == 0) throw ConfigError("eval.episodes must be positive");
}

crl::TrainConfig RunConfig::train_config() const {
  crl::TrainConfig t = train;
  t.seed = seed;
  return t;
}

RunConfig run_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  RunConfig c;
  Section top(j, "");
  top.read("seed", c.seed);
  top.read("feature_map", c.feature_map);
  if (const json* s = top.sub("expert")) {
    Section e(*s, "expert");
    e.read("count", c.expert.count);
    e.read("noise", c.expert.noise);
    e.finish();
  }
  if (const json* s = top.sub("tree")) {
    Section t(*s, "tree");
    t.read("max_depth", c.tree.max_depth);
    t.read("min_samples", c.tree.min_samples);
    t.read("grid_size", c.tree.grid_size);
    t.read("rel_floor", c.tree.rel_floor);
    t.read("min_gain", c.tree.min_gain);
    t.read_optional("bandwidth", c.tree.bandwidth);
    t.read("valley_ratio", c.tree.valley_ratio);
    t.read("tie_tolerance", c.tree.tie_tolerance);
    t.finish();
  }
  if (const json* s = top.sub("nav")) {
    Section n(*s, "nav");
    n.read("start", c.nav.start);
    n.read("goal", c.nav.goal);
    n.read("goal_radius", c.nav.goal_radius);
    n.read("step_size", c.nav.step_size);
    n.read("max_steps", c.nav.max_steps);
    n.read("gamma", c.nav.gamma);
    n.read("goal_bonus", c.nav.goal_bonus);
    n.finish();
  }
  if (const json* s = top.sub("train")) {
    Section t(*s, "train");
    t.read("alpha", c.train.alpha);
    t.read("policy_lr", c.train.policy_lr);
    t.read("lambda_lr", c.train.lambda_lr);
    t.read("lambda_init", c.train.lambda_init);
    t.read("entropy_coef", c.train.entropy_coef);
    t.read("episodes_per_epoch", c.train.episodes_per_epoch);
    t.read("epochs", c.train.epochs);
    t.read("freeze_lambda", c.train.freeze_lambda);
    std::string mode = mode_name(c.train.count_mode);
    t.read("count_mode", mode);
    if (mode == "short_circuit") {
      c.train.count_mode = CountMode::short_circuit;
    } else if (mode == "exhaustive") {
      c.train.count_mode = CountMode::exhaustive;
    } else {
      throw ConfigError("train.count_mode must be short_circuit or exhaustive");
    }
    t.finish();
  }
  if (const json* s = top.sub("prune")) {
    Section p(*s, "prune");
    p.read("threshold", c.threshold);
    p.finish();
  }
  if (const json* s = top.sub("eval")) {
    Section e(*s, "eval");
    e.read("episodes", c.eval_episodes);
    e.finish();
  }
  if (const json* s = top.sub("paths")) {
    Section p(*s, "paths");
    p.read("trajectories", c.paths.trajectories);
    p.read("out", c.paths.out);
    p.finish();
  }
  top.finish();
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["feature_map"] = c.feature_map;
  j["expert"] = {{"count", c.expert.count}, {"noise", c.expert.noise}};
  j["tree"] = {{"max_depth", c.tree.max_depth},       {"min_samples", c.tree.min_samples},
               {"grid_size", c.tree.grid_size},       {"rel_floor", c.tree.rel_floor},
               {"min_gain", c.tree.min_gain},         {"valley_ratio", c.tree.valley_ratio},
               {"tie_tolerance", c.tree.tie_tolerance}};
  j["tree"]["bandwidth"] = c.tree.bandwidth ? json(*c.tree.bandwidth) : json(nullptr);
  j["nav"] = {{"start", vec(c.nav.start)},         {"goal", vec(c.nav.goal)},
              {"goal_radius", c.nav.goal_radius}, {"step_size", c.nav.step_size},
              {"max_steps", c.nav.max_steps},     {"gamma", c.nav.gamma},
              {"goal_bonus", c.nav.goal_bonus}};
  j["train"] = {{"alpha", c.train.alpha},
                {"policy_lr", c.train.policy_lr},
                {"lambda_lr", c.train.lambda_lr},
                {"lambda_init", c.train.lambda_init},
                {"entropy_coef", c.train.entropy_coef},
                {"episodes_per_epoch", c.train.episodes_per_epoch},
                {"epochs", c.train.epochs},
                {"freeze_lambda", c.train.freeze_lambda},
                {"count_mode", mode_name(c.train.count_mode)}};
  j["prune"] = {{"threshold", c.threshold}};
  j["eval"] = {{"episodes", c.eval_episodes}};
  j["paths"] = {{"trajectories", c.paths.trajectories}, {"out", c.paths.out}};
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from_json(read_text_file(path)); }

}  // namespace treecon::cli
