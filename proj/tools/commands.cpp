#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "treecon/crl.hpp"
#include "treecon/error.hpp"
#include "treecon/features.hpp"
#include "treecon/formula.hpp"
#include "treecon/navenv.hpp"
#include "treecon/octree.hpp"
#include "treecon/svg.hpp"

namespace treecon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<std::size_t> depth;
  std::string out;
};

RunConfig resolve(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.threshold) c.threshold = *g.threshold;
  if (g.depth) c.tree.max_depth = *g.depth;
  if (!g.out.empty()) c.paths.out = g.out;
  c.validate();
  return c;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Output file named by --out, or `fallback` inside paths.out.
fs::path out_file(const Globals& g, const RunConfig& c, const char* fallback) {
  fs::path p = g.out.empty() ? fs::path(c.paths.out) / fallback : fs::path(g.out);
  ensure_dir(p.parent_path());
  return p;
}

fs::path out_dir(const RunConfig& c) {
  fs::path d(c.paths.out);
  ensure_dir(d);
  return d;
}

void snapshot(const fs::path& dir, const RunConfig& c) {
  write_text_file((dir.empty() ? fs::path(".") : dir) / "config.json", run_config_to_json(c));
}

std::vector<Trajectory> trajectories_for(const RunConfig& c) {
  if (!c.paths.trajectories.empty()) return load_trajectories(c.paths.trajectories);
  return nav::generate_expert(c.expert.count, c.expert.noise, c.seed, c.nav);
}

// .csv inputs are datasets; anything else is trajectory JSONL.
Dataset dataset_from(const fs::path& input, const RunConfig& c) {
  if (input.extension() == ".csv") return load_dataset_csv(input);
  const auto trajs = load_trajectories(input);
  return build_dataset(trajs, c.feature_map);
}

json box_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

json leaves_json(const Tree& tree) {
  json arr = json::array();
  for (const auto& b : leaf_boxes(tree)) arr.push_back(box_json(b));
  return arr;
}

json eval_json(const crl::EvalResult& e) {
  return {{"mean_reward", e.mean_reward},
          {"mean_formula_cost", e.mean_formula_cost},
          {"mean_gt_cost", e.mean_gt_cost},
          {"goal_rate", e.goal_rate}};
}

void save_formula_pair(const fs::path& json_path, const DnfFormula& f) {
  save_formula(json_path, f);
  fs::path text_path = json_path;
  text_path.replace_extension(".txt");
  write_text_file(text_path, render_text(f) + "\n");
}

void print(std::ostream& out, const json& j) { out << j.dump() << "\n"; }

int cmd_ingest(const Globals& g, const std::string& traj_path, std::ostream& out) {
  RunConfig c = resolve(g);
  // The flag lands in the config so the snapshot records it.
  if (!traj_path.empty()) c.paths.trajectories = traj_path;
  const fs::path dir = out_dir(c);
  const auto trajs = trajectories_for(c);
  const Dataset d = build_dataset(trajs, c.feature_map);
  save_trajectories(dir / "trajectories.jsonl", trajs);
  save_dataset_csv(dir / "dataset.csv", d);
  snapshot(dir, c);
  const auto b = feature_bounds(d);
  print(out, {{"trajectories", trajs.size()}, {"points", d.size()}, {"dim", d.dim()},
              {"bounds", {{"min", b.min}, {"max", b.max}}}});
  return kExitOk;
}

int cmd_fit(const Globals& g, const std::string& input, std::ostream& out) {
  const RunConfig c = resolve(g);
  const Dataset d = dataset_from(input, c);
  const Tree tree = build_tree(d, c.tree);
  const fs::path path = out_file(g, c, "tree.json");
  save_tree(path, tree);
  snapshot(path.parent_path(), c);
  print(out, {{"tree", path.string()}, {"depth", tree.depth()}, {"leaves", leaves_json(tree)}});
  return kExitOk;
}

int cmd_extract(const Globals& g, const std::string& tree_path, const std::string& dataset_path,
                std::ostream& out) {
  const RunConfig c = resolve(g);
  const Tree tree = load_tree(tree_path);
  const FeatureBounds bounds = dataset_path.empty() ? tree.bounds() : feature_bounds(dataset_from(dataset_path, c));
  const DnfFormula f = extract_formula(tree, bounds);
  const fs::path path = out_file(g, c, "formula.json");
  save_formula_pair(path, f);
  snapshot(path.parent_path(), c);
  print(out, {{"formula", path.string()}, {"conjunctions", f.size()}, {"text", render_text(f)}});
  return kExitOk;
}

int cmd_train(const Globals& g, const std::string& formula_path, std::ostream& out) {
  const RunConfig c = resolve(g);
  const DnfFormula f = load_formula(formula_path);
  const nav::NavEnv env(c.nav);
  const auto result = crl::train(env, f, c.train_config());
  const fs::path dir = out_dir(c);
  write_text_file(dir / "curves.csv", crl::curves_to_csv(result.curves));
  save_stats_csv(dir / "stats.csv", f, result.stats);
  crl::save_policy(dir / "policy.json", result.policy);
  snapshot(dir, c);
  const auto& last = result.curves.back();
  print(out, {{"epochs", result.curves.size()},
              {"final", {{"mean_reward", last.mean_reward},
                         {"mean_formula_cost", last.mean_formula_cost},
                         {"mean_gt_cost", last.mean_gt_cost},
                         {"lambda", last.lambda},
                         {"goal_rate", last.goal_rate}}}});
  return kExitOk;
}

int cmd_prune(const Globals& g, const std::string& formula_path, const std::string& stats_path, std::ostream& out) {
  const RunConfig c = resolve(g);
  const DnfFormula f = load_formula(formula_path);
  const ConjunctionStats stats = load_stats_csv(stats_path);
  const DnfFormula kept = prune(f, stats, c.threshold);
  const fs::path path = out_file(g, c, "pruned.json");
  save_formula_pair(path, kept);
  snapshot(path.parent_path(), c);
  print(out, {{"formula", path.string()},
              {"removed", f.size() - kept.size()},
              {"kept", kept.size()},
              {"text", render_text(kept)}});
  return kExitOk;
}

int cmd_eval(const Globals& g, const std::string& policy_path, const std::string& formula_path, std::ostream& out) {
  const RunConfig c = resolve(g);
  const crl::Policy policy = crl::load_policy(policy_path);
  const DnfFormula f = formula_path.empty() ? DnfFormula(2, {}) : load_formula(formula_path);
  const nav::NavEnv env(c.nav);
  const auto e = crl::evaluate_policy(env, policy, f, c.eval_episodes, c.seed);
  const fs::path dir = out_dir(c);
  json j = eval_json(e);
  j["episodes"] = c.eval_episodes;
  write_text_file(dir / "eval.json", j.dump(2) + "\n");
  snapshot(dir, c);
  print(out, j);
  return kExitOk;
}

int cmd_render(const Globals& g, const std::string& tree_path, const std::string& traj_path,
               const std::string& policy_path, std::ostream& out) {
  const RunConfig c = resolve(g);
  nav::Scene scene = nav::make_scene(c.nav);
  if (!tree_path.empty()) scene.leaves = leaf_boxes(load_tree(tree_path));
  if (!traj_path.empty()) {
    for (const auto& t : load_trajectories(traj_path)) scene.paths.push_back(nav::path_of(t));
  }
  if (!policy_path.empty()) {
    const nav::NavEnv env(c.nav);
    const auto ep = crl::rollout_greedy(env, crl::load_policy(policy_path), DnfFormula(2, {}));
    scene.paths.push_back(ep.positions);
  }
  const fs::path path = out_file(g, c, "scene.svg");
  write_text_file(path, nav::render_svg(scene));
  snapshot(path.parent_path(), c);
  print(out, {{"svg", path.string()}, {"leaves", scene.leaves.size()}, {"paths", scene.paths.size()}});
  return kExitOk;
}

int cmd_pipeline(const Globals& g, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig c = resolve(g);
  const fs::path dir = out_dir(c);
  snapshot(dir, c);

  const auto trajs = trajectories_for(c);
  const Dataset d = build_dataset(trajs, c.feature_map);
  save_trajectories(dir / "trajectories.jsonl", trajs);
  save_dataset_csv(dir / "dataset.csv", d);

  const Tree tree = build_tree(d, c.tree);
  save_tree(dir / "tree.json", tree);
  const DnfFormula formula = extract_formula(tree, feature_bounds(d));
  save_formula_pair(dir / "formula.json", formula);

  const nav::NavEnv env(c.nav);
  const auto trained = crl::train(env, formula, c.train_config());
  write_text_file(dir / "curves.csv", crl::curves_to_csv(trained.curves));
  save_stats_csv(dir / "stats.csv", formula, trained.stats);
  crl::save_policy(dir / "policy.json", trained.policy);

  const DnfFormula pruned = prune(formula, trained.stats, c.threshold);
  save_formula_pair(dir / "pruned.json", pruned);

  const auto e = crl::evaluate_policy(env, trained.policy, pruned, c.eval_episodes, c.seed);
  json ej = eval_json(e);
  ej["episodes"] = c.eval_episodes;
  write_text_file(dir / "eval.json", ej.dump(2) + "\n");

  nav::Scene scene = nav::make_scene(c.nav);
  scene.leaves = leaf_boxes(tree);
  for (const auto& t : trajs) scene.paths.push_back(nav::path_of(t));
  scene.paths.push_back(crl::rollout_greedy(env, trained.policy, pruned).positions);
  write_text_file(dir / "scene.svg", nav::render_svg(scene));

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  print(out, {{"out", dir.string()},
              {"leaves", leaves_json(tree)},
              {"conjunctions", formula.size()},
              {"pruned", render_text(pruned)},
              {"eval", ej},
              {"seconds", seconds}});
  return kExitOk;
}

int fail(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn, train against and prune tree-derived constraint formulas", "treecon"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "RunConfig JSON; missing keys keep their defaults");
  app.add_option("--seed", g.seed, "Overrides the config seed");
  app.add_option("--threshold", g.threshold, "Pruning ratio threshold (default 0.001)");
  app.add_option("--depth", g.depth, "Overrides tree.max_depth");
  app.add_option("--out", g.out, "Output file or directory, depending on the command");

  std::string in1, in2, traj_path, tree_path, policy_path;

  auto* ingest = app.add_subcommand("ingest", "Load or generate expert trajectories; write trajectories and dataset");
  ingest->add_option("--trajectories", traj_path, "Trajectory JSONL; expert data is generated when omitted");

  auto* fit = app.add_subcommand("fit", "Build a tree from trajectory JSONL or dataset CSV");
  fit->add_option("input", in1)->required();

  auto* extract = app.add_subcommand("extract", "Turn a tree into a DNF cost formula");
  extract->add_option("tree", in1)->required();
  extract->add_option("dataset", in2, "Trajectories or dataset giving the feature bounds; tree bounds otherwise");

  auto* train = app.add_subcommand("train", "Train a policy against a cost formula");
  train->add_option("formula", in1)->required();

  auto* prune_cmd = app.add_subcommand("prune", "Drop conjunctions rarely violated during training");
  prune_cmd->add_option("formula", in1)->required();
  prune_cmd->add_option("stats", in2)->required();

  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a trained policy");
  eval->add_option("policy", in1)->required();
  eval->add_option("formula", in2, "Formula for the reported formula cost; none counts as false");

  auto* render = app.add_subcommand("render", "Draw world, obstacle, leaf boxes and paths as SVG");
  render->add_option("--tree", tree_path);
  render->add_option("--trajectories", traj_path);
  render->add_option("--policy", policy_path, "Adds the policy's greedy path");

  auto* pipeline = app.add_subcommand("pipeline", "ingest, fit, extract, train, prune, eval and render in one go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, "usage", e.what(), kExitDomain);
  }

  try {
    if (ingest->parsed()) return cmd_ingest(g, traj_path, out);
    if (fit->parsed()) return cmd_fit(g, in1, out);
    if (extract->parsed()) return cmd_extract(g, in1, in2, out);
    if (train->parsed()) return cmd_train(g, in1, out);
    if (prune_cmd->parsed()) return cmd_prune(g, in1, in2, out);
    if (eval->parsed()) return cmd_eval(g, in1, in2, out);
    if (render->parsed()) return cmd_render(g, tree_path, traj_path, policy_path, out);
    if (pipeline->parsed()) return cmd_pipeline(g, out);
  } catch (const ParseError& e) {
    return fail(err, "parse", e.what(), kExitInput);
  } catch (const IoError& e) {
    return fail(err, "io", e.what(), kExitInput);
  } catch (const SchemaError& e) {
    return fail(err, "schema", e.what(), kExitDomain);
  } catch (const DomainError& e) {
    return fail(err, "domain", e.what(), kExitDomain);
  } catch (const ConfigError& e) {
    return fail(err, "config", e.what(), kExitDomain);
  } catch (const UsageError& e) {
    return fail(err, "usage", e.what(), kExitDomain);
  } catch (const DivergenceError& e) {
    return fail(err, "divergence", e.what(), kExitDivergence);
  }
  return fail(err, "usage", "no subcommand given", kExitDomain);
}

}  // namespace treecon::cli
