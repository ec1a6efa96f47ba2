// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "toy.hpp"
#include "treecon/crl.hpp"
#include "treecon/density.hpp"
#include "treecon/formula.hpp"
#include "treecon/navenv.hpp"
#include "treecon/octree.hpp"

using namespace treecon;
using treecon::testing::two_box_tree;
using treecon::testing::random_clusters;
using treecon::testing::random_point;
using treecon::testing::sample_toy_union;

namespace {

constexpr std::size_t kExperts = 20;
constexpr double kExpertNoise = 0.15;
constexpr double kThreshold = 0.001;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Report {
  int failures = 0;
  void line(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool box_close(const Box& got, const Box& want, double tol) {
  for (std::size_t j = 0; j < want.dim(); ++j)
    if (std::abs(got.lo[j] - want.lo[j]) > tol || std::abs(got.hi[j] - want.hi[j]) > tol) return false;
  return true;
}

struct PipelineRun {
  Dataset data;
  DnfFormula formula;
  std::string tree_json, formula_json, curves_csv;
  crl::TrainResult trained;
  DnfFormula pruned;
  crl::EvalResult eval;
  double seconds = 0.0;
};

TreeConfig toy_tree_config() {
  TreeConfig c;
  c.max_depth = 2;
  return c;
}

PipelineRun pipeline(std::uint64_t seed, bool freeze_lambda = false) {
  const auto t0 = Clock::now();
  PipelineRun run;
  run.data = build_dataset(nav::generate_expert(kExperts, kExpertNoise, seed), "identity_xy");
  const Tree tree = build_tree(run.data, toy_tree_config());
  run.formula = extract_formula(tree, feature_bounds(run.data));
  run.tree_json = tree_to_json(tree);
  run.formula_json = formula_to_json(run.formula);
  crl::TrainConfig tc;
  tc.seed = seed;
  tc.freeze_lambda = freeze_lambda;
  const nav::NavEnv env;
  run.trained = crl::train(env, run.formula, tc);
  run.curves_csv = crl::curves_to_csv(run.trained.curves);
  run.pruned = prune(run.formula, run.trained.stats, kThreshold);
  run.eval = crl::evaluate_policy(env, run.trained.policy, run.pruned, 100, seed);
  run.seconds = seconds_since(t0);
  return run;
}

void criterion1(Report& r) {
  const auto t0 = Clock::now();
  const Tree tree = build_tree(sample_toy_union(3000, 0), toy_tree_config());
  const double secs = seconds_since(t0);
  const auto boxes = leaf_boxes(tree);
  bool ok = boxes.size() == 2 && secs < 5.0;
  std::string detail = std::to_string(boxes.size()) + " leaves";
  if (boxes.size() == 2) {
    ok = ok && box_close(boxes[0], testing::kLowerLane, 0.03) && box_close(boxes[1], testing::kRightLane, 0.03);
    detail += fmt(", lower [%.3f,%.3f]x", boxes[0].lo[0], boxes[0].hi[0]) +
              fmt("[%.3f,%.3f]", boxes[0].lo[1], boxes[0].hi[1]) +
              fmt(", right [%.3f,%.3f]x", boxes[1].lo[0], boxes[1].hi[0]) +
              fmt("[%.3f,%.3f]", boxes[1].lo[1], boxes[1].hi[1]);
  }
  r.line(1, "toy safe-set recovery", ok, detail + fmt(", %.2fs", secs));
}

void criterion2(Report& r) {
  const DnfFormula expected = parse_text(
      "phi0 < 0.1 \\/ phi0 > 0.9 \\/ "
      "phi0 > 0.1 /\\ phi0 < 0.7 /\\ phi1 < 0.1 \\/ phi0 > 0.1 /\\ phi0 < 0.7 /\\ phi1 > 0.3 \\/ "
      "phi0 > 0.7 /\\ phi0 < 0.9 /\\ phi1 < 0.1 \\/ phi0 > 0.7 /\\ phi0 < 0.9 /\\ phi1 > 0.9 \\/ "
      "phi1 < 0.1 \\/ phi1 > 0.9",
      2);
  const DnfFormula got = extract_formula(two_box_tree(), FeatureBounds{{0.1, 0.1}, {0.9, 0.9}});
  r.line(2, "worked-formula reproduction", same_conjunctions(got, expected),
         std::to_string(got.size()) + " conjunctions: " + render_text(got));
}

void criterion3(Report& r) {
  std::mt19937_64 rng(2024);
  std::size_t disagreements = 0, checked = 0;
  for (unsigned s = 0; s < 10; ++s) {
    const Dataset d = random_clusters(1 + s % 4, 500, 100 + s);
    const Tree t = build_tree(d, TreeConfig{});
    const auto b = feature_bounds(d);
    const DnfFormula f = extract_formula(t, b);
    for (int i = 0; i < 10000; ++i, ++checked) {
      const auto p = random_point(b, 0.2, rng);
      if (evaluate(f, p).violated != !(contains(t, p) && b.contains(p))) ++disagreements;
    }
  }
  r.line(3, "formula/tree equivalence", disagreements == 0,
         std::to_string(disagreements) + " disagreements over " + std::to_string(checked) + " points");
}

void criterion4(Report& r, const PipelineRun& run) {
  const auto& p = run.pruned;
  bool ok = p.size() == 1 && run.seconds < 300.0;
  if (p.size() == 1) {
    const auto& ls = p[0].literals();
    ok = ok && ls.size() == 3 && ls[0].dim == 0 && ls[0].op == Op::Gt && std::abs(ls[0].threshold - 0.1) <= 0.03 &&
         ls[1].dim == 0 && ls[1].op == Op::Lt && std::abs(ls[1].threshold - 0.7) <= 0.03 && ls[2].dim == 1 &&
         ls[2].op == Op::Gt && std::abs(ls[2].threshold - 0.3) <= 0.03;
  }
  r.line(4, "pruning recovery", ok, "\"" + render_text(p) + "\"" + fmt(", pipeline %.1fs", run.seconds));
}

void criterion5(Report& r, const std::vector<PipelineRun>& safe, const std::vector<PipelineRun>& free) {
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < safe.size(); ++i) {
    const auto& s = safe[i].eval;
    const auto& f = free[i].eval;
    const bool seed_ok = s.goal_rate >= 0.9 && s.mean_gt_cost < 1.0 && f.mean_gt_cost > 0.0 &&
                         f.mean_gt_cost >= 5.0 * s.mean_gt_cost;
    ok = ok && seed_ok;
    detail += fmt("seed %.0f: goal %.2f gt %.3f vs frozen-lambda gt %.3f", static_cast<double>(i), s.goal_rate,
                  s.mean_gt_cost, f.mean_gt_cost);
    if (i + 1 < safe.size()) detail += "; ";
  }
  r.line(5, "safe-policy property", ok, detail);
}

void criterion6(Report& r, const PipelineRun& run) {
  std::size_t bad = 0;
  for (const auto& p : run.data.points()) bad += static_cast<std::size_t>(cost(run.formula, p));
  r.line(6, "expert consistency", bad == 0,
         std::to_string(bad) + " of " + std::to_string(run.data.size()) + " expert points violate");
}

void criterion7(Report& r) {
  const nav::NavEnv env;
  const DnfFormula f = parse_text("phi0 > 0.1 /\\ phi0 < 0.7 /\\ phi1 > 0.3");
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> logits(crl::kCells * crl::kActions);
  for (auto& v : logits) v = g(rng);
  const crl::Policy base(logits);
  std::vector<crl::Episode> batch;
  for (std::uint64_t s = 0; s < 16; ++s) batch.push_back(crl::rollout(env, base, f, nullptr, 500 + s));
  const auto adv = crl::advantages(batch, 0.8, env.config().gamma);
  const auto grad = crl::policy_gradient(base, batch, adv);

  std::vector<std::size_t> cells;
  for (const auto& ep : batch) cells.insert(cells.end(), ep.cells.begin(), ep.cells.end());
  std::uniform_int_distribution<std::size_t> pc(0, cells.size() - 1), pa(0, crl::kActions - 1);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::size_t idx = cells[pc(rng)] * crl::kActions + pa(rng);
    crl::Policy up = base, down = base;
    const double h = 1e-5;
    up.logits()[idx] += h;
    down.logits()[idx] -= h;
    const double fd = (crl::surrogate_objective(up, batch, adv) - crl::surrogate_objective(down, batch, adv)) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[idx]) / std::max(std::abs(fd), 1e-8));
  }
  r.line(7, "gradient check", worst <= 1e-3, fmt("max relative error %.2e over 10 coordinates", worst));
}

void criterion8(Report& r) {
  std::size_t curves = 0;
  double worst = 0.0;
  const auto check = [&](const DensityCurve& c) {
    ++curves;
    worst = std::max(worst, std::abs(integrate_trapezoid(c) - 1.0));
  };
  build_tree(sample_toy_union(3000, 0), TreeConfig{}, check);
  build_tree(build_dataset(nav::generate_expert(kExperts, kExpertNoise, 0), "identity_xy"), TreeConfig{}, check);
  for (unsigned s = 0; s < 5; ++s) build_tree(random_clusters(1 + s % 4, 500, s), TreeConfig{}, check);
  r.line(8, "KDE normalization", curves > 0 && worst <= 0.02,
         std::to_string(curves) + " curves, max |integral - 1| = " + fmt("%.2e", worst));
}

void criterion9(Report& r, const PipelineRun& a, const PipelineRun& b) {
  const bool tree = a.tree_json == b.tree_json, formula = a.formula_json == b.formula_json,
             curves = a.curves_csv == b.curves_csv;
  r.line(9, "determinism", tree && formula && curves,
         std::string("tree ") + (tree ? "same" : "differs") + ", formula " + (formula ? "same" : "differs") +
             ", curves " + (curves ? "same" : "differs"));
}

void criterion10(Report& r) {
  const Dataset d = sample_toy_union(3000, 0);
  const auto b = feature_bounds(d);
  std::mt19937_64 rng(10);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 100000; ++i) pts.push_back(random_point(b, 0.0, rng));
  const double box_volume = (b.max[0] - b.min[0]) * (b.max[1] - b.min[1]);
  std::vector<double> volume;
  for (std::size_t depth = 0; depth <= 4; ++depth) {
    TreeConfig c;
    c.max_depth = depth;
    const Tree t = build_tree(d, c);
    std::size_t inside = 0;
    for (const auto& p : pts) inside += contains(t, p) ? 1 : 0;
    volume.push_back(box_volume * static_cast<double>(inside) / static_cast<double>(pts.size()));
  }
  bool ok = true;
  std::string detail = "volumes";
  for (std::size_t i = 0; i < volume.size(); ++i) {
    detail += fmt(" %.4f", volume[i]);
    if (i > 0 && volume[i] > volume[i - 1] + 1e-3) ok = false;
  }
  r.line(10, "depth monotonicity", ok, detail + " for depth 0..4");
}

}  // namespace

int main() {
  Report r;
  criterion1(r);
  criterion2(r);
  criterion3(r);

  std::vector<PipelineRun> safe, free;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    safe.push_back(pipeline(seed));
    free.push_back(pipeline(seed, true));
  }
  criterion4(r, safe[0]);
  criterion5(r, safe, free);
  criterion6(r, safe[0]);
  criterion7(r);
  criterion8(r);
  criterion9(r, safe[0], pipeline(0));
  criterion10(r);
  return r.failures == 0 ? 0 : 1;
}
