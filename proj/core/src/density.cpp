#include "treecon/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "treecon/error.hpp"

namespace treecon {

namespace {

constexpr double kKernelCutoff = 8.0;  // exp(-32) is far below double noise of the sum
constexpr double kMinSideShare = 0.05;
constexpr double kShiftBandwidths = 0.25;

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double gini_term(double t, double o) { return (t + o) > 0.0 ? t * o / (t + o) : 0.0; }

}  // namespace

std::size_t IntervalSet::total_count() const {
  std::size_t n = 0;
  for (const auto& iv : intervals) n += iv.count;
  return n;
}

std::size_t IntervalSet::locate(double x) const {
  for (std::size_t n = 0; n < intervals.size(); ++n) {
    if (x >= intervals[n].lo && x <= intervals[n].hi) return n;
  }
  return intervals.size();
}

double bandwidth_silverman(std::span<const double> samples) {
  const auto n = samples.size();
  if (n < 2) throw DomainError("bandwidth needs at least two samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 1e-3 * (sorted.back() - sorted.front() + 1.0);

  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DensityCurve kde_estimate(std::span<const double> samples, double bandwidth, std::size_t grid_size) {
  if (samples.empty()) throw DomainError("kde_estimate needs at least one sample");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw DomainError("bandwidth must be positive");
  if (grid_size < 16) throw DomainError("grid size must be at least 16");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front() - 3.0 * bandwidth;
  const double hi = sorted.back() + 3.0 * bandwidth;
  const double dx = (hi - lo) / static_cast<double>(grid_size - 1);

  DensityCurve curve;
  curve.bandwidth = bandwidth;
  curve.grid.resize(grid_size);
  curve.density.assign(grid_size, 0.0);
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double x = g + 1 == grid_size ? hi : lo + dx * static_cast<double>(g);
    curve.grid[g] = x;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - kKernelCutoff * bandwidth);
    const auto last = std::upper_bound(first, sorted.end(), x + kKernelCutoff * bandwidth);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / bandwidth;
      sum += std::exp(-0.5 * u * u);
    }
    curve.density[g] = sum * norm;
  }
  return curve;
}

std::vector<std::size_t> detect_modes(const DensityCurve& curve, double rel_floor) {
  const auto& d = curve.density;
  std::vector<std::size_t> modes;
  if (d.empty()) return modes;
  const auto peak_it = std::max_element(d.begin(), d.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) return modes;
  const double floor = rel_floor * peak;

  std::size_t i = 0;
  while (i < d.size()) {
    std::size_t j = i;
    while (j + 1 < d.size() && d[j + 1] == d[i]) ++j;
    const bool has_left = i > 0;
    const bool has_right = j + 1 < d.size();
    const bool above_left = !has_left || d[i - 1] < d[i];
    const bool above_right = !has_right || d[j + 1] < d[i];
    if ((has_left || has_right) && above_left && above_right && d[i] >= floor) {
      modes.push_back((i + j) / 2);
    }
    i = j + 1;
  }
  if (modes.empty()) modes.push_back(static_cast<std::size_t>(peak_it - d.begin()));
  return modes;
}

std::vector<std::size_t> merge_shallow_modes(const DensityCurve& curve, std::span<const std::size_t> modes,
                                             double valley_ratio) {
  std::vector<std::size_t> out(modes.begin(), modes.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  const auto& d = curve.density;
  bool merged = true;
  while (merged && out.size() > 1) {
    merged = false;
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
      const auto a = out[k];
      const auto b = out[k + 1];
      double valley = std::min(d[a], d[b]);
      for (auto g = a + 1; g < b; ++g) valley = std::min(valley, d[g]);
      if (valley >= valley_ratio * std::min(d[a], d[b])) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(d[b] > d[a] ? k : k + 1));
        merged = true;
        break;
      }
    }
  }
  return out;
}

IntervalSet partition_intervals(std::span<const double> samples, const DensityCurve& curve,
                                std::span<const std::size_t> modes, std::size_t dim) {
  if (samples.empty()) throw DomainError("partition_intervals needs samples");
  if (modes.empty()) throw DomainError("partition_intervals needs at least one mode");
  std::vector<std::size_t> sorted_modes(modes.begin(), modes.end());
  std::sort(sorted_modes.begin(), sorted_modes.end());
  sorted_modes.erase(std::unique(sorted_modes.begin(), sorted_modes.end()), sorted_modes.end());

  const auto& d = curve.density;
  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < sorted_modes.size(); ++k) {
    const auto a = sorted_modes[k];
    const auto b = sorted_modes[k + 1];
    if (b == a + 1) {
      cuts.push_back(0.5 * (curve.grid[a] + curve.grid[b]));
      continue;
    }
    auto best = a + 1;
    for (auto g = a + 2; g < b; ++g) {
      if (d[g] < d[best]) best = g;
    }
    cuts.push_back(curve.grid[best]);
  }

  const auto segments = cuts.size() + 1;
  std::vector<double> lo(segments, std::numeric_limits<double>::infinity());
  std::vector<double> hi(segments, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> count(segments, 0);
  for (double x : samples) {
    const auto seg = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
    lo[seg] = std::min(lo[seg], x);
    hi[seg] = std::max(hi[seg], x);
    ++count[seg];
  }

  IntervalSet out;
  out.dim = dim;
  for (std::size_t s = 0; s < segments; ++s) {
    if (count[s] > 0) out.intervals.push_back({lo[s], hi[s], count[s]});
  }
  return out;
}

double impurity(const IntervalSet& intervals, double parent_lo, double parent_hi) {
  if (!(parent_hi > parent_lo)) throw DomainError("impurity needs a parent of positive width");
  const auto total = intervals.total_count();
  if (total == 0) throw DomainError("impurity needs at least one assigned sample");
  const double width = parent_hi - parent_lo;
  double sum = 0.0;
  for (const auto& iv : intervals.intervals) {
    const double t = static_cast<double>(iv.count) / static_cast<double>(total);
    const double o = (iv.hi - iv.lo) / width;
    sum += gini_term(t, o);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

IntervalSet refine_level_cuts(const IntervalSet& intervals, std::span<const double> sorted_samples,
                              double bandwidth, double parent_lo, double parent_hi, double min_gain) {
  if (!(parent_hi > parent_lo)) throw DomainError("refine_level_cuts needs a parent of positive width");
  const auto total = intervals.total_count();
  if (total == 0) return intervals;
  const double width = parent_hi - parent_lo;
  const double n_total = static_cast<double>(total);

  IntervalSet out;
  out.dim = intervals.dim;
  std::size_t begin = 0;
  for (const auto& iv : intervals.intervals) {
    const std::size_t end = begin + iv.count;
    const double t = static_cast<double>(iv.count) / n_total;
    const double before = gini_term(t, (iv.hi - iv.lo) / width);
    auto score = [&](std::size_t k, double cut) {
      const double t_left = static_cast<double>(k - begin) / n_total;
      return gini_term(t_left, (cut - iv.lo) / width) + gini_term(t - t_left, (iv.hi - cut) / width);
    };

    // Cut location: change point of a two-piece uniform model. Sharp at a density step,
    // where the flat impurity score is not. Each side keeps a minimum share of samples.
    const double n_iv = static_cast<double>(iv.count);
    const auto min_side = std::max<std::size_t>(2, static_cast<std::size_t>(kMinSideShare * n_iv));
    double best_ll = -std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (auto k = begin + min_side; k + min_side <= end; ++k) {
      if (sorted_samples[k] == sorted_samples[k - 1]) continue;
      const double cut = 0.5 * (sorted_samples[k - 1] + sorted_samples[k]);
      const double a = static_cast<double>(k - begin);
      const double b = n_iv - a;
      const double ll = a * std::log(a / (cut - iv.lo)) + b * std::log(b / (iv.hi - cut));
      if (ll > best_ll) {
        best_ll = ll;
        best_k = k;
      }
    }
    const double cut = best_k == 0 ? 0.0 : 0.5 * (sorted_samples[best_k - 1] + sorted_samples[best_k]);
    if (best_k == 0 || 2.0 * (before - score(best_k, cut)) < min_gain) {
      out.intervals.push_back(iv);
      begin = end;
      continue;
    }
    // Nudge a quarter bandwidth into the sparser piece so boundary stragglers of the
    // denser piece stay with it.
    double placed = cut;
    const double left_density = static_cast<double>(best_k - begin) / (cut - iv.lo);
    const double right_density = static_cast<double>(end - best_k) / (iv.hi - cut);
    const double shifted = left_density < right_density ? std::max(cut - kShiftBandwidths * bandwidth, iv.lo)
                                                        : std::min(cut + kShiftBandwidths * bandwidth, iv.hi);
    const auto first = sorted_samples.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = sorted_samples.begin() + static_cast<std::ptrdiff_t>(end);
    const auto k = static_cast<std::size_t>(std::lower_bound(first, last, shifted) - sorted_samples.begin());
    if (k > begin && k < end) {
      placed = shifted;
      best_k = k;
    }
    out.intervals.push_back({iv.lo, placed, best_k - begin});
    out.intervals.push_back({placed, iv.hi, end - best_k});
    begin = end;
  }
  return out;
}

IntervalSet close_narrow_gaps(const IntervalSet& intervals, double min_gap) {
  IntervalSet out = intervals;
  for (std::size_t n = 0; n + 1 < out.intervals.size(); ++n) {
    auto& left = out.intervals[n];
    auto& right = out.intervals[n + 1];
    if (right.lo > left.hi && right.lo - left.hi < min_gap) {
      const double mid = 0.5 * (left.hi + right.lo);
      left.hi = mid;
      right.lo = mid;
    }
  }
  return out;
}

double integrate_trapezoid(const DensityCurve& curve) {
  double sum = 0.0;
  for (std::size_t g = 1; g < curve.grid.size(); ++g) {
    sum += 0.5 * (curve.density[g] + curve.density[g - 1]) * (curve.grid[g] - curve.grid[g - 1]);
  }
  return sum;
}

}  // namespace treecon
