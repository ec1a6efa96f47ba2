#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treecon {

/// Gaussian KDE sampled on a uniform grid.
struct DensityCurve {
  std::vector<double> grid;     // strictly increasing, uniform spacing
  std::vector<double> density;  // same length as grid, non-negative
  double bandwidth = 0.0;

  std::size_t size() const { return grid.size(); }
  double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;  // samples assigned to this interval

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted intervals along one dimension. Consecutive intervals never overlap
/// (hi_n <= lo_{n+1}); they may touch when the cut between them falls inside
/// densely sampled data.
struct IntervalSet {
  std::size_t dim = 0;
  std::vector<Interval> intervals;

  std::size_t size() const { return intervals.size(); }
  std::size_t total_count() const;
  /// Index of the interval holding x (closed bounds, first match), or size() if none.
  std::size_t locate(double x) const;
};

/// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^(-1/5). Uses sd alone when the IQR is
/// zero and falls back to 1e-3 * (max - min + 1) when sd is zero.
/// Throws DomainError for fewer than two samples.
double bandwidth_silverman(std::span<const double> samples);

/// Grid spans [min - 3h, max + 3h]. Throws DomainError if h <= 0, samples are empty or
/// grid_size < 16.
DensityCurve kde_estimate(std::span<const double> samples, double bandwidth, std::size_t grid_size = 256);

/// Strict local maxima (a flat-topped run counts once, at its middle) whose value is at
/// least rel_floor * max(density). Endpoints qualify when strictly above their only
/// neighbour. Falls back to the global argmax so any non-zero curve yields a mode.
std::vector<std::size_t> detect_modes(const DensityCurve& curve, double rel_floor);

/// Removes modes not separated from a neighbour by a valley dipping below
/// valley_ratio * min(peak heights); of each merged pair the taller peak survives.
std::vector<std::size_t> merge_shallow_modes(const DensityCurve& curve, std::span<const std::size_t> modes,
                                             double valley_ratio);

/// Cuts between consecutive modes at the leftmost density argmin strictly between them;
/// samples below a cut go left. Each non-empty segment becomes [min sample, max sample].
/// Throws DomainError for empty samples or no modes.
IntervalSet partition_intervals(std::span<const double> samples, const DensityCurve& curve,
                                std::span<const std::size_t> modes, std::size_t dim);

/// Split impurity in [0, 1], lower is better.
///
/// The node's samples are contrasted with an equally large population spread uniformly
/// over [parent_lo, parent_hi]. Each interval n holds a fraction t_n of the samples and
/// o_n = width_n / parent_width of the uniform population; gaps hold only uniform mass
/// and are pure. The weighted two-class Gini impurity is
///     sum_n t_n * o_n / (t_n + o_n),
/// normalised by its value 1/2 for the unsplit parent. A single interval spanning the
/// parent scores 1; intervals that hug dense data score close to 0.
///
/// Throws DomainError if parent_hi <= parent_lo or no interval holds a sample.
double impurity(const IntervalSet& intervals, double parent_lo, double parent_hi);

/// Adds at most one cut inside each interval where the sample density changes level,
/// provided the cut lowers impurity by at least min_gain. The cut sits at the sample
/// midpoint maximising the likelihood of a two-piece uniform density, each piece holding
/// at least 5% of the interval's samples, then moves a quarter bandwidth into the sparser
/// piece. The two halves touch at the cut.
/// `sorted_samples` must be ascending and grouped by interval.
IntervalSet refine_level_cuts(const IntervalSet& intervals, std::span<const double> sorted_samples,
                              double bandwidth, double parent_lo, double parent_hi, double min_gain);

/// Closes gaps narrower than min_gap: both neighbours are extended to meet at the
/// midpoint of the gap.
IntervalSet close_narrow_gaps(const IntervalSet& intervals, double min_gap);

/// Trapezoidal integral of the curve over its grid.
double integrate_trapezoid(const DensityCurve& curve);

}  // namespace treecon
