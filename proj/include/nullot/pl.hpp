#pragma once

#include <Eigen/Dense>
#include <vector>

namespace nullot {

using Eigen::ArrayXd;

/// x*log(x) extended by continuity to 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Exact integral of log(h) over a linear piece h: [0,len] -> [h0,h1], h >= 0.
/// Returns -inf when the piece is identically zero.
double log_linear_integral(double h0, double h1, double len);

/// Piecewise-linear function on strictly increasing knots.
/// Evaluation extrapolates the first/last piece outside the knot span,
/// clamped at zero (densities stay non-negative).
struct PiecewiseLinear {
  ArrayXd x;  // knots, strictly increasing, size >= 2
  ArrayXd y;  // values at knots, y.size() == x.size()
};

double pl_eval(const PiecewiseLinear& f, double g);
/// Unclamped evaluation; the right choice for gauge maps, which may be
/// negative-valued.
double pl_eval_line(const PiecewiseLinear& f, double g);
/// Right derivative at g (slope of the piece containing g+).
double pl_right_slope(const PiecewiseLinear& f, double g);
/// Exact integral over [lo, hi] (lo <= hi), extrapolation rules as pl_eval.
double pl_integral(const PiecewiseLinear& f, double lo, double hi);
/// Exact integral of log(f) over [lo, hi] inside the knot span.
double pl_log_integral(const PiecewiseLinear& f, double lo, double hi);

/// Cumulative caches at knots; make repeated window integrals O(log n).
struct PlCumulative {
  ArrayXd mass;      // integral of f from x[0] to x[i]
  ArrayXd log_mass;  // integral of log f from x[0] to x[i]; may contain -inf
  bool log_finite = true;
};
PlCumulative pl_cumulative(const PiecewiseLinear& f);
double pl_integral_cached(const PiecewiseLinear& f, const PlCumulative& c, double lo, double hi);
double pl_log_integral_cached(const PiecewiseLinear& f, const PlCumulative& c, double lo,
                              double hi);

/// One support cell of a piecewise-constant measure: constant density mass/(hi-lo).
struct MassCell {
  double lo, hi, mass;
};

/// Sorted positive-mass cells with prefix sums; the quantile function is
/// piecewise affine with breakpoints at the prefix sums.
struct QuantileGrid {
  std::vector<MassCell> cells;
  std::vector<double> cum;  // size cells+1, cum[0]=0
  double total() const { return cum.empty() ? 0.0 : cum.back(); }
  /// Gauge position at cumulative mass u inside cell containing (u0,u1).
  double position(double u) const;
};

QuantileGrid make_quantile_grid(std::vector<MassCell> cells);

/// Overlay a family of constant-density blocks into a single piecewise-constant
/// density (edges/values). Zero-width blocks are returned separately as atoms.
struct Overlay {
  ArrayXd edges;   // cell edges, size m+1 (empty when no blocks)
  ArrayXd values;  // density per cell, size m
  std::vector<std::pair<double, double>> atoms;  // (position, mass)
};
Overlay overlay_blocks(const std::vector<MassCell>& blocks, double width_floor);

}  // namespace nullot
