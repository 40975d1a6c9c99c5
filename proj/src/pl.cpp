#include "nullot/pl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nullot {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Index of the piece containing g: largest i with x[i] <= g, clamped to [0, n-2].
Eigen::Index piece_index(const ArrayXd& x, double g) {
  const double* begin = x.data();
  const double* end = x.data() + x.size();
  Eigen::Index i = std::upper_bound(begin, end, g) - begin - 1;
  if (i < 0) i = 0;
  if (i > x.size() - 2) i = x.size() - 2;
  return i;
}
}  // namespace

double log_linear_integral(double h0, double h1, double len) {
  if (len <= 0.0) return 0.0;
  const double hi = std::max(h0, h1);
  if (hi <= 0.0) return -kInf;
  if (std::abs(h1 - h0) <= 1e-9 * hi) {
    const double mid = 0.5 * (h0 + h1);
    return mid > 0.0 ? len * std::log(mid) : -kInf;
  }
  // antiderivative of log along the piece: (h log h - h) / slope
  return len * (xlogx(h1) - h1 - xlogx(h0) + h0) / (h1 - h0);
}

double pl_eval_line(const PiecewiseLinear& f, double g) {
  const Eigen::Index i = piece_index(f.x, g);
  const double t = (g - f.x[i]) / (f.x[i + 1] - f.x[i]);
  return f.y[i] + t * (f.y[i + 1] - f.y[i]);
}

double pl_eval(const PiecewiseLinear& f, double g) { return std::max(pl_eval_line(f, g), 0.0); }

double pl_right_slope(const PiecewiseLinear& f, double g) {
  Eigen::Index i = piece_index(f.x, g);
  // at an interior knot the piece to the right owns the slope
  if (g >= f.x[i + 1] && i + 2 < f.x.size()) ++i;
  return (f.y[i + 1] - f.y[i]) / (f.x[i + 1] - f.x[i]);
}

namespace {

// Integral over [lo,hi] assumed inside one (possibly extrapolated) piece i,
// clamping the linear extension at its zero crossing.
double piece_integral_clamped(const PiecewiseLinear& f, Eigen::Index i, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double m = (f.y[i + 1] - f.y[i]) / (f.x[i + 1] - f.x[i]);
  auto val = [&](double g) { return f.y[i] + m * (g - f.x[i]); };
  double vlo = val(lo), vhi = val(hi);
  if (vlo >= 0.0 && vhi >= 0.0) return 0.5 * (vlo + vhi) * (hi - lo);
  if (vlo < 0.0 && vhi < 0.0) return 0.0;
  const double gz = f.x[i] + (0.0 - f.y[i]) / m;  // zero crossing
  if (vlo < 0.0) return 0.5 * vhi * (hi - gz);
  return 0.5 * vlo * (gz - lo);
}

}  // namespace

double pl_integral(const PiecewiseLinear& f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const Eigen::Index n = f.x.size();
  double acc = 0.0;
  // left extrapolated part
  if (lo < f.x[0]) {
    acc += piece_integral_clamped(f, 0, lo, std::min(hi, f.x[0]));
  }
  // interior
  double a = std::max(lo, f.x[0]);
  double b = std::min(hi, f.x[n - 1]);
  if (a < b) {
    Eigen::Index i = piece_index(f.x, a);
    while (a < b) {
      const double seg_hi = std::min(b, f.x[i + 1]);
      acc += piece_integral_clamped(f, i, a, seg_hi);
      a = seg_hi;
      ++i;
      if (i > n - 2) break;
    }
  }
  // right extrapolated part
  if (hi > f.x[n - 1]) {
    acc += piece_integral_clamped(f, n - 2, std::max(lo, f.x[n - 1]), hi);
  }
  return acc;
}

double pl_log_integral(const PiecewiseLinear& f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const Eigen::Index n = f.x.size();
  double acc = 0.0;
  double a = lo;
  Eigen::Index i = piece_index(f.x, a);
  while (a < hi) {
    const double seg_hi = (i >= n - 2) ? hi : std::min(hi, f.x[i + 1]);
    if (seg_hi > a) {
      const double m = (f.y[i + 1] - f.y[i]) / (f.x[i + 1] - f.x[i]);
      const double h0 = std::max(f.y[i] + m * (a - f.x[i]), 0.0);
      const double h1 = std::max(f.y[i] + m * (seg_hi - f.x[i]), 0.0);
      const double piece = log_linear_integral(h0, h1, seg_hi - a);
      if (piece == -kInf) return -kInf;
      acc += piece;
    }
    a = seg_hi;
    if (i < n - 2) ++i;
    if (a >= hi) break;
  }
  return acc;
}

PlCumulative pl_cumulative(const PiecewiseLinear& f) {
  const Eigen::Index n = f.x.size();
  PlCumulative c;
  c.mass = ArrayXd::Zero(n);
  c.log_mass = ArrayXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double len = f.x[i + 1] - f.x[i];
    c.mass[i + 1] = c.mass[i] + 0.5 * (f.y[i] + f.y[i + 1]) * len;
    const double lg = log_linear_integral(f.y[i], f.y[i + 1], len);
    if (lg == -kInf) c.log_finite = false;
    c.log_mass[i + 1] = c.log_mass[i] + lg;
  }
  return c;
}

namespace {

// Split [lo,hi] into (partial piece | knot-aligned run | partial piece) and
// combine cached prefix values with exact partial-piece integrals.
template <typename PieceFn>
double cached_window(const PiecewiseLinear& f, const ArrayXd& prefix, double lo, double hi,
                     PieceFn piece) {
  const Eigen::Index n = f.x.size();
  if (hi <= lo) return 0.0;
  if (lo < f.x[0] || hi > f.x[n - 1] || !std::isfinite(prefix[n - 1])) {
    return piece(lo, hi);  // extrapolation or -inf in cache: slow exact path
  }
  const Eigen::Index i = piece_index(f.x, lo);
  const Eigen::Index j = piece_index(f.x, hi);
  if (i == j) return piece(lo, hi);
  double acc = piece(lo, f.x[i + 1]);
  acc += prefix[j] - prefix[i + 1];
  acc += piece(f.x[j], hi);
  return acc;
}

}  // namespace

double pl_integral_cached(const PiecewiseLinear& f, const PlCumulative& c, double lo, double hi) {
  return cached_window(f, c.mass, lo, hi,
                       [&](double a, double b) { return pl_integral(f, a, b); });
}

double pl_log_integral_cached(const PiecewiseLinear& f, const PlCumulative& c, double lo,
                              double hi) {
  if (!c.log_finite) return pl_log_integral(f, lo, hi);
  return cached_window(f, c.log_mass, lo, hi,
                       [&](double a, double b) { return pl_log_integral(f, a, b); });
}

double QuantileGrid::position(double u) const {
  if (cells.empty()) return 0.0;
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  std::size_t i = (it == cum.begin()) ? 0 : (it - cum.begin() - 1);
  if (i >= cells.size()) i = cells.size() - 1;
  const MassCell& cell = cells[i];
  const double frac = std::clamp((u - cum[i]) / cell.mass, 0.0, 1.0);
  return cell.lo + frac * (cell.hi - cell.lo);
}

QuantileGrid make_quantile_grid(std::vector<MassCell> cells) {
  std::sort(cells.begin(), cells.end(),
            [](const MassCell& a, const MassCell& b) { return a.lo < b.lo; });
  QuantileGrid q;
  q.cum.push_back(0.0);
  for (const MassCell& c : cells) {
    if (c.mass <= 0.0) continue;
    q.cells.push_back(c);
    q.cum.push_back(q.cum.back() + c.mass);
  }
  return q;
}

Overlay overlay_blocks(const std::vector<MassCell>& blocks, double width_floor) {
  Overlay out;
  std::vector<double> edges;
  std::vector<const MassCell*> wide;
  for (const MassCell& b : blocks) {
    if (b.mass <= 0.0) continue;
    if (b.hi - b.lo <= width_floor) {
      out.atoms.emplace_back(0.5 * (b.lo + b.hi), b.mass);
    } else {
      wide.push_back(&b);
      edges.push_back(b.lo);
      edges.push_back(b.hi);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return b - a <= 0.0; }),
              edges.end());
  if (edges.size() < 2) return out;
  out.edges = Eigen::Map<const ArrayXd>(edges.data(), edges.size());
  out.values = ArrayXd::Zero(out.edges.size() - 1);
  for (const MassCell* b : wide) {
    const double dens = b->mass / (b->hi - b->lo);
    const auto lo_it = std::lower_bound(edges.begin(), edges.end(), b->lo);
    for (std::size_t i = lo_it - edges.begin(); i + 1 < edges.size() && edges[i] < b->hi; ++i) {
      out.values[i] += dens;
    }
  }
  return out;
}

}  // namespace nullot
