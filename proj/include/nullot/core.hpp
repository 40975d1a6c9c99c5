#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nullot/pl.hpp"

namespace nullot {

using Eigen::ArrayXd;
using Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Gauge domain of one null generator. `b` may be +inf; a ray with a final
/// endpoint must have finite `b`.
struct GaugeInterval {
  double a = 0.0;
  double b = kInfinity;
  bool has_initial_point = false;
  bool has_final_point = false;
};

/// Piecewise-linear conditional density h_alpha in gauge coordinates.
/// Knots span [a, min(b, truncation)]; beyond the last knot the final linear
/// piece is extrapolated (clamped at zero).
struct RayDensity {
  ArrayXd knots;
  ArrayXd values;
};

/// One null generator with its quotient weight, gauge interval, density and
/// optional ambient embedding (one coordinate row per knot).
struct Ray {
  std::string id;
  double weight = 0.0;
  GaugeInterval interval;
  RayDensity density;
  std::optional<MatrixXd> embedding;

  // derived, filled by make_hypersurface
  PlCumulative cum;

  PiecewiseLinear pl() const { return {density.knots, density.values}; }
  double truncation() const { return density.knots[density.knots.size() - 1]; }
};

/// The triple (H, G, m) in ray-decomposed form: a quotient probability over
/// explicit generators plus an optional shared initial point (cone tip).
class SyntheticNullHypersurface {
 public:
  SyntheticNullHypersurface() = default;

  const std::vector<Ray>& rays() const { return rays_; }
  const Ray& ray(std::string_view id) const;
  int ray_index(std::string_view id) const;  // -1 when unknown
  const std::vector<std::string>& tip_rays() const { return tip_rays_; }
  bool has_tip() const { return !tip_rays_.empty(); }
  bool tip_attached(std::string_view id) const;
  std::optional<double> dimension_hint() const { return dimension_hint_; }

  friend SyntheticNullHypersurface make_hypersurface(std::vector<Ray> rays,
                                                     std::vector<std::string> tip_rays,
                                                     std::optional<double> dimension_hint);

 private:
  std::vector<Ray> rays_;
  std::vector<std::string> tip_rays_;
  std::optional<double> dimension_hint_;
  std::map<std::string, int, std::less<>> index_;
};

using SNH = SyntheticNullHypersurface;

/// Validates every stored invariant (unique ids, weights summing to 1 within
/// 1e-12, knot spans, non-negative densities, tip attachment) and freezes the
/// instance. Throws InputError on violation.
SNH make_hypersurface(std::vector<Ray> rays, std::vector<std::string> tip_rays = {},
                      std::optional<double> dimension_hint = std::nullopt);

/// A point of H: either on a ray (id + gauge value) or the shared tip.
struct PointOnH {
  std::string ray_id;  // empty means the tip
  double gauge = 0.0;

  static PointOnH tip() { return {}; }
  static PointOnH on(std::string id, double g) { return {std::move(id), g}; }
  bool is_tip() const { return ray_id.empty(); }
};

/// Per-ray transverse coefficients (f, h) of a gauge change G' = f + h G.
struct TransversePair {
  std::map<std::string, double, std::less<>> f;
  std::map<std::string, double, std::less<>> h;

  double f_of(std::string_view id) const;
  double h_of(std::string_view id) const;
  static TransversePair identity() { return {}; }
  /// Group inverse: (f, h)^-1 = (-f/h, 1/h).
  TransversePair inverse() const;
};

/// Causal order on H: same-ray gauge order, plus tip <= every point of a
/// tip-attached ray. Distinct rays are never related otherwise.
bool causal_leq(const PointOnH& x, const PointOnH& y, const SNH& hypersurface);

/// Gauge flow: same ray, gauge advanced by t. Leaving the closed interval
/// raises DomainError carrying the admissible range of t.
PointOnH psi_flow(const PointOnH& x, double t, const SNH& hypersurface);

/// Equivalence move (f, h): intervals map g -> f + h g and the measure
/// transforms as m' = (1/h) m, i.e. densities h'(f + h g) = h(g) / h^2 so
/// per-ray mass scales by 1/h. Weights are untouched.
SNH gauge_measure_transform(const SNH& hypersurface, const TransversePair& tp);

/// Multiply the reference measure by a positive transverse factor: m -> phi m
/// (per-ray density scaling, gauge untouched).
SNH transverse_rescale(const SNH& hypersurface, const std::map<std::string, double>& phi);

}  // namespace nullot
