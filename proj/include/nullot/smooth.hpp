#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nullot/core.hpp"

namespace nullot {

/// Geodesic data in the warped product (-inf, 0) x_f S^1 with metric
/// dt^2 - f(t)^2 dr^2. Null initial data must satisfy tdot0^2 = f(t0)^2 rdot0^2
/// within 1e-12 relative.
struct WarpedProductSpec {
  std::function<double(double)> warp;        // f, positive on (-inf, 0)
  std::function<double(double)> warp_prime;  // f'
  double t0 = -1.0;
  double tdot0 = 1.0;
  double rdot0 = 1.0;
  enum class Causal { null_ray, timelike } causal_type = Causal::null_ray;
  std::string name = "custom";
};

/// f(t) = sqrt(-t); rdot0 fixed by the null condition.
WarpedProductSpec sqrt_warp_null(double t0 = -1.0, double tdot0 = 1.0);
/// f(t) = (-t)^p; null data. p >= 1 makes the fiber winding divergent.
WarpedProductSpec power_warp_null(double p, double t0 = -1.0, double tdot0 = 1.0);
/// Radial (rdot0 = 0) timelike data: t stays affine.
WarpedProductSpec radial_timelike(double t0 = -1.0, double tdot0 = 1.0);

struct TraceSample {
  double s, t, tdot, r, rdot;
};

struct GeodesicTrace {
  std::vector<TraceSample> samples;
  double b_estimate = 0.0;
  enum class Terminated { blow_up, speed_horizon, steps } terminated = Terminated::steps;
  /// max over samples of |Q - Q(0)| / (1 + tdot^2) with Q = tdot^2 - f^2 rdot^2.
  double conservation_drift = 0.0;
  double winding() const;  // |r_end - r_0|
};

/// Adaptive step-doubled RK4 on the reduced system
///   t' = u,  u' = -C^2 f'(t)/f(t)^3,  r' = C/f(t)^2,  C = rdot0 f(t0)^2.
/// Halts near the blow-up (t >= -10 * minimum step, or the error control
/// demanding steps below the floor), on tdot > 1/step, or on step exhaustion.
/// b_estimate Richardson-extrapolates the final parameter over two step sizes.
GeodesicTrace integrate_geodesic(const WarpedProductSpec& spec, double step,
                                 long max_steps = 200000);

struct ConeOptions {
  int rays = 64;
  double rel_spacing = 5e-4;  // knot spacing ~ rel_spacing * gauge
  double inner = 1e-3;        // first positive knot at inner * horizon
  bool embeddings = true;
  int anchors = 10;  // extra exact knots at j * horizon / anchors
};

/// Future light cone of the origin in n-dim Minkowski space: per-ray density
/// t^(n-2), shared tip, embeddings g -> (g, g*omega).
SNH cone_hypersurface(int n, double horizon, const ConeOptions& opts = {});

enum class SphereFamily { outgoing, ingoing };

struct SphereOptions {
  int rays = 64;
  double rel_spacing = 1e-3;
  double theta_anchor = 1e-7;  // first interval of the ingoing grid: exact slope at 0
  bool embeddings = true;
  int anchors = 10;
};

/// Null congruences from a round sphere in 4-d Minkowski space. Outgoing:
/// h = (radius + t)^2 on [0, horizon], future complete. Ingoing (the
/// converging, trapped-relevant family): h = (radius - t)^2 on [0, radius).
SNH sphere_boundary_hypersurface(double radius, double horizon, SphereFamily family,
                                 const SphereOptions& opts = {});

/// Achronal boundary of a point in the warped product, realized as the two
/// winding null generators with gauge = affine parameter; half-open rays with
/// finite b and no final point (the geodesics are incomplete).
SNH warped_boundary_hypersurface(const WarpedProductSpec& spec, double step,
                                 long max_steps = 200000, int knot_target = 200);

}  // namespace nullot
