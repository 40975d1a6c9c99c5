#pragma once

#include <string>
#include <vector>

#include "nullot/core.hpp"

namespace nullot {

/// Restriction of a probability measure to one ray: piecewise-constant density
/// in gauge coordinates (values[i] on [knots[i], knots[i+1])) plus atoms.
/// Atoms are admitted only as the representation of mass sitting at the shared
/// tip (gauge == interval.a of a tip-attached ray).
struct RayMeasureSlice {
  std::string ray_id;
  double mass = 0.0;
  ArrayXd knots;   // cell edges, size m+1 (m >= 0 cells)
  ArrayXd values;  // density per cell, size m, >= 0
  std::vector<std::pair<double, double>> atoms;  // (gauge, mass)

  double cell_mass() const;
  double atom_mass() const;
};

/// Probability measure on H; slice masses sum to 1 within 1e-12.
struct HMeasure {
  std::vector<RayMeasureSlice> slices;

  double tip_mass(const SNH& h) const;
  bool has_atoms() const;
  const RayMeasureSlice* slice(std::string_view ray_id) const;
  /// Mass on the ray excluding tip atoms.
  double ray_mass(std::string_view ray_id) const;
};

/// Validates slices against the hypersurface (support in the closed interval
/// and within the knot span, masses consistent within 1e-12, atoms only at the
/// tip) and returns the measure. Throws InputError.
HMeasure make_measure(std::vector<RayMeasureSlice> slices, const SNH& h);

/// Convenience: uniform block of given mass on one ray.
RayMeasureSlice uniform_slice(std::string ray_id, double lo, double hi, double mass = 1.0);

/// Boltzmann-Shannon entropy Ent(mu | m) evaluated in closed form piece by
/// piece (the integrand is (p/wh) log(p/wh) w h with p constant and h linear).
/// Returns +infinity when mu carries an atom or positive mass where h = 0.
double entropy(const HMeasure& mu, const SNH& h);

/// Same integral by adaptive Simpson quadrature (absolute tolerance per
/// piece); the audit route for the closed form.
double entropy_quadrature(const HMeasure& mu, const SNH& h, double piece_tol = 1e-10);

/// Shannon entropy power exp(-Ent/M); exactly 0 on infinite entropy.
double entropy_power(const HMeasure& mu, const SNH& h, double M);
double entropy_power_of(double ent, double M);

/// Integral of a transverse function phi (constant along rays) against mu.
/// Requires mu concentrated on the open part (no tip atoms).
double integrate_transverse(const HMeasure& mu,
                            const std::map<std::string, double>& phi, const SNH& h);

struct DisintegrationIssue {
  std::string ray_id;  // empty for global issues
  std::string reason;
};
struct DisintegrationReport {
  bool pass = true;
  std::vector<DisintegrationIssue> issues;
};

/// Diagnostic re-verification of the disintegration structure on stored data:
/// quotient a probability, densities non-negative and finite on the truncated
/// domain, no endpoint atoms. The raw overload runs on unvalidated rays (as
/// parsed from disk), so broken instances produce a report, not an exception.
DisintegrationReport disintegration_check(const std::vector<Ray>& rays);
DisintegrationReport disintegration_check(const SNH& h);

/// Pushforward of mu under the per-ray affine gauge map g -> f + s g
/// (transport of the probability; densities scale by 1/s).
HMeasure pushforward_affine(const HMeasure& mu, const TransversePair& tp, const SNH& domain,
                            const SNH& target);

/// Pushforward of mu under a per-ray monotone piecewise-linear map.
HMeasure pushforward_monotone(const HMeasure& mu, const std::string& ray_id,
                              const PiecewiseLinear& map, const SNH& target);

}  // namespace nullot
