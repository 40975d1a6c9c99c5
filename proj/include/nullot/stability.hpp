#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nullot/core.hpp"
#include "nullot/nec.hpp"
#include "nullot/smooth.hpp"

namespace nullot {

/// Monotone piecewise-linear gauge maps linking a step to the limit, per ray.
struct RayMaps {
  std::string ray_id;
  PiecewiseLinear to_limit;    // h_n : H_n -> H_inf
  PiecewiseLinear from_limit;  // g_n : H_inf -> H_n
};

struct ApproximationStep {
  int index = 0;
  SNH hypersurface;
  std::vector<RayMaps> maps;
  double eps_n = 0.0;
};

struct ApproximationSequence {
  SNH limit;
  std::vector<ApproximationStep> steps;
};

struct StepCheck {
  int index = 0;
  bool bijection_ok = false;
  bool sigma_ok = false;        // pullback density ratio <= 1 + eps_n at knots
  bool composition_ok = false;  // sup |to_limit o from_limit - id| <= eps_n
  bool curve_ok = false;        // affine segments map to (G, eps_n)-causal curves
  double max_sigma = 0.0;
  double max_composition_dev = 0.0;
  double max_curve_dev = 0.0;  // relative speed deviation
  std::string witness;
  bool pass() const { return bijection_ok && sigma_ok && composition_ok && curve_ok; }
};

struct HypothesisReport {
  std::vector<StepCheck> steps;
  bool pass = false;
};

/// Numerical check of the convergence hypotheses on every step.
HypothesisReport verify_hypotheses(const ApproximationSequence& seq);

/// Speed-deviation check defining (G, eps)-causal curves: a sampled curve
/// passes iff all difference quotients stay within eps * total of the total
/// gauge speed. Returns the max relative deviation.
double epsilon_causal_deviation(const ArrayXd& params, const ArrayXd& gauges);

struct LimitReport {
  enum class Verdict { pass, fail, inapplicable } verdict = Verdict::inapplicable;
  std::string reason;
  HypothesisReport hypotheses;
  bool limit_cd_pass = false;
  bool limit_search_pass = false;
};

/// Gate the hypotheses and the per-step localization certificates, then test
/// the limit: seeded concavity search plus the knot-wise concavity of the
/// limit densities (the 1-D mechanism carried to the limit).
LimitReport limit_nce(const ApproximationSequence& seq, double N, long long trials,
                      std::uint64_t seed);

/// A discretized curve: 32-point polyline of gauge values on one ray.
/// Distance is the sup metric, infinite across distinct rays.
struct CurvePoint {
  std::string ray_id;
  ArrayXd gauges;
};

double curve_distance(const CurvePoint& a, const CurvePoint& b);

/// Finite-family Kuratowski upper limit: keep every element (drawn from the
/// union of the inputs) within tol of at least max(1, ceil(count_fraction *
/// |tail|)) tail sets, the tail being indices at or above the tail_quantile.
std::vector<CurvePoint> kuratowski_limsup(const std::vector<std::vector<CurvePoint>>& sets,
                                          double tol, double tail_quantile = 0.8,
                                          double count_fraction = 0.25);

/// Cone sequence with 2^-n perturbations: odd steps wiggle the densities
/// inside the concave cone (identity maps), even steps apply per-ray affine
/// gauge changes with exact pushforward densities.
ApproximationSequence make_perturbed_cone_sequence(int steps, int dim, double horizon,
                                                   std::uint64_t seed,
                                                   const ConeOptions& opts = {});

/// Same shape but with densities scaled so the pullback ratio is the given
/// constant (> 1 + eps_n gates the sequence out).
ApproximationSequence make_adversarial_sigma_sequence(int steps, double sigma, int dim,
                                                      double horizon,
                                                      const ConeOptions& opts = {});

}  // namespace nullot
