#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nullot/core.hpp"
#include "nullot/nec.hpp"

namespace nullot {

/// Acausal cross-section: at most one gauge value per ray, inside the ray's
/// interval (the initial endpoint is admitted so sections can sit at the
/// vertex sphere). Rays without an entry are outside S.
struct CrossSection {
  std::map<std::string, double, std::less<>> points;

  static CrossSection at_gauge(const SNH& h, double g);
};

inline const std::vector<double> kDefaultEpsGrid{1e-2, 1e-3, 1e-4};

struct ContentResult {
  double closed_form = 0.0;
  double numeric = 0.0;
  double rel_gap = 0.0;
  bool eps_shrunk = false;  // smallest grid entries left the interval
};

/// Future Minkowski content of S relative to the ray set A (all rays when
/// absent). Closed form: sum of weight * density at the section. Numeric:
/// max over the two smallest grid epsilons of m(S_eps+ ∩ R(A))/eps.
ContentResult minkowski_content(const CrossSection& s, const SNH& h,
                                const std::vector<double>& eps_grid = kDefaultEpsGrid,
                                const std::optional<std::set<std::string>>& rays_subset =
                                    std::nullopt);

struct HawkingReport {
  bool applicable = false;
  std::string reason;
  double content_1 = 0.0, content_2 = 0.0;
  bool pass = false;
};

/// Area monotonicity between ordered sections, gated on the hypotheses
/// (future completeness, full support, CD certificate for N).
HawkingReport hawking_check(const CrossSection& s1, const CrossSection& s2, const SNH& h,
                            double N);

struct CovarianceReport {
  bool applicable = false;
  std::string reason;
  double content_before = 0.0, content_after = 0.0;
  double gap = 0.0;
  bool pass = false;
};

/// Invariance of the content under the linked gauge/measure change
/// (G, m) -> (f + hG, h m); the measure leg is the transform paired so that
/// the content is a gauge-free quantity.
CovarianceReport content_covariance(const CrossSection& s, const SNH& h,
                                    const TransversePair& tp);

struct ThetaReport {
  double closed_form = 0.0;  // ess-sup over rays of h'(a+)/h(a)
  double numeric = 0.0;      // second-order content expansion over sampled subsets
};

/// Synthetic convergence rate of the section: logarithmic right-derivative of
/// the densities, with the integral second-order estimator as cross-check.
ThetaReport theta_estimate(const CrossSection& s, const SNH& h,
                           const std::vector<double>& eps_grid = kDefaultEpsGrid,
                           int sampled_subsets = 16, std::uint64_t seed = 2024);

struct PenroseRayRow {
  std::string ray_id;
  double b;
  double bound;
  double slack;
};

struct PenroseReport {
  bool applicable = false;
  std::string reason;
  double theta = 0.0;
  double bound = 0.0;
  double max_b = 0.0;
  bool pass = false;     // every ray obeys b <= bound + 1e-9
  bool compact = false;  // pass and every b finite
  std::vector<PenroseRayRow> per_ray;
};

/// Trapped-region gauge bound b_alpha <= (N-2)/(-theta) for sections at
/// gauge 0 on CD-certified rays with theta < 0.
PenroseReport penrose_check(const SNH& h, double N, const CrossSection& s, double theta);

struct PropernessReport {
  bool decidable = false;
  bool proper = false;
  std::string reason;
};

/// Gauge properness up to the horizon: sublevel sets must be bounded and
/// closed in H. A finite-b ray without a final point whose whole open ray
/// sits below the horizon makes the sublevel non-closed.
PropernessReport is_proper(const SNH& h, double horizon);

}  // namespace nullot
