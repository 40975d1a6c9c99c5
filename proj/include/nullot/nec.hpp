#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "nullot/core.hpp"
#include "nullot/measures.hpp"
#include "nullot/transport.hpp"

namespace nullot {

/// Default tolerance on entropy-power concavity violations.
inline constexpr double kConcavityTol = 1e-8;

/// Knot-wise CD(0, N-1) certificate of one ray: h^(1/(N-2)) must satisfy the
/// 3-point concavity inequality at every interior knot (tolerance 1e-12).
struct CdReport {
  bool pass = true;
  std::string ray_id;
  Eigen::Index witness_knot = -1;
  double deficit = 0.0;  // chord value minus g at the witness
};

CdReport cd_check(const Ray& ray, double N);
/// First failing ray, or pass.
CdReport cd_check(const SNH& h, double N);

/// Entropy-power profile along the displacement interpolation.
struct ConcavityReport {
  ArrayXd t_grid;
  ArrayXd values;  // U_{N-1}(mu_t | m)
  double max_violation = 0.0;
  bool pass = true;
  bool vacuous = false;
  std::optional<std::array<double, 3>> witness;  // (t1, t2, t3) worst chord triple
};

/// Builds the monotone G-causal plan for (mu0, mu1) and checks concavity of
/// t -> U_{N-1}(mu_t | m) on a uniform grid (grid_size intervals).
/// N in (1, 2] is admitted (no localization meaning there); N <= 1 is a
/// parameter error; infeasible pairs raise InputError.
ConcavityReport nce_test(const SNH& h, double N, const HMeasure& mu0, const HMeasure& mu1,
                         int grid_size = 64);

/// A sampled trial pair: mass-1 uniform blocks on one ray.
struct TrialPair {
  std::string ray_id;
  double src_lo, src_hi;
  double dst_lo, dst_hi;
};

struct SearchReport {
  enum class Verdict { pass, fail, vacuous };
  Verdict verdict = Verdict::vacuous;
  long long trials_run = 0;
  long long feasible_trials = 0;
  long long failing_trial = -1;
  std::optional<TrialPair> witness_pair;
  double worst_violation = 0.0;
  ConcavityReport worst;  // re-evaluated through the general path
};

/// Randomized realization of the "for all mu0, mu1" quantifier: deterministic
/// per-knot contraction/translation probes at knots whose g-second-difference
/// is convex, then seeded random block pairs (half biased to contractions).
/// Block widths stay at knot scale or above and inside the positive-density
/// window, matching the knot-wise granularity of cd_check.
SearchReport nce_search(const SNH& h, double N, long long trials, std::uint64_t seed,
                        int grid_size = 64);

struct LocalizationReport {
  CdReport cd;
  SearchReport search;
  bool cd_pass = false;
  bool search_pass = false;
  bool agree = false;
};

/// Runs both sides of the 1-D localization equivalence and reports agreement.
LocalizationReport localization_crosscheck(const SNH& h, double N, long long trials,
                                           std::uint64_t seed);

struct InvarianceReport {
  double expected_shift = 0.0;       // integral of log h against mu0
  double max_ent_deviation = 0.0;    // max_t |(Ent'_t - Ent_t) - shift|
  bool verdicts_equal = false;
  bool pass = false;
  ConcavityReport before, after;
};

/// Transforms (H, mu0, mu1) by the transverse pair and verifies that the
/// entropy difference along t is the constant integral of log h d(mu0) within
/// 1e-9 and that the concavity verdict is unchanged.
InvarianceReport invariance_check(const SNH& h, const TransversePair& tp, double N,
                                  const HMeasure& mu0, const HMeasure& mu1, int grid_size = 64);

}  // namespace nullot
