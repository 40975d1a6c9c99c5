#include "nullot/nec.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nullot/errors.hpp"
#include "nullot/rng.hpp"

namespace nullot {

namespace {
constexpr double kCdTol = 1e-12;
}

CdReport cd_check(const Ray& ray, double N) {
  if (!(N > 2.0)) throw ParamError("cd_check needs N > 2");
  const ArrayXd& k = ray.density.knots;
  const ArrayXd g = ray.density.values.pow(1.0 / (N - 2.0));
  CdReport rep;
  rep.ray_id = ray.id;
  for (Eigen::Index i = 1; i + 1 < k.size(); ++i) {
    const double lam = (k[i] - k[i - 1]) / (k[i + 1] - k[i - 1]);
    const double chord = (1.0 - lam) * g[i - 1] + lam * g[i + 1];
    if (g[i] < chord - kCdTol) {
      rep.pass = false;
      rep.witness_knot = i;
      rep.deficit = chord - g[i];
      return rep;
    }
  }
  return rep;
}

CdReport cd_check(const SNH& h, double N) {
  for (const Ray& r : h.rays()) {
    CdReport rep = cd_check(r, N);
    if (!rep.pass) return rep;
  }
  CdReport ok;
  ok.ray_id = h.rays().front().id;
  return ok;
}

namespace {

// Upper concave hull violation: max over grid points of (hull - value), with
// the worst bracketing chord as witness. Equals the max chord-minus-midpoint
// over all grid triples.
struct HullViolation {
  double max_violation = 0.0;
  std::array<double, 3> witness{0.0, 0.0, 0.0};
};

HullViolation hull_violation(const ArrayXd& t, const ArrayXd& u) {
  const Eigen::Index n = t.size();
  std::vector<Eigen::Index> hull;
  auto cross = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c) {
    return (t[b] - t[a]) * (u[c] - u[a]) - (u[b] - u[a]) * (t[c] - t[a]);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) >= 0.0)
      hull.pop_back();
    hull.push_back(i);
  }
  HullViolation out;
  std::size_t seg = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    while (seg + 1 < hull.size() && t[hull[seg + 1]] < t[i]) ++seg;
    if (seg + 1 >= hull.size()) break;
    const Eigen::Index a = hull[seg], b = hull[seg + 1];
    const double lam = (t[i] - t[a]) / (t[b] - t[a]);
    const double env = (1.0 - lam) * u[a] + lam * u[b];
    const double v = env - u[i];
    if (v > out.max_violation) {
      out.max_violation = v;
      out.witness = {t[a], t[i], t[b]};
    }
  }
  return out;
}

ArrayXd uniform_grid(int grid_size) {
  if (grid_size < 2) throw ParamError("t grid needs at least 2 intervals");
  return ArrayXd::LinSpaced(grid_size + 1, 0.0, 1.0);
}

}  // namespace

ConcavityReport nce_test(const SNH& h, double N, const HMeasure& mu0, const HMeasure& mu1,
                         int grid_size) {
  if (!(N > 1.0)) throw ParamError("nce_test needs N > 1 (entropy-power order N-1)");
  const double M = N - 1.0;
  ConcavityReport rep;
  rep.t_grid = uniform_grid(grid_size);
  const Feasibility feas = feasibility(mu0, mu1, h);
  if (!feas.feasible) throw InputError("nce_test: infeasible pair: " + feas.obstruction);
  const double e0 = entropy(mu0, h), e1 = entropy(mu1, h);
  if (e0 == kInfinity && e1 == kInfinity) {
    rep.vacuous = true;
    rep.values = ArrayXd::Zero(rep.t_grid.size());
    return rep;
  }
  const CausalCoupling coupling = monotone_coupling(mu0, mu1, h);
  const DynamicalPlan plan = dynamical_plan(coupling, h);
  rep.values = ArrayXd(rep.t_grid.size());
  for (Eigen::Index i = 0; i < rep.t_grid.size(); ++i) {
    const HMeasure mt = interpolate(plan, rep.t_grid[i], h);
    rep.values[i] = entropy_power(mt, h, M);
  }
  const HullViolation v = hull_violation(rep.t_grid, rep.values);
  rep.max_violation = v.max_violation;
  rep.witness = v.witness;
  rep.pass = rep.max_violation <= kConcavityTol;
  return rep;
}

namespace {

// Fast entropy-power path for mass-1 uniform windows: the monotone plan
// between two uniform blocks is affine, so mu_t is the uniform block with
// affinely interpolated endpoints.
struct RayCtx {
  const Ray* ray;
  PiecewiseLinear pl;
  double s_lo, s_hi;   // positive-density sampling window
  double w_min;        // no sub-knot probing
  double log_weight;
};

double window_entropy(const RayCtx& c, double lo, double hi) {
  const double w = hi - lo;
  if (w <= 0.0) return kInfinity;
  const double lg = pl_log_integral_cached(c.pl, c.ray->cum, lo, hi);
  if (lg == -kInfinity) return kInfinity;
  return -std::log(w) - c.log_weight - lg / w;
}

double pair_violation(const RayCtx& c, const TrialPair& p, double M, const ArrayXd& grid,
                      ArrayXd& u_scratch) {
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double lo = (1.0 - t) * p.src_lo + t * p.dst_lo;
    const double hi = (1.0 - t) * p.src_hi + t * p.dst_hi;
    const double ent = window_entropy(c, lo, hi);
    u_scratch[i] = ent == kInfinity ? 0.0 : std::exp(-ent / M);
  }
  return hull_violation(grid, u_scratch).max_violation;
}

std::vector<RayCtx> build_contexts(const SNH& h) {
  std::vector<RayCtx> ctx;
  for (const Ray& r : h.rays()) {
    RayCtx c;
    c.ray = &r;
    c.pl = r.pl();
    const ArrayXd& k = r.density.knots;
    const ArrayXd& v = r.density.values;
    Eigen::Index lo = 0, hi = k.size() - 1;
    if (v[lo] <= 0.0 && lo + 1 < k.size()) ++lo;  // skip boundary-zero pieces
    if (v[hi] <= 0.0 && hi > lo) --hi;
    c.s_lo = k[lo];
    c.s_hi = k[hi];
    double max_gap = 0.0;
    for (Eigen::Index i = 0; i + 1 < k.size(); ++i) max_gap = std::max(max_gap, k[i + 1] - k[i]);
    // knot-scale floor on finely knotted instances, never starving coarse ones
    c.w_min = std::min(4.0 * max_gap, (c.s_hi - c.s_lo) / 8.0);
    c.log_weight = std::log(r.weight);
    ctx.push_back(std::move(c));
  }
  return ctx;
}

// Deterministic probe pairs at knots flagged convex by the cd scan; these
// realize the contraction construction of the localization argument.
std::vector<TrialPair> knot_probes(const SNH& h, double N, const std::vector<RayCtx>& ctx) {
  std::vector<TrialPair> probes;
  if (!(N > 2.0)) return probes;
  for (std::size_t ri = 0; ri < h.rays().size(); ++ri) {
    const Ray& r = h.rays()[ri];
    const RayCtx& c = ctx[ri];
    const ArrayXd& k = r.density.knots;
    const ArrayXd g = r.density.values.pow(1.0 / (N - 2.0));
    for (Eigen::Index i = 1; i + 1 < k.size(); ++i) {
      const double lam = (k[i] - k[i - 1]) / (k[i + 1] - k[i - 1]);
      const double chord = (1.0 - lam) * g[i - 1] + lam * g[i + 1];
      if (g[i] >= chord - kCdTol) continue;
      const double w = 0.45 * std::min(k[i] - k[i - 1], k[i + 1] - k[i]);
      if (k[i] - w < c.s_lo || k[i] + w > c.s_hi) continue;
      probes.push_back({r.id, k[i] - w, k[i], k[i], k[i] + w});
      probes.push_back({r.id, k[i] - w, k[i] + w, k[i] + 0.5 * w, k[i] + w});
    }
  }
  return probes;
}

}  // namespace

SearchReport nce_search(const SNH& h, double N, long long trials, std::uint64_t seed,
                        int grid_size) {
  if (!(N > 1.0)) throw ParamError("nce_search needs N > 1");
  if (trials < 1) throw ParamError("nce_search needs trials >= 1");
  const double M = N - 1.0;
  const ArrayXd grid = uniform_grid(grid_size);
  ArrayXd u_scratch(grid.size());
  const std::vector<RayCtx> ctx = build_contexts(h);
  const std::vector<TrialPair> probes = knot_probes(h, N, ctx);

  SearchReport rep;
  rep.trials_run = trials;
  TrialPair worst_pair;
  bool have_worst = false;

  for (long long i = 0; i < trials; ++i) {
    TrialPair p;
    const RayCtx* c = nullptr;
    if (i < static_cast<long long>(probes.size())) {
      p = probes[static_cast<std::size_t>(i)];
      c = &ctx[static_cast<std::size_t>(h.ray_index(p.ray_id))];
    } else {
      Rng rng(sub_seed(seed, static_cast<std::uint64_t>(i)));
      const std::size_t ri = static_cast<std::size_t>(rng.below(ctx.size()));
      c = &ctx[ri];
      const double span = c->s_hi - c->s_lo;
      if (span < 3.0 * c->w_min) continue;
      const double mode = rng.uniform01();  // <0.5 contraction, <0.75 translation
      const double w_cap = span / 3.0;
      const double w0 = c->w_min * std::exp(rng.uniform01() * std::log(w_cap / c->w_min));
      const double l0 = rng.uniform(c->s_lo, c->s_hi - w0 - c->w_min);
      double w1;
      if (mode < 0.5) {
        w1 = std::max(c->w_min, w0 * rng.uniform(0.05, 0.6));
      } else if (mode < 0.75) {
        w1 = w0;
      } else {
        w1 = std::min(w0 * rng.uniform(1.5, 3.0), c->s_hi - (l0 + w0));
        if (w1 < c->w_min) w1 = c->w_min;
      }
      const double r0 = l0 + w0;
      const double l1_min = std::max(l0, r0 - w1);
      const double l1_max = c->s_hi - w1;
      if (l1_min > l1_max) continue;
      const double l1 = rng.uniform(l1_min, l1_max);
      p = {c->ray->id, l0, r0, l1, l1 + w1};
    }
    ++rep.feasible_trials;
    const double viol = pair_violation(*c, p, M, grid, u_scratch);
    if (!have_worst || viol > rep.worst_violation) {
      rep.worst_violation = viol;
      worst_pair = p;
      have_worst = true;
    }
    if (viol > kConcavityTol) {
      rep.verdict = SearchReport::Verdict::fail;
      rep.failing_trial = i;
      break;
    }
  }
  if (rep.verdict != SearchReport::Verdict::fail) {
    rep.verdict = rep.feasible_trials > 0 ? SearchReport::Verdict::pass
                                          : SearchReport::Verdict::vacuous;
  }
  if (have_worst) {
    rep.witness_pair = worst_pair;
    // audit the headline number through the general machinery
    HMeasure m0{{uniform_slice(worst_pair.ray_id, worst_pair.src_lo, worst_pair.src_hi)}};
    HMeasure m1{{uniform_slice(worst_pair.ray_id, worst_pair.dst_lo, worst_pair.dst_hi)}};
    rep.worst = nce_test(h, N, m0, m1, grid_size);
  }
  return rep;
}

LocalizationReport localization_crosscheck(const SNH& h, double N, long long trials,
                                           std::uint64_t seed) {
  LocalizationReport rep;
  rep.cd = cd_check(h, N);
  rep.search = nce_search(h, N, trials, seed);
  rep.cd_pass = rep.cd.pass;
  rep.search_pass = rep.search.verdict != SearchReport::Verdict::fail;
  rep.agree = rep.cd_pass == rep.search_pass;
  return rep;
}

InvarianceReport invariance_check(const SNH& h, const TransversePair& tp, double N,
                                  const HMeasure& mu0, const HMeasure& mu1, int grid_size) {
  InvarianceReport rep;
  const SNH h2 = gauge_measure_transform(h, tp);
  const HMeasure mu0_2 = pushforward_affine(mu0, tp, h, h2);
  const HMeasure mu1_2 = pushforward_affine(mu1, tp, h, h2);

  for (const RayMeasureSlice& s : mu0.slices) rep.expected_shift += s.mass * std::log(tp.h_of(s.ray_id));

  const DynamicalPlan plan1 = dynamical_plan(monotone_coupling(mu0, mu1, h), h);
  const DynamicalPlan plan2 = dynamical_plan(monotone_coupling(mu0_2, mu1_2, h2), h2);
  const ArrayXd grid = ArrayXd::LinSpaced(grid_size + 1, 0.0, 1.0);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double e1 = entropy(interpolate(plan1, grid[i], h), h);
    const double e2 = entropy(interpolate(plan2, grid[i], h2), h2);
    if (e1 == kInfinity && e2 == kInfinity) continue;
    rep.max_ent_deviation =
        std::max(rep.max_ent_deviation, std::abs((e2 - e1) - rep.expected_shift));
  }
  rep.before = nce_test(h, N, mu0, mu1, grid_size);
  rep.after = nce_test(h2, N, mu0_2, mu1_2, grid_size);
  rep.verdicts_equal = rep.before.pass == rep.after.pass;
  rep.pass = rep.verdicts_equal && rep.max_ent_deviation <= 1e-9;
  return rep;
}

}  // namespace nullot
