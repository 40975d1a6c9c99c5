#include "nullot/stability.hpp"

#include <algorithm>
#include <cmath>

#include "nullot/errors.hpp"
#include "nullot/rng.hpp"

namespace nullot {

namespace {

void validate_monotone(const PiecewiseLinear& m, const std::string& what) {
  if (m.x.size() < 2 || m.x.size() != m.y.size())
    throw InputError(what + ": malformed piecewise-linear map");
  for (Eigen::Index i = 0; i + 1 < m.x.size(); ++i) {
    if (!(m.x[i] < m.x[i + 1]) || !(m.y[i] < m.y[i + 1]))
      throw InputError(what + ": map must be strictly increasing");
  }
}

// value of the inverse map at y (both maps strictly increasing)
double pl_inverse_eval(const PiecewiseLinear& m, double y) {
  const double* begin = m.y.data();
  const double* end = m.y.data() + m.y.size();
  Eigen::Index i = std::upper_bound(begin, end, y) - begin - 1;
  if (i < 0) i = 0;
  if (i > m.y.size() - 2) i = m.y.size() - 2;
  const double t = (y - m.y[i]) / (m.y[i + 1] - m.y[i]);
  return m.x[i] + t * (m.x[i + 1] - m.x[i]);
}

double pl_slope_at(const PiecewiseLinear& m, double x) {
  const double* begin = m.x.data();
  const double* end = m.x.data() + m.x.size();
  Eigen::Index i = std::upper_bound(begin, end, x) - begin - 1;
  if (i < 0) i = 0;
  if (i > m.x.size() - 2) i = m.x.size() - 2;
  return (m.y[i + 1] - m.y[i]) / (m.x[i + 1] - m.x[i]);
}

}  // namespace

double epsilon_causal_deviation(const ArrayXd& params, const ArrayXd& gauges) {
  const Eigen::Index n = params.size();
  const double total = gauges[n - 1] - gauges[0];
  if (!(total > 0.0)) return kInfinity;
  double dev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double q = (gauges[j] - gauges[i]) / (params[j] - params[i]);
      dev = std::max(dev, std::abs(q - total));
    }
  }
  return dev / total;
}

HypothesisReport verify_hypotheses(const ApproximationSequence& seq) {
  if (seq.steps.empty()) throw InputError("empty approximation sequence");
  for (std::size_t i = 1; i < seq.steps.size(); ++i) {
    if (!(seq.steps[i].eps_n <= seq.steps[i - 1].eps_n))
      throw InputError("eps_n must be non-increasing along the sequence");
  }
  HypothesisReport rep;
  rep.pass = true;
  for (const ApproximationStep& step : seq.steps) {
    StepCheck chk;
    chk.index = step.index;
    // ray bijection: identical id sets, maps listed for every ray
    chk.bijection_ok = step.hypersurface.rays().size() == seq.limit.rays().size();
    for (const Ray& r : seq.limit.rays()) {
      if (step.hypersurface.ray_index(r.id) < 0) chk.bijection_ok = false;
    }
    std::map<std::string, const RayMaps*> maps;
    for (const RayMaps& m : step.maps) maps[m.ray_id] = &m;
    for (const Ray& r : seq.limit.rays()) {
      if (!maps.count(r.id)) chk.bijection_ok = false;
    }
    if (!chk.bijection_ok) {
      chk.witness = "ray bijection or map table incomplete";
      rep.steps.push_back(chk);
      rep.pass = false;
      if (!chk.bijection_ok) continue;
    }

    chk.sigma_ok = chk.composition_ok = chk.curve_ok = true;
    for (const Ray& r_inf : seq.limit.rays()) {
      const RayMaps& m = *maps.at(r_inf.id);
      validate_monotone(m.to_limit, "to_limit on ray " + r_inf.id);
      validate_monotone(m.from_limit, "from_limit on ray " + r_inf.id);
      const Ray& r_n = step.hypersurface.ray(r_inf.id);
      const PiecewiseLinear h_inf = r_inf.pl();
      const PiecewiseLinear h_n = r_n.pl();

      // sigma = d((g_n)# m_inf)/d m_n at the knots of H_n and at images of
      // the limit knots
      std::vector<double> probes;
      for (Eigen::Index i = 0; i < h_n.x.size(); ++i) probes.push_back(h_n.x[i]);
      for (Eigen::Index i = 0; i < h_inf.x.size(); ++i)
        probes.push_back(pl_eval_line(m.from_limit, h_inf.x[i]));
      for (double t : probes) {
        const double x = pl_inverse_eval(m.from_limit, t);
        const double slope = pl_slope_at(m.from_limit, x);
        const double num = r_inf.weight * pl_eval(h_inf, x) / slope;
        const double den = r_n.weight * pl_eval(h_n, t);
        if (num <= 0.0 && den <= 0.0) continue;
        const double sigma = den > 0.0 ? num / den : kInfinity;
        chk.max_sigma = std::max(chk.max_sigma, sigma);
        if (!(sigma <= 1.0 + step.eps_n + 1e-12)) {
          chk.sigma_ok = false;
          chk.witness = "sigma bound fails on ray " + r_inf.id;
        }
      }

      // composition h_n o g_n ~ id on the common compact window
      const double lo = h_inf.x[0], hi = h_inf.x[h_inf.x.size() - 1];
      for (int k = 0; k <= 128; ++k) {
        const double x = lo + (hi - lo) * k / 128.0;
        const double dev = std::abs(pl_eval_line(m.to_limit, pl_eval_line(m.from_limit, x)) - x);
        chk.max_composition_dev = std::max(chk.max_composition_dev, dev);
      }
      if (!(chk.max_composition_dev <= step.eps_n + 1e-12)) {
        chk.composition_ok = false;
        chk.witness = "composition deviates on ray " + r_inf.id;
      }

      // affine segments of H_n become (G, eps_n)-causal after to_limit
      const double a_n = h_n.x[0], b_n = h_n.x[h_n.x.size() - 1];
      const double fr[4][2] = {{0.1, 0.5}, {0.3, 0.7}, {0.5, 0.9}, {0.1, 0.9}};
      ArrayXd params = ArrayXd::LinSpaced(32, 0.0, 1.0);
      for (const auto& f : fr) {
        const double g0 = a_n + f[0] * (b_n - a_n);
        const double g1 = a_n + f[1] * (b_n - a_n);
        ArrayXd gauges(params.size());
        for (Eigen::Index i = 0; i < params.size(); ++i)
          gauges[i] = pl_eval_line(m.to_limit, g0 + params[i] * (g1 - g0));
        const double dev = epsilon_causal_deviation(params, gauges);
        chk.max_curve_dev = std::max(chk.max_curve_dev, dev);
      }
      if (!(chk.max_curve_dev <= step.eps_n + 1e-12)) {
        chk.curve_ok = false;
        chk.witness = "segment fails the (G,eps)-causal bound on ray " + r_inf.id;
      }
    }
    rep.pass = rep.pass && chk.pass();
    rep.steps.push_back(std::move(chk));
  }
  return rep;
}

LimitReport limit_nce(const ApproximationSequence& seq, double N, long long trials,
                      std::uint64_t seed) {
  LimitReport rep;
  rep.hypotheses = verify_hypotheses(seq);
  if (!rep.hypotheses.pass) {
    rep.verdict = LimitReport::Verdict::inapplicable;
    rep.reason = "convergence hypotheses fail";
    return rep;
  }
  for (const ApproximationStep& step : seq.steps) {
    const LocalizationReport loc =
        localization_crosscheck(step.hypersurface, N, trials, sub_seed(seed, step.index));
    if (!loc.cd_pass || !loc.search_pass) {
      rep.verdict = LimitReport::Verdict::inapplicable;
      rep.reason = "step " + std::to_string(step.index) + " is not a certified instance";
      return rep;
    }
  }
  rep.limit_cd_pass = cd_check(seq.limit, N).pass;
  const SearchReport search = nce_search(seq.limit, N, trials, seed);
  rep.limit_search_pass = search.verdict != SearchReport::Verdict::fail;
  rep.verdict = (rep.limit_cd_pass && rep.limit_search_pass) ? LimitReport::Verdict::pass
                                                             : LimitReport::Verdict::fail;
  return rep;
}

double curve_distance(const CurvePoint& a, const CurvePoint& b) {
  if (a.ray_id != b.ray_id) return kInfinity;
  if (a.gauges.size() != b.gauges.size()) return kInfinity;
  return (a.gauges - b.gauges).abs().maxCoeff();
}

std::vector<CurvePoint> kuratowski_limsup(const std::vector<std::vector<CurvePoint>>& sets,
                                          double tol, double tail_quantile,
                                          double count_fraction) {
  std::vector<CurvePoint> out;
  if (sets.empty()) return out;
  const std::size_t n = sets.size();
  const std::size_t tail_start =
      std::min(n - 1, static_cast<std::size_t>(std::floor(tail_quantile * n)));
  const std::size_t tail_size = n - tail_start;
  const std::size_t needed = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(count_fraction * tail_size)));
  for (const auto& set : sets) {
    for (const CurvePoint& cand : set) {
      std::size_t hits = 0;
      for (std::size_t j = tail_start; j < n; ++j) {
        bool close = false;
        for (const CurvePoint& p : sets[j]) {
          if (curve_distance(cand, p) <= tol) {
            close = true;
            break;
          }
        }
        if (close) ++hits;
      }
      if (hits >= needed) out.push_back(cand);
    }
  }
  return out;
}

namespace {

PiecewiseLinear identity_map(double lo, double hi) {
  ArrayXd x(2);
  x << lo, hi;
  return {x, x};
}

PiecewiseLinear affine_map(double lo, double hi, double c, double s) {
  ArrayXd x(2), y(2);
  x << lo, hi;
  y << c + s * lo, c + s * hi;
  return {x, y};
}

}  // namespace

ApproximationSequence make_perturbed_cone_sequence(int steps, int dim, double horizon,
                                                   std::uint64_t seed,
                                                   const ConeOptions& opts) {
  ApproximationSequence seq;
  seq.limit = cone_hypersurface(dim, horizon, opts);
  Rng rng(seed);
  for (int n = 1; n <= steps; ++n) {
    const double eps = std::pow(2.0, -n);
    ApproximationStep step;
    step.index = n;
    step.eps_n = eps;
    std::vector<Ray> rays = seq.limit.rays();
    if (n % 2 == 1) {
      // density wiggle built in g-space: g_n = g + amp * phi with phi concave
      // and vanishing at the tip, so knot concavity and sigma <= 1 both hold
      for (Ray& r : rays) {
        const double amp = 0.5 * eps * rng.uniform(0.2, 1.0);
        const ArrayXd& k = r.density.knots;
        ArrayXd g(k.size());
        for (Eigen::Index i = 0; i < k.size(); ++i) {
          const double phi = k[i] * (horizon - k[i] < 0.0 ? 0.0 : (horizon - k[i])) /
                             (horizon * horizon);
          g[i] = k[i] + amp * std::max(phi, 0.0) * horizon;
        }
        r.density.values = g.pow(static_cast<double>(dim - 2));
        step.maps.push_back({r.id, identity_map(k[0], r.truncation()),
                             identity_map(k[0], r.truncation())});
      }
    } else {
      // per-ray affine gauge change with the exact pushforward density
      for (Ray& r : rays) {
        const double s = 1.0 + 0.3 * eps * rng.uniform(-1.0, 1.0);
        const double c = 0.3 * eps * rng.uniform(0.0, 1.0) * horizon;
        const double lo = r.density.knots[0];
        const double hi = r.truncation();
        r.density.knots = c + s * r.density.knots;
        r.density.values = r.density.values / s;
        r.interval.a = c + s * r.interval.a;
        r.embedding.reset();
        step.maps.push_back({r.id, affine_map(c + s * lo, c + s * hi, -c / s, 1.0 / s),
                             affine_map(lo, hi, c, s)});
      }
    }
    for (Ray& r : rays) r.embedding.reset();
    step.hypersurface = make_hypersurface(std::move(rays), seq.limit.tip_rays(),
                                          seq.limit.dimension_hint());
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

ApproximationSequence make_adversarial_sigma_sequence(int steps, double sigma, int dim,
                                                      double horizon,
                                                      const ConeOptions& opts) {
  if (!(sigma > 0.0)) throw ParamError("sigma must be positive");
  ApproximationSequence seq;
  seq.limit = cone_hypersurface(dim, horizon, opts);
  for (int n = 1; n <= steps; ++n) {
    ApproximationStep step;
    step.index = n;
    step.eps_n = std::pow(2.0, -n);
    std::vector<Ray> rays = seq.limit.rays();
    for (Ray& r : rays) {
      r.density.values = r.density.values / sigma;  // pullback ratio becomes sigma
      r.embedding.reset();
      step.maps.push_back({r.id, identity_map(r.density.knots[0], r.truncation()),
                           identity_map(r.density.knots[0], r.truncation())});
    }
    step.hypersurface = make_hypersurface(std::move(rays), seq.limit.tip_rays(),
                                          seq.limit.dimension_hint());
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

}  // namespace nullot
