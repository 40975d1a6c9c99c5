#include "nullot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nullot/errors.hpp"

namespace nullot {

namespace {
constexpr double kMassTol = 1e-12;
}

double RayMeasureSlice::cell_mass() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) m += values[i] * (knots[i + 1] - knots[i]);
  return m;
}

double RayMeasureSlice::atom_mass() const {
  double m = 0.0;
  for (const auto& [g, am] : atoms) m += am;
  return m;
}

double HMeasure::tip_mass(const SNH& h) const {
  double m = 0.0;
  for (const RayMeasureSlice& s : slices) {
    if (h.tip_attached(s.ray_id)) m += s.atom_mass();
  }
  return m;
}

bool HMeasure::has_atoms() const {
  for (const RayMeasureSlice& s : slices)
    if (!s.atoms.empty()) return true;
  return false;
}

const RayMeasureSlice* HMeasure::slice(std::string_view ray_id) const {
  for (const RayMeasureSlice& s : slices)
    if (s.ray_id == ray_id) return &s;
  return nullptr;
}

double HMeasure::ray_mass(std::string_view ray_id) const {
  const RayMeasureSlice* s = slice(ray_id);
  return s ? s->cell_mass() : 0.0;
}

HMeasure make_measure(std::vector<RayMeasureSlice> slices, const SNH& h) {
  double total = 0.0;
  std::set<std::string> seen;
  for (RayMeasureSlice& s : slices) {
    const Ray& r = h.ray(s.ray_id);
    if (!seen.insert(s.ray_id).second)
      throw InputError("measure lists ray '" + s.ray_id + "' twice");
    if (s.knots.size() != 0 && s.knots.size() != s.values.size() + 1)
      throw InputError("slice '" + s.ray_id + "': knots must be values+1 cell edges");
    for (Eigen::Index i = 0; i + 1 < s.knots.size(); ++i) {
      if (!(s.knots[i] < s.knots[i + 1]))
        throw InputError("slice '" + s.ray_id + "': knots must be strictly increasing");
    }
    if (s.values.size() > 0 && (s.values < 0.0).any())
      throw InputError("slice '" + s.ray_id + "': negative density");
    if (s.knots.size() > 0) {
      const double lo = s.knots[0], hi = s.knots[s.knots.size() - 1];
      if (lo < r.interval.a - kMassTol || hi > r.truncation() + kMassTol)
        throw InputError("slice '" + s.ray_id +
                         "': support must lie in the truncated gauge interval");
    }
    for (const auto& [g, am] : s.atoms) {
      if (!(am >= 0.0)) throw InputError("slice '" + s.ray_id + "': negative atom mass");
      const bool at_tip = h.has_tip() && h.tip_attached(s.ray_id) &&
                          std::abs(g - r.interval.a) <= kMassTol;
      if (!at_tip)
        throw InputError("slice '" + s.ray_id +
                         "': atoms are admitted only at the shared tip");
    }
    const double m = s.cell_mass() + s.atom_mass();
    if (std::abs(m - s.mass) > 1e-12 * std::max(1.0, std::abs(s.mass)))
      throw InputError("slice '" + s.ray_id + "': stored mass inconsistent with content");
    total += s.mass;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw InputError("measure masses must sum to 1, got " + std::to_string(total));
  HMeasure mu;
  mu.slices = std::move(slices);
  return mu;
}

RayMeasureSlice uniform_slice(std::string ray_id, double lo, double hi, double mass) {
  RayMeasureSlice s;
  s.ray_id = std::move(ray_id);
  s.mass = mass;
  s.knots = ArrayXd(2);
  s.knots << lo, hi;
  s.values = ArrayXd::Constant(1, mass / (hi - lo));
  return s;
}

double entropy(const HMeasure& mu, const SNH& h) {
  double ent = 0.0;
  for (const RayMeasureSlice& s : mu.slices) {
    if (!s.atoms.empty() && s.atom_mass() > 0.0) return kInfinity;
    const Ray& r = h.ray(s.ray_id);
    const PiecewiseLinear hpl = r.pl();
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const double p = s.values[i];
      if (p <= 0.0) continue;
      const double lo = s.knots[i], hi = s.knots[i + 1];
      const double lg = pl_log_integral_cached(hpl, r.cum, lo, hi);
      if (lg == -kInfinity) return kInfinity;  // positive mass where h vanishes
      ent += p * (hi - lo) * std::log(p / r.weight) - p * lg;
    }
  }
  return ent;
}

namespace {

// Adaptive Simpson on p log(p/(w h(g))); evaluation points with h <= 0 are
// nudged inward so boundary zeros of h stay integrable.
struct SimpsonCtx {
  const PiecewiseLinear* h;
  double p, w, tol;
};

double integrand(const SimpsonCtx& c, double g, double lo, double hi) {
  double hv = pl_eval(*c.h, g);
  if (hv <= 0.0) {
    const double nudge = 1e-13 * (hi - lo);
    hv = pl_eval(*c.h, std::min(std::max(g + nudge, lo + nudge), hi - nudge));
    if (hv <= 0.0) return kInfinity;
  }
  return c.p * std::log(c.p / (c.w * hv));
}

double simpson_rec(const SimpsonCtx& c, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, double lo, double hi) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = integrand(c, lm, lo, hi), frm = integrand(c, rm, lo, hi);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth > 48) return left + right;
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol && depth > 3) return left + right + err / 15.0;
  return simpson_rec(c, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, lo, hi) +
         simpson_rec(c, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, lo, hi);
}

double simpson_piece(const SimpsonCtx& c, double a, double b) {
  const double m = 0.5 * (a + b);
  const double fa = integrand(c, a, a, b);
  const double fm = integrand(c, m, a, b);
  const double fb = integrand(c, b, a, b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb)) return kInfinity;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(c, a, b, fa, fm, fb, whole, c.tol, 0, a, b);
}

}  // namespace

double entropy_quadrature(const HMeasure& mu, const SNH& h, double piece_tol) {
  double ent = 0.0;
  for (const RayMeasureSlice& s : mu.slices) {
    if (!s.atoms.empty() && s.atom_mass() > 0.0) return kInfinity;
    const Ray& r = h.ray(s.ray_id);
    const PiecewiseLinear hpl = r.pl();
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const double p = s.values[i];
      if (p <= 0.0) continue;
      double lo = s.knots[i];
      const double hi = s.knots[i + 1];
      SimpsonCtx ctx{&hpl, p, r.weight, piece_tol};
      // split at density knots so every piece is smooth
      while (lo < hi) {
        Eigen::Index k = 0;
        while (k < hpl.x.size() && hpl.x[k] <= lo) ++k;
        const double cut = (k < hpl.x.size()) ? std::min(hi, hpl.x[k]) : hi;
        const double piece = simpson_piece(ctx, lo, cut);
        if (piece == kInfinity) return kInfinity;
        ent += piece;
        lo = cut;
      }
    }
  }
  return ent;
}

double entropy_power_of(double ent, double M) {
  if (!(M > 0.0)) throw ParamError("entropy power needs M > 0");
  if (ent == kInfinity) return 0.0;
  return std::exp(-ent / M);
}

double entropy_power(const HMeasure& mu, const SNH& h, double M) {
  return entropy_power_of(entropy(mu, h), M);
}

double integrate_transverse(const HMeasure& mu, const std::map<std::string, double>& phi,
                            const SNH& h) {
  if (mu.tip_mass(h) > 0.0)
    throw InputError("integrate_transverse requires a measure concentrated on the open part");
  double acc = 0.0;
  for (const RayMeasureSlice& s : mu.slices) {
    const auto it = phi.find(s.ray_id);
    if (it == phi.end())
      throw InputError("transverse function missing value for ray '" + s.ray_id + "'");
    acc += it->second * s.mass;
  }
  return acc;
}

DisintegrationReport disintegration_check(const std::vector<Ray>& rays) {
  DisintegrationReport rep;
  auto fail = [&rep](std::string ray, std::string why) {
    rep.pass = false;
    rep.issues.push_back({std::move(ray), std::move(why)});
  };
  double total = 0.0;
  for (const Ray& r : rays) {
    total += r.weight;
    if (!(r.weight > 0.0)) fail(r.id, "non-positive quotient weight");
    if (r.density.knots.size() < 2 || r.density.knots.size() != r.density.values.size()) {
      fail(r.id, "malformed density knots");
      continue;
    }
    if ((r.density.values < 0.0).any()) fail(r.id, "negative density knot");
    if (!r.density.values.allFinite()) fail(r.id, "non-finite density value");
    bool increasing = true;
    for (Eigen::Index i = 0; i + 1 < r.density.knots.size(); ++i)
      increasing = increasing && r.density.knots[i] < r.density.knots[i + 1];
    if (!increasing) fail(r.id, "knots not strictly increasing");
    if (increasing && r.density.values.allFinite()) {
      const double m = pl_integral(r.pl(), r.density.knots[0],
                                   r.density.knots[r.density.knots.size() - 1]);
      if (!std::isfinite(m)) fail(r.id, "infinite mass on truncated domain");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) fail("", "quotient not probability");
  return rep;
}

DisintegrationReport disintegration_check(const SNH& h) { return disintegration_check(h.rays()); }

HMeasure pushforward_affine(const HMeasure& mu, const TransversePair& tp, const SNH& domain,
                            const SNH& target) {
  (void)domain;
  std::vector<RayMeasureSlice> out = mu.slices;
  for (RayMeasureSlice& s : out) {
    const double f = tp.f_of(s.ray_id);
    const double sc = tp.h_of(s.ray_id);
    s.knots = f + sc * s.knots;
    s.values = s.values / sc;
    for (auto& [g, m] : s.atoms) g = f + sc * g;
  }
  return make_measure(std::move(out), target);
}

HMeasure pushforward_monotone(const HMeasure& mu, const std::string& ray_id,
                              const PiecewiseLinear& map, const SNH& target) {
  std::vector<RayMeasureSlice> out;
  for (const RayMeasureSlice& s : mu.slices) {
    if (s.ray_id != ray_id) {
      out.push_back(s);
      continue;
    }
    std::vector<MassCell> blocks;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      double lo = s.knots[i];
      const double hi = s.knots[i + 1];
      const double p = s.values[i];
      if (p <= 0.0) continue;
      while (lo < hi) {
        Eigen::Index k = 0;
        while (k < map.x.size() && map.x[k] <= lo) ++k;
        const double cut = (k < map.x.size()) ? std::min(hi, map.x[k]) : hi;
        blocks.push_back({pl_eval_line(map, lo), pl_eval_line(map, cut), p * (cut - lo)});
        lo = cut;
      }
    }
    Overlay ov = overlay_blocks(blocks, 0.0);
    RayMeasureSlice ns;
    ns.ray_id = s.ray_id;
    ns.knots = ov.edges;
    ns.values = ov.values;
    for (const auto& [g, m] : s.atoms) ns.atoms.emplace_back(pl_eval_line(map, g), m);
    for (const auto& [g, m] : ov.atoms) ns.atoms.emplace_back(g, m);
    ns.mass = ns.cell_mass() + ns.atom_mass();
    out.push_back(std::move(ns));
  }
  return make_measure(std::move(out), target);
}

}  // namespace nullot
