#include "nullot/transport.hpp"

#include <algorithm>
#include <cmath>

#include "nullot/errors.hpp"

namespace nullot {

namespace {

constexpr double kMassTol = 1e-10;

std::vector<MassCell> slice_cells(const RayMeasureSlice* s) {
  std::vector<MassCell> cells;
  if (!s) return cells;
  for (Eigen::Index i = 0; i < s->values.size(); ++i) {
    const double m = s->values[i] * (s->knots[i + 1] - s->knots[i]);
    if (m > 0.0) cells.push_back({s->knots[i], s->knots[i + 1], m});
  }
  return cells;
}

// Aligned cells of two quantile functions on the common mass axis of side 0.
struct QPair {
  double mass;
  double s_lo, s_hi;
  double d_lo, d_hi;
};

double cell_position(const QuantileGrid& q, std::size_t i, double u) {
  const MassCell& c = q.cells[i];
  const double frac = std::clamp((u - q.cum[i]) / c.mass, 0.0, 1.0);
  return c.lo + frac * (c.hi - c.lo);
}

std::size_t locate_cell(const QuantileGrid& q, double u) {
  const auto it = std::upper_bound(q.cum.begin(), q.cum.end(), u);
  std::size_t i = (it == q.cum.begin()) ? 0 : (it - q.cum.begin() - 1);
  if (i >= q.cells.size()) i = q.cells.size() - 1;
  return i;
}

std::vector<QPair> aligned_cells(const QuantileGrid& q0, const QuantileGrid& q1) {
  std::vector<QPair> out;
  const double m0 = q0.total(), m1 = q1.total();
  if (m0 <= 0.0 || m1 <= 0.0) return out;
  const double scale = m0 / m1;
  std::vector<double> breaks = q0.cum;
  for (double c : q1.cum) breaks.push_back(c * scale);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double ua = std::clamp(breaks[k], 0.0, m0);
    const double ub = std::clamp(breaks[k + 1], 0.0, m0);
    const double du = ub - ua;
    if (du <= 1e-18 * std::max(m0, 1.0)) continue;
    const double umid = 0.5 * (ua + ub);
    const std::size_t i0 = locate_cell(q0, umid);
    const std::size_t i1 = locate_cell(q1, umid / scale);
    out.push_back({du, cell_position(q0, i0, ua), cell_position(q0, i0, ub),
                   cell_position(q1, i1, ua / scale), cell_position(q1, i1, ub / scale)});
  }
  return out;
}

}  // namespace

double atom_block_width(const Ray& r) { return 1e-6 * (r.truncation() - r.interval.a); }

Feasibility feasibility(const HMeasure& mu0, const HMeasure& mu1, const SNH& h) {
  Feasibility res;
  const double tip0 = mu0.tip_mass(h);
  const double tip1 = mu1.tip_mass(h);
  if (tip1 > tip0 + kMassTol) {
    res.obstruction = "tip mass deficit";
    return res;
  }
  // per-ray mass balance; the tip of mu0 may feed any attached ray
  std::map<std::string, double> alloc;
  double allocated = 0.0;
  for (const Ray& r : h.rays()) {
    const double m0 = mu0.ray_mass(r.id);
    const double m1 = mu1.ray_mass(r.id);
    if (h.tip_attached(r.id)) {
      const double a = m1 - m0;
      if (a < -kMassTol) {
        res.obstruction = "ray mass mismatch";
        res.witness = {{r.id, 0.0}};
        return res;
      }
      if (a > 0.0) {
        alloc[r.id] = a;
        allocated += a;
      }
    } else if (std::abs(m0 - m1) > kMassTol) {
      res.obstruction = "ray mass mismatch";
      res.witness = {{r.id, 0.0}};
      return res;
    }
  }
  if (std::abs(allocated - (tip0 - tip1)) > kMassTol) {
    res.obstruction = "ray mass mismatch";
    return res;
  }
  // per-ray quantile dominance, tip-fed mass entering at the initial gauge
  for (const Ray& r : h.rays()) {
    std::vector<MassCell> c0 = slice_cells(mu0.slice(r.id));
    const auto it = alloc.find(r.id);
    if (it != alloc.end() && it->second > 0.0) {
      const double eps = atom_block_width(r);
      c0.push_back({r.interval.a, r.interval.a + eps, it->second});
    }
    const QuantileGrid q0 = make_quantile_grid(std::move(c0));
    const QuantileGrid q1 = make_quantile_grid(slice_cells(mu1.slice(r.id)));
    if (q0.total() <= kMassTol) continue;
    const double span = r.truncation() - r.interval.a;
    for (const QPair& c : aligned_cells(q0, q1)) {
      if (c.d_lo < c.s_lo - 1e-12 * span || c.d_hi < c.s_hi - 1e-12 * span) {
        res.obstruction = "quantile dominance violated";
        const double u = (c.d_lo < c.s_lo - 1e-12 * span) ? 0.0 : 1.0;
        res.witness = {{r.id, u}};
        return res;
      }
    }
  }
  res.feasible = true;
  return res;
}

CausalCoupling monotone_coupling(const HMeasure& mu0, const HMeasure& mu1, const SNH& h) {
  if (mu0.has_atoms() || mu1.has_atoms())
    throw InputError("monotone_coupling needs marginals concentrated on the open part");
  const Feasibility feas = feasibility(mu0, mu1, h);
  if (!feas.feasible)
    throw InputError("infeasible marginal pair: " + feas.obstruction);
  CausalCoupling out;
  for (const Ray& r : h.rays()) {
    const QuantileGrid q0 = make_quantile_grid(slice_cells(mu0.slice(r.id)));
    const QuantileGrid q1 = make_quantile_grid(slice_cells(mu1.slice(r.id)));
    if (q0.total() <= 0.0) continue;
    RayPlan plan;
    plan.ray_id = r.id;
    for (const QPair& c : aligned_cells(q0, q1)) {
      plan.segments.push_back({c.s_lo, c.s_hi, c.d_lo, c.d_hi, c.mass});
    }
    std::sort(plan.segments.begin(), plan.segments.end(),
              [](const PlanSegment& a, const PlanSegment& b) { return a.src_lo < b.src_lo; });
    out.rays.push_back(std::move(plan));
  }
  return out;
}

DynamicalPlan dynamical_plan(const CausalCoupling& coupling, const SNH& h) {
  if (!coupling.tip_rows.empty())
    throw InputError("dynamical_plan requires a coupling without tip rows");
  DynamicalPlan plan;
  for (const RayPlan& rp : coupling.rays) {
    h.ray(rp.ray_id);  // id check
    for (const PlanSegment& s : rp.segments) {
      if (s.dst_lo < s.src_lo - kMassTol || s.dst_hi < s.src_hi - kMassTol)
        throw InputError("coupling row is not causal on ray '" + rp.ray_id + "'");
    }
    plan.rays.push_back(rp);
  }
  return plan;
}

HMeasure interpolate(const DynamicalPlan& plan, double t, const SNH& h) {
  if (t < 0.0 || t > 1.0) throw ParamError("interpolation time must lie in [0, 1]");
  HMeasure mu;
  for (const RayPlan& rp : plan.rays) {
    const Ray& r = h.ray(rp.ray_id);
    std::vector<MassCell> blocks;
    blocks.reserve(rp.segments.size());
    for (const PlanSegment& s : rp.segments) {
      const double lo = (1.0 - t) * s.src_lo + t * s.dst_lo;
      const double hi = (1.0 - t) * s.src_hi + t * s.dst_hi;
      blocks.push_back({lo, hi, s.mass});
    }
    const double floor = 1e-15 * (r.truncation() - r.interval.a);
    Overlay ov = overlay_blocks(blocks, floor);
    RayMeasureSlice s;
    s.ray_id = rp.ray_id;
    s.knots = ov.edges;
    s.values = ov.values;
    s.atoms = ov.atoms;  // collision blocks; entropy becomes +inf downstream
    s.mass = s.cell_mass() + s.atom_mass();
    mu.slices.push_back(std::move(s));
  }
  return mu;
}

HMeasure plan_marginal(const DynamicalPlan& plan, int which, const SNH& h) {
  if (which != 0 && which != 1) throw ParamError("marginal index must be 0 or 1");
  return interpolate(plan, which == 0 ? 0.0 : 1.0, h);
}

}  // namespace nullot
