#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nullot/core.hpp"
#include "nullot/measures.hpp"

namespace nullot {

/// One affine block of a per-ray coupling: the sub-interval [src_lo, src_hi]
/// of mu0 maps affinely onto [dst_lo, dst_hi] of mu1 carrying `mass`.
struct PlanSegment {
  double src_lo, src_hi;
  double dst_lo, dst_hi;
  double mass;
};

struct RayPlan {
  std::string ray_id;
  std::vector<PlanSegment> segments;
};

/// Mass leaving the shared tip into a gauge interval of an attached ray.
struct TipRow {
  std::string ray_id;
  double dst_lo, dst_hi;
  double mass;
};

/// Causal coupling in quantile form; rows satisfy dst >= src per ray.
struct CausalCoupling {
  std::vector<RayPlan> rays;
  std::vector<TipRow> tip_rows;
};

/// Weighted family of affine-in-gauge causal segments,
/// t -> (1-t) g0 + t g1 within each block.
struct DynamicalPlan {
  std::vector<RayPlan> rays;
};

struct Feasibility {
  bool feasible = false;
  std::string obstruction;                                // empty when feasible
  std::optional<std::pair<std::string, double>> witness;  // (ray, u) of first violation
};

/// Couplability test: per-ray masses must match (tip mass may split among
/// tip-attached rays) and per-ray quantiles must dominate, Q1 >= Q0.
Feasibility feasibility(const HMeasure& mu0, const HMeasure& mu1, const SNH& h);

/// The unique monotone (quantile) coupling. Requires feasibility and marginals
/// without tip atoms. Atoms supplied as cells are already blocks; genuine
/// atoms entered via the atom list are rejected here.
CausalCoupling monotone_coupling(const HMeasure& mu0, const HMeasure& mu1, const SNH& h);

/// Lift a coupling to the affine dynamical plan; rejects tip rows.
DynamicalPlan dynamical_plan(const CausalCoupling& coupling, const SNH& h);

/// Displacement interpolation (e_t)# of the plan; exact change of variables
/// per affine block. Collapsed blocks (zero width) become atoms.
HMeasure interpolate(const DynamicalPlan& plan, double t, const SNH& h);

/// Marginals of a coupling/plan, for verification.
HMeasure plan_marginal(const DynamicalPlan& plan, int which, const SNH& h);

/// Atom block width used when true atoms must enter transport:
/// 1e-6 * (truncated interval length) of the ray.
double atom_block_width(const Ray& r);

}  // namespace nullot
