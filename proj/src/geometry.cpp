#include "nullot/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "nullot/errors.hpp"
#include "nullot/rng.hpp"

namespace nullot {

namespace {

void validate_section(const CrossSection& s, const SNH& h) {
  for (const auto& [id, g] : s.points) {
    const Ray& r = h.ray(id);
    if (g < r.interval.a || g >= r.interval.b)
      throw InputError("section point outside ray '" + id + "'");
  }
}

void validate_eps_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ParamError("eps grid must be non-empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw ParamError("eps grid entries must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw ParamError("eps grid must be strictly decreasing");
  }
}

bool in_subset(const std::optional<std::set<std::string>>& subset, const std::string& id) {
  return !subset || subset->count(id) > 0;
}

double enlargement_mass(const CrossSection& s, const SNH& h, double eps,
                        const std::optional<std::set<std::string>>& subset) {
  double m = 0.0;
  for (const auto& [id, g] : s.points) {
    if (!in_subset(subset, id)) continue;
    const Ray& r = h.ray(id);
    m += r.weight * pl_integral_cached(r.pl(), r.cum, g, g + eps);
  }
  return m;
}

}  // namespace

CrossSection CrossSection::at_gauge(const SNH& h, double g) {
  CrossSection s;
  for (const Ray& r : h.rays()) {
    if (g >= r.interval.a && g < r.interval.b) s.points[r.id] = g;
  }
  return s;
}

ContentResult minkowski_content(const CrossSection& s, const SNH& h,
                                const std::vector<double>& eps_grid,
                                const std::optional<std::set<std::string>>& subset) {
  validate_section(s, h);
  validate_eps_grid(eps_grid);
  ContentResult res;
  bool any = false;
  double room = kInfinity;
  for (const auto& [id, g] : s.points) {
    if (!in_subset(subset, id)) continue;
    const Ray& r = h.ray(id);
    any = true;
    res.closed_form += r.weight * pl_eval(r.pl(), g);
    room = std::min(room, r.truncation() - g);
  }
  if (!any) return res;  // S empty on A
  // two smallest grid entries, shrunk into the available window when needed
  std::vector<double> eps;
  for (std::size_t i = eps_grid.size(); i-- > 0 && eps.size() < 2;) {
    double e = eps_grid[i];
    if (e > room) {
      e = 0.5 * room;
      res.eps_shrunk = true;
    }
    eps.push_back(e);
  }
  for (double e : eps) {
    res.numeric = std::max(res.numeric, enlargement_mass(s, h, e, subset) / e);
  }
  res.rel_gap = std::abs(res.numeric - res.closed_form) /
                std::max(std::abs(res.closed_form), 1e-300);
  return res;
}

HawkingReport hawking_check(const CrossSection& s1, const CrossSection& s2, const SNH& h,
                            double N) {
  validate_section(s1, h);
  validate_section(s2, h);
  for (const auto& [id, g] : s1.points) {
    const auto it = s2.points.find(id);
    if (it == s2.points.end())
      throw InputError("hawking_check needs S1's ray set inside S2's (ray '" + id + "')");
    if (g > it->second + 1e-15)
      throw InputError("hawking_check needs S1 <= S2 ray-wise (ray '" + id + "')");
  }
  HawkingReport rep;
  for (const Ray& r : h.rays()) {
    if (std::isfinite(r.interval.b)) {
      rep.reason = "not future complete for the gauge (ray '" + r.id + "' has finite b)";
      return rep;
    }
    const ArrayXd& v = r.density.values;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) {
        rep.reason = "reference measure lacks full support on ray '" + r.id + "'";
        return rep;
      }
    }
  }
  const CdReport cd = cd_check(h, N);
  if (!cd.pass) {
    rep.reason = "CD certificate fails on ray '" + cd.ray_id + "'";
    return rep;
  }
  rep.applicable = true;
  rep.content_1 = minkowski_content(s1, h).closed_form;
  rep.content_2 = minkowski_content(s2, h).closed_form;
  rep.pass = rep.content_1 <= rep.content_2 + 1e-9;
  return rep;
}

CovarianceReport content_covariance(const CrossSection& s, const SNH& h,
                                    const TransversePair& tp) {
  validate_section(s, h);
  CovarianceReport rep;
  const ContentResult before = minkowski_content(s, h);
  if (!std::isfinite(before.closed_form)) {
    rep.reason = "content not finite";
    return rep;
  }
  // paired move: gauge g -> f + h g together with measure m -> h m
  SNH h2 = gauge_measure_transform(h, tp);
  std::map<std::string, double> square;
  for (const Ray& r : h.rays()) {
    const double hv = tp.h_of(r.id);
    square[r.id] = hv * hv;
  }
  h2 = transverse_rescale(h2, square);
  CrossSection s2;
  for (const auto& [id, g] : s.points) s2.points[id] = tp.f_of(id) + tp.h_of(id) * g;
  const ContentResult after = minkowski_content(s2, h2);
  if (!std::isfinite(after.closed_form)) {
    rep.reason = "content not finite";
    return rep;
  }
  rep.applicable = true;
  rep.content_before = before.closed_form;
  rep.content_after = after.closed_form;
  rep.gap = std::abs(rep.content_before - rep.content_after);
  rep.pass = rep.gap <= 1e-9 * std::max(1.0, std::abs(rep.content_before));
  return rep;
}

ThetaReport theta_estimate(const CrossSection& s, const SNH& h,
                           const std::vector<double>& eps_grid, int sampled_subsets,
                           std::uint64_t seed) {
  validate_section(s, h);
  validate_eps_grid(eps_grid);
  ThetaReport rep;
  rep.closed_form = -kInfinity;
  std::vector<std::string> ids;
  for (const auto& [id, g] : s.points) {
    const Ray& r = h.ray(id);
    const double hv = pl_eval(r.pl(), g);
    if (hv <= 0.0) throw InputError("degenerate section: zero density on ray '" + id + "'");
    rep.closed_form = std::max(rep.closed_form, pl_right_slope(r.pl(), g) / hv);
    ids.push_back(id);
  }
  if (ids.empty()) throw InputError("theta_estimate needs a non-empty section");

  auto numeric_for = [&](const std::optional<std::set<std::string>>& subset) {
    const ContentResult c = minkowski_content(s, h, eps_grid, subset);
    if (c.closed_form <= 0.0) return -kInfinity;
    double worst = -kInfinity;
    double room = kInfinity;
    for (const auto& [id, g] : s.points) {
      if (!in_subset(subset, id)) continue;
      room = std::min(room, h.ray(id).truncation() - g);
    }
    std::vector<double> eps;
    for (std::size_t i = eps_grid.size(); i-- > 0 && eps.size() < 2;) {
      eps.push_back(std::min(eps_grid[i], 0.5 * room));
    }
    for (double e : eps) {
      const double m = enlargement_mass(s, h, e, subset);
      worst = std::max(worst, (m - e * c.closed_form) / (0.5 * e * e * c.closed_form));
    }
    return worst;
  };

  rep.numeric = numeric_for(std::nullopt);
  Rng rng(seed);
  for (int k = 0; k < sampled_subsets; ++k) {
    std::set<std::string> subset;
    for (const std::string& id : ids) {
      if (rng.uniform01() < 0.5) subset.insert(id);
    }
    if (subset.empty()) subset.insert(ids[rng.below(ids.size())]);
    rep.numeric = std::max(rep.numeric, numeric_for(subset));
  }
  return rep;
}

PenroseReport penrose_check(const SNH& h, double N, const CrossSection& s, double theta) {
  if (!(N > 2.0)) throw ParamError("penrose_check needs N > 2");
  validate_section(s, h);
  PenroseReport rep;
  rep.theta = theta;
  if (!(theta < 0.0)) {
    rep.reason = "not future converging";
    return rep;
  }
  const CdReport cd = cd_check(h, N);
  if (!cd.pass) {
    rep.reason = "CD certificate fails on ray '" + cd.ray_id + "'";
    return rep;
  }
  for (const Ray& r : h.rays()) {
    if (std::abs(r.interval.a) > 1e-12) {
      rep.reason = "gauge infimum is not 0 on ray '" + r.id + "'";
      return rep;
    }
  }
  rep.applicable = true;
  rep.bound = (N - 2.0) / (-theta);
  rep.pass = true;
  rep.compact = true;
  for (const Ray& r : h.rays()) {
    const double b = r.interval.b;
    const double slack = rep.bound - b;
    rep.per_ray.push_back({r.id, b, rep.bound, slack});
    rep.max_b = std::max(rep.max_b, b);
    if (!(b <= rep.bound + 1e-9)) rep.pass = false;
    if (!std::isfinite(b)) rep.compact = false;
  }
  rep.compact = rep.compact && rep.pass;
  return rep;
}

PropernessReport is_proper(const SNH& h, double horizon) {
  PropernessReport rep;
  for (const Ray& r : h.rays()) {
    if (!r.embedding) {
      rep.reason = "undecidable without embedding (ray '" + r.id + "')";
      return rep;
    }
  }
  rep.decidable = true;
  rep.proper = true;
  for (const Ray& r : h.rays()) {
    // closed sublevel: either the horizon cuts the ray strictly below b, or
    // the endpoint exists in H
    if (r.interval.b <= horizon && !r.interval.has_final_point) {
      rep.proper = false;
      rep.reason = "sublevel not closed: ray '" + r.id +
                   "' has finite b <= horizon and no final point";
      return rep;
    }
    double bound = 0.0;
    for (Eigen::Index i = 0; i < r.density.knots.size(); ++i) {
      if (r.density.knots[i] > horizon) break;
      bound = std::max(bound, r.embedding->row(i).cwiseAbs().maxCoeff());
    }
    if (!std::isfinite(bound)) {
      rep.proper = false;
      rep.reason = "embedded sublevel unbounded on ray '" + r.id + "'";
      return rep;
    }
  }
  return rep;
}

}  // namespace nullot
