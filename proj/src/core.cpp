#include "nullot/core.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "nullot/errors.hpp"

namespace nullot {

namespace {

void validate_ray(const Ray& r) {
  if (r.id.empty()) throw InputError("ray id must be non-empty");
  if (!(r.weight > 0.0)) throw InputError("ray '" + r.id + "': weight must be positive");
  const GaugeInterval& iv = r.interval;
  if (!(iv.a < iv.b)) throw InputError("ray '" + r.id + "': interval requires a < b");
  if (iv.has_final_point && !std::isfinite(iv.b))
    throw InputError("ray '" + r.id + "': final point requires finite b");
  const ArrayXd& k = r.density.knots;
  const ArrayXd& v = r.density.values;
  if (k.size() < 2) throw InputError("ray '" + r.id + "': need at least two density knots");
  if (k.size() != v.size())
    throw InputError("ray '" + r.id + "': knots/values size mismatch");
  if (k[0] != iv.a) throw InputError("ray '" + r.id + "': first knot must equal a");
  const double trunc = std::isfinite(iv.b) ? iv.b : k[k.size() - 1];
  if (std::isfinite(iv.b) && k[k.size() - 1] != iv.b)
    throw InputError("ray '" + r.id + "': last knot must equal b for finite intervals");
  if (k[k.size() - 1] > trunc)
    throw InputError("ray '" + r.id + "': knots exceed the interval");
  for (Eigen::Index i = 0; i + 1 < k.size(); ++i) {
    if (!(k[i] < k[i + 1]))
      throw InputError("ray '" + r.id + "': knots must be strictly increasing");
  }
  if ((v < 0.0).any()) throw InputError("ray '" + r.id + "': negative density value");
  if (!v.allFinite() || !k.allFinite())
    throw InputError("ray '" + r.id + "': density knots/values must be finite");
  if (r.embedding) {
    if (r.embedding->rows() != k.size())
      throw InputError("ray '" + r.id + "': embedding needs one row per knot");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(r.embedding->rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    const MatrixXd& e = *r.embedding;
    auto row_less = [&e](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index c = 0; c < e.cols(); ++c) {
        if (e(a, c) != e(b, c)) return e(a, c) < e(b, c);
      }
      return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      if (!row_less(order[i], order[i + 1]) && !row_less(order[i + 1], order[i]))
        throw InputError("ray '" + r.id + "': embedding must be injective on knots");
    }
  }
}

}  // namespace

const Ray& SyntheticNullHypersurface::ray(std::string_view id) const {
  const int i = ray_index(id);
  if (i < 0) throw InputError("unknown ray id '" + std::string(id) + "'");
  return rays_[static_cast<std::size_t>(i)];
}

int SyntheticNullHypersurface::ray_index(std::string_view id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

bool SyntheticNullHypersurface::tip_attached(std::string_view id) const {
  for (const std::string& t : tip_rays_)
    if (t == id) return true;
  return false;
}

SNH make_hypersurface(std::vector<Ray> rays, std::vector<std::string> tip_rays,
                      std::optional<double> dimension_hint) {
  if (rays.empty()) throw InputError("hypersurface needs at least one ray");
  SNH h;
  double total = 0.0;
  int i = 0;
  for (Ray& r : rays) {
    validate_ray(r);
    if (h.index_.count(r.id)) throw InputError("duplicate ray id '" + r.id + "'");
    h.index_[r.id] = i++;
    total += r.weight;
    r.cum = pl_cumulative(r.pl());
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InputError("ray weights must sum to 1 (quotient measure is a probability), got " +
                     std::to_string(total));
  std::set<std::string> seen;
  for (const std::string& id : tip_rays) {
    if (!h.index_.count(id)) throw InputError("tip references unknown ray '" + id + "'");
    if (!seen.insert(id).second) throw InputError("tip lists ray '" + id + "' twice");
    if (!rays[static_cast<std::size_t>(h.index_[id])].interval.has_initial_point)
      throw InputError("tip-attached ray '" + id + "' must have an initial point");
  }
  if (dimension_hint && !(*dimension_hint > 0.0))
    throw InputError("dimension_hint must be positive");
  h.rays_ = std::move(rays);
  h.tip_rays_ = std::move(tip_rays);
  h.dimension_hint_ = dimension_hint;
  return h;
}

double TransversePair::f_of(std::string_view id) const {
  const auto it = f.find(id);
  return it == f.end() ? 0.0 : it->second;
}

double TransversePair::h_of(std::string_view id) const {
  const auto it = h.find(id);
  const double v = it == h.end() ? 1.0 : it->second;
  if (!(v > 0.0)) throw InputError("transverse factor h must be positive on ray '" +
                                   std::string(id) + "'");
  return v;
}

TransversePair TransversePair::inverse() const {
  TransversePair inv;
  for (const auto& [id, hv] : h) {
    if (!(hv > 0.0)) throw InputError("transverse factor h must be positive");
    inv.h[id] = 1.0 / hv;
    inv.f[id] = -f_of(id) / hv;
  }
  for (const auto& [id, fv] : f) {
    if (!inv.f.count(id)) inv.f[id] = -fv;  // h defaults to 1
  }
  return inv;
}

namespace {

void check_point(const PointOnH& p, const SNH& h) {
  if (p.is_tip()) {
    if (!h.has_tip()) throw InputError("hypersurface has no shared tip");
    return;
  }
  const Ray& r = h.ray(p.ray_id);
  if (p.gauge < r.interval.a || p.gauge > r.interval.b)
    throw InputError("gauge value outside the closed interval of ray '" + p.ray_id + "'");
}

}  // namespace

bool causal_leq(const PointOnH& x, const PointOnH& y, const SNH& h) {
  check_point(x, h);
  check_point(y, h);
  if (x.is_tip() && y.is_tip()) return true;
  if (x.is_tip()) return h.tip_attached(y.ray_id);
  if (y.is_tip()) return false;  // nothing besides the tip precedes the tip
  if (x.ray_id != y.ray_id) return false;
  return x.gauge <= y.gauge;
}

PointOnH psi_flow(const PointOnH& x, double t, const SNH& h) {
  if (x.is_tip()) throw InputError("psi_flow is undefined at the tip");
  const Ray& r = h.ray(x.ray_id);
  check_point(x, h);
  const double lo = r.interval.a - x.gauge;
  const double hi = r.interval.b - x.gauge;
  if (t < lo || t > hi) {
    std::ostringstream msg;
    msg << "psi_flow leaves ray '" << x.ray_id << "': admissible t in [" << lo << ", " << hi
        << "]";
    throw DomainError(msg.str(), lo, hi);
  }
  return PointOnH::on(x.ray_id, x.gauge + t);
}

SNH gauge_measure_transform(const SNH& h, const TransversePair& tp) {
  std::vector<Ray> rays = h.rays();
  for (Ray& r : rays) {
    const double f = tp.f_of(r.id);
    const double s = tp.h_of(r.id);
    r.interval.a = f + s * r.interval.a;
    r.interval.b = std::isfinite(r.interval.b) ? f + s * r.interval.b : kInfinity;
    r.density.knots = f + s * r.density.knots;
    r.density.values = r.density.values / (s * s);
  }
  return make_hypersurface(std::move(rays), h.tip_rays(), h.dimension_hint());
}

SNH transverse_rescale(const SNH& h, const std::map<std::string, double>& phi) {
  std::vector<Ray> rays = h.rays();
  for (Ray& r : rays) {
    const auto it = phi.find(r.id);
    const double p = it == phi.end() ? 1.0 : it->second;
    if (!(p > 0.0)) throw InputError("transverse rescale factor must be positive");
    r.density.values = r.density.values * p;
  }
  return make_hypersurface(std::move(rays), h.tip_rays(), h.dimension_hint());
}

}  // namespace nullot
