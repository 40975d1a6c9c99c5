#include "nullot/smooth.hpp"

#include <cmath>

#include "nullot/errors.hpp"
#include "nullot/rng.hpp"

namespace nullot {

WarpedProductSpec sqrt_warp_null(double t0, double tdot0) {
  WarpedProductSpec s;
  s.warp = [](double t) { return std::sqrt(-t); };
  s.warp_prime = [](double t) { return -0.5 / std::sqrt(-t); };
  s.t0 = t0;
  s.tdot0 = tdot0;
  s.rdot0 = tdot0 / std::sqrt(-t0);
  s.causal_type = WarpedProductSpec::Causal::null_ray;
  s.name = "sqrt";
  return s;
}

WarpedProductSpec power_warp_null(double p, double t0, double tdot0) {
  WarpedProductSpec s;
  s.warp = [p](double t) { return std::pow(-t, p); };
  s.warp_prime = [p](double t) { return -p * std::pow(-t, p - 1.0); };
  s.t0 = t0;
  s.tdot0 = tdot0;
  s.rdot0 = tdot0 / std::pow(-t0, p);
  s.causal_type = WarpedProductSpec::Causal::null_ray;
  s.name = "power";
  return s;
}

WarpedProductSpec radial_timelike(double t0, double tdot0) {
  WarpedProductSpec s;
  s.warp = [](double t) { return std::sqrt(-t); };
  s.warp_prime = [](double t) { return -0.5 / std::sqrt(-t); };
  s.t0 = t0;
  s.tdot0 = tdot0;
  s.rdot0 = 0.0;
  s.causal_type = WarpedProductSpec::Causal::timelike;
  s.name = "radial";
  return s;
}

double GeodesicTrace::winding() const {
  if (samples.empty()) return 0.0;
  return std::abs(samples.back().r - samples.front().r);
}

namespace {

struct State {
  double t, u, r;
};

struct OdeCtx {
  const WarpedProductSpec* spec;
  double C;
};

State deriv(const OdeCtx& c, const State& y) {
  const double f = c.spec->warp(y.t);
  if (!(f > 0.0)) throw InputError("warp function must stay positive along the trajectory");
  const double fp = c.spec->warp_prime(y.t);
  const double f2 = f * f;
  return {y.u, -(c.C * c.C) * fp / (f2 * f), c.C / f2};
}

State rk4(const OdeCtx& c, const State& y, double h) {
  const State k1 = deriv(c, y);
  const State y2{y.t + 0.5 * h * k1.t, y.u + 0.5 * h * k1.u, y.r + 0.5 * h * k1.r};
  const State k2 = deriv(c, y2);
  const State y3{y.t + 0.5 * h * k2.t, y.u + 0.5 * h * k2.u, y.r + 0.5 * h * k2.r};
  const State k3 = deriv(c, y3);
  const State y4{y.t + h * k3.t, y.u + h * k3.u, y.r + h * k3.r};
  const State k4 = deriv(c, y4);
  return {y.t + h / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t),
          y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r)};
}

struct PassResult {
  double s_final = 0.0;
  GeodesicTrace::Terminated reason = GeodesicTrace::Terminated::steps;
  std::vector<TraceSample> samples;
  double drift = 0.0;
};

PassResult integrate_pass(const WarpedProductSpec& spec, double step, long max_steps,
                          bool record) {
  const OdeCtx ctx{&spec, spec.rdot0 * spec.warp(spec.t0) * spec.warp(spec.t0)};
  const double h_min = step / 1024.0;
  const double speed_cap = 1.0 / step;
  State y{spec.t0, spec.tdot0, 0.0};
  double s = 0.0;
  double h = step;
  const double q0 = y.u * y.u - ctx.C * ctx.C / (spec.warp(y.t) * spec.warp(y.t));

  PassResult res;
  auto push = [&](double sv, const State& yv) {
    const double f = spec.warp(yv.t);
    const double rdot = ctx.C / (f * f);
    if (record) res.samples.push_back({sv, yv.t, yv.u, yv.r, rdot});
    const double q = yv.u * yv.u - ctx.C * ctx.C / (f * f);
    res.drift = std::max(res.drift, std::abs(q - q0) / (1.0 + yv.u * yv.u));
  };
  push(0.0, y);

  for (long n = 0; n < max_steps; ++n) {
    if (y.t >= -10.0 * h_min) {
      res.reason = GeodesicTrace::Terminated::blow_up;
      break;
    }
    if (y.u > speed_cap) {
      res.reason = GeodesicTrace::Terminated::speed_horizon;
      break;
    }
    // never step across the singularity at t = 0
    double h_try = std::min(h, 0.45 * (-y.t) / std::max(y.u, 1e-300));
    bool accepted = false;
    while (!accepted) {
      State full, half;
      bool ok = true;
      try {
        full = rk4(ctx, y, h_try);
        const State mid = rk4(ctx, y, 0.5 * h_try);
        half = rk4(ctx, mid, 0.5 * h_try);
        ok = half.t < 0.0 && full.t < 0.0;
      } catch (const InputError&) {
        ok = false;
      }
      const double scale = std::abs(y.t) + std::abs(y.u) + std::abs(y.r) + 1e-6;
      double err = ok ? (std::abs(full.t - half.t) + std::abs(full.u - half.u) +
                         std::abs(full.r - half.r)) /
                            15.0
                      : kInfinity;
      if (ok && err <= 1e-11 * scale) {
        // local extrapolation
        y = {half.t + (half.t - full.t) / 15.0, half.u + (half.u - full.u) / 15.0,
             half.r + (half.r - full.r) / 15.0};
        if (y.t >= 0.0) y.t = half.t;
        s += h_try;
        accepted = true;
        if (err <= 1e-13 * scale) h = std::min(step, 2.0 * h_try);
        else h = h_try;
      } else {
        h_try *= 0.5;
        if (h_try < h_min) {
          // error control demands steps below the floor: blow-up proximity
          res.reason = GeodesicTrace::Terminated::blow_up;
          res.s_final = s;
          return res;
        }
      }
    }
    push(s, y);
  }
  res.s_final = s;
  return res;
}

}  // namespace

GeodesicTrace integrate_geodesic(const WarpedProductSpec& spec, double step, long max_steps) {
  if (!(step > 0.0)) throw ParamError("integration step must be positive");
  if (max_steps < 1) throw ParamError("max_steps must be positive");
  const double f0 = spec.warp(spec.t0);
  if (!(f0 > 0.0)) throw InputError("warp must be positive at t0");
  if (spec.causal_type == WarpedProductSpec::Causal::null_ray) {
    const double lhs = spec.tdot0 * spec.tdot0;
    const double rhs = f0 * f0 * spec.rdot0 * spec.rdot0;
    if (std::abs(lhs - rhs) > 1e-12 * std::max(lhs, rhs))
      throw InputError("null initial data must satisfy tdot0^2 = f(t0)^2 rdot0^2");
  }
  const PassResult coarse = integrate_pass(spec, step, max_steps, false);
  const PassResult fine = integrate_pass(spec, 0.5 * step, 2 * max_steps, true);
  GeodesicTrace trace;
  trace.samples = fine.samples;
  trace.terminated = fine.reason;
  trace.conservation_drift = fine.drift;
  trace.b_estimate = 2.0 * fine.s_final - coarse.s_final;
  return trace;
}

namespace {

// Deterministic direction samples on S^(d-1) embedded in R^d.
std::vector<Eigen::VectorXd> sphere_directions(int d, int count) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * M_PI * k / count;
      Eigen::VectorXd v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
  } else if (d == 3) {
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * k;
      Eigen::VectorXd v(3);
      v << rad * std::cos(a), rad * std::sin(a), z;
      dirs.push_back(v);
    }
  } else {
    Rng rng(0x5EEDBA5Eull + static_cast<std::uint64_t>(d) * 1000003ull +
            static_cast<std::uint64_t>(count));
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd v(d);
      double norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        // Box-Muller from deterministic bits
        const double u1 = std::max(rng.uniform01(), 1e-300);
        const double u2 = rng.uniform01();
        v[j] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        norm2 += v[j] * v[j];
      }
      v /= std::sqrt(norm2);
      dirs.push_back(v);
    }
  }
  return dirs;
}

// Graded knot grid on [0, horizon]: relative spacing ~ rel around each gauge
// value (fine near the vanishing density at 0), plus exact anchor knots so
// round sections land on stored values.
ArrayXd graded_knots(double horizon, double inner, double rel, int anchors) {
  std::vector<double> k;
  k.push_back(0.0);
  double t = inner * horizon;
  while (t < horizon) {
    k.push_back(t);
    t += rel * std::max(t, inner * horizon);
  }
  k.push_back(horizon);
  for (int j = 1; j < anchors; ++j) {
    const double a = horizon * j / anchors;
    if (a > 0.0 && a < horizon) k.push_back(a);
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end(),
                      [&](double a, double b) { return b - a <= 1e-12 * horizon; }),
          k.end());
  return Eigen::Map<const ArrayXd>(k.data(), static_cast<Eigen::Index>(k.size()));
}

}  // namespace

SNH cone_hypersurface(int n, double horizon, const ConeOptions& opts) {
  if (n < 3) throw ParamError("cone_hypersurface needs ambient dimension n >= 3");
  if (!(horizon > 0.0)) throw ParamError("horizon must be positive");
  const ArrayXd knots = graded_knots(horizon, opts.inner, opts.rel_spacing, opts.anchors);
  const ArrayXd values = knots.pow(static_cast<double>(n - 2));
  const auto dirs = sphere_directions(n - 1, opts.rays);
  std::vector<Ray> rays;
  std::vector<std::string> tips;
  for (int i = 0; i < opts.rays; ++i) {
    Ray r;
    r.id = "r" + std::to_string(i);
    r.weight = 1.0 / opts.rays;
    r.interval = {0.0, kInfinity, true, false};
    r.density = {knots, values};
    if (opts.embeddings) {
      MatrixXd e(knots.size(), n);
      for (Eigen::Index k = 0; k < knots.size(); ++k) {
        e(k, 0) = knots[k];
        e.row(k).tail(n - 1) = knots[k] * dirs[static_cast<std::size_t>(i)].transpose();
      }
      r.embedding = std::move(e);
    }
    tips.push_back(r.id);
    rays.push_back(std::move(r));
  }
  return make_hypersurface(std::move(rays), std::move(tips), static_cast<double>(n));
}

SNH sphere_boundary_hypersurface(double radius, double horizon, SphereFamily family,
                                 const SphereOptions& opts) {
  if (!(radius > 0.0)) throw ParamError("radius must be positive");
  if (!(horizon > 0.0)) throw ParamError("horizon must be positive");
  const bool ingoing = family == SphereFamily::ingoing;
  ArrayXd knots;
  if (ingoing) {
    // grid on [0, radius] refined toward the focal zero at t = radius, with a
    // tiny first interval so the stored slope at 0 is the exact derivative
    std::vector<double> k{0.0, opts.theta_anchor * radius};
    double t = k.back();
    while (true) {
      const double gap = radius - t;
      const double next = t + opts.rel_spacing * gap;
      if (radius - next <= 1e-6 * radius) break;
      k.push_back(next);
      t = next;
    }
    k.push_back(radius);
    knots = Eigen::Map<const ArrayXd>(k.data(), static_cast<Eigen::Index>(k.size()));
  } else {
    knots = graded_knots(horizon, 1e-3, opts.rel_spacing, opts.anchors);
  }
  ArrayXd values(knots.size());
  for (Eigen::Index i = 0; i < knots.size(); ++i) {
    const double base = ingoing ? radius - knots[i] : radius + knots[i];
    values[i] = base * base;
  }
  const auto dirs = sphere_directions(3, opts.rays);
  std::vector<Ray> rays;
  for (int i = 0; i < opts.rays; ++i) {
    Ray r;
    r.id = "s" + std::to_string(i);
    r.weight = 1.0 / opts.rays;
    if (ingoing) {
      r.interval = {0.0, radius, true, false};
    } else {
      r.interval = {0.0, kInfinity, true, false};
    }
    r.density = {knots, values};
    if (opts.embeddings) {
      MatrixXd e(knots.size(), 4);
      for (Eigen::Index k = 0; k < knots.size(); ++k) {
        const double rad = ingoing ? radius - knots[k] : radius + knots[k];
        e(k, 0) = knots[k];
        e.row(k).tail(3) = rad * dirs[static_cast<std::size_t>(i)].transpose();
      }
      r.embedding = std::move(e);
    }
    rays.push_back(std::move(r));
  }
  return make_hypersurface(std::move(rays), {}, 4.0);
}

SNH warped_boundary_hypersurface(const WarpedProductSpec& spec, double step, long max_steps,
                                 int knot_target) {
  GeodesicTrace tr = integrate_geodesic(spec, step, max_steps);
  if (tr.samples.size() < 4) throw InputError("trace too short to build a hypersurface");
  const std::size_t stride =
      std::max<std::size_t>(1, tr.samples.size() / static_cast<std::size_t>(knot_target));
  std::vector<double> ks, hs, ts, rs;
  for (std::size_t i = 0; i < tr.samples.size(); i += stride) {
    ks.push_back(tr.samples[i].s);
    hs.push_back(spec.warp(tr.samples[i].t) / spec.warp(spec.t0));
    ts.push_back(tr.samples[i].t);
    rs.push_back(tr.samples[i].r);
  }
  // close the ray at the extrapolated endpoint where the warp factor vanishes
  const double b = std::max(tr.b_estimate, ks.back() + 1e-12);
  ks.push_back(b);
  hs.push_back(0.0);
  ts.push_back(0.0);
  rs.push_back(rs.back());

  std::vector<Ray> rays;
  for (int side = 0; side < 2; ++side) {
    Ray r;
    r.id = side == 0 ? "east" : "west";
    r.weight = 0.5;
    r.interval = {0.0, b, true, false};
    ArrayXd kk = Eigen::Map<const ArrayXd>(ks.data(), static_cast<Eigen::Index>(ks.size()));
    ArrayXd vv = Eigen::Map<const ArrayXd>(hs.data(), static_cast<Eigen::Index>(hs.size()));
    r.density = {kk, vv};
    MatrixXd e(kk.size(), 3);
    for (Eigen::Index i = 0; i < kk.size(); ++i) {
      const double angle = (side == 0 ? 1.0 : -1.0) * rs[static_cast<std::size_t>(i)];
      e(i, 0) = ts[static_cast<std::size_t>(i)];
      e(i, 1) = std::cos(angle);
      e(i, 2) = std::sin(angle);
    }
    r.embedding = std::move(e);
    rays.push_back(std::move(r));
  }
  return make_hypersurface(std::move(rays), {"east", "west"}, 3.0);
}

}  // namespace nullot
