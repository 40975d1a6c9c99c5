#pragma once

// Shared builders, random-instance generators and independent oracles for the
// test suites.

#include <map>
#include <vector>

#include "nullot/core.hpp"
#include "nullot/measures.hpp"
#include "nullot/rng.hpp"

namespace nullot::testsupport {

/// Single-ray hypersurface with the given piecewise-linear density on [a, b].
inline SNH single_ray(ArrayXd knots, ArrayXd values, bool future_complete = false) {
  Ray r;
  r.id = "r0";
  r.weight = 1.0;
  const double a = knots[0];
  const double b = future_complete ? kInfinity : knots[knots.size() - 1];
  r.interval = {a, b, false, !future_complete};
  r.density = {std::move(knots), std::move(values)};
  return make_hypersurface({std::move(r)});
}

inline SNH single_ray_fn(double a, double b, int n_knots, double (*f)(double),
                         bool future_complete = false) {
  ArrayXd k = ArrayXd::LinSpaced(n_knots, a, b);
  ArrayXd v(n_knots);
  for (Eigen::Index i = 0; i < n_knots; ++i) v[i] = f(k[i]);
  return single_ray(std::move(k), std::move(v), future_complete);
}

inline SNH unit_ray() {
  ArrayXd k(2), v(2);
  k << 0.0, 1.0;
  v << 1.0, 1.0;
  return single_ray(k, v);
}

struct RandomInstanceOptions {
  int min_rays = 1, max_rays = 4;
  int min_knots = 5, max_knots = 14;
  bool nondecreasing = false;   // slopes >= 0 (future-complete generators)
  bool future_complete = false; // b = +inf with truncation at the last knot
};

/// Random piecewise-linear-concave density: non-increasing slope sequence,
/// then a vertical shift keeping the values strictly positive. Exactly
/// CD(0, N-1) for every N >= 3.
inline ArrayXd concave_values(Rng& rng, const ArrayXd& knots, bool nondecreasing) {
  const Eigen::Index n = knots.size();
  ArrayXd v(n);
  v[0] = rng.uniform(0.3, 3.0);
  double slope = rng.uniform(nondecreasing ? 0.3 : -0.3, 1.5);
  for (Eigen::Index i = 1; i < n; ++i) {
    v[i] = v[i - 1] + slope * (knots[i] - knots[i - 1]);
    double next = slope - rng.uniform(0.0, 0.35) * (std::abs(slope) + 0.2);
    if (nondecreasing && next < 0.0) next = 0.0;  // clamp keeps the sequence non-increasing
    slope = std::min(slope, next);
  }
  const double minv = v.minCoeff();
  const double needed = 0.05 * std::max(v.maxCoeff(), 1.0);
  if (minv < needed) v += needed - minv;
  return v;
}

/// Hypersurface whose rays are all concave-density (hence CD) instances.
inline SNH random_concave_instance(std::uint64_t seed,
                                   const RandomInstanceOptions& opt = {}) {
  Rng rng(seed);
  const int nrays =
      opt.min_rays + static_cast<int>(rng.below(opt.max_rays - opt.min_rays + 1));
  std::vector<Ray> rays;
  ArrayXd weights(nrays);
  for (int i = 0; i < nrays; ++i) weights[i] = rng.uniform(0.2, 1.0);
  weights /= weights.sum();
  // exact unit sum
  weights[nrays - 1] = 1.0 - (weights.sum() - weights[nrays - 1]);
  for (int i = 0; i < nrays; ++i) {
    const int nk = opt.min_knots + static_cast<int>(rng.below(opt.max_knots - opt.min_knots + 1));
    const double a = rng.uniform(-1.0, 1.0);
    const double len = rng.uniform(1.0, 4.0);
    ArrayXd knots(nk);
    knots[0] = a;
    for (int k = 1; k < nk; ++k) knots[k] = knots[k - 1] + rng.uniform(0.3, 1.0) * len / nk;
    Ray r;
    r.id = "r" + std::to_string(i);
    r.weight = weights[i];
    r.interval = {a, opt.future_complete ? kInfinity : knots[nk - 1], false,
                  !opt.future_complete};
    r.density = {knots, concave_values(rng, knots, opt.nondecreasing)};
    rays.push_back(std::move(r));
  }
  return make_hypersurface(std::move(rays));
}

/// Same, with one convex kink planted at an interior knot of one ray: the
/// g = h^(1/(N-2)) profile dips below its neighbor chord by a macro margin.
inline SNH random_bump_instance(std::uint64_t seed, double N, int* bump_ray = nullptr,
                                double bump_ray_weight = -1.0,
                                const RandomInstanceOptions& opt = {}) {
  Rng rng(seed ^ 0xB00Full);
  SNH base = random_concave_instance(seed, opt);
  std::vector<Ray> rays = base.rays();
  const int target = static_cast<int>(rng.below(rays.size()));
  if (bump_ray) *bump_ray = target;
  if (bump_ray_weight > 0.0) {
    // concentrate the bump on a ray of prescribed small weight
    double rest = 1.0 - bump_ray_weight;
    double other = 0.0;
    for (std::size_t i = 0; i < rays.size(); ++i)
      if (static_cast<int>(i) != target) other += rays[i].weight;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (static_cast<int>(i) == target) rays[i].weight = bump_ray_weight;
      else rays[i].weight *= rest / other;
    }
    double sum = 0.0;
    for (const Ray& r : rays) sum += r.weight;
    rays.back().weight += 1.0 - sum;
  }
  Ray& r = rays[static_cast<std::size_t>(target)];
  const Eigen::Index nk = r.density.knots.size();
  const Eigen::Index j = 1 + static_cast<Eigen::Index>(rng.below(nk - 2));
  // dip g at knot j far enough below the neighbor chord
  ArrayXd g = r.density.values.pow(1.0 / (N - 2.0));
  const double lam =
      (r.density.knots[j] - r.density.knots[j - 1]) /
      (r.density.knots[j + 1] - r.density.knots[j - 1]);
  const double chord = (1.0 - lam) * g[j - 1] + lam * g[j + 1];
  g[j] = chord * rng.uniform(0.45, 0.7);
  r.density.values = g.pow(N - 2.0);
  return make_hypersurface(std::move(rays), base.tip_rays(), base.dimension_hint());
}

/// Uniform-block probability measure on one ray of the instance.
inline HMeasure block_measure(const SNH& h, const std::string& ray, double lo, double hi) {
  return make_measure({uniform_slice(ray, lo, hi)}, h);
}

// ---------------------------------------------------------------------------
// Transportation-polytope vertex oracle (for the monotone-coupling uniqueness
// criterion): enumerate every vertex of the causal transportation polytope of
// two atomic marginals by recursive greedy elimination, deduplicated on
// support patterns.

struct AtomicMarginal {
  std::vector<double> position;
  std::vector<double> mass;
};

struct DiscreteCoupling {
  // row-major m x n matrix of masses
  std::vector<double> pi;
  int m = 0, n = 0;
  double& at(int i, int j) { return pi[static_cast<std::size_t>(i * n + j)]; }
  double at(int i, int j) const { return pi[static_cast<std::size_t>(i * n + j)]; }
};

bool coupling_is_monotone(const DiscreteCoupling& c, const AtomicMarginal& mu0,
                          const AtomicMarginal& mu1, double tol = 1e-12);

/// All vertices of {pi >= 0, row sums mu0, col sums mu1, pi_ij = 0 unless
/// x_i <= y_j}; empty when no causal coupling exists.
std::vector<DiscreteCoupling> enumerate_causal_vertices(const AtomicMarginal& mu0,
                                                        const AtomicMarginal& mu1);

}  // namespace nullot::testsupport
