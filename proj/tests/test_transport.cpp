#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nullot/errors.hpp"
#include "nullot/nec.hpp"
#include "nullot/rng.hpp"
#include "nullot/transport.hpp"
#include "support.hpp"

using namespace nullot;
using namespace nullot::testsupport;

namespace {

SNH long_ray(double b = 4.0) {
  ArrayXd k(2), v(2);
  k << 0.0, b;
  v << 1.0, 1.0;
  return single_ray(k, v);
}

// evaluate a piecewise-constant slice density at g
double slice_density(const RayMeasureSlice& s, double g) {
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    if (g >= s.knots[i] && g < s.knots[i + 1]) return s.values[i];
  }
  return 0.0;
}

double max_density_gap(const RayMeasureSlice& a, const RayMeasureSlice& b) {
  std::vector<double> edges;
  for (Eigen::Index i = 0; i < a.knots.size(); ++i) edges.push_back(a.knots[i]);
  for (Eigen::Index i = 0; i < b.knots.size(); ++i) edges.push_back(b.knots[i]);
  std::sort(edges.begin(), edges.end());
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    gap = std::max(gap, std::abs(slice_density(a, mid) - slice_density(b, mid)));
  }
  return gap;
}

SNH tip_cone() {
  // the 2-d Minkowski cone H = {(x, |x|)} as two generators from the vertex,
  // gauge = Euclidean length along the generator
  ArrayXd k(2), v(2);
  k << 0.0, 4.0;
  v << 1.0, 1.0;
  Ray plus;
  plus.id = "r+";
  plus.weight = 0.5;
  plus.interval = {0.0, 4.0, true, true};
  plus.density = {k, v};
  Ray minus = plus;
  minus.id = "r-";
  return make_hypersurface({plus, minus}, {"r+", "r-"});
}

}  // namespace

TEST_CASE("feasibility: identity and dominated blocks") {
  const SNH h = long_ray();
  const HMeasure a = block_measure(h, "r0", 0.0, 1.0);
  const HMeasure b = block_measure(h, "r0", 2.0, 3.0);
  CHECK(feasibility(a, a, h).feasible);
  CHECK(feasibility(a, b, h).feasible);
  const Feasibility back = feasibility(b, a, h);
  CHECK_FALSE(back.feasible);
  CHECK(back.obstruction == "quantile dominance violated");
}

TEST_CASE("feasibility through the cone tip") {
  const SNH h = tip_cone();
  const double eps = atom_block_width(h.ray("r+"));
  const double root2 = std::sqrt(2.0);
  // mu0 = (tip + point sqrt2 on r+)/2 as a tip atom plus a narrow block
  RayMeasureSlice s0p = uniform_slice("r+", root2, root2 + eps, 0.5);
  s0p.atoms = {{0.0, 0.5}};
  s0p.mass = 1.0;
  const HMeasure mu0 = make_measure({s0p}, h);
  // mu1 = (point 2*sqrt2 on r-) /2 + (point 2*sqrt2 on r+)/2
  const HMeasure mu1 = make_measure({uniform_slice("r-", 2 * root2, 2 * root2 + eps, 0.5),
                                     uniform_slice("r+", 2 * root2, 2 * root2 + eps, 0.5)},
                                    h);
  CHECK(feasibility(mu0, mu1, h).feasible);  // tip mass feeds r-

  // without the tip the r- mass has no source
  const HMeasure mu0_open = make_measure({uniform_slice("r+", root2, root2 + eps, 1.0)}, h);
  const Feasibility f = feasibility(mu0_open, mu1, h);
  CHECK_FALSE(f.feasible);
  CHECK(f.obstruction == "ray mass mismatch");
  REQUIRE(f.witness.has_value());
  CHECK((f.witness->first == "r-" || f.witness->first == "r+"));
}

TEST_CASE("monotone coupling pairs sorted atoms") {
  const SNH h = long_ray();
  const double eps = 1e-6;
  const HMeasure mu0 = make_measure(
      {[&] {
        RayMeasureSlice s;
        s.ray_id = "r0";
        s.knots = ArrayXd(4);
        s.knots << 0.0, eps, 1.0, 1.0 + eps;
        s.values = ArrayXd(3);
        s.values << 0.5 / (s.knots[1] - s.knots[0]), 0.0, 0.5 / (s.knots[3] - s.knots[2]);
        s.mass = 1.0;
        return s;
      }()},
      h);
  const HMeasure mu1 = make_measure(
      {[&] {
        RayMeasureSlice s;
        s.ray_id = "r0";
        s.knots = ArrayXd(4);
        s.knots << 2.0, 2.0 + eps, 3.0, 3.0 + eps;
        s.values = ArrayXd(3);
        s.values << 0.5 / (s.knots[1] - s.knots[0]), 0.0, 0.5 / (s.knots[3] - s.knots[2]);
        s.mass = 1.0;
        return s;
      }()},
      h);
  const CausalCoupling c = monotone_coupling(mu0, mu1, h);
  REQUIRE(c.rays.size() == 1);
  REQUIRE(c.rays[0].segments.size() == 2);
  const PlanSegment& first = c.rays[0].segments[0];
  const PlanSegment& second = c.rays[0].segments[1];
  CHECK(first.src_lo == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(first.dst_lo == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(first.mass == doctest::Approx(0.5));
  CHECK(second.src_lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(second.dst_lo == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(second.mass == doctest::Approx(0.5));
}

TEST_CASE("quantile map of nested uniforms is the linear dilation") {
  const SNH h = long_ray();
  const HMeasure mu0 = block_measure(h, "r0", 0.0, 1.0);
  const HMeasure mu1 = block_measure(h, "r0", 0.0, 2.0);
  const CausalCoupling c = monotone_coupling(mu0, mu1, h);
  for (const PlanSegment& s : c.rays[0].segments) {
    // graph of g -> 2g
    CHECK(s.dst_lo == doctest::Approx(2.0 * s.src_lo).epsilon(1e-12));
    CHECK(s.dst_hi == doctest::Approx(2.0 * s.src_hi).epsilon(1e-12));
  }
}

TEST_CASE("vertex-enumeration oracle: the monotone coupling is the unique monotone vertex") {
  Rng rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(3));
    const int n = 2 + static_cast<int>(rng.below(3));
    AtomicMarginal a, b;
    double pos = 0.0;
    for (int i = 0; i < m; ++i) {
      pos += rng.uniform(0.1, 0.6);
      a.position.push_back(pos);
      a.mass.push_back(rng.uniform(0.2, 1.0));
    }
    for (int j = 0; j < n; ++j) {
      pos += rng.uniform(0.1, 0.6);
      b.position.push_back(pos);
      b.mass.push_back(rng.uniform(0.2, 1.0));
    }
    double ta = 0.0, tb = 0.0;
    for (double v : a.mass) ta += v;
    for (double v : b.mass) tb += v;
    for (double& v : a.mass) v /= ta;
    for (double& v : b.mass) v /= tb;
    b.mass[static_cast<std::size_t>(n - 1)] +=
        1.0 - std::accumulate(b.mass.begin(), b.mass.end(), 0.0);

    const auto vertices = enumerate_causal_vertices(a, b);
    REQUIRE(!vertices.empty());
    int monotone_count = 0;
    DiscreteCoupling the_monotone;
    for (const auto& v : vertices) {
      if (coupling_is_monotone(v, a, b)) {
        ++monotone_count;
        the_monotone = v;
      }
    }
    CHECK(monotone_count == 1);

    // compare against the library on narrow-block marginals
    const SNH h = long_ray(pos + 1.0);
    const double eps = 1e-9;
    auto to_measure = [&](const AtomicMarginal& mm) {
      std::vector<MassCell> cells;
      std::vector<RayMeasureSlice> slices;
      RayMeasureSlice s;
      s.ray_id = "r0";
      std::vector<double> edges, vals;
      for (std::size_t i = 0; i < mm.position.size(); ++i) {
        const double lo = mm.position[i];
        const double hi = mm.position[i] + eps;
        edges.push_back(lo);
        edges.push_back(hi);
        vals.push_back(mm.mass[i] / (hi - lo));
        if (i + 1 < mm.position.size()) vals.push_back(0.0);
      }
      s.knots = Eigen::Map<const ArrayXd>(edges.data(), static_cast<Eigen::Index>(edges.size()));
      s.values = Eigen::Map<const ArrayXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      s.mass = 1.0;
      return make_measure({s}, h);
    };
    const CausalCoupling c = monotone_coupling(to_measure(a), to_measure(b), h);
    // aggregate segment masses onto the atom grid
    DiscreteCoupling got;
    got.m = m;
    got.n = n;
    got.pi.assign(static_cast<std::size_t>(m * n), 0.0);
    for (const PlanSegment& s : c.rays[0].segments) {
      int i = 0, j = 0;
      for (int k = 0; k < m; ++k)
        if (std::abs(a.position[k] - s.src_lo) < 2 * eps + 1e-12 * pos ||
            (s.src_lo > a.position[k] && s.src_lo < a.position[k] + eps))
          i = k;
      for (int k = 0; k < n; ++k)
        if (std::abs(b.position[k] - s.dst_lo) < 2 * eps + 1e-12 * pos ||
            (s.dst_lo > b.position[k] && s.dst_lo < b.position[k] + eps))
          j = k;
      got.at(i, j) += s.mass;
    }
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(got.at(i, j) - the_monotone.at(i, j)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("dynamical plan is the affine lift with the coupling as endpoints") {
  const SNH h = long_ray();
  const HMeasure mu0 = block_measure(h, "r0", 0.0, 1.0);
  const HMeasure mu1 = block_measure(h, "r0", 1.5, 3.5);
  const CausalCoupling c = monotone_coupling(mu0, mu1, h);
  const DynamicalPlan plan = dynamical_plan(c, h);
  const HMeasure e0 = plan_marginal(plan, 0, h);
  const HMeasure e1 = plan_marginal(plan, 1, h);
  CHECK(max_density_gap(*e0.slice("r0"), *mu0.slice("r0")) <= 1e-12);
  CHECK(max_density_gap(*e1.slice("r0"), *mu1.slice("r0")) <= 1e-12);
}

TEST_CASE("interpolation: endpoints, dilation midpoint, mass conservation") {
  const SNH h = long_ray();
  const HMeasure mu0 = block_measure(h, "r0", 0.0, 1.0);
  const HMeasure mu1 = block_measure(h, "r0", 0.0, 2.0);
  const DynamicalPlan plan = dynamical_plan(monotone_coupling(mu0, mu1, h), h);
  SUBCASE("t = 0 and t = 1 reproduce the marginals") {
    CHECK(max_density_gap(*interpolate(plan, 0.0, h).slice("r0"), *mu0.slice("r0")) <= 1e-12);
    CHECK(max_density_gap(*interpolate(plan, 1.0, h).slice("r0"), *mu1.slice("r0")) <= 1e-12);
  }
  SUBCASE("halfway the dilation gives a uniform block of density 2/3") {
    const HMeasure mid = interpolate(plan, 0.5, h);
    const RayMeasureSlice* s = mid.slice("r0");
    REQUIRE(s);
    CHECK(slice_density(*s, 0.1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(slice_density(*s, 1.4) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(s->cell_mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("per-ray mass is constant along t") {
    for (double t : {0.1, 0.37, 0.9}) {
      CHECK(interpolate(plan, t, h).ray_mass("r0") == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("contraction to a narrow block sends the entropy power to zero") {
  const SNH h = long_ray();
  const double eps = 1e-6;
  const HMeasure mu0 = block_measure(h, "r0", 0.0, 2.0);
  const HMeasure mu1 = block_measure(h, "r0", 2.0, 2.0 + eps);
  const DynamicalPlan plan = dynamical_plan(monotone_coupling(mu0, mu1, h), h);
  double prev = -kInfinity;
  for (double t : {0.0, 0.5, 0.9, 1.0}) {
    const double e = entropy(interpolate(plan, t, h), h);
    CHECK(e >= prev - 1e-12);
    prev = e;
  }
  CHECK(entropy(interpolate(plan, 1.0, h), h) >= std::log(1.0 / (2 * eps)) - 1.0);
  CHECK(entropy_power(interpolate(plan, 1.0, h), h, 3.0) <= 0.02);
}

TEST_CASE("restriction property: interpolating the restricted plan lands on mu_s") {
  const SNH h = long_ray();
  const HMeasure mu0 = block_measure(h, "r0", 0.2, 1.2);
  const HMeasure mu1 = block_measure(h, "r0", 1.0, 3.8);
  const DynamicalPlan plan = dynamical_plan(monotone_coupling(mu0, mu1, h), h);
  const double t = 0.25, s = 0.7;
  // restricted plan from mu_t to mu1 along the same affine family
  DynamicalPlan restricted;
  restricted.rays.push_back({"r0", {}});
  for (const PlanSegment& seg : plan.rays[0].segments) {
    PlanSegment r = seg;
    r.src_lo = (1.0 - t) * seg.src_lo + t * seg.dst_lo;
    r.src_hi = (1.0 - t) * seg.src_hi + t * seg.dst_hi;
    restricted.rays[0].segments.push_back(r);
  }
  const double u = (s - t) / (1.0 - t);
  const HMeasure direct = interpolate(plan, s, h);
  const HMeasure via = interpolate(restricted, u, h);
  CHECK(max_density_gap(*direct.slice("r0"), *via.slice("r0")) <= 1e-10);
}

TEST_CASE("coupling is invariant under slice reordering and cell refinement") {
  const SNH h = random_concave_instance(4242, {2, 2, 4, 8});
  const std::string id0 = h.rays()[0].id, id1 = h.rays()[1].id;
  const Ray& r0 = h.rays()[0];
  const Ray& r1 = h.rays()[1];
  auto lo = [](const Ray& r) { return r.interval.a; };
  auto span = [](const Ray& r) { return r.truncation() - r.interval.a; };
  const HMeasure mu0 = make_measure(
      {uniform_slice(id0, lo(r0), lo(r0) + 0.4 * span(r0), 0.5),
       uniform_slice(id1, lo(r1), lo(r1) + 0.4 * span(r1), 0.5)},
      h);
  const HMeasure mu1 = make_measure(
      {uniform_slice(id0, lo(r0) + 0.5 * span(r0), lo(r0) + span(r0), 0.5),
       uniform_slice(id1, lo(r1) + 0.5 * span(r1), lo(r1) + span(r1), 0.5)},
      h);
  const CausalCoupling c1 = monotone_coupling(mu0, mu1, h);

  HMeasure mu0_swapped = mu0;
  std::swap(mu0_swapped.slices[0], mu0_swapped.slices[1]);
  const CausalCoupling c2 = monotone_coupling(mu0_swapped, mu1, h);
  REQUIRE(c1.rays.size() == c2.rays.size());
  for (std::size_t r = 0; r < c1.rays.size(); ++r) {
    REQUIRE(c1.rays[r].segments.size() == c2.rays[r].segments.size());
    for (std::size_t k = 0; k < c1.rays[r].segments.size(); ++k) {
      CHECK(c1.rays[r].segments[k].src_lo == c2.rays[r].segments[k].src_lo);
      CHECK(c1.rays[r].segments[k].dst_lo == c2.rays[r].segments[k].dst_lo);
      CHECK(c1.rays[r].segments[k].mass == c2.rays[r].segments[k].mass);
    }
  }

  // refine mu0's cells: same coupling within 1e-12 on the evaluation grid
  HMeasure mu0_refined = mu0;
  for (RayMeasureSlice& s : mu0_refined.slices) {
    ArrayXd k(3), v(2);
    k << s.knots[0], 0.5 * (s.knots[0] + s.knots[1]), s.knots[1];
    v << s.values[0], s.values[0];
    s.knots = k;
    s.values = v;
  }
  const CausalCoupling c3 = monotone_coupling(mu0_refined, mu1, h);
  const DynamicalPlan p1 = dynamical_plan(c1, h);
  const DynamicalPlan p3 = dynamical_plan(c3, h);
  // refinement must not move any mass: compare cumulative distributions
  auto cdf = [](const RayMeasureSlice& s, double g) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      if (g <= s.knots[i]) break;
      acc += s.values[i] * (std::min(g, s.knots[i + 1]) - s.knots[i]);
    }
    return acc;
  };
  for (double t : {0.3, 0.8}) {
    const HMeasure a = interpolate(p1, t, h);
    const HMeasure b = interpolate(p3, t, h);
    for (const std::string& id : {id0, id1}) {
      const RayMeasureSlice* sa = a.slice(id);
      const RayMeasureSlice* sb = b.slice(id);
      const double lo = std::min(sa->knots[0], sb->knots[0]);
      const double hi = std::max(sa->knots[sa->knots.size() - 1],
                                 sb->knots[sb->knots.size() - 1]);
      for (int k = 0; k <= 96; ++k) {
        const double g = lo + (hi - lo) * k / 96.0;
        CHECK(std::abs(cdf(*sa, g) - cdf(*sb, g)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("monotonicity of the output coupling") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const SNH h = random_concave_instance(9000 + trial);
    const Ray& r = h.rays()[0];
    const double a = r.interval.a, b = r.truncation();
    const double w = 0.25 * (b - a);
    std::vector<RayMeasureSlice> s0{uniform_slice(r.id, a, a + w, 1.0)};
    std::vector<RayMeasureSlice> s1{
        uniform_slice(r.id, a + rng.uniform(0.0, w), b - rng.uniform(0.0, w), 1.0)};
    // make the remaining rays empty-mass consistent: single-ray pair
    const HMeasure mu0 = make_measure(std::move(s0), h);
    const HMeasure mu1 = make_measure(std::move(s1), h);
    if (!feasibility(mu0, mu1, h).feasible) continue;
    const CausalCoupling c = monotone_coupling(mu0, mu1, h);
    for (const RayPlan& rp : c.rays) {
      for (std::size_t i = 0; i + 1 < rp.segments.size(); ++i) {
        CHECK(rp.segments[i].src_hi <= rp.segments[i + 1].src_lo + 1e-12);
        CHECK(rp.segments[i].dst_hi <= rp.segments[i + 1].dst_lo + 1e-12);
      }
      for (const PlanSegment& seg : rp.segments) {
        CHECK(seg.dst_lo >= seg.src_lo - 1e-10);
        CHECK(seg.dst_hi >= seg.src_hi - 1e-10);
      }
    }
  }
}

TEST_CASE("tip atoms are rejected by the coupling, as are infeasible pairs") {
  const SNH h = tip_cone();
  RayMeasureSlice s = uniform_slice("r+", 1.0, 2.0, 0.5);
  s.atoms = {{0.0, 0.5}};
  s.mass = 1.0;
  const HMeasure with_tip = make_measure({s}, h);
  const HMeasure plain = make_measure(
      {uniform_slice("r+", 2.0, 3.0, 0.5), uniform_slice("r-", 2.0, 3.0, 0.5)}, h);
  CHECK_THROWS_AS(monotone_coupling(with_tip, plain, h), InputError);

  const SNH line = long_ray();
  const HMeasure a = block_measure(line, "r0", 2.0, 3.0);
  const HMeasure b = block_measure(line, "r0", 0.0, 1.0);
  CHECK_THROWS_AS(monotone_coupling(a, b, line), InputError);
}

TEST_CASE("transverse integrals are constant along the interpolation") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const SNH h = random_concave_instance(600 + trial, {2, 3, 4, 8});
    std::vector<RayMeasureSlice> s0, s1;
    const double share = 1.0 / static_cast<double>(h.rays().size());
    for (const Ray& r : h.rays()) {
      const double a = r.interval.a, b = r.truncation(), span = b - a;
      s0.push_back(uniform_slice(r.id, a, a + 0.3 * span, share));
      s1.push_back(uniform_slice(r.id, a + 0.6 * span, b, share));
    }
    const HMeasure mu0 = make_measure(std::move(s0), h);
    const HMeasure mu1 = make_measure(std::move(s1), h);
    const DynamicalPlan plan = dynamical_plan(monotone_coupling(mu0, mu1, h), h);
    std::map<std::string, double> phi;
    for (const Ray& r : h.rays()) phi[r.id] = rng.uniform(-3.0, 3.0);
    const double at0 = integrate_transverse(mu0, phi, h);
    for (double t : {0.2, 0.5, 0.77, 1.0}) {
      CHECK(std::abs(integrate_transverse(interpolate(plan, t, h), phi, h) - at0) <= 1e-12);
    }
  }
}
