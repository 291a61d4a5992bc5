#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fraclab/measures.hpp"

using namespace fraclab;
using namespace fraclab::measures;

namespace {

constexpr double kPi = std::numbers::pi;

BoxMeasure unit_interval_measure() {
  // Lebesgue on [-1, 1]
  return BoxMeasure(1, {{{Vec{-1.0}, Vec{1.0}}, 1.0}}, {}, 1.0);
}

// density e^{-x^2} sampled by midpoint boxes on [-5, 5]
BoxMeasure gaussian_boxes_1d(int cells = 512) {
  std::vector<Cell> cs;
  const double h = 10.0 / cells;
  for (int i = 0; i < cells; ++i) {
    const double lo = -5.0 + i * h;
    const double mid = lo + 0.5 * h;
    cs.push_back({{Vec{lo}, Vec{lo + h}}, std::exp(-mid * mid)});
  }
  return BoxMeasure(1, cs, {}, 5.0);
}

BoxMeasure small_product_measure() {
  // [-0.5,0.5] x (4 cells of width 0.1 spaced 0.5 starting at -1)
  Family fam;
  fam.base = {{Vec{-0.5, -1.0}, Vec{0.5, -0.9}}, 1.0};
  fam.axes.push_back({Vec{0.0, 0.5}, 4});
  BoxMeasure nu(2, {}, {fam}, 2.0);

  BoxMeasure fx(1, {{{Vec{-0.5}, Vec{0.5}}, 1.0}}, {}, 1.0);
  Family fam_y;
  fam_y.base = {{Vec{-1.0}, Vec{-0.9}}, 1.0};
  fam_y.axes.push_back({Vec{0.5}, 4});
  BoxMeasure fy(1, {}, {fam_y}, 1.5);
  nu.annotate_product({fx, fy});
  return nu;
}

}  // namespace

TEST_CASE("fourier_transform: mass at zero, sinc zero, symmetry") {
  auto nu = unit_interval_measure();
  CHECK(fourier_transform(nu, Vec{0.0}).real() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(fourier_transform(nu, Vec{kPi})) < 1e-14);  // 2 sin(pi)/pi

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    Vec xi{unif(rng)};
    auto a = fourier_transform(nu, xi);
    Vec mxi{-xi[0]};
    auto b = fourier_transform(nu, mxi);
    CHECK(std::abs(a - std::conj(b)) <= 1e-14 * (1.0 + std::abs(a)));
    CHECK(std::abs(a) <= nu.total_mass() * (1.0 + 1e-12));
  }
}

TEST_CASE("fourier_transform: progression closed form equals naive sum") {
  const int count = 193;
  const double spacing = 0.037, width = 0.011, rho = 1.7;
  Family fam;
  fam.base = {{Vec{-3.0}, Vec{-3.0 + width}}, rho};
  fam.axes.push_back({Vec{spacing}, count});
  BoxMeasure with_family(1, {}, {fam}, 8.0);

  std::vector<Cell> cells;
  for (int m = 0; m < count; ++m)
    cells.push_back({{Vec{-3.0 + m * spacing}, Vec{-3.0 + m * spacing + width}}, rho});
  BoxMeasure naive(1, cells, {}, 8.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-300.0, 300.0);
  for (int i = 0; i < 100; ++i) {
    Vec xi{unif(rng)};
    auto a = fourier_transform(with_family, xi);
    auto b = fourier_transform(naive, xi);
    CHECK(std::abs(a - b) <= 1e-12 * with_family.total_mass());
  }
  CHECK(with_family.total_mass() == doctest::Approx(naive.total_mass()).epsilon(1e-14));
}

TEST_CASE("pushforward_transform: trivial projections and quadrature oracle") {
  auto nu = small_product_measure();
  Mat p(1, 2);
  p(0, 0) = 1.0;
  p(0, 1) = -1.0;  // theta = 1/2 parabolic projection
  SUBCASE("eta = 0 gives total mass") {
    CHECK(pushforward_transform(nu, p, Vec{0.0}).real() ==
          doctest::Approx(nu.total_mass()).epsilon(1e-14));
  }
  SUBCASE("agrees bit-exactly with the transposed transform") {
    Vec eta{1.0};
    auto a = pushforward_transform(nu, p, eta);
    auto b = fourier_transform(nu, Vec{1.0, -1.0});
    CHECK(a.real() == b.real());
    CHECK(a.imag() == b.imag());
  }
  SUBCASE("identity-block projection evaluates on the slice") {
    Mat pid(1, 2);
    pid(0, 0) = 1.0;
    Vec eta{0.7};
    auto a = pushforward_transform(nu, pid, eta);
    auto b = fourier_transform(nu, Vec{0.7, 0.0});
    CHECK(a.real() == b.real());
    CHECK(a.imag() == b.imag());
  }
  SUBCASE("direct quadrature of e^{-i(x - t)} over the cells") {
    // midpoint tensor quadrature oracle, independent of the closed form
    std::complex<double> oracle = 0.0;
    const int grid = 400;
    Family fam;
    fam.base = {{Vec{-0.5, -1.0}, Vec{0.5, -0.9}}, 1.0};
    fam.axes.push_back({Vec{0.0, 0.5}, 4});
    for (int m = 0; m < 4; ++m) {
      const double y0 = -1.0 + 0.5 * m;
      for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
          const double x = -0.5 + (i + 0.5) / grid;
          const double y = y0 + 0.1 * (j + 0.5) / grid;
          oracle += (1.0 / grid) * (0.1 / grid) * std::polar(1.0, -(x - y));
        }
    }
    auto val = pushforward_transform(nu, p, Vec{1.0});
    CHECK(std::abs(val - oracle) < 1e-6);
  }
}

TEST_CASE("ball_mass: intervals, containment, additivity") {
  auto nu = unit_interval_measure();
  CHECK(ball_mass(nu, Vec{0.0}, 0.5, 1e-9) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ball_mass(nu, Vec{3.0}, 10.0, 1e-9) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS(ball_mass(nu, Vec{0.0}, -1.0, 1e-6));
  CHECK_THROWS(ball_mass(nu, Vec{0.0}, 1.0, 2.0));

  BoxMeasure sq(2, {{{Vec{-0.5, -0.5}, Vec{0.5, 0.5}}, 1.0}}, {}, 1.0);
  CHECK(ball_mass(sq, Vec{0.0, 0.0}, 10.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-12));
  // quarter-disc style check: ball radius 0.5 centered at the corner
  const double quarter = ball_mass(sq, Vec{0.5, 0.5}, 0.5, 1e-6);
  CHECK(quarter == doctest::Approx(kPi * 0.25 * 0.25).epsilon(1e-4));

  SUBCASE("disjoint families add") {
    Family f1, f2;
    f1.base = {{Vec{0.0}, Vec{0.1}}, 1.0};
    f1.axes.push_back({Vec{0.3}, 3});
    f2.base = {{Vec{-2.0}, Vec{-1.9}}, 2.0};
    f2.axes.push_back({Vec{0.25}, 4});
    BoxMeasure both(1, {}, {f1, f2}, 3.0);
    BoxMeasure only1(1, {}, {f1}, 3.0);
    BoxMeasure only2(1, {}, {f2}, 3.0);
    for (double r : {0.2, 0.7, 1.4, 3.0}) {
      const double b = ball_mass(both, Vec{-0.4}, r, 1e-10);
      const double s =
          ball_mass(only1, Vec{-0.4}, r, 1e-10) + ball_mass(only2, Vec{-0.4}, r, 1e-10);
      CHECK(b == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("ball_mass_bracket sandwiches the exact ball mass") {
  auto nu = small_product_measure();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    Vec x{0.6 * unif(rng), unif(rng)};
    const double r = 0.05 + 0.5 * std::abs(unif(rng));
    const double exact = ball_mass(nu, x, r, 1e-8);
    const auto br = ball_mass_bracket(nu, x, r);
    CHECK(br.lower <= exact * (1.0 + 1e-9) + 1e-12);
    CHECK(br.upper + 1e-12 >= exact * (1.0 - 1e-9));
  }
}

TEST_CASE("c_alpha: interval growth constant and homogeneity") {
  auto nu = unit_interval_measure();
  auto res = c_alpha(nu, 1.0, default_c_alpha_centers(nu), default_c_alpha_radii(nu));
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-6));

  SUBCASE("alpha = d bound by unit ball volume") {
    BoxMeasure sq(2, {{{Vec{-0.5, -0.5}, Vec{0.5, 0.5}}, 1.0}}, {}, 1.0);
    auto r2 = c_alpha(sq, 2.0, default_c_alpha_centers(sq), default_c_alpha_radii(sq));
    CHECK(r2.value <= kPi * (1.0 + 1e-9));
  }
  SUBCASE("doubling the measure doubles the constant") {
    BoxMeasure two(1, {{{Vec{-1.0}, Vec{1.0}}, 2.0}}, {}, 1.0);
    auto r2 = c_alpha(two, 1.0, default_c_alpha_centers(two), default_c_alpha_radii(two));
    CHECK(r2.value == doctest::Approx(2.0 * res.value).epsilon(1e-9));
  }
  CHECK_THROWS(c_alpha(nu, 0.0, default_c_alpha_centers(nu), default_c_alpha_radii(nu)));
}

TEST_CASE("fourier_energy: Gaussian closed form within 1%") {
  auto nu = gaussian_boxes_1d();
  EnergyGrid grid;
  const auto res = fourier_energy(nu, 1.0, grid, 8000.0);
  const double expect = kPi * std::sqrt(2.0 * kPi);
  CHECK(res.value == doctest::Approx(expect).epsilon(0.01));
  CHECK(res.cutoff_adequate);

  SUBCASE("doubling the measure quadruples the energy") {
    std::vector<Cell> cells;
    for (const Cell& c : nu.cells()) cells.push_back({c.box, 2.0 * c.density});
    BoxMeasure two(1, cells, {}, 5.0);
    const auto res2 = fourier_energy(two, 1.0, grid, 8000.0);
    CHECK(res2.value == doctest::Approx(4.0 * res.value).epsilon(1e-10));
  }
  SUBCASE("value varies continuously in alpha") {
    const auto a = fourier_energy(nu, 0.80, grid, 8000.0);
    const auto b = fourier_energy(nu, 0.81, grid, 8000.0);
    CHECK(std::abs(a.value - b.value) < 0.05 * a.value);
  }
  SUBCASE("cutoff precondition enforced") {
    CHECK_THROWS(fourier_energy(nu, 1.0, grid, 100.0));
  }
}

TEST_CASE("fourier_energy: tail bound brackets a refined reference") {
  auto nu = gaussian_boxes_1d(128);
  EnergyGrid grid;
  const double cutoff = 10.0 / nu.min_cell_side();
  const auto coarse = fourier_energy(nu, 0.7, grid, cutoff);
  const auto fine = fourier_energy(nu, 0.7, grid, 6.0 * cutoff);
  // the refined value plays the role of the truth; it must lie within the
  // certificate of the coarse run (plus its own small tail)
  CHECK(std::abs(fine.value - coarse.value) <=
        coarse.tail_bound + fine.tail_bound + 0.005 * fine.value);
}

TEST_CASE("fourier_energy: separable path agrees with generic polar") {
  auto nu = small_product_measure();
  EnergyGrid grid;
  const double cutoff = 600.0;
  const auto sep = fourier_energy(nu, 1.0, grid, cutoff);
  EnergyGrid no_sep = grid;
  no_sep.allow_separable = false;
  const auto gen = fourier_energy(nu, 1.0, no_sep, cutoff);
  CHECK(std::abs(sep.value - gen.value) <=
        sep.tail_bound + gen.tail_bound + 0.02 * gen.value);
}

TEST_CASE("riesz_energy: two tiny cells, scaling, cross-estimator consistency") {
  SUBCASE("two point-like cells at distance 1") {
    const double s = 1e-6;
    BoxMeasure nu(2,
                  {{{Vec{0.0, 0.0}, Vec{s, s}}, 2.0 / (s * s)},
                   {{Vec{1.0, 0.0}, Vec{1.0 + s, s}}, 3.0 / (s * s)}},
                  {}, 2.0);
    const auto res = riesz_energy(nu, 1.0, 20000, 42);
    // cross part ~ 2 m1 m2 |x-y|^{-1} = 2*2*3
    CHECK(res.value - res.self_value == doctest::Approx(12.0).epsilon(1e-3));
  }
  SUBCASE("doubling the measure quadruples the energy") {
    BoxMeasure nu(1, {{{Vec{0.0}, Vec{0.5}}, 1.0}, {{Vec{0.7}, Vec{1.0}}, 2.0}}, {}, 1.0);
    const auto a = riesz_energy(nu, 0.5, 20000, 7);
    BoxMeasure two(1, {{{Vec{0.0}, Vec{0.5}}, 2.0}, {{Vec{0.7}, Vec{1.0}}, 4.0}}, {}, 1.0);
    const auto b = riesz_energy(two, 0.5, 20000, 7);
    CHECK(b.value == doctest::Approx(4.0 * a.value).epsilon(1e-12));
  }
  SUBCASE("gaussian cross-check against the Fourier route") {
    auto nu = gaussian_boxes_1d(128);
    const double alpha = 0.5;
    const auto mc = riesz_energy(nu, alpha, 300000, 2024);
    EnergyGrid grid;
    const auto fe = fourier_energy(nu, alpha, grid, 4.0 * 10.0 / nu.min_cell_side());
    const double predicted = fe.value / energy_constant(1, alpha);
    CHECK(std::abs(mc.value - predicted) <=
          3.0 * mc.std_error + fe.tail_bound / energy_constant(1, alpha) + 0.01 * predicted);
  }
  SUBCASE("alpha >= d rejected") {
    auto nu = unit_interval_measure();
    CHECK_THROWS(riesz_energy(nu, 1.0, 1000, 1));
  }
}

TEST_CASE("surface quadratures: exact parameter-domain volumes") {
  const auto p1 = paraboloid_quadrature(1, 32);
  double s = 0.0;
  for (double w : p1.weights) s += w;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-12));

  const auto p2 = paraboloid_quadrature(2, 24);
  s = 0.0;
  for (double w : p2.weights) s += w;
  CHECK(s == doctest::Approx(kPi).epsilon(1e-12));

  const auto c1 = cone_quadrature(1, 32);
  s = 0.0;
  for (double w : c1.weights) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  const auto c2 = cone_quadrature(2, 24);
  s = 0.0;
  for (double w : c2.weights) s += w;
  CHECK(s == doctest::Approx(kPi * (1.0 - 0.25)).epsilon(1e-12));
  for (const Vec& node : c2.nodes) {
    CHECK(norm(node) >= 0.5 - 1e-12);
    CHECK(norm(node) <= 1.0 + 1e-12);
  }
  CHECK_THROWS(paraboloid_quadrature(1, 2));
}

TEST_CASE("parabolic and cone decay: tiny box and refinement stability") {
  const double s = 1e-4;
  BoxMeasure tiny(2, {{{Vec{-s, -s}, Vec{s, s}}, 0.7 / (4 * s * s)}}, {}, 1.0);
  const double m = tiny.total_mass();

  const auto quad = paraboloid_quadrature(1, 64);
  const double dec = parabolic_decay(tiny, 4.0, quad);
  CHECK(dec == doctest::Approx(m * m * 2.0).epsilon(1e-4));
  CHECK_THROWS(parabolic_decay(tiny, 0.5, quad));

  const auto cq = cone_quadrature(1, 64);
  CHECK(cone_decay(tiny, 4.0, cq) == doctest::Approx(m * m * 1.0).epsilon(1e-4));

  SUBCASE("self-convergence under node doubling") {
    BoxMeasure bump(2,
                    {{{Vec{-0.3, -0.2}, Vec{0.1, 0.15}}, 1.0},
                     {{Vec{-0.1, -0.35}, Vec{0.3, 0.05}}, 0.5}},
                    {}, 1.0);
    const auto qa = paraboloid_quadrature(1, 256);
    const auto qb = paraboloid_quadrature(1, 512);
    const double va = parabolic_decay(bump, 1.0, qa);
    const double vb = parabolic_decay(bump, 1.0, qb);
    CHECK(std::abs(va - vb) <= 1e-6 * vb);
    const auto ca = cone_quadrature(1, 256);
    const auto cb = cone_quadrature(1, 512);
    CHECK(std::abs(cone_decay(bump, 1.0, ca) - cone_decay(bump, 1.0, cb)) <=
          1e-6 * cone_decay(bump, 1.0, cb));
  }
  SUBCASE("t-aligned thin boxes decay faster than the near-point mass") {
    // long thin boxes along the t-axis, total mass matched to the tiny box
    BoxMeasure slab(2, {{{Vec{-0.001, -0.9}, Vec{0.001, 0.9}}, 0.7 / (0.002 * 1.8)}}, {}, 1.0);
    const auto q = paraboloid_quadrature(1, 4096);
    const double v_slab = parabolic_decay(slab, 100.0, q);
    const double v_tiny = parabolic_decay(tiny, 100.0, q);
    CHECK(v_slab < v_tiny);
  }
  SUBCASE("nonincreasing trend for a smooth bump measure over R = 1,2,4,8") {
    BoxMeasure bump(2, {{{Vec{-0.4, -0.4}, Vec{0.4, 0.4}}, 1.0}}, {}, 1.0);
    const auto q = cone_quadrature(1, 512);
    double prev = std::numeric_limits<double>::infinity();
    for (double R : {1.0, 2.0, 4.0, 8.0}) {
      const double v = cone_decay(bump, R, q);
      CHECK(v <= prev * 1.05);
      prev = v;
    }
  }
}

TEST_CASE("serialization: bit-exact round trip") {
  auto nu = small_product_measure();
  const std::string text = to_text(nu);
  auto back = from_text(text);
  CHECK(to_text(back) == text);
  CHECK(back.total_mass() == nu.total_mass());
  CHECK(back.dim() == nu.dim());

  auto g = gaussian_boxes_1d(32);
  const std::string t2 = to_text(g);
  CHECK(to_text(from_text(t2)) == t2);

  CHECK_THROWS(from_text("dim 1\nnonsense 3\n"));
}
