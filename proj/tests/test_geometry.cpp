#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "fraclab/geometry.hpp"
#include "fraclab/measures.hpp"

using namespace fraclab;
using namespace fraclab::geometry;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double frame_worst(const ProjectionFrame& f) {
  const auto r = frame_residuals(f);
  return std::max(std::max(r.factorization, r.orthonormality),
                  std::max(r.kernel, r.kernel_norm));
}

// independent kernel oracle
Vec kernel_by_lu(const Mat& pi) {
  Eigen::MatrixXd m(pi.rows, pi.cols);
  for (int i = 0; i < pi.rows; ++i)
    for (int j = 0; j < pi.cols; ++j) m(i, j) = pi(i, j);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  Eigen::MatrixXd k = lu.kernel();
  Vec v(pi.cols);
  for (int j = 0; j < pi.cols; ++j) v[j] = k(j, 0);
  const double n = norm(v);
  for (int j = 0; j < pi.cols; ++j) v[j] /= n;
  return v;
}

double kernel_mismatch(const Vec& a, const Vec& b) {
  // compare up to sign
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < a.dim; ++i) {
    d1 = std::max(d1, std::abs(a[i] - b[i]));
    d2 = std::max(d2, std::abs(a[i] + b[i]));
  }
  return std::min(d1, d2);
}

}  // namespace

TEST_CASE("parabolic_frame: explicit small cases") {
  SUBCASE("theta = 0") {
    auto f = parabolic_frame(Vec{0.0, 0.0});
    CHECK(f.pi(0, 0) == 1.0);
    CHECK(f.pi(1, 2) == 0.0);
    CHECK(max_abs_diff(f.lower, Mat::identity(2)) < 1e-14);
    CHECK(f.kernel[2] == doctest::Approx(1.0));
    CHECK(frame_worst(f) < 1e-14);
  }
  SUBCASE("n=1, theta = 1/2") {
    auto f = parabolic_frame(Vec{0.5});
    CHECK(f.pi(0, 0) == 1.0);
    CHECK(f.pi(0, 1) == -1.0);
    CHECK(f.lower(0, 0) == doctest::Approx(kSqrt2).epsilon(1e-14));
    CHECK(f.q(0, 0) == doctest::Approx(1.0 / kSqrt2).epsilon(1e-14));
    CHECK(f.q(0, 1) == doctest::Approx(-1.0 / kSqrt2).epsilon(1e-14));
    CHECK(f.kernel[0] == doctest::Approx(1.0 / kSqrt2).epsilon(1e-14));
    CHECK(f.kernel[1] == doctest::Approx(1.0 / kSqrt2).epsilon(1e-14));
  }
  SUBCASE("n=1, theta = -1") {
    auto f = parabolic_frame(Vec{-1.0});
    CHECK(f.pi(0, 1) == 2.0);
    CHECK(f.lower(0, 0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    CHECK(f.q(0, 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(f.q(0, 1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(f.kernel[0] == doctest::Approx(-2.0 / std::sqrt(5.0)).epsilon(1e-14));
    CHECK(f.kernel[1] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
  }
}

TEST_CASE("parabolic_frame: invariants and kernel oracle over random parameters") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(-20.0, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 3;
    Vec theta(n);
    for (int k = 0; k < n; ++k) theta[k] = unif(rng);
    auto f = parabolic_frame(theta);
    CHECK(frame_worst(f) <= 1e-12);
    CHECK(kernel_mismatch(f.kernel, kernel_by_lu(f.pi)) < 1e-10);
    // rows of Q orthogonal to the kernel
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j <= n; ++j) s += f.q(i, j) * f.kernel[j];
      CHECK(std::abs(s) <= 1e-12);
    }
  }
}

TEST_CASE("frame continuity under small parameter perturbations") {
  const double h = 1e-6;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec theta{2.0 * unif(rng), 2.0 * unif(rng)};
    auto a = parabolic_frame(theta);
    Vec tp = theta;
    tp[0] += h;
    auto b = parabolic_frame(tp);
    CHECK(max_abs_diff(a.lower, b.lower) + max_abs_diff(a.q, b.q) <= 1e-3);

    const double lambda = 2.0 + 0.9 * std::abs(unif(rng));
    Vec th1{0.9 * unif(rng)};
    auto c = cone_frame(2, lambda, th1);
    auto d = cone_frame(2, lambda + h, th1);
    CHECK(max_abs_diff(c.lower, d.lower) + max_abs_diff(c.q, d.q) <= 1e-3);
  }
}

TEST_CASE("galilean maps: shear and dilation arithmetic") {
  spectral::SpaceTimePoint p{Vec{1.0}, 2.0};
  auto q = galilean_shear(Vec{3.0}, p);
  CHECK(q.x[0] == -11.0);
  CHECK(q.t == 2.0);
  auto r = galilean_shear(Vec{0.0}, p);
  CHECK(r.x[0] == p.x[0]);
  spectral::SpaceTimePoint at0{Vec{0.4}, 0.0};
  CHECK(galilean_shear(Vec{5.0}, at0).x[0] == 0.4);
  CHECK(parabolic_dilation(4.0, p).t == 0.5);
  CHECK_THROWS(parabolic_dilation(0.5, p));

  SUBCASE("pi o T_theta equals the frame matrix bit-exactly") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
      Vec theta{unif(rng), unif(rng)};
      auto f = parabolic_frame(theta);
      spectral::SpaceTimePoint pt{Vec{unif(rng), unif(rng)}, unif(rng)};
      Vec xt{pt.x[0], pt.x[1], pt.t};
      Vec via_frame = apply(f.pi, xt);
      auto sheared = galilean_shear(theta, pt);
      CHECK(via_frame[0] == sheared.x[0]);
      CHECK(via_frame[1] == sheared.x[1]);
    }
  }
}

TEST_CASE("paraboloid chart and its inverse") {
  CHECK(norm(paraboloid_chart_inverse(Vec{0.0, 1.0})) == 0.0);
  Vec g = paraboloid_chart(Vec{0.5});
  CHECK(g[0] == doctest::Approx(1.0 / kSqrt2));
  CHECK(paraboloid_chart_inverse(g)[0] == doctest::Approx(0.5).epsilon(1e-14));
  Vec g2 = paraboloid_chart(Vec{1.0, 1.0});
  Vec back = paraboloid_chart_inverse(g2);
  CHECK(std::abs(back[0] - 1.0) < 1e-13);
  CHECK(std::abs(back[1] - 1.0) < 1e-13);
  for (double big : {10.0, 1000.0}) {
    Vec t{big, -0.5 * big};
    Vec b2 = paraboloid_chart_inverse(paraboloid_chart(t));
    CHECK(std::abs(b2[0] - t[0]) <= 1e-12 * big);
    CHECK(std::abs(b2[1] - t[1]) <= 1e-12 * big);
  }
  CHECK_THROWS(paraboloid_chart_inverse(Vec{1.0, 0.0}));
  CHECK_THROWS(paraboloid_chart_inverse(Vec{1.0, -2.0}));
}

TEST_CASE("cone rotation: orthogonality and the cone-to-parabola chart") {
  Vec xi{1.0, 0.0, 1.0};  // e_1 + e_3, n = 2
  Vec eta = cone_rotation(xi);
  CHECK(eta[0] == doctest::Approx(kSqrt2).epsilon(1e-15));
  CHECK(eta[2] == doctest::Approx(0.0));
  CHECK(eta[1] == 0.0);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    Vec v{unif(rng), unif(rng), unif(rng)};
    Vec w = cone_rotation(v);
    CHECK(std::abs(norm(w) - norm(v)) <= 1e-14 * (1.0 + norm(v)));
    Vec back = cone_rotation_inverse(w);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(back[k] - v[k]) <= 1e-14 * (1.0 + std::abs(v[k])));
    CHECK(w[1] == v[1]);  // middle coordinate fixed
  }

  SUBCASE("cone maps onto the parabola-form graph") {
    for (int i = 0; i < 50; ++i) {
      Vec base{std::abs(unif(rng)), unif(rng)};
      Vec lift{base[0], base[1], norm(base)};
      Vec e = cone_rotation(lift);
      CHECK(e[2] == doctest::Approx(e[1] * e[1] / (2.0 * e[0])).epsilon(1e-12));
      CHECK(e[0] * kSqrt2 >= std::abs(e[1]) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("cone_jacobian: range and the xi-side formula") {
  CHECK(cone_jacobian(1.0, Vec{0.0}) == doctest::Approx(1.0 / kSqrt2).epsilon(1e-15));
  CHECK(cone_jacobian(1.0, Vec{kSqrt2}) == doctest::Approx(kSqrt2).epsilon(1e-14));
  CHECK(cone_jacobian(1.0, Vec{1.0}) == doctest::Approx(1.5 / kSqrt2).epsilon(1e-14));
  CHECK_THROWS(cone_jacobian(1.0, Vec{2.0}));
  CHECK_THROWS(cone_jacobian(-1.0, Vec{0.0}));

  // J(eta) = |xi| sqrt(2) / (xi_1 + |xi|) along the cone
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    Vec base{std::abs(unif(rng)) + 0.1, unif(rng)};
    Vec lift{base[0], base[1], norm(base)};
    Vec e = cone_rotation(lift);
    const double j1 = cone_jacobian(e[0], Vec{e[1]});
    const double j2 = norm(base) * kSqrt2 / (base[0] + norm(base));
    CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
    CHECK(j1 >= 1.0 / kSqrt2 - 1e-12);
    CHECK(j1 <= kSqrt2 + 1e-12);
  }
}

TEST_CASE("cone_frame: explicit cases and invariants") {
  SUBCASE("n=1, lambda=2") {
    auto f = cone_frame(1, 2.0, Vec{});
    CHECK(f.pi(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(f.pi(0, 1) == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(f.kernel[0] == doctest::Approx(-3.0 / std::sqrt(34.0)).epsilon(1e-14));
    CHECK(f.kernel[1] == doctest::Approx(-5.0 / std::sqrt(34.0)).epsilon(1e-14));
    CHECK(frame_worst(f) < 1e-13);
  }
  SUBCASE("n=2, theta=0, lambda=2: second row is [0,1,0]") {
    auto f = cone_frame(2, 2.0, Vec{0.0});
    CHECK(f.pi(1, 0) == 0.0);
    CHECK(f.pi(1, 1) == 1.0);
    CHECK(f.pi(1, 2) == 0.0);
  }
  SUBCASE("construction succeeds across K = (2,3) x B(0,1)") {
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double lambda = 2.0 + (i + 0.5) / 10.0;
        Vec theta{-1.0 + 2.0 * (j + 0.5) / 10.0};
        auto f = cone_frame(2, lambda, theta);
        CHECK(f.in_domain);
        CHECK(frame_worst(f) <= 1e-12);
      }
  }
  SUBCASE("random invariants and kernel oracle") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + trial % 2;
      const double lambda = 1.2 + 4.8 * unif(rng);
      Vec theta(n - 1);
      if (n == 2) theta[0] = (2.0 * unif(rng) - 1.0) * std::min(1.0, kSqrt2 * (lambda - 1.0)) * 0.9;
      auto f = cone_frame(n, lambda, theta);
      CHECK(frame_worst(f) <= 1e-12);
      CHECK(kernel_mismatch(f.kernel, kernel_by_lu(f.pi)) < 1e-9);
    }
  }
  SUBCASE("flagged but not rejected outside the admissible domain") {
    auto f = cone_frame(2, 1.1, Vec{0.9});
    CHECK_FALSE(f.in_domain);
    CHECK(frame_worst(f) <= 1e-12);
    CHECK_THROWS(cone_frame(2, 0.0, Vec{0.5}));
  }
}

TEST_CASE("cone_transport: identity case, arithmetic, projection composition") {
  auto t_id = cone_transport(2, 1.0, Vec{0.0});
  CHECK(max_abs_diff(t_id, Mat::identity(3)) < 1e-15);

  auto t = cone_transport(1, 2.0, Vec{});
  Vec out = apply(t, Vec{1.0, 0.0});
  CHECK(out[0] == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-0.75).epsilon(1e-15));

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double lambda = 2.0 + 0.5 * (unif(rng) + 1.0);
    Vec theta{unif(rng)};
    auto tr = cone_transport(2, lambda, theta);
    auto fr = cone_frame(2, lambda, theta);
    Vec p{unif(rng), unif(rng), unif(rng)};
    Vec full = apply(tr, p);
    Vec proj = apply(fr.pi, p);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(full[k] - proj[k]) <= 1e-12);
  }
}

TEST_CASE("cone_reparam: identity, adjoint node identity, norm ratio") {
  using spectral::Atom;
  using spectral::ConeAtomFunction;

  SUBCASE("lambda=1, theta=0 fixes the atoms") {
    ConeAtomFunction f(2, {{Vec{1.0, 0.3}, 0.5, {0.2, -0.4}}}, 0.9, 1.2);
    auto g = cone_reparam(f, 1.0, Vec{0.0});
    CHECK(std::abs(g.atoms()[0].node[0] - 1.0) < 1e-14);
    CHECK(std::abs(g.atoms()[0].node[1] - 0.3) < 1e-14);
    CHECK(g.atoms()[0].weight == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("adjoint identity T^T(lifted new node) = lifted old node") {
    const double lambda = 2.5;
    Vec theta{0.5};
    auto t = cone_transport(2, lambda, theta);
    ConeAtomFunction f(2, {{Vec{2.0, 1.0}, 1.0, 1.0}, {Vec{1.5, -1.8}, 0.7, {0.3, 0.3}}}, 2.2,
                       2.4);
    auto g = cone_reparam(f, lambda, theta);
    for (size_t i = 0; i < f.atoms().size(); ++i) {
      const Vec& xi = f.atoms()[i].node;
      const Vec& xin = g.atoms()[i].node;
      Vec lift_new{xin[0], xin[1], norm(xin)};
      Vec pulled = apply_transpose(t, lift_new);
      CHECK(std::abs(pulled[0] - xi[0]) <= 1e-10);
      CHECK(std::abs(pulled[1] - xi[1]) <= 1e-10);
      CHECK(std::abs(pulled[2] - norm(xi)) <= 1e-10);
      // weight * value product preserved
      const auto wa = f.atoms()[i].weight * f.atoms()[i].value;
      const auto wb = g.atoms()[i].weight * g.atoms()[i].value;
      CHECK(std::abs(wa - wb) <= 1e-13 * std::abs(wa));
    }
  }
  SUBCASE("L^2 norm ratio stays within a factor 2 over K") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Atom> atoms;
      const int count = 3 + static_cast<int>(unif(rng) * 5);
      for (int i = 0; i < count; ++i) {
        const double r = 1.0 + unif(rng);
        const double phi = (unif(rng) - 0.5) * kPi;  // xi_1 >= 0
        atoms.push_back(
            {Vec{r * std::cos(phi), r * std::sin(phi)}, 0.1 + unif(rng), {unif(rng), unif(rng)}});
      }
      ConeAtomFunction f(2, atoms, 1.0, 2.0);
      const double lambda = 2.0 + unif(rng);
      Vec theta{2.0 * unif(rng) - 1.0};
      auto g = cone_reparam(f, lambda, theta);
      const double ratio = spectral::l2_norm(g) / spectral::l2_norm(f);
      CHECK(ratio >= 0.5);
      CHECK(ratio <= 2.0);
    }
  }
  SUBCASE("domain violation rejected") {
    ConeAtomFunction f(2, {{Vec{1.0, 0.0}, 1.0, 1.0}}, 0.9, 1.1);
    CHECK_THROWS(cone_reparam(f, 1.2, Vec{0.9}));
  }
}

TEST_CASE("cone chart is a local diffeomorphism on K") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double lambda = 2.0 + unif(rng);
    Vec theta{2.0 * unif(rng) - 1.0};
    CHECK(cone_chart_min_singular(2, lambda, theta) > 1e-6);
  }
}

TEST_CASE("sphere quadrature: measures and polynomial exactness") {
  auto s1 = sphere_quadrature(1, 16);
  double total = 0.0, v1sq = 0.0, odd = 0.0;
  for (size_t i = 0; i < s1.nodes.size(); ++i) {
    total += s1.weights[i];
    v1sq += s1.weights[i] * s1.nodes[i][0] * s1.nodes[i][0];
    odd += s1.weights[i] * s1.nodes[i][1];
  }
  CHECK(total == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(v1sq == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(std::abs(odd) < 1e-12);

  auto s2 = sphere_quadrature(2, 16);
  total = 0.0;
  double v3sq = 0.0;
  odd = 0.0;
  for (size_t i = 0; i < s2.nodes.size(); ++i) {
    CHECK(std::abs(norm(s2.nodes[i]) - 1.0) <= 1e-14);
    total += s2.weights[i];
    v3sq += s2.weights[i] * s2.nodes[i][2] * s2.nodes[i][2];
    odd += s2.weights[i] * s2.nodes[i][0];
  }
  CHECK(total == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CHECK(v3sq == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
  CHECK(std::abs(odd) < 1e-12);

  CHECK_THROWS(sphere_quadrature(3, 8));
  CHECK_THROWS(sphere_quadrature(1, 2));
}

TEST_CASE("solmon identity: Gaussian closed forms and stability") {
  auto gaussian = [](const Vec& x) { return std::exp(-norm2(x)); };
  SUBCASE("d = 2") {
    auto res = solmon_check(gaussian, 2, sphere_quadrature(1, 24), {48, 8.0});
    CHECK(res.lhs == doctest::Approx(2.0 * kPi).epsilon(1e-6));
    CHECK(res.rhs_integral == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(res.constant == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("d = 3") {
    auto res = solmon_check(gaussian, 3, sphere_quadrature(2, 24), {48, 8.0});
    CHECK(res.lhs == doctest::Approx(2.0 * std::pow(kPi, 2.5)).epsilon(1e-6));
    CHECK(res.rhs_integral == doctest::Approx(std::pow(kPi, 1.5)).epsilon(1e-9));
    CHECK(res.constant == doctest::Approx(2.0 * kPi).epsilon(1e-6));
  }
  SUBCASE("scaling the density leaves the constant unchanged") {
    auto scaled = [](const Vec& x) { return 5.0 * std::exp(-norm2(x)); };
    auto a = solmon_check(scaled, 2, sphere_quadrature(1, 24), {48, 8.0});
    CHECK(a.constant == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("constant stable across Gaussian widths") {
    double c_ref = 0.0;
    int k = 0;
    for (double w : {0.6, 0.8, 1.0, 1.3, 1.7}) {
      auto f = [w](const Vec& x) { return std::exp(-norm2(x) / (w * w)); };
      auto res = solmon_check(f, 2, sphere_quadrature(1, 24), {64, 8.0 * w});
      if (k++ == 0)
        c_ref = res.constant;
      else
        CHECK(res.constant == doctest::Approx(c_ref).epsilon(1e-3));
    }
  }
}

TEST_CASE("hyperplane energy is invariant under the choice of basis") {
  using namespace fraclab::measures;
  // smooth-ish 2-d measure
  BoxMeasure nu(2,
                {{{Vec{-0.4, -0.3}, Vec{0.2, 0.3}}, 1.0},
                 {{Vec{-0.1, -0.5}, Vec{0.4, 0.1}}, 0.6}},
                {}, 1.0);
  auto f = parabolic_frame(Vec{0.4});
  Mat b_alt = basis_of_complement(f.kernel);
  EnergyGrid grid;
  grid.points_per_decade = 64;
  const double cutoff = 400.0;
  auto e1 = hyperplane_energy(nu, f.q, 0.8, grid, cutoff);
  auto e2 = hyperplane_energy(nu, b_alt, 0.8, grid, cutoff);
  CHECK(std::abs(e1.value - e2.value) <= 1e-6 * std::max(e1.value, e2.value) +
                                             0.5 * (e1.tail_bound + e2.tail_bound));
  // and for a cone frame in R^3
  BoxMeasure nu3(3, {{{Vec{-0.3, -0.3, -0.3}, Vec{0.3, 0.2, 0.4}}, 1.0}}, {}, 1.0);
  auto cf = cone_frame(2, 2.5, Vec{0.3});
  Mat b3 = basis_of_complement(cf.kernel);
  auto e3 = hyperplane_energy(nu3, cf.q, 1.5, grid, 300.0);
  auto e4 = hyperplane_energy(nu3, b3, 1.5, grid, 300.0);
  CHECK(std::abs(e3.value - e4.value) <=
        2e-4 * std::max(e3.value, e4.value) + 0.5 * (e3.tail_bound + e4.tail_bound));
}

TEST_CASE("fault injection: corrupted kernel sign is named by the residuals") {
  auto f = parabolic_frame(Vec{0.7});
  f.kernel[0] = -f.kernel[0];
  const auto r = frame_residuals(f);
  CHECK(r.kernel > 1e-3);        // pi * kernel != 0 is the named failure
  CHECK(r.kernel_norm < 1e-12);  // still a unit vector
}
