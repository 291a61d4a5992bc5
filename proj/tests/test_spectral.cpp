#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fraclab/spectral.hpp"

using namespace fraclab;
using namespace fraclab::spectral;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FrequencyAtomFunction random_atoms(int n, int count, double band, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < count; ++i) {
    Atom a;
    a.node = Vec(n);
    for (int k = 0; k < n; ++k) a.node[k] = band * unif(rng) / std::sqrt(double(n));
    a.weight = 0.1 + std::abs(unif(rng));
    a.value = {unif(rng), unif(rng)};
    atoms.push_back(a);
  }
  return FrequencyAtomFunction(n, atoms, band);
}

}  // namespace

TEST_CASE("schrodinger evolution: single atom has constant modulus") {
  FrequencyAtomFunction f(2, {{Vec{0.7, -1.3}, 1.0, 1.0}}, 2.0);
  auto u = schrodinger_evolve(f, {{Vec{0.3, 0.9}, 0.25}, {Vec{-5.0, 2.0}, 0.8}});
  for (auto v : u.values) CHECK(std::abs(v) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
}

TEST_CASE("schrodinger evolution: t = 0 reproduces the data phase sum") {
  std::mt19937_64 rng(7);
  auto f = random_atoms(1, 5, 3.0, rng);
  Vec x{0.4};
  // oracle: direct phase sum without the evolution factor
  std::complex<double> expect = 0.0;
  for (const Atom& a : f.atoms())
    expect += a.weight * a.value * std::polar(1.0, dot(x, a.node));
  expect *= std::pow(kTwoPi, -0.5);
  auto u = schrodinger_eval(f, x, 0.0);
  CHECK(std::abs(u - expect) < 1e-14);
}

TEST_CASE("schrodinger evolution: two symmetric atoms at x=0, t=pi") {
  FrequencyAtomFunction f(1, {{Vec{1.0}, 1.0, 1.0}, {Vec{-1.0}, 1.0, 1.0}}, 1.0);
  auto u = schrodinger_eval(f, Vec{0.0}, std::numbers::pi);
  // both phases are t*|xi|^2 = pi: u = (2pi)^{-1/2} * 2 e^{i pi}
  const double expect = -2.0 / std::sqrt(kTwoPi);
  CHECK(u.real() == doctest::Approx(expect).epsilon(1e-13));
  CHECK(std::abs(u.imag()) < 1e-13);
}

TEST_CASE("schrodinger evolution: rejects empty points and bad atoms") {
  FrequencyAtomFunction f(1, {{Vec{0.5}, 1.0, 1.0}}, 1.0);
  CHECK_THROWS(schrodinger_evolve(f, {}));
  CHECK_THROWS(FrequencyAtomFunction(1, {{Vec{0.5}, -1.0, 1.0}}, 1.0));
  CHECK_THROWS(FrequencyAtomFunction(1, {{Vec{0.5}, 1.0, 1.0}, {Vec{0.5}, 2.0, 1.0}}, 1.0));
  CHECK_THROWS(
      FrequencyAtomFunction(1, {{Vec{std::numeric_limits<double>::quiet_NaN()}, 1.0, 1.0}}, 1.0));
  CHECK_THROWS(FrequencyAtomFunction(1, {{Vec{2.0}, 1.0, 1.0}}, 1.0));  // outside band
}

TEST_CASE("translate_frequency: shifts nodes, keeps weights/values") {
  SUBCASE("zero shift is the identity") {
    FrequencyAtomFunction f(2, {{Vec{1.0, 0.0}, 1.0, 1.0}, {Vec{0.0, 1.0}, 2.0, 0.5}}, 1.0);
    auto g = translate_frequency(f, Vec{0.0, 0.0});
    for (size_t i = 0; i < f.atoms().size(); ++i) {
      CHECK(g.atoms()[i].node == f.atoms()[i].node);
      CHECK(g.atoms()[i].weight == f.atoms()[i].weight);
    }
  }
  SUBCASE("single atom moved to the origin") {
    FrequencyAtomFunction f(2, {{Vec{3.0, -4.0}, 1.0, 1.0}}, 5.0);
    auto g = translate_frequency(f, Vec{-3.0, 4.0});
    CHECK(norm(g.atoms()[0].node) == 0.0);
  }
  SUBCASE("n=2 shift example") {
    FrequencyAtomFunction f(2, {{Vec{1.0, 0.0}, 1.0, 1.0}, {Vec{0.0, 1.0}, 1.0, 1.0}}, 1.0);
    auto g = translate_frequency(f, Vec{3.0, 4.0});
    CHECK(g.atoms()[0].node == Vec{4.0, 4.0});
    CHECK(g.atoms()[1].node == Vec{3.0, 5.0});
    CHECK(g.band_radius() == doctest::Approx(6.0).epsilon(1e-15));
  }
}

TEST_CASE("wave extension: single phase and t = 0 reduction") {
  ConeAtomFunction f(1, {{Vec{2.0}, 1.0, 1.0}}, 1.5, 2.5);
  auto u = wave_eval(f, Vec{1.0}, 1.0);
  // e^{i(2*1 + 1*2)} = e^{4i}
  CHECK(u.real() == doctest::Approx(std::cos(4.0)).epsilon(1e-14));
  CHECK(u.imag() == doctest::Approx(std::sin(4.0)).epsilon(1e-14));
  CHECK(std::abs(wave_eval(f, Vec{0.3}, 0.7)) == doctest::Approx(1.0).epsilon(1e-14));

  ConeAtomFunction g(2, {{Vec{1.0, 0.5}, 0.7, 2.0}, {Vec{1.5, -0.2}, 0.3, 1.0}}, 1.0, 2.0);
  auto v0 = wave_eval(g, Vec{0.2, -0.1}, 0.0);
  std::complex<double> expect = 0.0;
  for (const Atom& a : g.atoms())
    expect += a.weight * a.value * std::polar(1.0, dot(Vec{0.2, -0.1}, a.node));
  CHECK(std::abs(v0 - expect) < 1e-14);
}

TEST_CASE("cone atoms: origin node and annulus violations are rejected") {
  CHECK_THROWS(ConeAtomFunction(1, {{Vec{0.0}, 1.0, 1.0}}, 0.0, 1.0));
  CHECK_THROWS(ConeAtomFunction(1, {{Vec{1.0}, 1.0, 1.0}}, 0.25, 1.0));  // r_max > 2 r_min
  CHECK_THROWS(ConeAtomFunction(2, {{Vec{-1.0, 0.0}, 1.0, 1.0}}, 0.5, 1.0));  // xi_1 < 0
}

TEST_CASE("maximal_in_time: constants, grids, monotonicity") {
  SUBCASE("single atom is grid independent") {
    FrequencyAtomFunction f(1, {{Vec{1.5}, 0.8, 2.0}}, 2.0);
    const double v = maximal_in_time(f, Vec{0.3}, 1.0, 0.01);
    CHECK(v == doctest::Approx(0.8 * 2.0 / std::sqrt(kTwoPi)).epsilon(1e-13));
  }
  SUBCASE("symmetric pair attains 2 (2pi)^{-1/2} at x = 0") {
    FrequencyAtomFunction f(1, {{Vec{1.0}, 1.0, 1.0}, {Vec{-1.0}, 1.0, 1.0}}, 1.0);
    const double v = maximal_in_time(f, Vec{0.0}, 1.0, 0.01);
    CHECK(v == doctest::Approx(2.0 / std::sqrt(kTwoPi)).epsilon(1e-12));
  }
  SUBCASE("tiny t_max degenerates to the first sample") {
    FrequencyAtomFunction f(1, {{Vec{1.0}, 1.0, 1.0}, {Vec{-0.5}, 1.0, 0.3}}, 1.0);
    const double dt = 0.01;
    CHECK(maximal_in_time(f, Vec{0.7}, 1e-6, dt) ==
          doctest::Approx(std::abs(schrodinger_eval(f, Vec{0.7}, dt))).epsilon(1e-15));
  }
  SUBCASE("sampling criterion enforced") {
    FrequencyAtomFunction f(1, {{Vec{100.0}, 1.0, 1.0}}, 100.0);
    CHECK_THROWS(maximal_in_time(f, Vec{0.0}, 1.0, 0.01));
  }
  SUBCASE("dominates sampled values, monotone in t_max") {
    std::mt19937_64 rng(11);
    auto f = random_atoms(2, 6, 2.0, rng);
    const double m1 = maximal_in_time(f, Vec{0.2, 0.1}, 0.5, 0.005);
    const double m2 = maximal_in_time(f, Vec{0.2, 0.1}, 1.0, 0.005);
    CHECK(m2 >= m1);
    for (int k = 1; k <= 100; ++k)
      CHECK(m1 + 1e-14 >= std::abs(schrodinger_eval(f, Vec{0.2, 0.1}, 0.005 * k)));
  }
}

TEST_CASE("norms: convention constant is one, monotone in s") {
  SUBCASE("single atom at origin") {
    FrequencyAtomFunction f(2, {{Vec{0.0, 0.0}, 1.0, 1.0}}, 0.0);
    for (double s : {0.0, 0.5, 1.0, 3.0}) CHECK(h_s_norm(f, s) == doctest::Approx(1.0));
  }
  SUBCASE("single atom at |xi| = 1, s = 1") {
    FrequencyAtomFunction f(1, {{Vec{1.0}, 1.0, 1.0}}, 1.0);
    CHECK(h_s_norm(f, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(l2_norm(f) == doctest::Approx(h_s_norm(f, 0.0)).epsilon(1e-15));
  }
  SUBCASE("doubling weights scales by sqrt(2)") {
    std::mt19937_64 rng(3);
    auto f = random_atoms(1, 4, 2.0, rng);
    std::vector<Atom> doubled = f.atoms();
    for (auto& a : doubled) a.weight *= 2.0;
    FrequencyAtomFunction g(1, doubled, f.band_radius());
    CHECK(h_s_norm(g, 0.7) == doctest::Approx(std::sqrt(2.0) * h_s_norm(f, 0.7)).epsilon(1e-14));
  }
  SUBCASE("negative s rejected") {
    FrequencyAtomFunction f(1, {{Vec{0.0}, 1.0, 1.0}}, 0.0);
    CHECK_THROWS(h_s_norm(f, -0.1));
  }
  SUBCASE("plancherel sum invariant under translation") {
    std::mt19937_64 rng(5);
    auto f = random_atoms(2, 5, 2.0, rng);
    auto g = translate_frequency(f, Vec{4.0, -7.0});
    CHECK(l2_norm(g) == doctest::Approx(l2_norm(f)).epsilon(1e-15));
  }
}

TEST_CASE("weak_l1_level: direct counting") {
  SampledField u;
  u.points = {{Vec{0.0}, 0.0}, {Vec{1.0}, 0.0}, {Vec{2.0}, 0.0}};
  u.values = {{0.2, 0.0}, {0.8, 0.0}, {0.0, 1.5}};
  std::vector<double> w = {1.0, 1.0, 1.0};
  CHECK(weak_l1_level(u, w, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(weak_l1_level(u, w, 2.0) == 0.0);
  CHECK_THROWS(weak_l1_level(u, w, 0.0));
  CHECK_THROWS(weak_l1_level(u, {1.0}, 0.5));

  SUBCASE("bounded by total mass times max, nonincreasing beyond the max") {
    const double max_u = 1.5;
    CHECK(weak_l1_level(u, w, 0.5) <= 3.0 * max_u);
    double prev = weak_l1_level(u, w, max_u + 0.01);
    for (double m : {1.6, 1.8, 2.5}) {
      const double cur = weak_l1_level(u, w, m);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("evolution is exactly permutation invariant up to round-off") {
  std::mt19937_64 rng(23);
  auto f = random_atoms(2, 12, 5.0, rng);
  std::vector<Atom> rev(f.atoms().rbegin(), f.atoms().rend());
  FrequencyAtomFunction g(2, rev, f.band_radius());
  Vec x{0.37, -0.81};
  const auto a = schrodinger_eval(f, x, 0.43);
  const auto b = schrodinger_eval(g, x, 0.43);
  CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
}

TEST_CASE("galilean covariance at atom level") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + (trial % 2);
    auto f = random_atoms(n, 8, 4.0, rng);
    Vec theta(n);
    for (int k = 0; k < n; ++k) theta[k] = 3.0 * unif(rng);
    auto f_theta = translate_frequency(f, theta);
    double max_u = 0.0, max_err = 0.0;
    for (int p = 0; p < 50; ++p) {
      Vec x(n);
      for (int k = 0; k < n; ++k) x[k] = 2.0 * unif(rng);
      const double t = 0.5 * (unif(rng) + 1.0);
      Vec x_sheared = x;
      for (int k = 0; k < n; ++k) x_sheared[k] -= 2.0 * t * theta[k];
      const double lhs = std::abs(schrodinger_eval(f, x, t));
      const double rhs = std::abs(schrodinger_eval(f_theta, x_sheared, t));
      max_u = std::max(max_u, lhs);
      max_err = std::max(max_err, std::abs(lhs - rhs));
    }
    CHECK(max_err <= 1e-10 * max_u);
  }
}
