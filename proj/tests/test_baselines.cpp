#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qfeyn/baselines.hpp"
#include "support.hpp"

using namespace qfeyn;
using namespace testsupport;

namespace {

Operator scalar_op(double x) {
  ComplexMatrix m(1, 1);
  m << x;
  return Operator(m);
}

StateVector scalar_state(double x) {
  ComplexVector v(1);
  v << x;
  return StateVector(v);
}

Operator diag_op(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return Operator(m);
}

double fit_slope(const std::vector<double>& ns, const std::vector<double>& errs) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += std::log(1.0 / ns[i]);
    my += std::log(errs[i]);
  }
  mx /= double(ns.size());
  my /= double(ns.size());
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dx = std::log(1.0 / ns[i]) - mx;
    cov += dx * (std::log(errs[i]) - my);
    var += dx * dx;
  }
  return cov / var;
}

}  // namespace

TEST_CASE("trotter_product fixtures") {
  SECTION("single factor reduces to the exact propagator for every n") {
    std::mt19937_64 rng(139);
    const Operator l = random_hermitian(4, rng, 2.0);
    const Decomposition dec({1.5}, {make_family(FamilyKind::linear, l, 10.0)});
    const StateVector f = random_state(4, rng);
    const StateVector exact =
        apply(stone_propagator(Operator(1.5 * l.entries()), 0.9), f);
    for (long n : {1L, 7L}) {
      const StateVector out = trotter_product(dec, 0.9, n, f);
      REQUIRE((out.entries() - exact.entries()).norm() < 1e-12);
    }
  }
  SECTION("commuting factors are exact for every n") {
    const Decomposition dec(
        {1.0, 1.0}, {make_family(FamilyKind::linear, diag_op(1.0, 2.0), 10.0),
                     make_family(FamilyKind::linear, diag_op(3.0, -1.0), 10.0)});
    ComplexVector v(2);
    v << Complex(0.6, 0.2), Complex(-0.3, 0.7);
    const StateVector f(v);
    const StateVector exact =
        apply(stone_propagator(dec.generator(), 1.3), f);
    for (long n : {1L, 4L, 33L}) {
      const StateVector out = trotter_product(dec, 1.3, n, f);
      REQUIRE((out.entries() - exact.entries()).norm() < 1e-13);
    }
  }
  SECTION("noncommuting splitting converges at first order") {
    const Decomposition dec(
        {1.0, 1.0}, {make_family(FamilyKind::linear, pauli_x(), 10.0),
                     make_family(FamilyKind::linear, pauli_z(), 10.0)});
    ComplexVector v(2);
    v << 1.0, 0.0;
    const StateVector f(v);
    const StateVector exact = apply(stone_propagator(dec.generator(), 1.0), f);
    std::vector<double> ns, errs;
    for (long n : {4L, 16L, 64L, 256L, 1024L}) {
      const StateVector out = trotter_product(dec, 1.0, n, f);
      errs.push_back((out.entries() - exact.entries()).norm());
      ns.push_back(double(n));
      REQUIRE(std::abs(out.norm() - f.norm()) < 1e-9);
    }
    const double slope = fit_slope(ns, errs);
    REQUIRE(slope > 0.6);
    REQUIRE(slope < 1.4);
  }
}

TEST_CASE("bss_product fixtures") {
  SECTION("exact exponential families reproduce trotter_product") {
    std::mt19937_64 rng(149);
    const Operator l1 = random_hermitian(3, rng);
    const Operator l2 = random_hermitian(3, rng);
    const Decomposition dec({1.0, -0.5},
                            {make_family(FamilyKind::linear, l1, 10.0),
                             make_family(FamilyKind::linear, l2, 10.0)});
    const StateVector f = random_state(3, rng);
    const std::vector<AbstractFamily> families = {
        stone_family(Operator(1.0 * l1.entries())),
        stone_family(Operator(-0.5 * l2.entries()))};
    const StateVector via_bss = bss_product(families, 0.8, 16, f);
    const StateVector via_trotter = trotter_product(dec, 0.8, 16, f);
    REQUIRE((via_bss.entries() - via_trotter.entries()).norm() < 1e-12);
  }
  SECTION("scalar linear family shows the norm drift") {
    const AbstractFamily fam =
        unitary_approximant_family(FamilyKind::linear, scalar_op(1.0));
    const StateVector out =
        bss_product(std::vector<AbstractFamily>{fam}, 1.0, 100, scalar_state(1.0));
    // |1 + i/100|^100 = (1 + 1e-4)^50
    const double expected = std::pow(1.0 + 1e-4, 50.0);
    REQUIRE(out.norm() == Catch::Approx(expected).margin(1e-12));
  }
  SECTION("two scalar linear families approach exp(3i)") {
    const std::vector<AbstractFamily> families = {
        unitary_approximant_family(FamilyKind::linear, scalar_op(1.0)),
        unitary_approximant_family(FamilyKind::linear, scalar_op(2.0))};
    const StateVector out =
        bss_product(families, 1.0, 1000, scalar_state(1.0));
    REQUIRE(std::abs(out.entries()(0) - std::exp(Complex(0.0, 3.0))) < 1e-2);
  }
  SECTION("negative arguments need two-sided families") {
    const AbstractFamily one_sided =
        unitary_approximant_family(FamilyKind::linear, scalar_op(1.0));
    REQUIRE_THROWS_AS(
        bss_product(std::vector<AbstractFamily>{one_sided}, -1.0, 4,
                    scalar_state(1.0)),
        std::out_of_range);
    const AbstractFamily exact =
        unitary_approximant_family(FamilyKind::exact_exponential, scalar_op(1.0));
    const StateVector out = bss_product(std::vector<AbstractFamily>{exact},
                                        -1.0, 4, scalar_state(1.0));
    REQUIRE(std::abs(out.entries()(0) - std::exp(Complex(0.0, -1.0))) < 1e-12);
  }
}

TEST_CASE("chernoff_distance fixtures") {
  SECTION("identical families are at distance zero exactly") {
    const AbstractFamily fam =
        unitary_approximant_family(FamilyKind::linear, scalar_op(1.0));
    const double d = chernoff_distance(fam, fam, scalar_state(1.0), 1.0, 16, 9);
    REQUIRE(d == 0.0);
  }
  SECTION("scalar linear vs exact matches the closed form") {
    const AbstractFamily linear =
        unitary_approximant_family(FamilyKind::linear, scalar_op(1.0));
    const AbstractFamily exact = stone_family(scalar_op(1.0));
    const long n = 100;
    const long grid = 11;
    const double measured =
        chernoff_distance(linear, exact, scalar_state(1.0), 1.0, n, grid);
    // independent closed form: max_t |(1 + i t/100)^100 - e^{it}| over the
    // same grid; the t = 1 endpoint dominates at about 5.0e-3
    double expected = 0.0;
    for (long i = 0; i < grid; ++i) {
      const double t = double(i) / double(grid - 1);
      const Complex factor(1.0, t / double(n));
      const double diff =
          std::abs(std::pow(factor, double(n)) - std::exp(Complex(0.0, t)));
      expected = std::max(expected, diff);
    }
    REQUIRE(measured == Catch::Approx(expected).margin(1e-12));
    REQUIRE(measured > 3e-3);
    REQUIRE(measured < 7e-3);
  }
  SECTION("distance is symmetric") {
    std::mt19937_64 rng(151);
    const Operator h = random_hermitian(3, rng);
    const AbstractFamily g1 = unitary_approximant_family(FamilyKind::linear, h);
    const AbstractFamily g2 = stone_family(h);
    const StateVector f = random_state(3, rng);
    REQUIRE(chernoff_distance(g1, g2, f, 1.0, 8, 9) ==
            chernoff_distance(g2, g1, f, 1.0, 8, 9));
  }
  SECTION("the step family drifts toward the unitary group") {
    std::mt19937_64 rng(157);
    const Operator l = random_hermitian(2, rng);
    const Decomposition dec(
        {1.0}, {make_family(FamilyKind::resolvent, l, 0.45)});
    const StateVector f = random_state(2, rng);
    const AbstractFamily steps = step_family(dec);
    const AbstractFamily group = stone_family(dec.generator());
    const double at4 = chernoff_distance(steps, group, f, 1.0, 4, 17);
    const double at64 = chernoff_distance(steps, group, f, 1.0, 64, 17);
    REQUIRE(at64 * 4.0 < at4);
  }
  SECTION("grid needs at least two points") {
    const AbstractFamily fam = stone_family(scalar_op(1.0));
    REQUIRE_THROWS_AS(chernoff_distance(fam, fam, scalar_state(1.0), 1.0, 4, 1),
                      std::invalid_argument);
  }
}

TEST_CASE("single_term_iterate matches the one-term decomposition bitwise") {
  std::mt19937_64 rng(163);
  const Operator l = random_hermitian(3, rng);
  const ChernoffFamily fam = make_family(FamilyKind::quadratic, l, 10.0);
  const StateVector f = random_state(3, rng);
  const StateVector via_wrapper = single_term_iterate(fam, 2.0, 0.7, 9, f);
  const Decomposition dec({2.0}, {fam});
  const StateVector via_iterate = chernoff_iterate(dec, 0.7, 9, f);
  for (Eigen::Index i = 0; i < 3; ++i) {
    REQUIRE(via_wrapper.entries()(i) == via_iterate.entries()(i));
  }
}

TEST_CASE("single_term_iterate closed forms") {
  SECTION("linear family is exact: exp(i) at t = 0.5, H = 2") {
    const ChernoffFamily fam = make_family(FamilyKind::linear, scalar_op(2.0), 10.0);
    const StateVector out = single_term_iterate(fam, 1.0, 0.5, 6, scalar_state(1.0));
    REQUIRE(std::abs(out.entries()(0) - std::exp(Complex(0.0, 1.0))) < 1e-12);
  }
  SECTION("sigma_x resolvent family converges") {
    const ChernoffFamily fam = make_family(FamilyKind::resolvent, pauli_x(), 0.45);
    ComplexVector v(2);
    v << 1.0, 0.0;
    const StateVector out = single_term_iterate(fam, 1.0, 1.0, 512, StateVector(v));
    const StateVector exact = apply(stone_propagator(pauli_x(), 1.0), StateVector(v));
    REQUIRE((out.entries() - exact.entries()).norm() < 1e-2);
  }
}
