#include <cmath>
#include <random>

#include "doctest.h"
#include "parisi/errors.hpp"
#include "parisi/measures.hpp"
#include "random_inputs.hpp"

using namespace parisi;

TEST_CASE("tail integral endpoints and total mass") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const ParisiMeasure mu = testing_inputs::random_step(rng);
    CHECK(tail_integral(mu, 1.0) == 0.0);
    const double total = tail_integral(mu, 0.0) - tail_integral(mu, 1.0);
    CHECK(total <= 1.0 + 1e-15);
    // Riemann sum of alpha on a fine grid, exact up to the breakpoint cells.
    double riemann = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) riemann += cdf_at(mu, (i + 0.5) / n) / n;
    CHECK(total == doctest::Approx(riemann).epsilon(1e-3));
  }
}

TEST_CASE("tail integral is decreasing and concave") {
  // Its derivative is -alpha, and alpha is non-decreasing.
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const ParisiMeasure mu = testing_inputs::random_step(rng);
    const int n = 1000;
    double prev_diff = 1e300;
    for (int i = 0; i < n; ++i) {
      const double s0 = double(i) / n, s1 = double(i + 1) / n;
      const double diff = tail_integral(mu, s1) - tail_integral(mu, s0);
      if (cdf_at(mu, s0) > 0.0) CHECK(diff < 0.0);
      CHECK(diff <= prev_diff + 1e-15);
      prev_diff = diff;
    }
  }
}

TEST_CASE("cdf is non-decreasing, right-continuous and reaches 1 at the top") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const StepCDF a = testing_inputs::random_step(rng);
    double prev = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double v = a.at(i / 2000.0);
      CHECK(v >= prev);
      prev = v;
    }
    for (const Jump& j : a.jumps()) CHECK(a.at(j.q) == j.m);
    CHECK(a.at(a.top()) == 1.0);
  }
}

TEST_CASE("invalid step profiles are rejected") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int rejected = 0, attempts = 0;
  for (int trial = 0; trial < 200; ++trial) {
    StepCDF a = testing_inputs::random_step(rng);
    std::vector<Jump> jumps = a.jumps();
    const int kind = trial % 5;
    if (kind == 0) jumps.back().m = 0.5 + 0.4 * u(rng);
    if (kind == 1) jumps.back().q = 1.0 + u(rng);
    if (kind == 2) jumps.front().q = -0.1 - u(rng);
    if (kind == 3) jumps.front().m = -u(rng);
    if (kind == 4) {
      if (jumps.size() < 2) {
        jumps.push_back(jumps.back());
      } else {
        std::swap(jumps[0].q, jumps[1].q);
      }
    }
    ++attempts;
    try {
      StepCDF bad(jumps);
    } catch (const DomainError&) {
      ++rejected;
    }
  }
  CHECK(rejected == attempts);
}

TEST_CASE("convex combination and L1 distance") {
  const StepCDF a = StepCDF::two_atom(0.3, 0.5);
  const StepCDF b = StepCDF::single_atom(0.2);
  CHECK(l1_distance(a, a) == 0.0);
  // |a - b|: 0 on [0,0) ... 1 on [0.2,0.5) minus 0.3 there, and 0.3 on [0,0.2).
  CHECK(l1_distance(a, b) == doctest::Approx(0.3 * 0.2 + 0.7 * 0.3));
  const StepCDF mid = convex_combination(a, b, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double s = i / 100.0;
    CHECK(mid.at(s) == doctest::Approx(0.5 * a.at(s) + 0.5 * b.at(s)));
  }
}

TEST_CASE("closed-form FRSB measure") {
  const FrsbClosedForm f(MixtureSpec::two_plus_p(0.07, 4), 1.0, 0.279353380244820);
  CHECK(support_min(f) == 0.0);
  CHECK(mass_of_zero(f) == 0.0);
  // tail(s) = phi(s) below q.
  for (double s : {0.0, 0.1, 0.2, 0.27})
    CHECK(tail_integral(f, s) == doctest::Approx(f.phi(s)).epsilon(1e-10));
  const StepCDF d = discretize(f, 50);
  const double h = f.q / 50;
  for (int j = 0; j <= 50; ++j) CHECK(d.tail(j * h) == doctest::Approx(f.phi(j * h)).epsilon(1e-10));
  CHECK_THROWS_AS(FrsbClosedForm(MixtureSpec::two_plus_p(0.07, 4), 1.0, 1.2), DomainError);
}

TEST_CASE("atoms of a step c.d.f.") {
  const auto a = atoms(StepCDF::two_atom(0.25, 0.6));
  REQUIRE(a.size() == 2);
  CHECK(a[0].first == 0.0);
  CHECK(a[0].second == 0.25);
  CHECK(a[1].first == 0.6);
  CHECK(a[1].second == 0.75);
  CHECK(mass_of_zero(StepCDF::two_atom(0.25, 0.6)) == 0.25);
  CHECK(mass_of_zero(StepCDF::single_atom(0.6)) == 0.0);
}
