#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "parisi/errors.hpp"
#include "parisi/parisi_solver.hpp"

using namespace parisi;

namespace {

// Reference values from an independent 2-D root solve of the stationarity
// equations at 30 significant digits.
struct OneRsbReference {
  int p;
  double beta, m, q, value;
};
constexpr OneRsbReference kOneRsb[] = {
    {4, 1.5, 0.9013011230747895, 0.820349222308323, 1.12187018956318},
    {4, 2.0, 0.5962781150649839, 0.8734537697964241, 1.865200230813633},
    {4, 3.0, 0.3583941731323825, 0.9198950013000556, 3.447597503905751},
    {6, 2.0, 0.7579816229453113, 0.9273592799205334, 1.943100061895392},
    {6, 3.0, 0.4637716746981429, 0.9542652035922017, 3.688480406785333},
    {3, 2.0, 0.4296820737391006, 0.8087448034836107, 1.774704804248303},
};

}  // namespace

TEST_CASE("RS test") {
  CHECK(rs_check(MixtureSpec::pure(4), 0.5).is_rs);
  CHECK_FALSE(rs_check(MixtureSpec::pure(4), 2.0).is_rs);
  // Critical temperatures of the pure 4- and 6-spin models lie at 1.4057 and 1.6239.
  CHECK(rs_check(MixtureSpec::pure(4), 1.40).is_rs);
  CHECK_FALSE(rs_check(MixtureSpec::pure(4), 1.41).is_rs);
  CHECK(rs_check(MixtureSpec::pure(6), 1.62).is_rs);
  CHECK_FALSE(rs_check(MixtureSpec::pure(6), 1.63).is_rs);
}

TEST_CASE("ratio equation") {
  for (int i = 1; i < 400; ++i) CHECK(onersb_ratio_rhs(i * 0.05) < onersb_ratio_rhs((i - 1) * 0.05 + 1e-9));
  CHECK(onersb_ratio_rhs(1e-8) == doctest::Approx(0.5));
  for (int p = 3; p <= 10; ++p) CHECK(std::abs(onersb_ratio_rhs(onersb_ratio_x(p)) - 1.0 / p) <= 1e-12);
  CHECK(onersb_ratio_x(3) == doctest::Approx(1.816960535536511).epsilon(1e-13));
  CHECK(onersb_ratio_x(4) == doctest::Approx(4.115660866489398).epsilon(1e-13));
  CHECK(onersb_ratio_x(10) == doctest::Approx(23.25878967196265).epsilon(1e-13));
  CHECK_THROWS_AS(onersb_ratio_x(2), DomainError);
}

TEST_CASE("1-RSB solutions against frozen references") {
  for (const auto& ref : kOneRsb) {
    CAPTURE(ref.p);
    CAPTURE(ref.beta);
    const MixtureSpec spec = MixtureSpec::pure(ref.p);
    for (OneRsbPath path : {OneRsbPath::RatioX, OneRsbPath::Newton}) {
      const OneRsb s = onersb_solve(spec, ref.beta, path);
      CHECK(s.m == doctest::Approx(ref.m).epsilon(1e-10));
      CHECK(s.q == doctest::Approx(ref.q).epsilon(1e-10));
      CHECK(s.value == doctest::Approx(ref.value).epsilon(1e-12));
      CHECK(std::abs(s.residuals[0]) <= 1e-8);
      CHECK(std::abs(s.residuals[1]) <= 1e-8);
      CHECK(s.certificate.verdict);
    }
  }
}

TEST_CASE("1-RSB value matches the brute-force two-atom minimum") {
  const MixtureSpec spec = MixtureSpec::pure(4);
  const auto grid = oracle::two_atom_bruteforce(spec, 2.0, 200);
  const OneRsb s = onersb_solve(spec, 2.0);
  CHECK(std::abs(s.value - grid.value) <= 1e-9);
  CHECK(std::abs(s.q - grid.q) <= 1e-4);
}

TEST_CASE("1-RSB rejects RS temperatures and the 2-spin model") {
  CHECK_THROWS_AS(onersb_solve(MixtureSpec::pure(4), 1.0), NoInteriorSolution);
  CHECK_THROWS_AS(onersb_solve(MixtureSpec::pure(2), 2.0), PreconditionFailed);
}

TEST_CASE("k-RSB with k = 5 collapses to the 1-RSB measure") {
  const MixtureSpec spec = MixtureSpec::pure(4);
  KrsbOptions opts;
  opts.k = 5;
  opts.tol = 1e-9;
  opts.max_evaluations = 40000;
  const KrsbResult r = krsb_minimize(spec, 2.0, opts);
  CHECK(std::abs(r.value - kOneRsb[1].value) <= 1e-6);
  CHECK(r.alpha.size() == 2);
}

TEST_CASE("FRSB closed form") {
  const MixtureSpec spec = MixtureSpec::two_plus_p(0.07, 4);
  const ParisiSolution s = frsb_solve(spec, 1.0);
  REQUIRE(s.regime == Regime::FRSB);
  const auto& f = std::get<FrsbClosedForm>(s.measure);
  CHECK(std::abs(frsb_root_residual(spec, 1.0, f.q)) <= 1e-12);
  CHECK(f.q == doctest::Approx(0.279353380244820196).epsilon(1e-14));
  CHECK(s.cs_val == doctest::Approx(0.493486782003797).epsilon(1e-11));
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double d = f.density(f.q * i / 1000.0);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(f.density(f.q) < 1.0);
  CHECK(s.certificate.verdict);
  CHECK_THROWS_AS(frsb_solve(MixtureSpec::two_plus_p(0.2, 4), 1.0), PreconditionFailed);
  CHECK_THROWS_AS(frsb_solve(spec, 0.5), PreconditionFailed);
}

TEST_CASE("dispatch") {
  const ParisiSolution rs = parisi_solve(MixtureSpec::pure(4), 0.1);
  CHECK(regime_label(rs) == "RS");
  CHECK(rs.cs_val == doctest::Approx(0.005).epsilon(1e-14));
  const ParisiSolution two = parisi_solve(MixtureSpec::pure(2), 1.0);
  CHECK(regime_label(two) == "RS");
  CHECK(std::abs(std::get<StepCDF>(two.measure).top() - (1.0 - 1.0 / std::sqrt(2.0))) <= 1e-12);
  const ParisiSolution one = parisi_solve(MixtureSpec::pure(3), 2.0);
  CHECK(regime_label(one) == "1RSB");
  CHECK(one.cs_val == doctest::Approx(kOneRsb[5].value).epsilon(1e-12));
  const ParisiSolution full = parisi_solve(MixtureSpec::two_plus_p(0.07, 4), 1.5);
  CHECK(regime_label(full) == "FRSB");
  CHECK(full.cs_val == doctest::Approx(1.010840591148645).epsilon(1e-11));
  CHECK(full.converged);
}

TEST_CASE("branches agree at the RS boundary") {
  // Just above the critical temperature the 1-RSB value approaches the RS one.
  const MixtureSpec spec = MixtureSpec::pure(4);
  const double beta = 1.40568;
  const double rs = cs_value(spec, beta, StepCDF::delta0());
  const ParisiSolution sol = parisi_solve(spec, beta);
  CHECK(std::abs(sol.cs_val - rs) <= 1e-8);
  // FRSB measure at the onset beta xi''(0)^{1/2} -> 1 approaches delta_0.
  const MixtureSpec mixed = MixtureSpec::two_plus_p(0.07, 4);
  const double onset = 1.0 / std::sqrt(mixed.derivative(0.0, 2));
  const ParisiSolution near = frsb_solve(mixed, onset * (1 + 1e-9), 1000);
  CHECK(std::abs(near.cs_val - cs_value(mixed, onset, StepCDF::delta0())) <= 1e-8);
}

TEST_CASE("solutions do not depend on the seed") {
  const MixtureSpec spec({{2, std::sqrt(0.8)}, {4, std::sqrt(0.2)}});
  SolveOptions opts;
  opts.k_schedule = {1, 2, 5};
  std::vector<StepCDF> found;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    opts.seed = seed;
    found.push_back(std::get<StepCDF>(parisi_solve(spec, 1.5, opts).measure));
  }
  for (size_t i = 0; i < found.size(); ++i)
    for (size_t j = i + 1; j < found.size(); ++j) CHECK(l1_distance(found[i], found[j]) <= 1e-6);
}

TEST_CASE("evaluate_measure certifies supplied measures") {
  const MixtureSpec spec = MixtureSpec::pure(4);
  CHECK(evaluate_measure(spec, 1.0, StepCDF::delta0()).converged);
  CHECK_FALSE(evaluate_measure(spec, 2.0, StepCDF::delta0()).converged);
  CHECK(evaluate_measure(spec, 2.0, StepCDF::two_atom(kOneRsb[1].m, kOneRsb[1].q)).converged);
}
