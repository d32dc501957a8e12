#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "parisi/crisanti_sommers.hpp"
#include "parisi/measures.hpp"
#include "parisi/mixture.hpp"

namespace parisi {

enum class Regime { RS, OneRSB, KRSB, FRSB };

struct RsCheck {
  bool is_rs = true;
  double sup_value = 0.0;
  double argmax = 0.0;
};

/// sup over (0,1) of beta^2 xi(s) + log(1-s) + s: grid scan plus Brent
/// refinement around the best grid point. The measure is delta_0 iff sup <= 0.
RsCheck rs_check(const MixtureSpec& spec, double beta, int grid = 10000);

/// (1+x)/x^2 log(1+x) - 1/x, decreasing from 1/2 to 0 on (0, inf).
double onersb_ratio_rhs(double x);

/// The unique x > 0 with onersb_ratio_rhs(x) = 1/p. Requires p >= 3.
double onersb_ratio_x(int p);

/// Residuals (lhs - rhs) of the two stationarity equations of Q over the
/// two-atom family m delta_0 + (1-m) delta_q.
std::array<double, 2> onersb_residuals(const MixtureSpec& spec, double beta, double m, double q);

enum class OneRsbPath {
  Auto,     // ratio path for pure p >= 3, Newton otherwise
  RatioX,   // pure p only
  Newton,   // damped 2-D Newton seeded from a grid of Q values
};

struct OneRsb {
  double m = 0.0;
  double q = 0.0;
  std::array<double, 2> residuals{};
  double value = 0.0;
  Certificate certificate;
  std::string path;
};

/// Two-atom Parisi measure. Throws NoInteriorSolution when no candidate
/// with m in (0,1) passes the certificate.
OneRsb onersb_solve(const MixtureSpec& spec, double beta, OneRsbPath path = OneRsbPath::Auto);

struct Diagnostics {
  std::string branch;
  std::vector<std::string> notes;
  /// Branch-specific residuals (stationarity equations, root equation, or
  /// successive k-RSB value differences).
  std::vector<double> residuals;
  double rs_sup = 0.0;
};

struct ParisiSolution {
  ParisiMeasure measure = StepCDF::delta0();
  Regime regime = Regime::RS;
  /// Number of atoms for atomic measures, 0 for FRSB.
  int atoms = 1;
  double cs_val = 0.0;
  Certificate certificate;
  Diagnostics diagnostics;
  bool converged = false;
};

/// "RS", "1RSB", "KRSB(k)" or "FRSB".
std::string regime_label(const ParisiSolution& sol);

/// Regime implied by the support of a measure.
Regime regime_of(const ParisiMeasure& measure);

/// Closed-form FRSB measure for concave xi''^{-1/2} with beta xi''(0)^{1/2} > 1.
/// Throws PreconditionFailed naming the failing hypothesis.
ParisiSolution frsb_solve(const MixtureSpec& spec, double beta, int certificate_grid = 10000);

/// Residual 1/(beta xi''(q)^{1/2}) - (1 - q).
double frsb_root_residual(const MixtureSpec& spec, double beta, double q);

struct SolveOptions {
  std::uint64_t seed = 0;
  int restarts = 8;
  int certificate_grid = 10000;
  double tol_sup = 1e-6;
  double tol_supp = 1e-6;
  double krsb_tol = 1e-9;
  int krsb_max_evaluations = 40000;
  std::vector<int> k_schedule{1, 2, 5, 10, 20};
};

/// Regime-aware dispatch: RS test, pure 2-spin, 1-RSB, FRSB closed form, and
/// a k-RSB continuation otherwise.
ParisiSolution parisi_solve(const MixtureSpec& spec, double beta, const SolveOptions& options = {});

/// Certified solution wrapping a user-supplied measure.
ParisiSolution evaluate_measure(const MixtureSpec& spec, double beta, const ParisiMeasure& measure,
                                const SolveOptions& options = {});

}  // namespace parisi
