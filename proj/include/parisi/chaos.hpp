#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parisi/parisi_solver.hpp"

namespace parisi {

/// Attached to every report: the chaos limit and the overlap-support
/// concentration are N -> infinity statements, so finite-N simulations can
/// only be compared qualitatively.
inline constexpr const char* kNonReproducibility =
    "asymptotic statement (N -> infinity): not reproducible at desk scale; "
    "simulated overlaps are qualitative overlays only";

/// Tolerance for equality of scaled c.d.f. values.
inline constexpr double kScaledCdfTol = 1e-9;
/// Absolute tolerance for c_beta = 0.
inline constexpr double kSupportZeroTol = 1e-9;

/// Per-temperature summary of a solved Parisi measure.
struct TemperatureWitness {
  double beta = 0.0;
  std::string regime;
  /// Smallest point of the support.
  double c = 0.0;
  double mass_at_zero = 0.0;
  /// Atoms of an atomic measure (empty for FRSB).
  std::vector<Jump> jumps;
  /// Right end of the continuous part for FRSB measures.
  std::optional<double> frsb_q;
  double cs_value = 0.0;
  bool certified = false;
};

struct ChaosReport {
  std::string mode;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double q0 = 1.0;
  /// Grid spacing used for q0 when a measure has a continuous part; 0 when exact.
  double q0_resolution = 0.0;
  bool uncoupled = false;

  bool thm2_applicable = false;
  std::string thm2_reason;
  bool thm1_applicable = false;
  std::string thm1_reason;

  /// Theorem 2 ingredients, direct and via the equivalent two-bullet form.
  bool min_c_zero = false;
  bool bullet_support = false;
  bool bullet_mass_at_zero = false;
  bool bullets_agree = true;
  bool assert_generic = false;

  std::vector<double> predicted_cross_support;
  std::vector<TemperatureWitness> witnesses;

  /// FRSB coupling demo: max |beta1 alpha1 - beta2 alpha2| on [0, q1), and
  /// beta1 alpha1(q1) - beta2 alpha2(q1).
  std::optional<double> scaled_gap_below_q1;
  std::optional<double> scaled_gap_at_q1;

  std::vector<std::string> notes;
  std::string non_reproducibility = kNonReproducibility;
  /// Set when the paper records a conjecture that must not be read as a result.
  std::optional<std::string> open_conjecture;
};

/// inf{t : beta1 mu1([0,t)) != beta2 mu2([0,t))}, or 1 if the scaled
/// c.d.f.s agree on [0,1). Exact for atomic pairs; with a continuous part
/// the comparison runs on breakpoints plus a uniform grid of `grid` cells.
double q_zero(const ParisiMeasure& mu1, double beta1, const ParisiMeasure& mu2, double beta2,
              double tol = kScaledCdfTol, int grid = 10000);

double q_zero(const ParisiSolution& sol1, double beta1, const ParisiSolution& sol2, double beta2,
              double tol = kScaledCdfTol, int grid = 10000);

TemperatureWitness make_witness(const ParisiSolution& sol, double beta);

/// Hypotheses of the uncoupled-measure chaos theorem for an even mixture.
/// Throws DomainError for beta1 == beta2 or mixtures with odd degrees.
ChaosReport theorem2_check(const MixtureSpec& spec, double beta1, double beta2, bool assert_generic,
                           const SolveOptions& options = {});

/// Hypotheses of the perturbed pure p0-spin chaos theorem. Violations are
/// reported, never thrown.
ChaosReport theorem1_check(int p0, int p, double a, double beta1, double beta2);

/// {0, sqrt(q1 q2)} for two measures of the form m delta_0 + (1-m) delta_q,
/// {0} if either is delta_0. Throws NotApplicable otherwise.
std::vector<double> cross_overlap_prediction(const ParisiSolution& sol1, const ParisiSolution& sol2);

/// Two FRSB temperatures of xi = (1-c) x^2 + c x^p whose scaled measures
/// coincide below q1, violating the uncoupled condition. Throws
/// PreconditionFailed naming the violated constraint.
ChaosReport frsb_coupling_demo(double c, int p, double beta1, double beta2, int grid = 10000);

}  // namespace parisi
