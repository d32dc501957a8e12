#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parisi/measures.hpp"
#include "parisi/mixture.hpp"

namespace parisi {

/// Crisanti-Sommers functional Q_beta(alpha) for a step c.d.f., in closed
/// form. shat defaults to q_k; any shat in [q_k, 1) gives the same value.
double cs_value(const MixtureSpec& spec, double beta, const StepCDF& alpha,
                std::optional<double> shat = std::nullopt);

/// Q_beta for either measure kind; the closed-form FRSB case integrates
/// the density part by adaptive quadrature.
double cs_value(const MixtureSpec& spec, double beta, const ParisiMeasure& measure);

/// G(t) = beta^2 xi'(t) - int_0^t ds / alpha_hat(s)^2. Returns -inf at t = 1.
double g_function(const MixtureSpec& spec, double beta, const StepCDF& alpha, double t);

/// f(t) = int_0^t G.
double f_function(const MixtureSpec& spec, double beta, const StepCDF& alpha, double t);

/// f at each point of `ts` (sorted ascending). Handles both measure kinds.
std::vector<double> f_values(const MixtureSpec& spec, double beta, const ParisiMeasure& measure,
                             std::span<const double> ts);

/// d/dlambda Q_beta(from + lambda (to - from)) at lambda = 0, i.e.
/// (1/2) int_0^1 (to - from) G(s; from) ds.
double directional_derivative(const MixtureSpec& spec, double beta, const StepCDF& from,
                              const StepCDF& to);

struct Certificate {
  double sup_f = 0.0;
  double argmax_f = 0.0;
  double max_abs_f_on_support = 0.0;
  int grid_size = 0;
  double tol_sup = 0.0;
  double tol_supp = 0.0;
  bool verdict = false;
};

/// Optimality check: sup_[0,1] f <= tol_sup and |f| <= tol_supp on the
/// support of the measure, with f evaluated on a uniform grid plus support
/// points.
Certificate certify(const MixtureSpec& spec, double beta, const ParisiMeasure& measure,
                    int grid = 10000, double tol_sup = 1e-6, double tol_supp = 1e-6);

struct KrsbOptions {
  int k = 2;
  int restarts = 8;
  std::uint64_t seed = 0;
  /// Projected-gradient infinity norm accepted as converged.
  double tol = 1e-7;
  int max_evaluations = 10000;
  /// Optional starting profile, embedded into k jumps as an extra start.
  std::optional<StepCDF> warm_start;
};

struct KrsbResult {
  StepCDF alpha = StepCDF::delta0();
  double value = 0.0;
  bool converged = false;
  double gradient_norm = 0.0;
  int evaluations = 0;
  int best_restart = -1;
  /// Best profile before atom cleanup.
  std::vector<Jump> raw;
};

/// Minimizes Q_beta over step c.d.f.s with at most k jumps.
KrsbResult krsb_minimize(const MixtureSpec& spec, double beta, const KrsbOptions& options);

/// Q_beta and its gradient with respect to the jump locations and plateau
/// values of a relaxed profile (m_k = 1 fixed, so grad_m has k-1 entries).
double cs_value_and_gradient(const MixtureSpec& spec, double beta, std::span<const Jump> jumps,
                             std::vector<double>* grad_q, std::vector<double>* grad_m);

}  // namespace parisi
