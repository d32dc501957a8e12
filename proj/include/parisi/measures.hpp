#pragma once

#include <span>
#include <variant>
#include <vector>

#include "parisi/mixture.hpp"

namespace parisi {

/// One jump of a step c.d.f.: alpha(s) = m on [q, next q).
struct Jump {
  double q = 0.0;
  double m = 0.0;
  bool operator==(const Jump&) const = default;
};

/// Absolute tolerance for equality in the measure invariants.
inline constexpr double kMeasureTol = 1e-12;

/// Finite-atomic c.d.f. on [0, 1]: alpha(s) = 0 below q_1, m_i on
/// [q_i, q_{i+1}), with 0 <= q_1 < ... < q_k < 1 and 0 < m_1 < ... < m_k = 1.
class StepCDF {
 public:
  /// Validates the ordering invariants; throws DomainError on violation.
  explicit StepCDF(std::vector<Jump> jumps);

  static StepCDF delta0() { return StepCDF({{0.0, 1.0}}); }
  static StepCDF single_atom(double q) { return StepCDF({{q, 1.0}}); }
  /// m delta_0 + (1 - m) delta_q.
  static StepCDF two_atom(double m, double q) { return StepCDF({{0.0, m}, {q, 1.0}}); }

  /// Builds a StepCDF from an arbitrary non-decreasing step profile, merging
  /// locations closer than loc_tol and dropping increments below mass_tol.
  static StepCDF cleaned(std::span<const Jump> raw, double loc_tol = 1e-9, double mass_tol = 1e-9);

  const std::vector<Jump>& jumps() const { return jumps_; }
  size_t size() const { return jumps_.size(); }
  /// q_k, the smallest s with alpha(s) = 1.
  double top() const { return jumps_.back().q; }

  /// Right-continuous alpha(s).
  double at(double s) const;
  /// int_s^1 alpha, exact.
  double tail(double s) const;

  bool operator==(const StepCDF&) const = default;

 private:
  std::vector<Jump> jumps_;
};

/// (1 - lambda) a + lambda b as a StepCDF.
StepCDF convex_combination(const StepCDF& a, const StepCDF& b, double lambda);

/// L1 distance int_0^1 |a - b|.
double l1_distance(const StepCDF& a, const StepCDF& b);

/// alpha(t) = xi'''(t) / (2 beta xi''(t)^{3/2}) on [0, q), 1 on [q, 1].
struct FrsbClosedForm {
  MixtureSpec spec;
  double beta;
  double q;

  /// Throws DomainError unless q in (0,1), beta > 0, xi''(0) > 0 and
  /// the density part stays <= 1 at q.
  FrsbClosedForm(MixtureSpec spec, double beta, double q);

  double density(double t) const;
  /// 1 / (beta xi''(t)^{1/2}); equals int_t^1 alpha for t < q.
  double phi(double t) const;
};

using ParisiMeasure = std::variant<StepCDF, FrsbClosedForm>;

double cdf_at(const ParisiMeasure& measure, double s);
double tail_integral(const ParisiMeasure& measure, double s);
double support_min(const ParisiMeasure& measure);
double mass_of_zero(const ParisiMeasure& measure);

/// Step approximation with `cells` equal cells on [0, q). Each plateau is the
/// cell average of the density, so the tail integral is exact at cell edges.
StepCDF discretize(const FrsbClosedForm& frsb, int cells);

/// Atoms (location, mass) of a step c.d.f.
std::vector<std::pair<double, double>> atoms(const StepCDF& cdf);

}  // namespace parisi
