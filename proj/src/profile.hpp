#pragma once

// Closed-form evaluation of the Crisanti-Sommers terms and the optimality
// functions for a non-decreasing step profile. Unlike StepCDF, a profile may
// carry repeated locations and zero plateaus, which the optimizer needs.

#include <span>
#include <vector>

#include "parisi/measures.hpp"
#include "parisi/mixture.hpp"

namespace parisi::detail {

/// (-x - log(1 - x)) / x^2 for x in [0, 1).
double log_remainder(double x);

class Profile {
 public:
  /// jumps must satisfy 0 <= q_1 <= ... <= q_k < 1, 0 <= m_1 <= ... <= m_k = 1.
  explicit Profile(std::span<const Jump> jumps);

  /// int_0^shat ds / tail(s) + log(1 - shat), shat >= q_k.
  double entropy_term(double shat) const;
  double entropy_term() const;
  /// beta^2 int_0^1 xi'(s) alpha(s) ds.
  double energy_term(const MixtureSpec& spec, double beta) const;

  double tail(double t) const;
  /// int_0^t ds / tail(s)^2.
  double inverse_square_integral(double t) const;
  /// int_0^t inverse_square_integral(s) ds.
  double double_integral(double t) const;

  double top() const { return top_; }

 private:
  size_t piece_of(double t) const;

  // Piece i covers [start_[i], start_[i+1]) with slope_[i] = alpha on it;
  // the last piece ends at 1.
  std::vector<double> start_;
  std::vector<double> slope_;
  std::vector<double> tail_at_start_;
  std::vector<double> inv_sq_at_start_;
  std::vector<double> dbl_at_start_;
  double top_ = 0.0;
};

}  // namespace parisi::detail
