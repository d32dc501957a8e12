#include "profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parisi/errors.hpp"

namespace parisi::detail {

double log_remainder(double x) {
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  if (x < 1e-2) {
    // sum_{n>=2} x^{n-2} / n
    double sum = 0.0, power = 1.0;
    for (int n = 2; n < 16; ++n) {
      sum += power / n;
      power *= x;
    }
    return sum;
  }
  return (-x - std::log1p(-x)) / (x * x);
}

namespace {

// log(1 + x) / x, continuous at 0.
double log1p_ratio(double x) { return x < 1e-12 ? 1.0 - 0.5 * x : std::log1p(x) / x; }

}  // namespace

Profile::Profile(std::span<const Jump> jumps) {
  if (jumps.empty()) throw DomainError("profile needs at least one jump");
  start_.reserve(jumps.size() + 1);
  slope_.reserve(jumps.size() + 1);
  start_.push_back(0.0);
  slope_.push_back(0.0);
  for (const Jump& j : jumps) {
    start_.push_back(j.q);
    slope_.push_back(j.m);
  }
  top_ = jumps.back().q;
  if (!(top_ < 1.0)) throw DomainError("profile: last location must be < 1");

  const size_t n = start_.size();
  tail_at_start_.assign(n, 0.0);
  tail_at_start_[n - 1] = slope_[n - 1] * (1.0 - start_[n - 1]);
  for (size_t i = n - 1; i-- > 0;)
    tail_at_start_[i] = tail_at_start_[i + 1] + slope_[i] * (start_[i + 1] - start_[i]);

  inv_sq_at_start_.assign(n, 0.0);
  dbl_at_start_.assign(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double len = start_[i + 1] - start_[i];
    const double a = tail_at_start_[i];
    const double b = tail_at_start_[i + 1];
    const double x = slope_[i] * len / a;
    inv_sq_at_start_[i + 1] = inv_sq_at_start_[i] + len / (a * b);
    dbl_at_start_[i + 1] =
        dbl_at_start_[i] + inv_sq_at_start_[i] * len + (len / a) * (len / a) * log_remainder(x);
  }
}

size_t Profile::piece_of(double t) const {
  auto it = std::upper_bound(start_.begin(), start_.end(), t);
  return static_cast<size_t>(std::max<std::ptrdiff_t>(it - start_.begin() - 1, 0));
}

double Profile::tail(double t) const {
  const size_t i = piece_of(t);
  const double len = t - start_[i];
  return tail_at_start_[i] - slope_[i] * len;
}

double Profile::inverse_square_integral(double t) const {
  const size_t i = piece_of(t);
  const double len = t - start_[i];
  const double b = tail_at_start_[i] - slope_[i] * len;
  if (!(b > 0.0)) return std::numeric_limits<double>::infinity();
  return inv_sq_at_start_[i] + len / (tail_at_start_[i] * b);
}

double Profile::double_integral(double t) const {
  const size_t i = piece_of(t);
  const double len = t - start_[i];
  const double a = tail_at_start_[i];
  const double x = slope_[i] * len / a;
  return dbl_at_start_[i] + inv_sq_at_start_[i] * len + (len / a) * (len / a) * log_remainder(x);
}

double Profile::entropy_term(double shat) const {
  const size_t n = start_.size();
  double sum = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double len = start_[i + 1] - start_[i];
    if (len <= 0.0) continue;
    const double b = tail_at_start_[i + 1];
    sum += (len / b) * log1p_ratio(slope_[i] * len / b);
  }
  // On [q_k, shat] the tail is 1 - s.
  sum += std::log((1.0 - top_) / (1.0 - shat));
  return sum + std::log(1.0 - shat);
}

double Profile::entropy_term() const {
  const size_t n = start_.size();
  double sum = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double len = start_[i + 1] - start_[i];
    if (len <= 0.0) continue;
    const double b = tail_at_start_[i + 1];
    sum += (len / b) * log1p_ratio(slope_[i] * len / b);
  }
  return sum + std::log1p(-top_);
}

double Profile::energy_term(const MixtureSpec& spec, double beta) const {
  const size_t n = start_.size();
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (slope_[i] == 0.0) continue;
    const double end = i + 1 < n ? start_[i + 1] : 1.0;
    sum += slope_[i] * (spec.xi(end) - spec.xi(start_[i]));
  }
  return beta * beta * sum;
}

}  // namespace parisi::detail
