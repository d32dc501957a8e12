#pragma once

#include <map>
#include <string>
#include <string_view>

namespace parisi {

/// Mixture function xi(x) = sum_p gamma_p^2 x^p over a finite set of degrees.
///
/// Coefficients are the gamma_p themselves (not their squares). Entries with
/// gamma_p == 0 are dropped on construction.
class MixtureSpec {
 public:
  /// Throws DomainError unless some degree p >= 2 carries a nonzero gamma_p.
  explicit MixtureSpec(std::map<int, double> coeffs);

  /// Pure p-spin, xi(x) = x^p.
  static MixtureSpec pure(int p);
  /// xi(t) = (1-c) t^2 + c t^p.
  static MixtureSpec two_plus_p(double c, int p);

  const std::map<int, double>& coeffs() const { return coeffs_; }
  double gamma(int p) const;
  bool even_only() const { return even_only_; }
  bool gamma1_zero() const { return gamma1_zero_; }

  /// Exactly one degree present.
  bool is_pure() const { return coeffs_.size() == 1; }
  bool is_pure_two_spin() const { return is_pure() && coeffs_.begin()->first == 2; }
  int max_degree() const { return coeffs_.rbegin()->first; }

  /// xi(x) for |x| <= 1.
  double xi(double x) const;
  /// order-th derivative of xi, order in {1, 2, 3}, x in [0, 1].
  double derivative(double x, int order) const;

  bool operator==(const MixtureSpec&) const = default;

 private:
  std::map<int, double> coeffs_;
  bool even_only_ = true;
  bool gamma1_zero_ = true;
};

enum class Curvature { Convex, Concave, Neither };

struct CurvatureResult {
  Curvature kind = Curvature::Neither;
  /// True when xi''^{-1/2} is constant (pure 2-spin); reported as Convex.
  bool constant = false;
  /// True when the classification came from the power-law argument rather
  /// than the grid test.
  bool exact = false;
};

/// Classifies s -> xi''(s)^{-1/2} on (0, 1].
CurvatureResult curvature_class(const MixtureSpec& spec, int grid_size = 2000);

std::string to_string(Curvature c);

/// Parses "p1:g1,p2:g2,...". Throws ParseError.
MixtureSpec parse_mixture(std::string_view text);

/// Inverse of parse_mixture, full precision.
std::string format_mixture(const MixtureSpec& spec);

}  // namespace parisi
