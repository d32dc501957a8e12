#include "parisi/mixture.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "parisi/errors.hpp"

namespace parisi {

namespace {

// p (p-1) ... (p-order+1)
double falling_factorial(int p, int order) {
  double r = 1.0;
  for (int j = 0; j < order; ++j) r *= static_cast<double>(p - j);
  return r;
}

// x^n with the convention 0^0 = 1.
double ipow(double x, int n) {
  if (n == 0) return 1.0;
  return std::pow(x, n);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

MixtureSpec::MixtureSpec(std::map<int, double> coeffs) {
  for (const auto& [p, g] : coeffs) {
    if (p < 1) throw DomainError("mixture degree must be >= 1, got " + std::to_string(p));
    if (!std::isfinite(g)) throw DomainError("mixture coefficient must be finite");
    if (g != 0.0) coeffs_.emplace(p, g);
  }
  const bool has_interaction =
      std::any_of(coeffs_.begin(), coeffs_.end(), [](const auto& e) { return e.first >= 2; });
  if (!has_interaction) {
    throw DomainError("mixture needs a nonzero coefficient with degree >= 2");
  }
  even_only_ = std::none_of(coeffs_.begin(), coeffs_.end(),
                            [](const auto& e) { return e.first % 2 != 0; });
  gamma1_zero_ = coeffs_.find(1) == coeffs_.end();
}

MixtureSpec MixtureSpec::pure(int p) { return MixtureSpec({{p, 1.0}}); }

MixtureSpec MixtureSpec::two_plus_p(double c, int p) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("two_plus_p: c must lie in (0, 1)");
  return MixtureSpec({{2, std::sqrt(1.0 - c)}, {p, std::sqrt(c)}});
}

double MixtureSpec::gamma(int p) const {
  auto it = coeffs_.find(p);
  return it == coeffs_.end() ? 0.0 : it->second;
}

double MixtureSpec::xi(double x) const {
  if (!(std::abs(x) <= 1.0)) throw DomainError("xi: |x| must be <= 1");
  double s = 0.0;
  for (const auto& [p, g] : coeffs_) s += g * g * ipow(x, p);
  return s;
}

double MixtureSpec::derivative(double x, int order) const {
  if (order < 1 || order > 3) throw DomainError("xi derivative order must be 1, 2 or 3");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("xi derivative: x must lie in [0, 1]");
  double s = 0.0;
  for (const auto& [p, g] : coeffs_) {
    if (p < order) continue;
    s += g * g * falling_factorial(p, order) * ipow(x, p - order);
  }
  return s;
}

CurvatureResult curvature_class(const MixtureSpec& spec, int grid_size) {
  if (grid_size < 3) throw DomainError("curvature_class: grid_size must be >= 3");

  // Only degrees >= 2 enter xi''.
  std::map<int, double> interacting;
  for (const auto& [p, g] : spec.coeffs())
    if (p >= 2) interacting.emplace(p, g);

  // xi''^{-1/2} = const * s^{-(p-2)/2}: convex for p > 2, constant for p = 2.
  if (interacting.size() == 1) {
    const bool constant = interacting.begin()->first == 2;
    return {Curvature::Convex, constant, true};
  }

  std::vector<double> g(static_cast<size_t>(grid_size) + 1);
  const double h = 1.0 / grid_size;
  for (int i = 1; i <= grid_size; ++i) {
    const double d2 = spec.derivative(i * h, 2);
    if (!(d2 > 0.0)) throw DegenerateError("xi'' vanishes on (0, 1]");
    g[i] = 1.0 / std::sqrt(d2);
  }
  double scale = 0.0;
  for (int i = 1; i <= grid_size; ++i) scale = std::max(scale, std::abs(g[i]));
  const double tol = 1e-12 * scale;

  bool pos = false, neg = false;
  for (int i = 2; i < grid_size; ++i) {
    const double second = g[i - 1] - 2.0 * g[i] + g[i + 1];
    if (second > tol) pos = true;
    if (second < -tol) neg = true;
  }
  if (pos && neg) return {Curvature::Neither, false, false};
  if (neg) return {Curvature::Concave, false, false};
  return {Curvature::Convex, !pos, false};
}

std::string to_string(Curvature c) {
  switch (c) {
    case Curvature::Convex: return "convex";
    case Curvature::Concave: return "concave";
    case Curvature::Neither: return "neither";
  }
  return "unknown";
}

MixtureSpec parse_mixture(std::string_view text) {
  std::map<int, double> coeffs;
  std::string_view rest = trim(text);
  if (rest.empty()) throw ParseError("empty mixture string");
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);

    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("mixture term '" + std::string(item) + "' is not of the form p:gamma");
    const std::string_view ps = trim(item.substr(0, colon));
    const std::string gs{trim(item.substr(colon + 1))};

    int p = 0;
    auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), p);
    if (ec != std::errc() || ptr != ps.data() + ps.size())
      throw ParseError("bad degree '" + std::string(ps) + "'");
    double g = 0.0;
    size_t used = 0;
    try {
      g = std::stod(gs, &used);
    } catch (const std::exception&) {
      throw ParseError("bad coefficient '" + gs + "'");
    }
    if (used != gs.size()) throw ParseError("bad coefficient '" + gs + "'");
    if (!coeffs.emplace(p, g).second)
      throw ParseError("degree " + std::to_string(p) + " listed twice");
  }
  try {
    return MixtureSpec(std::move(coeffs));
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

std::string format_mixture(const MixtureSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [p, g] : spec.coeffs()) {
    if (!first) out << ',';
    out << p << ':' << g;
    first = false;
  }
  return out.str();
}

}  // namespace parisi
