#pragma once

// Reference computations that share no code with the library: direct
// quadrature of the Crisanti-Sommers functional and a zooming brute-force
// search over two-atom measures.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "parisi/measures.hpp"
#include "parisi/mixture.hpp"

namespace oracle {

inline double xi(const parisi::MixtureSpec& spec, double x) {
  double s = 0.0;
  for (const auto& [p, g] : spec.coeffs()) s += g * g * std::pow(x, p);
  return s;
}

inline double xi_prime(const parisi::MixtureSpec& spec, double x) {
  double s = 0.0;
  for (const auto& [p, g] : spec.coeffs()) s += g * g * p * std::pow(x, p - 1);
  return s;
}

/// Q by 30-point Gauss-Legendre on every piece where alpha is constant.
/// Breakpoints: 0, jump locations, shat, 1.
inline double cs_quadrature(const parisi::MixtureSpec& spec, double beta, const parisi::StepCDF& alpha,
                            double shat) {
  using boost::math::quadrature::gauss;
  std::vector<double> cuts{0.0};
  for (const auto& j : alpha.jumps())
    if (j.q > 0.0) cuts.push_back(j.q);
  cuts.push_back(1.0);
  double energy = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = alpha.at(cuts[i]);
    energy += a * (xi(spec, cuts[i + 1]) - xi(spec, cuts[i]));
  }
  auto tail = [&](double s) {
    double t = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = std::max(s, cuts[i]);
      if (lo < cuts[i + 1]) t += alpha.at(cuts[i]) * (cuts[i + 1] - lo);
    }
    return t;
  };
  std::vector<double> pts;
  for (double c : cuts)
    if (c < shat) pts.push_back(c);
  pts.push_back(shat);
  double entropy = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    entropy += gauss<double, 30>::integrate([&](double s) { return 1.0 / tail(s); }, pts[i], pts[i + 1]);
  return 0.5 * (beta * beta * energy + entropy + std::log(1.0 - shat));
}

/// Q for m delta_0 + (1-m) delta_q written out by hand.
inline double two_atom_value(const parisi::MixtureSpec& spec, double beta, double m, double q) {
  const double xq = xi(spec, q);
  return 0.5 * (beta * beta * (m * xq + xi(spec, 1.0) - xq) + std::log((1.0 - q + m * q) / (1.0 - q)) / m +
                std::log(1.0 - q));
}

struct GridMin {
  double m, q, value;
};

/// n x n grid over (0,1)^2, then repeated zooms of the same grid around the
/// incumbent until the cell is below 1e-12.
inline GridMin two_atom_bruteforce(const parisi::MixtureSpec& spec, double beta, int n = 500) {
  double m_lo = 0.0, m_hi = 1.0, q_lo = 0.0, q_hi = 1.0;
  GridMin best{0.5, 0.5, std::numeric_limits<double>::infinity()};
  for (int round = 0; round < 40; ++round) {
    const double dm = (m_hi - m_lo) / (n + 1), dq = (q_hi - q_lo) / (n + 1);
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const double m = m_lo + i * dm, q = q_lo + j * dq;
        if (m <= 0.0 || m >= 1.0 || q <= 0.0 || q >= 1.0) continue;
        const double v = two_atom_value(spec, beta, m, q);
        if (v < best.value) best = {m, q, v};
      }
    if (dm < 1e-12 && dq < 1e-12) break;
    m_lo = std::max(0.0, best.m - 4 * dm), m_hi = std::min(1.0, best.m + 4 * dm);
    q_lo = std::max(0.0, best.q - 4 * dq), q_hi = std::min(1.0, best.q + 4 * dq);
    if (round > 0) n = std::min(n, 60);
  }
  return best;
}

}  // namespace oracle
