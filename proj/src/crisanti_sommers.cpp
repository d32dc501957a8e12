#include "parisi/crisanti_sommers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "parisi/errors.hpp"
#include "profile.hpp"

namespace parisi {

using detail::Profile;

double cs_value(const MixtureSpec& spec, double beta, const StepCDF& alpha,
                std::optional<double> shat) {
  const Profile profile(alpha.jumps());
  double entropy = 0.0;
  if (shat) {
    if (!(*shat <= 1.0 - kMeasureTol)) throw DomainError("cs_value: shat must be < 1");
    if (alpha.at(*shat) < 1.0) throw DomainError("cs_value: alpha(shat) must equal 1");
    entropy = profile.entropy_term(*shat);
  } else {
    entropy = profile.entropy_term();
  }
  return 0.5 * (profile.energy_term(spec, beta) + entropy);
}

double cs_value(const MixtureSpec& spec, double beta, const ParisiMeasure& measure) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) return cs_value(spec, beta, *step);
  const auto& frsb = std::get<FrsbClosedForm>(measure);
  using boost::math::quadrature::gauss_kronrod;
  const double q = frsb.q;
  const double energy_density = gauss_kronrod<double, 31>::integrate(
      [&](double t) { return spec.derivative(t, 1) * frsb.density(t); }, 0.0, q, 10, 1e-14);
  const double energy = beta * beta * (energy_density + spec.xi(1.0) - spec.xi(q));
  // On [0, q) the tail integral is phi = 1 / (beta sqrt(xi'')).
  const double entropy = gauss_kronrod<double, 31>::integrate(
      [&](double t) { return 1.0 / frsb.phi(t); }, 0.0, q, 10, 1e-14);
  return 0.5 * (energy + entropy + std::log1p(-q));
}

double g_function(const MixtureSpec& spec, double beta, const StepCDF& alpha, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("g_function: t must lie in [0, 1]");
  if (t == 1.0) return -std::numeric_limits<double>::infinity();
  const Profile profile(alpha.jumps());
  return beta * beta * spec.derivative(t, 1) - profile.inverse_square_integral(t);
}

double f_function(const MixtureSpec& spec, double beta, const StepCDF& alpha, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("f_function: t must lie in [0, 1]");
  if (t == 1.0) return -std::numeric_limits<double>::infinity();
  const Profile profile(alpha.jumps());
  return beta * beta * spec.xi(t) - profile.double_integral(t);
}

namespace {

std::vector<double> f_values_step(const MixtureSpec& spec, double beta, const StepCDF& alpha,
                                  std::span<const double> ts) {
  const Profile profile(alpha.jumps());
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    out.push_back(t >= 1.0 ? -std::numeric_limits<double>::infinity()
                           : beta * beta * spec.xi(t) - profile.double_integral(t));
  }
  return out;
}

// The FRSB case integrates 1 / alpha_hat^2 numerically, with alpha_hat itself
// taken from the quadrature-based tail integral.
std::vector<double> f_values_frsb(const MixtureSpec& spec, double beta, const FrsbClosedForm& frsb,
                                  std::span<const double> ts) {
  using boost::math::quadrature::gauss;
  const ParisiMeasure measure = frsb;
  const double q = frsb.q;
  const double b2 = beta * beta;

  double u = 0.0;
  double inv_sq = 0.0;   // int_0^u ds / alpha_hat^2
  double dbl = 0.0;      // int_0^u inv_sq

  auto advance_continuous = [&](double to) {
    // Chunks keep the fixed-order rule accurate for sparse evaluation points.
    while (u < to) {
      const double v = std::min(to, u + 0.01);
      auto inv_sq_density = [&](double r) {
        const double a = tail_integral(measure, r);
        return 1.0 / (a * a);
      };
      const double piece = gauss<double, 15>::integrate(inv_sq_density, u, v);
      const double weighted =
          gauss<double, 15>::integrate([&](double r) { return (v - r) * inv_sq_density(r); }, u, v);
      dbl += inv_sq * (v - u) + weighted;
      inv_sq += piece;
      u = v;
    }
  };

  std::vector<double> out;
  out.reserve(ts.size());
  double inv_sq_q = 0.0, dbl_q = 0.0;
  bool reached_q = false;
  for (double t : ts) {
    if (t >= 1.0) {
      out.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    if (t <= q) {
      advance_continuous(t);
      out.push_back(b2 * spec.xi(t) - dbl);
      continue;
    }
    if (!reached_q) {
      advance_continuous(q);
      inv_sq_q = inv_sq;
      dbl_q = dbl;
      reached_q = true;
    }
    // alpha_hat(s) = 1 - s on [q, 1].
    const double a = 1.0 - q;
    const double len = t - q;
    const double tail_part = inv_sq_q * len + (len / a) * (len / a) * detail::log_remainder(len / a);
    out.push_back(b2 * spec.xi(t) - (dbl_q + tail_part));
  }
  return out;
}

}  // namespace

std::vector<double> f_values(const MixtureSpec& spec, double beta, const ParisiMeasure& measure,
                             std::span<const double> ts) {
  if (!std::is_sorted(ts.begin(), ts.end())) throw DomainError("f_values: points must be sorted");
  if (!ts.empty() && (ts.front() < 0.0 || ts.back() > 1.0))
    throw DomainError("f_values: points must lie in [0, 1]");
  if (const auto* step = std::get_if<StepCDF>(&measure)) return f_values_step(spec, beta, *step, ts);
  return f_values_frsb(spec, beta, std::get<FrsbClosedForm>(measure), ts);
}

double directional_derivative(const MixtureSpec& spec, double beta, const StepCDF& from,
                              const StepCDF& to) {
  std::vector<double> pts{0.0};
  for (const Jump& j : from.jumps()) pts.push_back(j.q);
  for (const Jump& j : to.jumps()) pts.push_back(j.q);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // Beyond the last breakpoint both c.d.f.s equal 1.
  const auto f = f_values_step(spec, beta, from, pts);
  double sum = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double h = to.at(pts[i]) - from.at(pts[i]);
    if (h != 0.0) sum += h * (f[i + 1] - f[i]);
  }
  return 0.5 * sum;
}

Certificate certify(const MixtureSpec& spec, double beta, const ParisiMeasure& measure, int grid,
                    double tol_sup, double tol_supp) {
  if (grid < 100) throw DomainError("certify: grid must be >= 100");
  std::vector<double> support;
  if (const auto* step = std::get_if<StepCDF>(&measure)) {
    for (const Jump& j : step->jumps()) support.push_back(j.q);
  } else {
    const auto& frsb = std::get<FrsbClosedForm>(measure);
    const double lo = support_min(measure);
    support.push_back(lo);
    for (int i = 0; i <= grid; ++i) {
      const double t = static_cast<double>(i) / grid;
      if (t > lo && t < frsb.q) support.push_back(t);
    }
    support.push_back(frsb.q);
  }

  std::vector<double> ts(support);
  for (int i = 0; i <= grid; ++i) ts.push_back(static_cast<double>(i) / grid);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  const auto f = f_values(spec, beta, measure, ts);

  Certificate cert;
  cert.grid_size = grid;
  cert.tol_sup = tol_sup;
  cert.tol_supp = tol_supp;
  cert.sup_f = -std::numeric_limits<double>::infinity();
  size_t next_support = 0;
  std::sort(support.begin(), support.end());
  for (size_t i = 0; i < ts.size(); ++i) {
    if (f[i] > cert.sup_f) {
      cert.sup_f = f[i];
      cert.argmax_f = ts[i];
    }
    while (next_support < support.size() && support[next_support] < ts[i]) ++next_support;
    if (next_support < support.size() && support[next_support] == ts[i])
      cert.max_abs_f_on_support = std::max(cert.max_abs_f_on_support, std::abs(f[i]));
  }
  cert.verdict = cert.sup_f <= tol_sup && cert.max_abs_f_on_support <= tol_supp;
  return cert;
}

double cs_value_and_gradient(const MixtureSpec& spec, double beta, std::span<const Jump> jumps,
                             std::vector<double>* grad_q, std::vector<double>* grad_m) {
  const Profile profile(jumps);
  const double value = 0.5 * (profile.energy_term(spec, beta) + profile.entropy_term());
  const size_t k = jumps.size();
  const double b2 = beta * beta;
  if (grad_q) {
    grad_q->assign(k, 0.0);
    double prev_m = 0.0;
    for (size_t i = 0; i < k; ++i) {
      const double q = jumps[i].q;
      const double g = b2 * spec.derivative(q, 1) - profile.inverse_square_integral(q);
      (*grad_q)[i] = 0.5 * (prev_m - jumps[i].m) * g;
      prev_m = jumps[i].m;
    }
  }
  if (grad_m) {
    grad_m->assign(k - 1, 0.0);
    for (size_t i = 0; i + 1 < k; ++i) {
      const double f_hi = b2 * spec.xi(jumps[i + 1].q) - profile.double_integral(jumps[i + 1].q);
      const double f_lo = b2 * spec.xi(jumps[i].q) - profile.double_integral(jumps[i].q);
      (*grad_m)[i] = 0.5 * (f_hi - f_lo);
    }
  }
  return value;
}

}  // namespace parisi
