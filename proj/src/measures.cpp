#include "parisi/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "parisi/errors.hpp"

namespace parisi {

StepCDF::StepCDF(std::vector<Jump> jumps) : jumps_(std::move(jumps)) {
  if (jumps_.empty()) throw DomainError("StepCDF needs at least one jump");
  Jump& first = jumps_.front();
  if (first.q < -kMeasureTol) throw DomainError("StepCDF: q_1 must be >= 0");
  if (first.q < 0.0) first.q = 0.0;
  if (!(first.m > kMeasureTol)) throw DomainError("StepCDF: m_1 must be > 0");
  for (size_t i = 1; i < jumps_.size(); ++i) {
    if (!(jumps_[i].q > jumps_[i - 1].q + kMeasureTol))
      throw DomainError("StepCDF: locations must be strictly increasing");
    if (!(jumps_[i].m > jumps_[i - 1].m + kMeasureTol))
      throw DomainError("StepCDF: values must be strictly increasing");
  }
  Jump& last = jumps_.back();
  if (!(last.q < 1.0 - kMeasureTol)) throw DomainError("StepCDF: q_k must be < 1");
  if (std::abs(last.m - 1.0) > kMeasureTol) throw DomainError("StepCDF: m_k must equal 1");
  last.m = 1.0;
  for (const Jump& j : jumps_)
    if (!std::isfinite(j.q) || !std::isfinite(j.m)) throw DomainError("StepCDF: non-finite entry");
}

StepCDF StepCDF::cleaned(std::span<const Jump> raw, double loc_tol, double mass_tol) {
  std::vector<Jump> out;
  double prev_m = 0.0;
  for (const Jump& j : raw) {
    const double m = std::min(j.m, 1.0);
    if (m - prev_m < mass_tol) continue;
    const double q = std::max(j.q, 0.0);
    if (!out.empty() && q - out.back().q < loc_tol) {
      out.back().m = m;  // merge into the earlier location
    } else {
      out.push_back({q, m});
    }
    prev_m = m;
  }
  if (out.empty()) throw DomainError("StepCDF::cleaned: profile has no mass");
  if (out.front().q < loc_tol) out.front().q = 0.0;
  out.back().m = 1.0;
  return StepCDF(std::move(out));
}

double StepCDF::at(double s) const {
  double v = 0.0;
  for (const Jump& j : jumps_) {
    if (j.q <= s)
      v = j.m;
    else
      break;
  }
  return v;
}

double StepCDF::tail(double s) const {
  double total = 0.0;
  for (size_t i = 0; i < jumps_.size(); ++i) {
    const double lo = std::max(s, jumps_[i].q);
    const double hi = i + 1 < jumps_.size() ? jumps_[i + 1].q : 1.0;
    if (hi > lo) total += jumps_[i].m * (hi - lo);
  }
  return total;
}

namespace {

std::vector<double> merged_breakpoints(const StepCDF& a, const StepCDF& b) {
  std::vector<double> pts{0.0, 1.0};
  for (const Jump& j : a.jumps()) pts.push_back(j.q);
  for (const Jump& j : b.jumps()) pts.push_back(j.q);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

StepCDF convex_combination(const StepCDF& a, const StepCDF& b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("convex_combination: lambda in [0,1]");
  std::vector<Jump> raw;
  for (double s : merged_breakpoints(a, b)) {
    if (s >= 1.0) break;
    const double v = (1.0 - lambda) * a.at(s) + lambda * b.at(s);
    if (raw.empty() ? v > 0.0 : v > raw.back().m) raw.push_back({s, v});
  }
  raw.back().m = 1.0;
  return StepCDF(std::move(raw));
}

double l1_distance(const StepCDF& a, const StepCDF& b) {
  const auto pts = merged_breakpoints(a, b);
  double d = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    d += std::abs(a.at(pts[i]) - b.at(pts[i])) * (pts[i + 1] - pts[i]);
  return d;
}

FrsbClosedForm::FrsbClosedForm(MixtureSpec spec_in, double beta_in, double q_in)
    : spec(std::move(spec_in)), beta(beta_in), q(q_in) {
  if (!(beta > 0.0)) throw DomainError("FRSB measure: beta must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("FRSB measure: q must lie in (0, 1)");
  if (!(spec.derivative(0.0, 2) > 0.0)) throw DomainError("FRSB measure: xi''(0) must be > 0");
  if (density(q) > 1.0 + kMeasureTol)
    throw DomainError("FRSB measure: density at q exceeds 1, not a c.d.f.");
}

double FrsbClosedForm::density(double t) const {
  const double d2 = spec.derivative(t, 2);
  return spec.derivative(t, 3) / (2.0 * beta * d2 * std::sqrt(d2));
}

double FrsbClosedForm::phi(double t) const { return 1.0 / (beta * std::sqrt(spec.derivative(t, 2))); }

double cdf_at(const ParisiMeasure& measure, double s) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) return step->at(s);
  const auto& f = std::get<FrsbClosedForm>(measure);
  return s < f.q ? f.density(std::max(s, 0.0)) : 1.0;
}

double tail_integral(const ParisiMeasure& measure, double s) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) return step->tail(s);
  const auto& f = std::get<FrsbClosedForm>(measure);
  if (s >= f.q) return 1.0 - s;
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double continuous = gauss_kronrod<double, 31>::integrate(
      [&f](double t) { return f.density(t); }, s, f.q, 8, 1e-12, &err);
  return continuous + (1.0 - f.q);
}

double support_min(const ParisiMeasure& measure) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) return step->jumps().front().q;
  const auto& f = std::get<FrsbClosedForm>(measure);
  // xi''' > 0 on (0, q) exactly when some degree >= 3 is present.
  return f.spec.max_degree() >= 3 ? 0.0 : f.q;
}

double mass_of_zero(const ParisiMeasure& measure) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) {
    const Jump& first = step->jumps().front();
    return first.q == 0.0 ? first.m : 0.0;
  }
  return cdf_at(measure, 0.0);
}

StepCDF discretize(const FrsbClosedForm& frsb, int cells) {
  if (cells < 1) throw DomainError("discretize: cells must be >= 1");
  const double h = frsb.q / cells;
  std::vector<Jump> raw;
  double prev = 0.0;
  double phi_lo = frsb.phi(0.0);
  for (int j = 0; j < cells; ++j) {
    const double lo = j * h;
    const double hi = j + 1 == cells ? frsb.q : (j + 1) * h;
    const double phi_hi = frsb.phi(hi);
    const double avg = (phi_lo - phi_hi) / (hi - lo);
    phi_lo = phi_hi;
    if (avg > prev + kMeasureTol && avg < 1.0 - kMeasureTol) {
      raw.push_back({lo, avg});
      prev = avg;
    }
  }
  raw.push_back({frsb.q, 1.0});
  return StepCDF(std::move(raw));
}

std::vector<std::pair<double, double>> atoms(const StepCDF& cdf) {
  std::vector<std::pair<double, double>> out;
  double prev = 0.0;
  for (const Jump& j : cdf.jumps()) {
    out.emplace_back(j.q, j.m - prev);
    prev = j.m;
  }
  return out;
}

}  // namespace parisi
