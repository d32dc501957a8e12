#include "parisi/parisi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "parisi/errors.hpp"

namespace parisi {

namespace {

constexpr double kNearCritical = 1e-10;
constexpr double kScheduleStop = 1e-8;

double rs_exponent(const MixtureSpec& spec, double beta, double s) {
  return beta * beta * spec.xi(s) + std::log1p(-s) + s;
}

// Bisection to the limit of double precision on a sign change of h over [lo, hi].
template <class F>
double bisect(F&& h, double lo, double hi) {
  const bool rising = h(hi) > 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((h(mid) > 0.0) == rising)
      hi = mid;
    else
      lo = mid;
  }
  return std::abs(h(lo)) < std::abs(h(hi)) ? lo : hi;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

RsCheck rs_check(const MixtureSpec& spec, double beta, int grid) {
  if (!(beta >= 0.0)) throw DomainError("rs_check: beta must be >= 0");
  if (grid < 2) throw DomainError("rs_check: grid must be >= 2");
  int best = 1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < grid; ++i) {
    const double v = rs_exponent(spec, beta, static_cast<double>(i) / grid);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  RsCheck out{true, best_value, static_cast<double>(best) / grid};
  const double lo = static_cast<double>(best - 1) / grid;
  const double hi = std::min(static_cast<double>(best + 1) / grid, 1.0 - 1e-15);
  const auto [s, neg] = boost::math::tools::brent_find_minima(
      [&](double t) { return -rs_exponent(spec, beta, t); }, lo, hi, 52);
  if (s > 0.0 && s < 1.0 && -neg > out.sup_value) {
    out.sup_value = -neg;
    out.argmax = s;
  }
  out.is_rs = out.sup_value <= 0.0;
  return out;
}

double onersb_ratio_rhs(double x) {
  if (!(x > 0.0)) throw DomainError("onersb_ratio_rhs: x must be > 0");
  if (x < 1e-2) {
    // sum_{n>=2} (-1)^n x^{n-2} / (n (n-1))
    double sum = 0.0, power = 1.0;
    for (int n = 2; n < 14; ++n) {
      sum += (n % 2 == 0 ? 1.0 : -1.0) * power / (n * (n - 1.0));
      power *= x;
    }
    return sum;
  }
  return (1.0 + x) / (x * x) * std::log1p(x) - 1.0 / x;
}

double onersb_ratio_x(int p) {
  if (p <= 2) throw DomainError("onersb_ratio_x: p must be >= 3");
  const double target = 1.0 / p;
  // rhs(1) = 2 log 2 - 1 > 1/3 >= target, so doubling from 1 brackets the root.
  double hi = 2.0;
  while (onersb_ratio_rhs(hi) > target) hi *= 2.0;
  return bisect([&](double x) { return target - onersb_ratio_rhs(x); }, hi / 2.0, hi);
}

std::array<double, 2> onersb_residuals(const MixtureSpec& spec, double beta, double m, double q) {
  if (!(q > 0.0 && q < 1.0 && m >= 0.0 && m <= 1.0))
    throw DomainError("onersb_residuals: need q in (0,1), m in [0,1]");
  const double b2 = beta * beta;
  const double r = q / (1.0 - q);
  const double y = m * r;
  const double first = q / ((1.0 - q) * (1.0 - q + m * q));
  // log1p(y)/y^2 - 1/(y(1+y)), with its series near 0.
  double bracket;
  if (y < 1e-3) {
    bracket = 0.0;
    double power = 1.0;
    for (int n = 0; n < 8; ++n) {
      bracket += (n % 2 == 0 ? 1.0 : -1.0) * (n + 1.0) / (n + 2.0) * power;
      power *= y;
    }
  } else {
    bracket = std::log1p(y) / (y * y) - 1.0 / (y * (1.0 + y));
  }
  const double second = r * r * bracket;
  return {b2 * spec.derivative(q, 1) - first, b2 * spec.xi(q) - second};
}

namespace {

double two_atom_value(const MixtureSpec& spec, double beta, double m, double q) {
  return cs_value(spec, beta, StepCDF::two_atom(m, q));
}

double max_abs(const std::array<double, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); }

std::optional<std::pair<double, double>> newton_onersb(const MixtureSpec& spec, double beta,
                                                       double m, double q) {
  auto inside = [](double mm, double qq) { return mm > 0.0 && mm < 1.0 && qq > 0.0 && qq < 1.0; };
  auto res = onersb_residuals(spec, beta, m, q);
  for (int iter = 0; iter < 100 && max_abs(res) > 1e-14; ++iter) {
    const double hm = 1e-7 * std::max(m, 1e-3);
    const double hq = 1e-7 * std::min(q, 1.0 - q);
    const auto rm_hi = onersb_residuals(spec, beta, std::min(m + hm, 1.0), q);
    const auto rm_lo = onersb_residuals(spec, beta, m - hm, q);
    const auto rq_hi = onersb_residuals(spec, beta, m, q + hq);
    const auto rq_lo = onersb_residuals(spec, beta, m, q - hq);
    const double dm_scale = std::min(m + hm, 1.0) - (m - hm);
    const double j00 = (rm_hi[0] - rm_lo[0]) / dm_scale, j01 = (rq_hi[0] - rq_lo[0]) / (2 * hq);
    const double j10 = (rm_hi[1] - rm_lo[1]) / dm_scale, j11 = (rq_hi[1] - rq_lo[1]) / (2 * hq);
    const double det = j00 * j11 - j01 * j10;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return std::nullopt;
    const double dm = -(j11 * res[0] - j01 * res[1]) / det;
    const double dq = -(-j10 * res[0] + j00 * res[1]) / det;
    double step = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const double mn = m + step * dm, qn = q + step * dq;
      if (!inside(mn, qn)) continue;
      const auto rn = onersb_residuals(spec, beta, mn, qn);
      if (max_abs(rn) < max_abs(res)) {
        m = mn;
        q = qn;
        res = rn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (!(max_abs(res) <= 1e-8)) return std::nullopt;
  return std::make_pair(m, q);
}

std::vector<std::pair<double, double>> ratio_candidates(const MixtureSpec& spec, double beta) {
  const int p = spec.max_degree();
  const double gamma_sq = spec.gamma(p) * spec.gamma(p);
  const double x = onersb_ratio_x(p);
  // beta^2 gamma^2 p q^{p-2} (1-q)^2 (1+x) = 1, unimodal in q.
  auto h = [&](double q) {
    return beta * beta * gamma_sq * p * std::pow(q, p - 2) * (1.0 - q) * (1.0 - q) * (1.0 + x) - 1.0;
  };
  std::vector<std::pair<double, double>> out;
  constexpr int kScan = 4000;
  double prev_q = 0.0, prev_h = h(0.0);
  for (int i = 1; i <= kScan; ++i) {
    const double q = static_cast<double>(i) / kScan;
    const double hv = h(q);
    if ((prev_h > 0.0) != (hv > 0.0)) {
      const double root = bisect(h, prev_q, q);
      if (root > 0.0 && root < 1.0) {
        const double m = x * (1.0 - root) / root;
        if (m > 0.0 && m < 1.0) out.emplace_back(m, root);
      }
    }
    prev_q = q;
    prev_h = hv;
  }
  return out;
}

std::optional<std::pair<double, double>> newton_path(const MixtureSpec& spec, double beta,
                                                     std::string& note) {
  constexpr int kGrid = 100;
  double best = std::numeric_limits<double>::infinity();
  double m0 = 0.5, q0 = 0.5;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double m = (i + 0.5) / kGrid, q = (j + 0.5) / kGrid;
      const double v = two_atom_value(spec, beta, m, q);
      if (v < best) {
        best = v;
        m0 = m;
        q0 = q;
      }
    }
  }
  if (auto sol = newton_onersb(spec, beta, m0, q0)) return sol;

  // Fall back to the two-jump optimizer for a fresh seed.
  KrsbOptions opts;
  opts.k = 2;
  opts.tol = 1e-9;
  opts.max_evaluations = 20000;
  const KrsbResult k2 = krsb_minimize(spec, beta, opts);
  const auto& j = k2.alpha.jumps();
  if (j.size() == 2 && j[0].q < 1e-6) {
    note = "grid-seeded Newton failed; reseeded from two-jump optimizer";
    return newton_onersb(spec, beta, j[0].m, j[1].q);
  }
  return std::nullopt;
}

}  // namespace

OneRsb onersb_solve(const MixtureSpec& spec, double beta, OneRsbPath path) {
  if (!(beta > 0.0)) throw DomainError("onersb_solve: beta must be > 0");
  if (spec.is_pure_two_spin())
    throw PreconditionFailed("onersb_solve: pure 2-spin measures have a single atom");
  const bool pure_ratio = spec.is_pure() && spec.max_degree() >= 3;
  if (path == OneRsbPath::Auto) path = pure_ratio ? OneRsbPath::RatioX : OneRsbPath::Newton;
  if (path == OneRsbPath::RatioX && !pure_ratio)
    throw PreconditionFailed("onersb_solve: ratio path needs a pure p-spin with p >= 3");

  std::vector<std::pair<double, double>> candidates;
  std::string label = path == OneRsbPath::RatioX ? "ratio" : "newton";
  if (path == OneRsbPath::RatioX) {
    candidates = ratio_candidates(spec, beta);
  } else {
    std::string note;
    if (auto sol = newton_path(spec, beta, note)) candidates.push_back(*sol);
    if (!note.empty()) label += "; " + note;
  }
  if (candidates.empty())
    throw NoInteriorSolution("onersb_solve: no stationary point with m in (0,1)");

  const auto best = std::min_element(candidates.begin(), candidates.end(), [&](auto& a, auto& b) {
    return two_atom_value(spec, beta, a.first, a.second) <
           two_atom_value(spec, beta, b.first, b.second);
  });
  OneRsb out;
  out.m = best->first;
  out.q = best->second;
  out.residuals = onersb_residuals(spec, beta, out.m, out.q);
  out.value = two_atom_value(spec, beta, out.m, out.q);
  out.certificate = certify(spec, beta, StepCDF::two_atom(out.m, out.q));
  out.path = label;
  if (!out.certificate.verdict)
    throw NoInteriorSolution("onersb_solve: stationary point fails the certificate (sup f = " +
                             format_double(out.certificate.sup_f) + ")");
  return out;
}

Regime regime_of(const ParisiMeasure& measure) {
  if (std::holds_alternative<FrsbClosedForm>(measure)) return Regime::FRSB;
  const size_t n = std::get<StepCDF>(measure).size();
  if (n == 1) return Regime::RS;
  if (n == 2) return Regime::OneRSB;
  return Regime::KRSB;
}

std::string regime_label(const ParisiSolution& sol) {
  switch (sol.regime) {
    case Regime::RS: return "RS";
    case Regime::OneRSB: return "1RSB";
    case Regime::KRSB: return "KRSB(" + std::to_string(sol.atoms) + ")";
    case Regime::FRSB: return "FRSB";
  }
  return "unknown";
}

ParisiSolution evaluate_measure(const MixtureSpec& spec, double beta, const ParisiMeasure& measure,
                                const SolveOptions& options) {
  ParisiSolution sol;
  sol.measure = measure;
  sol.regime = regime_of(measure);
  sol.atoms = sol.regime == Regime::FRSB ? 0 : static_cast<int>(std::get<StepCDF>(measure).size());
  sol.cs_val = cs_value(spec, beta, measure);
  sol.certificate =
      certify(spec, beta, measure, options.certificate_grid, options.tol_sup, options.tol_supp);
  sol.converged = sol.certificate.verdict;
  return sol;
}

double frsb_root_residual(const MixtureSpec& spec, double beta, double q) {
  return 1.0 / (beta * std::sqrt(spec.derivative(q, 2))) - (1.0 - q);
}

ParisiSolution frsb_solve(const MixtureSpec& spec, double beta, int certificate_grid) {
  if (!(beta > 0.0)) throw DomainError("frsb_solve: beta must be > 0");
  if (!spec.gamma1_zero()) throw PreconditionFailed("frsb_solve: gamma_1 must be 0");
  const CurvatureResult curvature = curvature_class(spec);
  if (curvature.kind != Curvature::Concave && !curvature.constant)
    throw PreconditionFailed("frsb_solve: xi''(s)^{-1/2} must be concave (found " +
                             to_string(curvature.kind) + ")");
  const double slope0 = beta * std::sqrt(spec.derivative(0.0, 2));
  if (!(slope0 > 1.0))
    throw PreconditionFailed("frsb_solve: beta xi''(0)^{1/2} must exceed 1 (got " +
                             format_double(slope0) + ")");

  const double q = bisect([&](double t) { return frsb_root_residual(spec, beta, t); }, 0.0, 1.0);
  SolveOptions options;
  options.certificate_grid = certificate_grid;
  // Without a cubic term the density part vanishes and only the atom at q remains.
  const ParisiMeasure measure = spec.max_degree() == 2
                                    ? ParisiMeasure{StepCDF::single_atom(q)}
                                    : ParisiMeasure{FrsbClosedForm(spec, beta, q)};
  ParisiSolution sol = evaluate_measure(spec, beta, measure, options);
  sol.diagnostics.branch = "frsb";
  sol.diagnostics.residuals = {frsb_root_residual(spec, beta, q)};
  return sol;
}

namespace {

ParisiSolution from_onersb(const MixtureSpec& spec, double beta, const OneRsb& r,
                           const SolveOptions& options) {
  ParisiSolution sol = evaluate_measure(spec, beta, StepCDF::two_atom(r.m, r.q), options);
  sol.diagnostics.branch = "1rsb";
  sol.diagnostics.notes.push_back("path: " + r.path);
  sol.diagnostics.residuals = {r.residuals[0], r.residuals[1]};
  return sol;
}

ParisiSolution krsb_schedule(const MixtureSpec& spec, double beta, const SolveOptions& options) {
  std::optional<StepCDF> warm;
  std::optional<KrsbResult> last;
  std::vector<double> diffs;
  bool settled = false;
  for (int k : options.k_schedule) {
    KrsbOptions opts;
    opts.k = k;
    opts.restarts = options.restarts;
    opts.seed = options.seed;
    opts.tol = options.krsb_tol;
    opts.max_evaluations = options.krsb_max_evaluations;
    opts.warm_start = warm;
    KrsbResult res = krsb_minimize(spec, beta, opts);
    if (last) {
      diffs.push_back(last->value - res.value);
      if (std::abs(last->value - res.value) < kScheduleStop) {
        // Keep the lower of the two; warm starts make this the newer one.
        if (res.value > last->value) res = *last;
        last = std::move(res);
        settled = true;
        break;
      }
    }
    warm = res.alpha;
    last = std::move(res);
  }
  ParisiSolution sol = evaluate_measure(spec, beta, last->alpha, options);
  sol.diagnostics.branch = "krsb";
  sol.diagnostics.residuals = diffs;
  if (!settled) sol.diagnostics.notes.push_back("k schedule exhausted before values settled");
  if (!last->converged) sol.diagnostics.notes.push_back("optimizer stopped before tolerance");
  return sol;
}

ParisiSolution solve_broken(const MixtureSpec& spec, double beta, const SolveOptions& options) {
  if (spec.is_pure_two_spin()) {
    const double gamma = std::abs(spec.gamma(2));
    const double q = 1.0 - 1.0 / (beta * gamma * std::sqrt(2.0));
    ParisiSolution sol = evaluate_measure(spec, beta, StepCDF::single_atom(q), options);
    sol.diagnostics.branch = "two-spin";
    sol.diagnostics.residuals = {frsb_root_residual(spec, beta, q)};
    return sol;
  }
  const CurvatureResult curvature = curvature_class(spec);
  if (curvature.kind == Curvature::Convex) {
    try {
      return from_onersb(spec, beta, onersb_solve(spec, beta), options);
    } catch (const NoInteriorSolution& e) {
      ParisiSolution sol = krsb_schedule(spec, beta, options);
      sol.diagnostics.notes.insert(sol.diagnostics.notes.begin(),
                                   std::string("1rsb branch failed: ") + e.what());
      return sol;
    }
  }
  if (curvature.kind == Curvature::Concave && spec.gamma1_zero() &&
      beta * std::sqrt(spec.derivative(0.0, 2)) > 1.0) {
    return frsb_solve(spec, beta, options.certificate_grid);
  }
  return krsb_schedule(spec, beta, options);
}

}  // namespace

ParisiSolution parisi_solve(const MixtureSpec& spec, double beta, const SolveOptions& options) {
  if (!(beta > 0.0)) throw DomainError("parisi_solve: beta must be > 0");
  const RsCheck rs = rs_check(spec, beta);
  // For RS mixtures the exponent tends to 0 as s -> 0+, so a small sup alone
  // is not critical. The boundary is either an interior maximum touching 0
  // or the quadratic coefficient beta^2 xi''(0) / 2 - 1/2 vanishing.
  const bool interior_touch = std::abs(rs.sup_value) < kNearCritical && rs.argmax > 1e-3;
  const bool quadratic_touch =
      std::abs(beta * beta * spec.derivative(0.0, 2) - 1.0) < kNearCritical;
  const bool near = interior_touch || quadratic_touch;

  ParisiSolution sol;
  if (rs.is_rs && !near) {
    sol = evaluate_measure(spec, beta, StepCDF::delta0(), options);
    sol.diagnostics.branch = "rs";
  } else if (!near) {
    sol = solve_broken(spec, beta, options);
  } else {
    ParisiSolution rs_sol = evaluate_measure(spec, beta, StepCDF::delta0(), options);
    rs_sol.diagnostics.branch = "rs";
    std::optional<ParisiSolution> broken;
    std::string failure;
    try {
      broken = solve_broken(spec, beta, options);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    sol = broken && broken->cs_val < rs_sol.cs_val ? std::move(*broken) : std::move(rs_sol);
    sol.diagnostics.notes.push_back("near-critical: RS boundary within 1e-10");
    if (!failure.empty()) sol.diagnostics.notes.push_back("broken branch failed: " + failure);
  }
  sol.diagnostics.rs_sup = rs.sup_value;
  return sol;
}

}  // namespace parisi
