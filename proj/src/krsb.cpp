// k-step minimization of the Crisanti-Sommers functional.
//
// Jumps are parameterized by stick-breaking fractions so the feasible set is
// a box: q_i = q_{i-1} + v_i (1 - q_{i-1}) and m_i = w_i m_{i+1} with
// m_k = 1. The box problem is solved by a nonmonotone spectral projected
// gradient method with exact gradients, followed by a projected Newton
// polish on the free variables (the FRSB landscape is too flat for first
// order methods alone).

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "parisi/crisanti_sommers.hpp"
#include "parisi/errors.hpp"
#include "profile.hpp"

namespace parisi {

namespace {

constexpr double kMaxFraction = 1.0 - 1e-9;
constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

struct Box {
  int k;
  size_t dim() const { return static_cast<size_t>(2 * k - 1); }
  double upper(size_t i) const { return i < static_cast<size_t>(k) ? kMaxFraction : 1.0; }
  void project(std::vector<double>& z) const {
    for (size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], 0.0, upper(i));
  }
};

std::vector<Jump> jumps_from_params(const std::vector<double>& z, int k) {
  std::vector<Jump> jumps(static_cast<size_t>(k));
  double remaining = 1.0;
  for (int i = 0; i < k; ++i) {
    remaining *= 1.0 - z[i];
    jumps[i].q = 1.0 - remaining;
  }
  jumps[k - 1].m = 1.0;
  for (int i = k - 2; i >= 0; --i) jumps[i].m = z[k + i] * jumps[i + 1].m;
  return jumps;
}

std::vector<double> params_from_jumps(const std::vector<Jump>& jumps) {
  const int k = static_cast<int>(jumps.size());
  std::vector<double> z(static_cast<size_t>(2 * k - 1), 0.0);
  double prev_q = 0.0;
  for (int i = 0; i < k; ++i) {
    z[i] = (jumps[i].q - prev_q) / (1.0 - prev_q);
    prev_q = jumps[i].q;
  }
  for (int i = 0; i + 1 < k; ++i) z[k + i] = jumps[i + 1].m > 0.0 ? jumps[i].m / jumps[i + 1].m : 1.0;
  return z;
}

struct Objective {
  const MixtureSpec& spec;
  double beta;
  int k;
  int evaluations = 0;

  double operator()(const std::vector<double>& z, std::vector<double>& grad) {
    ++evaluations;
    const auto jumps = jumps_from_params(z, k);
    // Q diverges as q_k -> 1; treat the numerically unreachable corner as infeasible.
    if (!(jumps.back().q < 1.0 - 1e-12)) {
      grad.assign(z.size(), 0.0);
      return std::numeric_limits<double>::infinity();
    }
    std::vector<double> gq, gm;
    const double value = cs_value_and_gradient(spec, beta, jumps, &gq, &gm);

    grad.assign(z.size(), 0.0);
    // d/dv_j = (1 - q_{j-1}) W_j, W_j = gq_j + (1 - v_{j+1}) W_{j+1}.
    double w_acc = 0.0;
    for (int j = k - 1; j >= 0; --j) {
      w_acc = gq[j] + (j + 1 < k ? (1.0 - z[j + 1]) * w_acc : 0.0);
      const double before = j == 0 ? 1.0 : 1.0 - jumps[j - 1].q;
      grad[j] = before * w_acc;
    }
    // d/dw_j = m_{j+1} U_j, U_j = gm_j + w_{j-1} U_{j-1}.
    double u_acc = 0.0;
    for (int j = 0; j + 1 < k; ++j) {
      u_acc = gm[j] + (j > 0 ? z[k + j - 1] * u_acc : 0.0);
      grad[k + j] = jumps[j + 1].m * u_acc;
    }
    return value;
  }
};

double projected_gradient_norm(const Box& box, const std::vector<double>& z,
                               const std::vector<double>& g) {
  double norm = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    const double moved = std::clamp(z[i] - g[i], 0.0, box.upper(i));
    norm = std::max(norm, std::abs(moved - z[i]));
  }
  return norm;
}

struct LocalResult {
  std::vector<double> z;
  double value;
  double gradient_norm;
  bool converged;
};

LocalResult spectral_projected_gradient(Objective& objective, const Box& box,
                                        std::vector<double> z, double tol, int max_evaluations) {
  constexpr int kMemory = 10;
  constexpr double kSufficient = 1e-4;
  constexpr double kStepMin = 1e-12, kStepMax = 1e12;

  box.project(z);
  std::vector<double> g, trial_g, trial(z.size()), dir(z.size());
  double value = objective(z, g);
  double pg = projected_gradient_norm(box, z, g);
  double step = pg > 0.0 ? std::clamp(1.0 / pg, kStepMin, kStepMax) : 1.0;
  std::deque<double> history{value};
  const int budget_end = objective.evaluations + max_evaluations;

  while (pg > tol && objective.evaluations < budget_end) {
    for (size_t i = 0; i < z.size(); ++i)
      dir[i] = std::clamp(z[i] - step * g[i], 0.0, box.upper(i)) - z[i];
    double slope = 0.0;
    for (size_t i = 0; i < z.size(); ++i) slope += g[i] * dir[i];
    if (slope >= 0.0) break;
    const double reference = *std::max_element(history.begin(), history.end());

    double t = 1.0;
    double trial_value = 0.0;
    bool accepted = false;
    while (objective.evaluations < budget_end) {
      for (size_t i = 0; i < z.size(); ++i) trial[i] = z[i] + t * dir[i];
      trial_value = objective(trial, trial_g);
      if (std::isfinite(trial_value) && trial_value <= reference + kSufficient * t * slope) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic backtracking.
      double next = 0.5 * t;
      if (std::isfinite(trial_value)) {
        const double denom = 2.0 * (trial_value - value - t * slope);
        if (denom > 0.0) next = std::clamp(-slope * t * t / denom, 0.1 * t, 0.5 * t);
      }
      t = next;
      if (t < 1e-20) break;
    }
    if (!accepted) break;

    double ss = 0.0, sy = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
      const double s = trial[i] - z[i];
      const double y = trial_g[i] - g[i];
      ss += s * s;
      sy += s * y;
    }
    step = sy > 0.0 ? std::clamp(ss / sy, kStepMin, kStepMax) : kStepMax;
    z.swap(trial);
    g.swap(trial_g);
    value = trial_value;
    history.push_back(value);
    if (history.size() > kMemory) history.pop_front();
    pg = projected_gradient_norm(box, z, g);
  }
  return {z, value, pg, pg <= tol};
}

// Bertsekas-style projected Newton with Levenberg damping; the Hessian of the
// free block comes from forward differences of the exact gradient.
LocalResult projected_newton(Objective& objective, const Box& box, std::vector<double> z,
                             double tol, int max_evaluations) {
  constexpr double kSufficient = 1e-4;
  const size_t n = z.size();
  box.project(z);
  std::vector<double> g, trial_g, trial(n), shifted;
  double value = objective(z, g);
  double pg = projected_gradient_norm(box, z, g);
  double damping = 1e-6;
  const int budget_end = objective.evaluations + max_evaluations;

  while (pg > tol && objective.evaluations + static_cast<int>(n) + 2 < budget_end) {
    const double eps = std::min(1e-6, pg);
    std::vector<size_t> free_idx;
    std::vector<bool> active(n, false);
    for (size_t i = 0; i < n; ++i) {
      const bool at_lo = z[i] <= eps && g[i] > 0.0;
      const bool at_hi = z[i] >= box.upper(i) - eps && g[i] < 0.0;
      active[i] = at_lo || at_hi;
      if (!active[i]) free_idx.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd hess(nf, nf);
    for (Eigen::Index c = 0; c < nf; ++c) {
      const size_t i = free_idx[c];
      double h = 1e-7 * std::max(1.0, std::abs(z[i]));
      if (z[i] + h > box.upper(i)) h = -h;
      shifted = z;
      shifted[i] += h;
      std::vector<double> gs;
      objective(shifted, gs);
      for (Eigen::Index r = 0; r < nf; ++r) hess(r, c) = (gs[free_idx[r]] - g[free_idx[r]]) / h;
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::VectorXd gf(nf);
    for (Eigen::Index r = 0; r < nf; ++r) gf(r) = g[free_idx[r]];

    std::vector<double> dir(n, 0.0);
    bool accepted = false;
    double trial_value = value;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      const double scale = std::max(1e-12, hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::MatrixXd lhs = hess;
      lhs.diagonal().array() += damping * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(lhs);
      if (llt.info() != Eigen::Success) {
        damping *= 10.0;
        continue;
      }
      const Eigen::VectorXd df = llt.solve(-gf);
      std::fill(dir.begin(), dir.end(), 0.0);
      for (Eigen::Index r = 0; r < nf; ++r) dir[free_idx[r]] = df(r);
      for (size_t i = 0; i < n; ++i)
        if (active[i]) dir[i] = -g[i];

      double t = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        double predicted = 0.0;
        for (size_t i = 0; i < n; ++i) {
          trial[i] = std::clamp(z[i] + t * dir[i], 0.0, box.upper(i));
          predicted += g[i] * (z[i] - trial[i]);
        }
        trial_value = objective(trial, trial_g);
        if (std::isfinite(trial_value) && value - trial_value >= kSufficient * predicted &&
            trial_value <= value) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (accepted) {
        damping = t == 1.0 ? std::max(1e-12, damping * 0.25) : damping;
      } else {
        damping *= 10.0;
      }
    }
    if (!accepted) break;
    const double decrease = value - trial_value;
    z.swap(trial);
    g.swap(trial_g);
    value = trial_value;
    pg = projected_gradient_norm(box, z, g);
    if (decrease == 0.0) break;
  }
  return {z, value, pg, pg <= tol};
}

LocalResult local_solve(Objective& objective, const Box& box, std::vector<double> z, double tol,
                        int budget) {
  const int start = objective.evaluations;
  LocalResult local =
      spectral_projected_gradient(objective, box, std::move(z), std::max(tol, 1e-6), budget / 2);
  if (local.gradient_norm > tol) {
    const int remaining = budget - (objective.evaluations - start);
    local = projected_newton(objective, box, std::move(local.z), tol, remaining);
  }
  return local;
}

// Location where f peaks above its values on the support, if any. A jump
// inserted there (with zero initial increment) opens a first-order descent
// direction that merged spare atoms cannot see.
std::optional<double> insertion_point(const MixtureSpec& spec, double beta,
                                      const std::vector<Jump>& jumps) {
  const detail::Profile profile(jumps);
  const double b2 = beta * beta;
  auto f = [&](double t) { return b2 * spec.xi(t) - profile.double_integral(t); };
  double on_support = -std::numeric_limits<double>::infinity();
  for (const Jump& j : jumps) on_support = std::max(on_support, f(j.q));
  constexpr int kGrid = 2000;
  double best_t = 0.0, best_f = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double t = profile.top() * i / kGrid;
    const double v = f(t);
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  }
  if (best_f <= on_support + 1e-13) return std::nullopt;
  return best_t;
}

std::vector<Jump> with_inserted_jump(const StepCDF& cleaned, double t, int k) {
  std::vector<Jump> jumps = cleaned.jumps();
  const Jump inserted{t, cleaned.at(t)};
  auto pos = std::upper_bound(jumps.begin(), jumps.end(), t,
                              [](double v, const Jump& j) { return v < j.q; });
  jumps.insert(pos, inserted);
  while (static_cast<int>(jumps.size()) < k) jumps.push_back(jumps.back());
  return jumps;
}

std::vector<double> random_start(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> loc(0.0, 0.95);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<double> qs(k), ms(k - 1);
  for (auto& q : qs) q = loc(rng);
  for (auto& m : ms) m = val(rng);
  std::sort(qs.begin(), qs.end());
  std::sort(ms.begin(), ms.end());
  std::vector<Jump> jumps(k);
  for (int i = 0; i < k; ++i) jumps[i] = {qs[i], i + 1 < k ? ms[i] : 1.0};
  return params_from_jumps(jumps);
}

}  // namespace

KrsbResult krsb_minimize(const MixtureSpec& spec, double beta, const KrsbOptions& options) {
  if (options.k < 1) throw DomainError("krsb_minimize: k must be >= 1");
  if (options.restarts < 1) throw DomainError("krsb_minimize: restarts must be >= 1");
  if (!(beta > 0.0)) throw DomainError("krsb_minimize: beta must be > 0");
  const int k = options.k;
  const Box box{k};

  std::vector<std::vector<double>> starts;
  if (options.warm_start && static_cast<int>(options.warm_start->size()) <= k) {
    std::vector<Jump> padded = options.warm_start->jumps();
    while (static_cast<int>(padded.size()) < k) padded.push_back(padded.back());
    starts.push_back(params_from_jumps(padded));
  }
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(options.seed + kSeedStride * static_cast<std::uint64_t>(r + 1));
    starts.push_back(random_start(k, rng));
  }

  KrsbResult best;
  best.value = std::numeric_limits<double>::infinity();
  int total_evaluations = 0;
  std::vector<double> best_z;
  for (size_t r = 0; r < starts.size(); ++r) {
    Objective objective{spec, beta, k};
    LocalResult local = local_solve(objective, box, starts[r], options.tol, options.max_evaluations);
    for (int round = 0; round < 2 * k; ++round) {
      const auto jumps = jumps_from_params(local.z, k);
      const StepCDF cleaned = StepCDF::cleaned(jumps);
      if (static_cast<int>(cleaned.size()) >= k) break;
      const auto t = insertion_point(spec, beta, cleaned.jumps());
      if (!t) break;
      const int remaining = options.max_evaluations - objective.evaluations;
      if (remaining <= 0) break;
      LocalResult next = local_solve(objective, box,
                                     params_from_jumps(with_inserted_jump(cleaned, *t, k)),
                                     options.tol, remaining);
      if (!(next.value < local.value)) break;
      local = std::move(next);
    }
    total_evaluations += objective.evaluations;
    if (local.value < best.value) {
      best.value = local.value;
      best.converged = local.converged;
      best.gradient_norm = local.gradient_norm;
      best.best_restart = static_cast<int>(r);
      best_z = std::move(local.z);
    }
  }
  best.evaluations = total_evaluations;
  best.raw = jumps_from_params(best_z, k);
  best.alpha = StepCDF::cleaned(best.raw);
  best.value = cs_value(spec, beta, best.alpha);
  return best;
}

}  // namespace parisi
