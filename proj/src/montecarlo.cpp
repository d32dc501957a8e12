#include "parisi/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "parisi/chaos.hpp"
#include "parisi/errors.hpp"
#include "parisi/parisi_solver.hpp"

namespace parisi {

namespace {

constexpr std::uint64_t kReplicaStride = 0x9E3779B97F4A7C15ULL;

size_t power(int N, int p) {
  size_t out = 1;
  for (int i = 0; i < p; ++i) out *= static_cast<size_t>(N);
  return out;
}

// <t, s^{(x)p}> by contracting the last index repeatedly.
double contract(const std::vector<double>& t, int N, int p, const double* s,
                std::vector<double>& buf) {
  size_t rows = power(N, p - 1);
  buf.resize(rows);
  for (size_t r = 0; r < rows; ++r) {
    const double* row = t.data() + r * N;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) acc += row[j] * s[j];
    buf[r] = acc;
  }
  // In place: entry r only reads entries >= r.
  for (int level = 1; level < p; ++level) {
    rows /= N;
    for (size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int j = 0; j < N; ++j) acc += buf[r * N + j] * s[j];
      buf[r] = acc;
    }
  }
  return buf[0];
}

double degree_scale(int N, int p) { return std::pow(static_cast<double>(N), -(p - 1) / 2.0); }

// Runs body(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure in index order.
void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::uint64_t scramble_seed(std::uint64_t seed) {
  seed += 0x9E3779B97F4A7C15ULL;
  seed = (seed ^ (seed >> 30)) * 0xBF58476D1CE4E5B9ULL;
  seed = (seed ^ (seed >> 27)) * 0x94D049BB133111EBULL;
  return seed ^ (seed >> 31);
}

Rng make_rng(std::uint64_t seed) { return Rng(scramble_seed(seed)); }

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return master + kReplicaStride * index;
}

void check_budget(const MixtureSpec& spec, int N, const std::optional<Perturbation>& perturbation) {
  if (N < 1) throw DomainError("N must be >= 1");
  std::vector<int> degrees;
  for (const auto& [p, g] : spec.coeffs()) degrees.push_back(p);
  if (perturbation) degrees.push_back(perturbation->p);
  double total = 0.0;
  for (int p : degrees) {
    total += std::pow(static_cast<double>(N), p);
    if (total > kTensorBudget)
      throw BudgetError("tensor budget exceeded at degree " + std::to_string(p) + ": sum N^p = " +
                        std::to_string(total) + " > 1e8");
  }
}

DisorderRealization sample_disorder(const MixtureSpec& spec, int N, std::uint64_t seed,
                                    const std::optional<Perturbation>& perturbation) {
  check_budget(spec, N, perturbation);
  DisorderRealization d;
  d.N = N;
  d.seed = seed;
  Rng rng = make_rng(seed);
  boost::random::normal_distribution<double> gauss;
  for (const auto& [p, g] : spec.coeffs()) {
    std::vector<double> t(power(N, p));
    for (double& x : t) x = gauss(rng);
    d.tensors.emplace(p, std::move(t));
  }
  if (perturbation) {
    d.perturbation_degree = perturbation->p;
    d.perturbation_tensor.resize(power(N, perturbation->p));
    for (double& x : d.perturbation_tensor) x = gauss(rng);
  }
  return d;
}

double energy(const DisorderRealization& disorder, const MixtureSpec& spec, const SphereState& sigma,
              const std::optional<Perturbation>& perturbation) {
  const int N = disorder.N;
  if (static_cast<int>(sigma.size()) != N) throw DomainError("energy: dimension mismatch");
  std::vector<double> buf;
  double h = 0.0;
  for (const auto& [p, gamma] : spec.coeffs()) {
    auto it = disorder.tensors.find(p);
    if (it == disorder.tensors.end() || it->second.size() != power(N, p))
      throw DomainError("energy: disorder lacks a tensor for degree " + std::to_string(p));
    h += gamma * degree_scale(N, p) * contract(it->second, N, p, sigma.data(), buf);
  }
  if (perturbation) {
    const int p = perturbation->p;
    if (disorder.perturbation_degree != p || disorder.perturbation_tensor.size() != power(N, p))
      throw DomainError("energy: disorder lacks the perturbation tensor");
    h += std::pow(static_cast<double>(N), -perturbation->a) * degree_scale(N, p) *
         contract(disorder.perturbation_tensor, N, p, sigma.data(), buf);
  }
  return h;
}

void project_to_sphere(SphereState& sigma) {
  const double norm = std::sqrt(std::inner_product(sigma.begin(), sigma.end(), sigma.begin(), 0.0));
  if (!(norm > 0.0)) throw DegenerateError("project_to_sphere: zero vector");
  const double scale = std::sqrt(static_cast<double>(sigma.size())) / norm;
  for (double& x : sigma) x *= scale;
}

SphereState uniform_sphere_sample(int N, Rng& rng) {
  if (N < 1) throw DomainError("uniform_sphere_sample: N must be >= 1");
  boost::random::normal_distribution<double> gauss;
  SphereState s(N);
  for (;;) {
    double norm2 = 0.0;
    for (double& x : s) {
      x = gauss(rng);
      norm2 += x * x;
    }
    if (norm2 > 0.0) break;
  }
  project_to_sphere(s);
  return s;
}

double overlap(const SphereState& a, const SphereState& b) {
  if (a.size() != b.size() || a.empty()) throw DomainError("overlap: dimension mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / static_cast<double>(a.size());
}

McmcResult mcmc_run(const DisorderRealization& disorder, const MixtureSpec& spec, double beta,
                    const McmcConfig& config, Rng& rng,
                    const std::optional<Perturbation>& perturbation,
                    std::optional<SphereState> start) {
  if (config.burn_in < 0 || config.thin < 1 || config.n_samples < 1)
    throw DomainError("mcmc_run: need burn_in >= 0, thin >= 1, n_samples >= 1");
  if (!(config.step >= 0.0 && config.step <= 1.0))
    throw DomainError("mcmc_run: step must lie in [0, 1]");
  const int N = disorder.N;
  boost::random::normal_distribution<double> gauss;
  boost::random::uniform_real_distribution<double> uniform(0.0, 1.0);

  SphereState state = start ? *start : uniform_sphere_sample(N, rng);
  if (static_cast<int>(state.size()) != N) throw DomainError("mcmc_run: start has wrong dimension");
  double h = energy(disorder, spec, state, perturbation);
  SphereState candidate(N), direction(N);
  const double radius = std::sqrt(static_cast<double>(N));

  auto propose = [&](double step) -> bool {
    if (step == 0.0) {
      candidate = state;
    } else {
      double norm2 = 0.0;
      for (double& u : direction) {
        u = gauss(rng);
        norm2 += u * u;
      }
      const double scale = step * radius / std::sqrt(norm2);
      for (int i = 0; i < N; ++i) candidate[i] = state[i] + scale * direction[i];
      project_to_sphere(candidate);
    }
    const double hc = energy(disorder, spec, candidate, perturbation);
    const double log_ratio = beta * (hc - h);
    if (log_ratio >= 0.0 || uniform(rng) < std::exp(log_ratio)) {
      std::swap(state, candidate);
      h = hc;
      return true;
    }
    return false;
  };

  McmcResult out;
  out.step = config.step;
  if (config.auto_tune && config.step > 0.0) {
    // Multiplicative adjustment toward acceptance 0.4; not part of the samples.
    for (int block = 0; block < 20; ++block) {
      int accepted = 0;
      for (int i = 0; i < 50; ++i) accepted += propose(out.step);
      const double rate = accepted / 50.0;
      out.step = std::clamp(out.step * (rate > 0.4 ? 1.25 : 0.8), 1e-4, 1.0);
    }
  }

  long long accepted = 0, proposals = 0;
  for (int i = 0; i < config.burn_in; ++i, ++proposals) accepted += propose(out.step);
  out.samples.reserve(config.n_samples);
  for (int s = 0; s < config.n_samples; ++s) {
    for (int i = 0; i < config.thin; ++i, ++proposals) accepted += propose(out.step);
    out.samples.push_back(state);
  }
  out.acceptance_rate = proposals > 0 ? static_cast<double>(accepted) / proposals : 1.0;
  if (out.acceptance_rate < 0.1 || out.acceptance_rate > 0.9)
    out.warnings.push_back("acceptance rate " + std::to_string(out.acceptance_rate) +
                           " outside [0.1, 0.9]");
  return out;
}

CovarianceReport covariance_selftest(const MixtureSpec& spec, int N, int n_pairs, int n_disorder,
                                     std::uint64_t seed, int jobs) {
  if (n_pairs < 1 || n_disorder < 2) throw DomainError("covariance_selftest: need pairs and >= 2 draws");
  check_budget(spec, N, std::nullopt);

  // Pair 0 repeats a state and pair 1 is orthogonal, covering both ends of
  // the overlap range; the rest are independent uniform pairs.
  Rng rng = make_rng(seed);
  const int K = 2 * n_pairs;
  Eigen::MatrixXd states(N, K);
  for (int k = 0; k < n_pairs; ++k) {
    SphereState a = uniform_sphere_sample(N, rng);
    SphereState b = uniform_sphere_sample(N, rng);
    if (k == 0) b = a;
    if (k == 1 && N >= 2) {
      const double r = overlap(a, b);
      for (int i = 0; i < N; ++i) b[i] -= r * a[i];
      project_to_sphere(b);
    }
    for (int i = 0; i < N; ++i) {
      states(i, 2 * k) = a[i];
      states(i, 2 * k + 1) = b[i];
    }
  }

  std::vector<double> products(static_cast<size_t>(n_disorder) * n_pairs);
  const std::uint64_t disorder_master = scramble_seed(seed ^ 0xC0FFEEULL);
  parallel_for(n_disorder, jobs, [&](int d) {
    const DisorderRealization dis = sample_disorder(spec, N, replica_seed(disorder_master, d));
    Eigen::VectorXd h = Eigen::VectorXd::Zero(K);
    std::vector<double> buf;
    for (const auto& [p, gamma] : spec.coeffs()) {
      const auto& t = dis.tensors.at(p);
      const Eigen::Index rows = static_cast<Eigen::Index>(power(N, p - 1));
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat(
          t.data(), rows, N);
      const Eigen::MatrixXd first = mat * states;
      for (int k = 0; k < K; ++k) {
        buf.assign(first.col(k).data(), first.col(k).data() + rows);
        Eigen::Index r = rows;
        while (r > 1) {
          r /= N;
          for (Eigen::Index i = 0; i < r; ++i) {
            double acc = 0.0;
            for (int j = 0; j < N; ++j) acc += buf[i * N + j] * states(j, k);
            buf[i] = acc;
          }
        }
        h[k] += gamma * degree_scale(N, p) * buf[0];
      }
    }
    for (int k = 0; k < n_pairs; ++k)
      products[static_cast<size_t>(d) * n_pairs + k] = h[2 * k] * h[2 * k + 1];
  });

  CovarianceReport report;
  for (int k = 0; k < n_pairs; ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (int d = 0; d < n_disorder; ++d) {
      const double x = products[static_cast<size_t>(d) * n_pairs + k];
      sum += x;
      sum2 += x * x;
    }
    CovariancePair pair;
    SphereState a(N), b(N);
    for (int i = 0; i < N; ++i) {
      a[i] = states(i, 2 * k);
      b[i] = states(i, 2 * k + 1);
    }
    pair.overlap = std::clamp(overlap(a, b), -1.0, 1.0);
    pair.target = N * spec.xi(pair.overlap);
    pair.mean = sum / n_disorder;
    const double var = std::max(0.0, (sum2 - n_disorder * pair.mean * pair.mean) / (n_disorder - 1));
    pair.standard_error = std::sqrt(var / n_disorder);
    pair.z = pair.standard_error > 0.0 ? (pair.mean - pair.target) / pair.standard_error : 0.0;
    report.max_abs_z = std::max(report.max_abs_z, std::abs(pair.z));
    report.pairs.push_back(pair);
  }
  return report;
}

Histogram make_histogram() {
  Histogram h;
  h.counts.assign(static_cast<size_t>(std::lround(1.0 / kHistogramBinWidth)), 0);
  return h;
}

void Histogram::add(double abs_overlap) {
  const long bins = static_cast<long>(counts.size());
  long i = static_cast<long>(std::floor(abs_overlap / bin_width));
  counts[std::clamp(i, 0L, bins - 1)] += 1;
}

long long Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }

void validate(const SimConfig& c) {
  if (c.N < 2) throw DomainError("simulation: N must be >= 2");
  if (c.mcmc.n_samples < 1 || c.mcmc.thin < 1 || c.mcmc.burn_in < 0)
    throw DomainError("simulation: need n_samples >= 1, thin >= 1, burn_in >= 0");
  if (!(c.mcmc.step > 0.0 && c.mcmc.step <= 1.0))
    throw DomainError("simulation: proposal step must lie in (0, 1]");
  if (c.n_disorder < 1) throw DomainError("simulation: need at least one disorder");
  if (!(c.beta1 >= 0.0 && c.beta2 >= 0.0)) throw DomainError("simulation: betas must be >= 0");
  if (c.perturbation) {
    if (!c.spec.is_pure() || c.spec.max_degree() != c.perturbation->p0)
      throw DomainError("simulation: perturbation requires the pure p0-spin mixture");
    if (c.perturbation->p < 1) throw DomainError("simulation: perturbation degree must be >= 1");
  }
}

namespace {

struct ReplicaOutcome {
  std::vector<double> same1, same2, cross;
  double acceptance1 = 0.0, acceptance2 = 0.0;
  int warned1 = 0, warned2 = 0;
};

void finish(PairStats& stats, const std::vector<std::vector<double>>& per_disorder) {
  std::vector<double> means;
  double total = 0.0;
  size_t count = 0;
  for (const auto& v : per_disorder) {
    double s = 0.0;
    for (double r : v) {
      stats.histogram.add(std::abs(r));
      stats.samples.push_back(r);
      s += std::abs(r);
    }
    total += s;
    count += v.size();
    means.push_back(v.empty() ? 0.0 : s / v.size());
  }
  stats.mean_abs = count ? total / count : 0.0;
  if (means.size() >= 2) {
    const double mu = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
    double ss = 0.0;
    for (double m : means) ss += (m - mu) * (m - mu);
    stats.standard_error = std::sqrt(ss / (means.size() - 1) / means.size());
  }
}

std::vector<double> support_points(const ParisiSolution& sol) {
  if (const auto* step = std::get_if<StepCDF>(&sol.measure)) {
    std::vector<double> out;
    for (const Jump& j : step->jumps()) out.push_back(j.q);
    return out;
  }
  return {support_min(sol.measure), std::get<FrsbClosedForm>(sol.measure).q};
}

PredictedAtoms predict(const SimConfig& c) {
  PredictedAtoms out;
  const MixtureSpec spec = c.perturbation ? MixtureSpec::pure(c.perturbation->p0) : c.spec;
  try {
    const ParisiSolution s1 = parisi_solve(spec, c.beta1);
    const ParisiSolution s2 = c.beta2 == c.beta1 ? s1 : parisi_solve(spec, c.beta2);
    out.same1 = support_points(s1);
    out.same2 = support_points(s2);
    if (s1.regime == Regime::FRSB || s2.regime == Regime::FRSB)
      out.notes.push_back("FRSB: support is the interval between the listed endpoints");
    try {
      out.cross = cross_overlap_prediction(s1, s2);
    } catch (const NotApplicable& e) {
      out.notes.push_back(e.what());
    }
  } catch (const std::exception& e) {
    out.notes.push_back(std::string("prediction unavailable: ") + e.what());
  }
  return out;
}

}  // namespace

OverlapStats chaos_experiment(const SimConfig& c) {
  validate(c);
  check_budget(c.spec, c.N, c.perturbation);
  std::vector<ReplicaOutcome> outcomes(c.n_disorder);
  parallel_for(c.n_disorder, c.jobs, [&](int r) {
    const std::uint64_t dseed = replica_seed(c.master_seed, static_cast<std::uint64_t>(r));
    const DisorderRealization dis = sample_disorder(c.spec, c.N, dseed, c.perturbation);
    auto chain = [&](double beta, int slot) {
      Rng rng = make_rng(replica_seed(scramble_seed(dseed), static_cast<std::uint64_t>(slot) + 1));
      return mcmc_run(dis, c.spec, beta, c.mcmc, rng, c.perturbation);
    };
    const McmcResult a1 = chain(c.beta1, 0), b1 = chain(c.beta1, 1);
    const McmcResult a2 = chain(c.beta2, 0), b2 = chain(c.beta2, 1);
    ReplicaOutcome& o = outcomes[r];
    for (int t = 0; t < c.mcmc.n_samples; ++t) {
      o.same1.push_back(overlap(a1.samples[t], b1.samples[t]));
      o.same2.push_back(overlap(a2.samples[t], b2.samples[t]));
      o.cross.push_back(overlap(a1.samples[t], b2.samples[t]));
      o.cross.push_back(overlap(b1.samples[t], a2.samples[t]));
    }
    o.acceptance1 = 0.5 * (a1.acceptance_rate + b1.acceptance_rate);
    o.acceptance2 = 0.5 * (a2.acceptance_rate + b2.acceptance_rate);
    o.warned1 = !a1.warnings.empty() + !b1.warnings.empty();
    o.warned2 = !a2.warnings.empty() + !b2.warnings.empty();
  });

  OverlapStats stats;
  std::vector<std::vector<double>> same1, same2, cross;
  int warned1 = 0, warned2 = 0;
  for (const auto& o : outcomes) {
    same1.push_back(o.same1);
    same2.push_back(o.same2);
    cross.push_back(o.cross);
    stats.acceptance1 += o.acceptance1 / c.n_disorder;
    stats.acceptance2 += o.acceptance2 / c.n_disorder;
    warned1 += o.warned1;
    warned2 += o.warned2;
  }
  finish(stats.same1, same1);
  finish(stats.same2, same2);
  finish(stats.cross, cross);
  auto warn = [&](double beta, int n) {
    if (n > 0)
      stats.warnings.push_back("beta=" + std::to_string(beta) + ": acceptance outside [0.1, 0.9] in " +
                               std::to_string(n) + " of " + std::to_string(2 * c.n_disorder) +
                               " chains");
  };
  warn(c.beta1, warned1);
  warn(c.beta2, warned2);
  if (c.predictions) stats.predictions = predict(c);
  stats.non_reproducibility = kNonReproducibility;
  return stats;
}

PermutationTest ks_permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                    int permutations, std::uint64_t seed) {
  if (a.empty() || b.empty() || permutations < 20)
    throw DomainError("ks_permutation_test: need samples and >= 20 permutations");
  auto distance = [](std::vector<double> x, std::vector<double> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
      const double v = std::min(x[i], y[j]);
      while (i < x.size() && x[i] <= v) ++i;
      while (j < y.size() && y[j] <= v) ++j;
      d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
    }
    return d;
  };
  PermutationTest out;
  out.statistic = distance(a, b);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  Rng rng = make_rng(seed);
  std::vector<double> null;
  int exceed = 0;
  for (int k = 0; k < permutations; ++k) {
    for (size_t i = pooled.size() - 1; i > 0; --i) {
      boost::random::uniform_int_distribution<size_t> pick(0, i);
      std::swap(pooled[i], pooled[pick(rng)]);
    }
    const double d = distance({pooled.begin(), pooled.begin() + a.size()},
                              {pooled.begin() + a.size(), pooled.end()});
    null.push_back(d);
    exceed += d >= out.statistic;
  }
  std::sort(null.begin(), null.end());
  out.threshold95 = null[static_cast<size_t>(std::ceil(0.95 * permutations)) - 1];
  out.p_value = (1.0 + exceed) / (permutations + 1.0);
  return out;
}

}  // namespace parisi
