#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

#include "parisi/mixture.hpp"

namespace parisi {

using Rng = boost::random::mt19937_64;

/// Upper bound on the total number of tensor entries, sum_p N^p.
inline constexpr double kTensorBudget = 1e8;
/// Bin width of the |R| histograms on [0, 1].
inline constexpr double kHistogramBinWidth = 0.02;

/// splitmix64 finalizer, used to decorrelate arithmetic seed sequences.
std::uint64_t scramble_seed(std::uint64_t seed);
/// Generator seeded from scramble_seed(seed).
Rng make_rng(std::uint64_t seed);
/// master + stride * index, the seed of the index-th replica.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index);

/// H_N + N^{-a} H_{N,p} on top of a pure p0-spin mixture, with the
/// perturbation coefficient fixed at 1.
struct Perturbation {
  int p0 = 4;
  int p = 2;
  double a = 0.2;
};

/// Full unsymmetrized Gaussian coefficient tensors, N^p entries per degree,
/// stored lexicographically (first index slowest).
struct DisorderRealization {
  int N = 0;
  std::uint64_t seed = 0;
  std::map<int, std::vector<double>> tensors;
  /// Tensor of the perturbation degree, drawn after the mixture tensors.
  std::vector<double> perturbation_tensor;
  int perturbation_degree = 0;
};

/// Throws BudgetError naming the first degree at which sum_p N^p exceeds
/// the budget.
void check_budget(const MixtureSpec& spec, int N, const std::optional<Perturbation>& perturbation);

/// Deterministic in (spec, N, seed, perturbation): degrees ascending, entries
/// in lexicographic order, perturbation tensor last.
DisorderRealization sample_disorder(const MixtureSpec& spec, int N, std::uint64_t seed,
                                    const std::optional<Perturbation>& perturbation = std::nullopt);

/// Configuration on the sphere of radius sqrt(N).
using SphereState = std::vector<double>;

/// sum_p gamma_p N^{-(p-1)/2} <g_p, sigma^{(x)p}>, plus N^{-a} times the
/// pure perturbation Hamiltonian when `perturbation` is given.
double energy(const DisorderRealization& disorder, const MixtureSpec& spec, const SphereState& sigma,
              const std::optional<Perturbation>& perturbation = std::nullopt);

/// Gaussian vector rescaled to norm sqrt(N).
SphereState uniform_sphere_sample(int N, Rng& rng);

/// Rescales a nonzero vector onto the sphere of radius sqrt(N).
void project_to_sphere(SphereState& sigma);

double overlap(const SphereState& a, const SphereState& b);

struct McmcConfig {
  int burn_in = 2000;
  int thin = 20;
  int n_samples = 200;
  double step = 0.1;
  bool auto_tune = false;
};

struct McmcResult {
  std::vector<SphereState> samples;
  double acceptance_rate = 0.0;
  /// Proposal step actually used (after auto-tuning, if enabled).
  double step = 0.0;
  std::vector<std::string> warnings;
};

/// Metropolis chain for exp(beta H) against the uniform measure on the sphere.
/// Proposal: sqrt(N) (sigma + step sqrt(N) u) / |.| with u a uniform unit
/// direction.
McmcResult mcmc_run(const DisorderRealization& disorder, const MixtureSpec& spec, double beta,
                    const McmcConfig& config, Rng& rng,
                    const std::optional<Perturbation>& perturbation = std::nullopt,
                    std::optional<SphereState> start = std::nullopt);

struct CovariancePair {
  double overlap = 0.0;
  double target = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
};

struct CovarianceReport {
  std::vector<CovariancePair> pairs;
  double max_abs_z = 0.0;
};

/// Empirical E H(s1) H(s2) against N xi(R(s1, s2)) over fresh disorder draws.
CovarianceReport covariance_selftest(const MixtureSpec& spec, int N, int n_pairs, int n_disorder,
                                     std::uint64_t seed, int jobs = 1);

struct Histogram {
  double bin_width = kHistogramBinWidth;
  std::vector<long long> counts;
  void add(double abs_overlap);
  long long total() const;
};

Histogram make_histogram();

struct PairStats {
  Histogram histogram = make_histogram();
  /// Plug-in estimate of E<|R|> over all samples of all disorders.
  double mean_abs = 0.0;
  /// Standard error of the per-disorder means.
  double standard_error = 0.0;
  /// Signed overlap samples in disorder order.
  std::vector<double> samples;
};

struct SimConfig {
  MixtureSpec spec = MixtureSpec::pure(2);
  int N = 8;
  double beta1 = 0.3;
  double beta2 = 0.5;
  std::optional<Perturbation> perturbation;
  McmcConfig mcmc;
  int n_disorder = 10;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  /// Attach predicted atoms from the solver.
  bool predictions = true;
};

struct PredictedAtoms {
  std::vector<double> same1;
  std::vector<double> same2;
  std::vector<double> cross;
  std::vector<std::string> notes;
};

struct OverlapStats {
  PairStats same1;
  PairStats same2;
  PairStats cross;
  double acceptance1 = 0.0;
  double acceptance2 = 0.0;
  std::vector<std::string> warnings;
  std::optional<PredictedAtoms> predictions;
  std::string non_reproducibility;
};

/// Throws DomainError on an invalid configuration.
void validate(const SimConfig& config);

/// Per disorder: two independent chains per temperature. Same-temperature
/// pairs are (a, b) at each beta; cross pairs are (beta1 a, beta2 b) and
/// (beta1 b, beta2 a). Chain seeds depend on the replica slot but not on the
/// temperature. Replicas run on `jobs` threads and merge in index order.
OverlapStats chaos_experiment(const SimConfig& config);

struct PermutationTest {
  double statistic = 0.0;
  double threshold95 = 0.0;
  double p_value = 1.0;
  bool rejected() const { return statistic > threshold95; }
};

/// Two-sample Kolmogorov-Smirnov distance with a permutation null.
PermutationTest ks_permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                    int permutations, std::uint64_t seed);

}  // namespace parisi
