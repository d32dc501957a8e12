#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "parisi/measures.hpp"
#include "parisi/mixture.hpp"

namespace testing_inputs {

/// Random mixture over degrees 2..6 with at least the degree-2 term.
inline parisi::MixtureSpec random_mixture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::bernoulli_distribution keep(0.5);
  std::map<int, double> coeffs{{2, u(rng)}};
  for (int p = 3; p <= 6; ++p)
    if (keep(rng)) coeffs[p] = u(rng);
  return parisi::MixtureSpec(coeffs);
}

/// Random valid step c.d.f. with 1..6 jumps; the first jump sits at 0 half
/// of the time.
inline parisi::StepCDF random_step(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = count(rng);
  std::vector<double> qs(k), ms(k);
  for (auto& q : qs) q = 0.95 * u(rng);
  for (auto& m : ms) m = 0.05 + 0.95 * u(rng);
  std::sort(qs.begin(), qs.end());
  std::sort(ms.begin(), ms.end());
  if (u(rng) < 0.5) qs[0] = 0.0;
  ms.back() = 1.0;
  std::vector<parisi::Jump> jumps;
  for (int i = 0; i < k; ++i) jumps.push_back({qs[i], ms[i]});
  return parisi::StepCDF::cleaned(jumps, 1e-6, 1e-6);
}

}  // namespace testing_inputs
