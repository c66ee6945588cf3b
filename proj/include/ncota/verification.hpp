#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ncota {

// One Monte Carlo (or exhaustive) check against a closed-form reference.
struct CheckResult {
  std::string label;
  double observed = 0.0;
  double reference = 0.0;
  // The largest observed value (or deviation) that still passes.
  double limit = 0.0;
  bool pass = false;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
  std::size_t failures() const;
};

// Mean plus-bin energy vs E0*M*theta + sigma^2 over M in {0,1,2,5,15,31},
// theta in {1,1.5,3}, sigma^2 in {0.1,1}; 2% relative tolerance.
SuiteResult verify_mean_energy(std::size_t trials, std::uint64_t seed);

// Gaussian sign-flip frequency vs the Gauss-inequality bound, with 3-sigma slack.
SuiteResult verify_gauss_inequality(std::size_t draws, std::uint64_t seed);

// Majority-vote error frequency vs (Kq(1-q) + 1/beta)/(K + 2/beta) + 3 sigma,
// and the estimate < 1/2 property, over K in {5,15,31}, beta in {0.5,2,8},
// q in {0.05,0.2,0.4}.
SuiteResult verify_error_probability(std::size_t trials, std::uint64_t seed);

// Detection error rate with timing offsets up to 0.25 symbol vs none, same seeds.
SuiteResult verify_sync_invariance(std::size_t trials, std::uint64_t seed);

// Noiseless unit channel with pinned symbols must reproduce the exact
// majority vote: exhaustive for (M=3, q=2) and (M=3, q=4), 1000 random
// patterns at (M=31, q=10).
SuiteResult verify_ideal_equivalence(std::uint64_t seed);

void print_suite(std::ostream& out, const SuiteResult& suite);

}  // namespace ncota
