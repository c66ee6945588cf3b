#include "ncota/verification.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ncota/analysis.hpp"
#include "ncota/detector.hpp"
#include "ncota/random.hpp"
#include "ncota/uplink.hpp"

namespace ncota {

bool SuiteResult::passed() const { return failures() == 0; }

std::size_t SuiteResult::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename... Parts>
std::string label_of(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

}  // namespace

SuiteResult verify_mean_energy(std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult suite{"mean bin energy", {}, 0.0};
  std::uint64_t case_id = 0;
  for (long votes : {0L, 1L, 2L, 5L, 15L, 31L}) {
    for (double theta : {1.0, 1.5, 3.0}) {
      for (double noise : {0.1, 1.0}) {
        EnergyConfig cfg;
        cfg.votes = votes;
        cfg.devices = 31;
        cfg.mean_power = theta;
        cfg.noise_variance = noise;
        cfg.samples = trials;
        cfg.seed = derive_seed(seed, {case_id++});
        const double theory = mean_energy(votes, kSymbolEnergy, theta, noise);
        const double mc = mc_mean_energy(cfg).mean;
        const double rel = std::abs(mc - theory) / theory;
        suite.checks.push_back({label_of("M=", votes, " theta=", theta, " noise=", noise), mc,
                                theory, 0.02, rel < 0.02});
      }
    }
  }
  suite.seconds = seconds_since(start);
  return suite;
}

SuiteResult verify_gauss_inequality(std::size_t draws, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult suite{"Gauss-inequality sign-flip bound", {}, 0.0};
  std::uint64_t case_id = 0;
  for (double snr : {0.2, 0.5, 1.0, 1.155, 2.0, 5.0, 20.0}) {
    const auto mc = mc_sign_flip(snr, draws, derive_seed(seed, {case_id++}));
    const double bound = failure_prob_bound(snr);
    const double limit = bound + 3.0 * mc.std_error;
    suite.checks.push_back({label_of("R=", snr), mc.estimate, bound, limit, mc.estimate <= limit});
  }
  suite.seconds = seconds_since(start);
  return suite;
}

SuiteResult verify_error_probability(std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult suite{"majority-vote error probability", {}, 0.0};
  std::uint64_t case_id = 0;
  for (long K : {5L, 15L, 31L}) {
    for (double beta : {0.5, 2.0, 8.0}) {
      for (double q : {0.05, 0.2, 0.4}) {
        const auto mc = mc_error_prob(K, q, beta, trials, derive_seed(seed, {case_id++}));
        const double bound = error_prob_intermediate_bound(K, beta, q);
        const double limit = bound + 3.0 * mc.std_error;
        const std::string point = label_of("K=", K, " beta=", beta, " q=", q);
        suite.checks.push_back({point + " vs bound", mc.estimate, bound, limit, mc.estimate <= limit});
        suite.checks.push_back({point + " < 1/2", mc.estimate, 0.5, 0.5, mc.estimate < 0.5});
      }
    }
  }
  suite.seconds = seconds_since(start);
  return suite;
}

SuiteResult verify_sync_invariance(std::size_t trials, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult suite{"timing-offset invariance of detection errors", {}, 0.0};
  std::uint64_t case_id = 0;
  for (long K : {5L, 31L}) {
    VoteErrorConfig cfg;
    cfg.devices = K;
    cfg.flip_probability = 0.2;
    cfg.beta = 2.0;
    cfg.trials = trials;
    cfg.seed = derive_seed(seed, {case_id++});
    const auto aligned = mc_error_prob(cfg);
    cfg.sync_error_max = 0.25;
    const auto skewed = mc_error_prob(cfg);
    const double combined = std::hypot(aligned.std_error, skewed.std_error);
    const double diff = std::abs(skewed.estimate - aligned.estimate);
    suite.checks.push_back({label_of("K=", K, " |P(0.25) - P(0)|"), diff, 0.0, 3.0 * combined,
                            diff < 3.0 * combined});
  }
  suite.seconds = seconds_since(start);
  return suite;
}

namespace {

// Votes from the over-the-air path under ideal conditions.
SignReport ideal_channel_vote(std::span<const SignReport> reports, std::size_t q) {
  UplinkOptions options;
  options.subcarriers = 2 * q;
  options.symbols = 1;
  options.randomization = Randomization::kPinned;
  options.unit_channel = true;
  const std::vector<double> powers(reports.size(), 1.0);
  return transmit_votes(reports, powers, options, 0).votes;
}

std::size_t count_mismatches(std::size_t devices, std::size_t q, std::uint64_t patterns,
                             bool exhaustive, std::uint64_t seed) {
  std::size_t mismatches = 0;
  Rng rng(seed);
  std::vector<SignReport> reports(devices);
  for (std::uint64_t p = 0; p < patterns; ++p) {
    for (std::size_t m = 0; m < devices; ++m) {
      reports[m].signs.resize(q);
      for (std::size_t i = 0; i < q; ++i) {
        const bool positive = exhaustive ? ((p >> (m * q + i)) & 1U) != 0 : (rng.next_u64() >> 63) != 0;
        reports[m].signs[i] = positive ? std::int8_t{1} : std::int8_t{-1};
      }
    }
    if (ideal_channel_vote(reports, q) != ideal_majority_vote(reports)) ++mismatches;
  }
  return mismatches;
}

}  // namespace

SuiteResult verify_ideal_equivalence(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult suite{"ideal-channel detector equals majority vote", {}, 0.0};
  struct Case {
    std::size_t devices, q;
    std::uint64_t patterns;
    bool exhaustive;
  };
  for (const Case& c : {Case{3, 2, 64, true}, Case{3, 4, 4096, true}, Case{31, 10, 1000, false}}) {
    const auto bad = count_mismatches(c.devices, c.q, c.patterns, c.exhaustive, seed);
    suite.checks.push_back({label_of("M=", c.devices, " q=", c.q, " patterns=", c.patterns,
                                     c.exhaustive ? " (all)" : " (random)"),
                            static_cast<double>(bad), 0.0, 0.0, bad == 0});
  }
  suite.seconds = seconds_since(start);
  return suite;
}

void print_suite(std::ostream& out, const SuiteResult& suite) {
  out << "== " << suite.name << " (" << std::fixed << std::setprecision(2) << suite.seconds
      << " s)\n";
  out << std::defaultfloat;
  for (const auto& c : suite.checks) {
    out << (c.pass ? "  PASS  " : "  FAIL  ") << std::left << std::setw(34) << c.label
        << std::right << " observed=" << std::setprecision(6) << c.observed
        << " reference=" << c.reference << " limit=" << c.limit << '\n';
  }
  out << "  " << (suite.checks.size() - suite.failures()) << "/" << suite.checks.size()
      << " passed\n";
}

}  // namespace ncota
