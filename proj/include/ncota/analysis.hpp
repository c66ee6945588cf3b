#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ncota/channel.hpp"

namespace ncota {

// Closed-form bounds for the non-coherent majority-vote uplink, and Monte
// Carlo estimators that exercise the real encode/channel/detect path to check
// them. Device count is written K throughout (the same quantity as M).

// Mean received energy on a bin carrying `votes` unit-energy votes:
// E0 * votes * theta + sigma_n^2.
double mean_energy(long votes, double symbol_energy, double mean_power, double noise_variance);

// Gauss-inequality bound on the probability that one device's mini-batch
// gradient has the wrong sign, as a function of R = sqrt(d_b)|g|/sigma:
//   (2/9)/R^2            if R > 2/sqrt(3)
//   1/2 - R/(2 sqrt(3))  otherwise.
double failure_prob_bound(double snr);

// Majority-vote error bound:
//   ((K/2) sqrt(2)/(3R) + 1/beta) / (K + 2/beta).
double error_prob_bound(long devices, double beta, double snr);

// The bound before the sign-flip probability q is replaced by its R bound:
//   (K q (1 - q) + 1/beta) / (K + 2/beta).
double error_prob_intermediate_bound(long devices, double beta, double flip_probability);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::size_t hits = 0;
};

// Binomial proportion with its standard error sqrt(p(1-p)/n).
McEstimate make_proportion(std::size_t hits, std::size_t trials);

struct VoteErrorConfig {
  long devices = 31;
  double flip_probability = 0.1;
  // beta = E0 * theta / sigma_n^2; +infinity means a noiseless receiver.
  double beta = 2.0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double mean_power = 1.0;
  double sync_error_max = 0.0;
  std::size_t fft_size = 64;
  std::size_t subcarriers = 64;
  std::size_t symbols = 16;
  FadingMode fading = FadingMode::kPerBin;
};

// Frequency of sign(Delta) != true sign when each of K devices independently
// reports the wrong sign with probability q. True sign is +1 in every trial.
// Requires trials >= 1000 and 0 < q < 1/2.
McEstimate mc_error_prob(const VoteErrorConfig& config);
McEstimate mc_error_prob(long devices, double flip_probability, double beta, std::size_t trials,
                         std::uint64_t seed);

// Gaussian mini-batch noise model: g~ = g + (sigma/sqrt(d_b)) z.
struct GaussianGradient {
  double mean = 0.1;
  double sigma = 0.8;
  std::size_t batch_size = 128;

  double snr() const;
};

// Frequency with which sign(g~) differs from sign(g).
McEstimate mc_sign_flip(const GaussianGradient& gradient, std::size_t draws, std::uint64_t seed);
McEstimate mc_sign_flip(double snr, std::size_t draws, std::uint64_t seed);

struct EnergyConfig {
  long votes = 5;          // devices voting for the measured bin
  long devices = 31;       // total devices; the rest vote for the other bin
  double mean_power = 1.0;
  double noise_variance = 1.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
};

// Received plus-bin energies from the full uplink, one per coordinate.
std::vector<double> sample_plus_energies(const EnergyConfig& config);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mc_mean_energy(const EnergyConfig& config);

struct BoundParams {
  long devices = 31;
  double beta = 2.0;
  long gamma = 1;
  double l1_smoothness = 1.0;  // ||L||_1
  double l1_sigma = 1.0;       // ||sigma||_1
  double objective_gap = 1.0;  // F(w0) - F*
  double rounds = 1000.0;      // N
  double symbol_energy = 2.0;
  std::optional<double> mean_power;
  std::optional<double> noise_variance;
  std::optional<double> batch_size;
  // Keep the 1/sqrt(d_b) factor that the derivation carries on the
  // gradient-noise term.
  bool strict_derivation = false;

  // Throws ArgumentError on non-positive entries or a beta that disagrees
  // with E0 * theta / sigma_n^2 (1e-12 relative) when all three are given.
  void validate() const;
};

double convergence_tau(double beta, long devices, long gamma);

struct ConvergenceReport {
  double bound = 0.0;
  double tau = 0.0;
  // False when d_b = N / gamma is not a whole number.
  bool integral_batch = true;
};

ConvergenceReport convergence_report(const BoundParams& params);
double convergence_bound(const BoundParams& params);

enum class CompressionScheme { kSgd, kQsgd, kTernGrad, kSignSgdMv };

CompressionScheme parse_compression_scheme(std::string_view name);
std::string_view to_string(CompressionScheme scheme);

// Uplink bits per iteration for M devices and a D-dimensional model.
std::uint64_t comm_cost(CompressionScheme scheme, std::uint64_t devices, std::uint64_t dimension);

}  // namespace ncota
