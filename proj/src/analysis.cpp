#include "ncota/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ncota/errors.hpp"
#include "ncota/random.hpp"
#include "ncota/uplink.hpp"

namespace ncota {

double mean_energy(long votes, double symbol_energy, double mean_power, double noise_variance) {
  if (votes < 0 || symbol_energy < 0.0 || mean_power < 0.0 || noise_variance < 0.0) {
    throw ArgumentError("mean_energy: arguments must be nonnegative");
  }
  return symbol_energy * static_cast<double>(votes) * mean_power + noise_variance;
}

double failure_prob_bound(double snr) {
  if (!(snr > 0.0)) throw ArgumentError("failure_prob_bound: R must be positive");
  const double sqrt3 = std::numbers::sqrt3;
  if (snr > 2.0 / sqrt3) return (2.0 / 9.0) / (snr * snr);
  return 0.5 - snr / (2.0 * sqrt3);
}

double error_prob_bound(long devices, double beta, double snr) {
  if (devices < 1 || !(beta > 0.0) || !(snr > 0.0)) {
    throw ArgumentError("error_prob_bound: K, beta and R must be positive");
  }
  const double K = static_cast<double>(devices);
  const double denom = K + 2.0 / beta;
  return ((K / 2.0) * std::numbers::sqrt2 / (3.0 * snr) + 1.0 / beta) / denom;
}

double error_prob_intermediate_bound(long devices, double beta, double flip_probability) {
  if (devices < 1 || !(beta > 0.0)) {
    throw ArgumentError("error_prob_intermediate_bound: K and beta must be positive");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ArgumentError("error_prob_intermediate_bound: q must be a probability");
  }
  const double K = static_cast<double>(devices);
  const double q = flip_probability;
  return (K * q * (1.0 - q) + 1.0 / beta) / (K + 2.0 / beta);
}

McEstimate make_proportion(std::size_t hits, std::size_t trials) {
  if (trials == 0) throw ArgumentError("make_proportion: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), trials, hits};
}

McEstimate mc_error_prob(const VoteErrorConfig& config) {
  if (config.trials < 1000) throw ArgumentError("mc_error_prob: need at least 1000 trials");
  if (!(config.flip_probability > 0.0 && config.flip_probability < 0.5)) {
    throw ArgumentError("mc_error_prob: flip probability must lie in (0, 1/2)");
  }
  if (config.devices < 1 || !(config.beta > 0.0) || !(config.mean_power > 0.0)) {
    throw ArgumentError("mc_error_prob: devices, beta and mean power must be positive");
  }

  const auto devices = static_cast<std::size_t>(config.devices);
  std::vector<SignReport> reports(devices);
  Rng votes(derive_seed(config.seed, Stream::kMonteCarlo));
  for (auto& r : reports) r.signs.resize(config.trials);
  // Trial-major draw order keeps each trial's K votes adjacent in the stream.
  for (std::size_t t = 0; t < config.trials; ++t) {
    for (auto& r : reports) {
      r.signs[t] = votes.uniform() < config.flip_probability ? std::int8_t{-1} : std::int8_t{1};
    }
  }

  UplinkOptions options;
  options.subcarriers = config.subcarriers;
  options.symbols = config.symbols;
  options.channel.noise_variance =
      std::isinf(config.beta) ? 0.0 : kSymbolEnergy * config.mean_power / config.beta;
  options.channel.sync_error_max = config.sync_error_max;
  options.channel.fft_size = config.fft_size;
  options.channel.fading = config.fading;

  const std::vector<double> powers(devices, config.mean_power);
  const UplinkResult result = transmit_votes(reports, powers, options, config.seed);

  std::size_t errors = 0;
  for (std::int8_t v : result.votes.signs) errors += v != 1 ? 1 : 0;
  return make_proportion(errors, config.trials);
}

McEstimate mc_error_prob(long devices, double flip_probability, double beta, std::size_t trials,
                         std::uint64_t seed) {
  VoteErrorConfig config;
  config.devices = devices;
  config.flip_probability = flip_probability;
  config.beta = beta;
  config.trials = trials;
  config.seed = seed;
  return mc_error_prob(config);
}

double GaussianGradient::snr() const {
  return std::sqrt(static_cast<double>(batch_size)) * std::abs(mean) / sigma;
}

McEstimate mc_sign_flip(const GaussianGradient& gradient, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw ArgumentError("mc_sign_flip: zero draws");
  if (gradient.mean == 0.0 || !(gradient.sigma > 0.0) || gradient.batch_size == 0) {
    throw ArgumentError("mc_sign_flip: need nonzero mean, positive sigma and batch size");
  }
  Rng rng(derive_seed(seed, Stream::kMonteCarlo));
  const double spread = gradient.sigma / std::sqrt(static_cast<double>(gradient.batch_size));
  const std::int8_t truth = sign_of(gradient.mean);
  std::size_t flips = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    flips += sign_of(gradient.mean + spread * rng.normal()) != truth ? 1 : 0;
  }
  return make_proportion(flips, draws);
}

McEstimate mc_sign_flip(double snr, std::size_t draws, std::uint64_t seed) {
  if (!(snr > 0.0)) throw ArgumentError("mc_sign_flip: R must be positive");
  return mc_sign_flip(GaussianGradient{snr, 1.0, 1}, draws, seed);
}

std::vector<double> sample_plus_energies(const EnergyConfig& config) {
  if (config.devices < 1 || config.votes < 0 || config.votes > config.devices) {
    throw ArgumentError("sample_plus_energies: need 0 <= votes <= devices and devices >= 1");
  }
  if (config.samples == 0) throw ArgumentError("sample_plus_energies: zero samples");
  const auto devices = static_cast<std::size_t>(config.devices);
  std::vector<SignReport> reports(devices);
  for (std::size_t m = 0; m < devices; ++m) {
    const std::int8_t s = static_cast<long>(m) < config.votes ? 1 : -1;
    reports[m].signs.assign(config.samples, s);
  }
  UplinkOptions options;
  options.subcarriers = 64;
  options.symbols = 16;
  options.channel.noise_variance = config.noise_variance;
  const std::vector<double> powers(devices, config.mean_power);
  return transmit_votes(reports, powers, options, config.seed).e_plus;
}

MeanEstimate mc_mean_energy(const EnergyConfig& config) {
  const auto energies = sample_plus_energies(config);
  const double n = static_cast<double>(energies.size());
  double sum = 0.0;
  for (double e : energies) sum += e;
  const double mean = sum / n;
  double ss = 0.0;
  for (double e : energies) ss += (e - mean) * (e - mean);
  const double sd = energies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

void BoundParams::validate() const {
  if (devices < 1) throw ArgumentError("bound params: K must be >= 1");
  if (!(beta > 0.0)) throw ArgumentError("bound params: beta must be positive");
  if (gamma < 1) throw ArgumentError("bound params: gamma must be a positive integer");
  if (!(rounds > 0.0)) throw ArgumentError("bound params: N must be positive");
  if (!(l1_smoothness > 0.0) || !(l1_sigma > 0.0)) {
    throw ArgumentError("bound params: ||L||_1 and ||sigma||_1 must be positive");
  }
  if (objective_gap < 0.0) throw ArgumentError("bound params: F(w0) - F* must be nonnegative");
  if (batch_size && !(*batch_size > 0.0)) throw ArgumentError("bound params: d_b must be positive");
  if (mean_power && noise_variance) {
    if (!(*mean_power > 0.0) || !(*noise_variance > 0.0) || !(symbol_energy > 0.0)) {
      throw ArgumentError("bound params: E0, theta and sigma_n^2 must be positive");
    }
    const double implied = symbol_energy * *mean_power / *noise_variance;
    if (std::abs(implied - beta) > 1e-12 * std::abs(implied)) {
      throw ArgumentError("bound params: beta " + std::to_string(beta) +
                          " disagrees with E0*theta/sigma_n^2 = " + std::to_string(implied));
    }
  }
}

double convergence_tau(double beta, long devices, long gamma) {
  if (!(beta > 0.0) || devices < 1 || gamma < 1) {
    throw ArgumentError("convergence_tau: beta, K and gamma must be positive");
  }
  return (1.0 + 2.0 / (beta * static_cast<double>(devices))) /
         std::sqrt(static_cast<double>(gamma));
}

ConvergenceReport convergence_report(const BoundParams& params) {
  params.validate();
  ConvergenceReport out;
  out.tau = convergence_tau(params.beta, params.devices, params.gamma);
  const double g = static_cast<double>(params.gamma);
  const double implied_batch = params.rounds / g;
  out.integral_batch = implied_batch == std::floor(implied_batch) &&
                       (!params.batch_size || *params.batch_size == implied_batch);

  double noise_term = (2.0 * std::numbers::sqrt2 / 6.0) * std::sqrt(g) * params.l1_sigma;
  if (params.strict_derivation) {
    noise_term /= std::sqrt(params.batch_size.value_or(implied_batch));
  }
  const double drift_term =
      out.tau * std::sqrt(params.l1_smoothness) * (params.objective_gap + g / 2.0);
  out.bound = (drift_term + noise_term) / std::sqrt(params.rounds);
  return out;
}

double convergence_bound(const BoundParams& params) { return convergence_report(params).bound; }

CompressionScheme parse_compression_scheme(std::string_view name) {
  if (name == "sgd") return CompressionScheme::kSgd;
  if (name == "qsgd") return CompressionScheme::kQsgd;
  if (name == "terngrad") return CompressionScheme::kTernGrad;
  if (name == "signsgd_mv") return CompressionScheme::kSignSgdMv;
  throw ArgumentError("unknown compression scheme '" + std::string(name) + "'");
}

std::string_view to_string(CompressionScheme scheme) {
  switch (scheme) {
    case CompressionScheme::kSgd: return "sgd";
    case CompressionScheme::kQsgd: return "qsgd";
    case CompressionScheme::kTernGrad: return "terngrad";
    case CompressionScheme::kSignSgdMv: return "signsgd_mv";
  }
  return "unknown";
}

std::uint64_t comm_cost(CompressionScheme scheme, std::uint64_t devices, std::uint64_t dimension) {
  if (devices < 1 || dimension < 1) throw ArgumentError("comm_cost: M and D must be >= 1");
  const std::uint64_t md = devices * dimension;
  switch (scheme) {
    case CompressionScheme::kSgd: return 64 * md;
    case CompressionScheme::kQsgd:
    case CompressionScheme::kTernGrad: {
      const double per = 2.0 + std::log2(2.0 * static_cast<double>(devices) + 1.0);
      return static_cast<std::uint64_t>(std::ceil(per * static_cast<double>(md)));
    }
    case CompressionScheme::kSignSgdMv: return 2 * md;
  }
  throw ArgumentError("comm_cost: unknown scheme");
}

}  // namespace ncota
