#include "ncota/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ncota/errors.hpp"
#include "ncota/random.hpp"

namespace ncota {

FadingMode parse_fading_mode(std::string_view name) {
  if (name == "per_bin") return FadingMode::kPerBin;
  if (name == "per_frame") return FadingMode::kPerFrame;
  throw ArgumentError("unknown fading mode '" + std::string(name) + "'");
}

std::string_view to_string(FadingMode mode) {
  return mode == FadingMode::kPerBin ? "per_bin" : "per_frame";
}

void ChannelConfig::validate() const {
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ArgumentError("channel noise variance must be finite and >= 0");
  }
  if (!(sync_error_max >= 0.0 && sync_error_max < 1.0)) {
    throw ArgumentError("channel sync error bound must lie in [0, 1)");
  }
  if (fft_size == 0) throw ArgumentError("channel FFT size must be positive");
}

ChannelRealization ChannelRealization::unit(std::size_t devices, std::size_t symbols,
                                            std::size_t subcarriers) {
  ChannelRealization out{devices, symbols, subcarriers, {}, {}};
  out.coefficients.assign(devices * symbols * subcarriers, cplx{1.0, 0.0});
  out.timing_offsets.assign(devices, 0.0);
  return out;
}

ChannelRealization sample_channel(std::size_t devices, std::size_t symbols,
                                  std::size_t subcarriers, const ChannelConfig& config,
                                  std::uint64_t seed) {
  if (devices == 0 || symbols == 0 || subcarriers == 0) {
    throw ArgumentError("sample_channel: dimensions must be positive");
  }
  config.validate();
  ChannelRealization out{devices, symbols, subcarriers, {}, {}};
  out.coefficients.resize(devices * symbols * subcarriers);
  out.timing_offsets.resize(devices);

  Rng rng(seed);
  const double scale = 1.0 / std::numbers::sqrt2;
  const std::size_t per_device = symbols * subcarriers;
  for (std::size_t m = 0; m < devices; ++m) {
    cplx* h = out.coefficients.data() + m * per_device;
    if (config.fading == FadingMode::kPerBin) {
      for (std::size_t k = 0; k < per_device; ++k) {
        const double re = rng.normal();
        h[k] = scale * cplx{re, rng.normal()};
      }
    } else {
      const double re = rng.normal();
      const cplx value = scale * cplx{re, rng.normal()};
      for (std::size_t k = 0; k < per_device; ++k) h[k] = value;
    }
  }
  for (std::size_t m = 0; m < devices; ++m) {
    out.timing_offsets[m] = config.sync_error_max * rng.uniform();
  }
  return out;
}

ChannelRealization apply_sync_error(ChannelRealization realization, const ChannelConfig& config) {
  config.validate();
  const double n_fft = static_cast<double>(config.fft_size);
  for (std::size_t m = 0; m < realization.devices; ++m) {
    const double delta = realization.timing_offsets[m];
    if (delta == 0.0) continue;
    for (std::size_t l = 1; l < realization.subcarriers; ++l) {
      const cplx ramp = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(l) * delta / n_fft);
      for (std::size_t s = 0; s < realization.symbols; ++s) realization.at(m, s, l) *= ramp;
    }
  }
  return realization;
}

OfdmFrame superpose(std::span<const OfdmFrame> frames, std::span<const double> powers,
                    const ChannelRealization& realization, const ChannelConfig& config,
                    std::uint64_t seed) {
  config.validate();
  if (frames.size() != realization.devices || powers.size() != realization.devices) {
    throw DimensionError("superpose: " + std::to_string(frames.size()) + " frames and " +
                         std::to_string(powers.size()) + " powers for a " +
                         std::to_string(realization.devices) + "-device channel");
  }
  const std::size_t S = realization.symbols;
  const std::size_t A = realization.subcarriers;
  for (const auto& f : frames) {
    if (f.symbols() != S || f.subcarriers() != A) {
      throw DimensionError("superpose: frame grid does not match channel realization");
    }
  }

  OfdmFrame out(S, A);
  auto y = out.data();
  for (std::size_t m = 0; m < frames.size(); ++m) {
    if (!(powers[m] >= 0.0)) throw ArgumentError("superpose: negative transmit power");
    const double amp = std::sqrt(powers[m]);
    const auto t = frames[m].data();
    const cplx* h = realization.coefficients.data() + m * S * A;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (t[k] != cplx{}) y[k] += amp * h[k] * t[k];
    }
  }

  if (config.noise_variance > 0.0) {
    Rng rng(seed);
    const double sd = std::sqrt(config.noise_variance / 2.0);
    for (auto& v : y) {
      const double re = rng.normal();
      v += sd * cplx{re, rng.normal()};
    }
  }
  return out;
}

}  // namespace ncota
