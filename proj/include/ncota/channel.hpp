#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ncota/otaphy.hpp"

namespace ncota {

// kPerBin draws an independent coefficient for every (device, symbol,
// subcarrier); kPerFrame holds one coefficient per device across the frame.
enum class FadingMode { kPerBin, kPerFrame };

FadingMode parse_fading_mode(std::string_view name);
std::string_view to_string(FadingMode mode);

struct ChannelConfig {
  // Total complex noise variance sigma_n^2 (half per real dimension).
  double noise_variance = 0.0;
  // Timing offsets are uniform on [0, sync_error_max], in units of the
  // useful symbol duration.
  double sync_error_max = 0.0;
  // FFT length used to turn a timing offset into a per-subcarrier phase ramp.
  std::size_t fft_size = 64;
  FadingMode fading = FadingMode::kPerBin;

  void validate() const;
};

// Rayleigh coefficients H[m, s, l] and per-device timing offsets.
struct ChannelRealization {
  std::size_t devices = 0;
  std::size_t symbols = 0;
  std::size_t subcarriers = 0;
  std::vector<cplx> coefficients;
  std::vector<double> timing_offsets;

  cplx& at(std::size_t m, std::size_t s, std::size_t l) {
    return coefficients[(m * symbols + s) * subcarriers + l];
  }
  const cplx& at(std::size_t m, std::size_t s, std::size_t l) const {
    return coefficients[(m * symbols + s) * subcarriers + l];
  }

  // H = 1 everywhere, zero timing offsets.
  static ChannelRealization unit(std::size_t devices, std::size_t symbols, std::size_t subcarriers);
};

// H = (x + jy)/sqrt(2) with x, y standard normal, so E|H|^2 = 1.
ChannelRealization sample_channel(std::size_t devices, std::size_t symbols,
                                  std::size_t subcarriers, const ChannelConfig& config,
                                  std::uint64_t seed);

// H'[m, s, l] = H[m, s, l] * exp(-j 2 pi l delta_m / N_fft).
ChannelRealization apply_sync_error(ChannelRealization realization, const ChannelConfig& config);

// y[s, l] = sum_m sqrt(P_m) H[m, s, l] t_m[s, l] + n[s, l], with n ~ CN(0, sigma_n^2).
OfdmFrame superpose(std::span<const OfdmFrame> frames, std::span<const double> powers,
                    const ChannelRealization& realization, const ChannelConfig& config,
                    std::uint64_t seed);

}  // namespace ncota
