#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ncota/channel.hpp"
#include "ncota/otaphy.hpp"
#include "ncota/sign.hpp"

namespace ncota {

// How one round of sign votes crosses the air interface.
struct UplinkOptions {
  ChannelConfig channel;
  std::size_t subcarriers = 64;
  std::size_t symbols = 1;
  Randomization randomization = Randomization::kUnitCircle;
  // Replace the Rayleigh draw with H = 1 (equivalence tests).
  bool unit_channel = false;
};

struct UplinkResult {
  SignReport votes;
  std::vector<double> e_plus;
  std::vector<double> e_minus;
};

// Encodes every device's report, passes the frames through an independent
// channel realization per frame, superposes with noise, and runs the energy
// detector. All randomness derives from `seed`.
UplinkResult transmit_votes(std::span<const SignReport> reports, std::span<const double> powers,
                            const UplinkOptions& options, std::uint64_t seed);

}  // namespace ncota
