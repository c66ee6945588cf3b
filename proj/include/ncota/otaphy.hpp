#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncota/sign.hpp"

namespace ncota {

using cplx = std::complex<double>;

// Per-vote symbol energy normalization.
inline constexpr double kSymbolEnergy = 2.0;

// One time-frequency resource element: OFDM symbol index and subcarrier index.
struct Bin {
  std::size_t symbol = 0;
  std::size_t subcarrier = 0;

  friend bool operator==(const Bin&, const Bin&) = default;
};

// The two bins that carry coordinate i: energy on `plus` votes +1, on `minus` votes -1.
struct BinPair {
  Bin plus;
  Bin minus;
};

struct SubcarrierMap {
  std::vector<BinPair> pairs;
  std::size_t subcarriers = 0;  // A
  std::size_t symbols = 0;      // S

  std::size_t size() const { return pairs.size(); }
};

// FSK layout: coordinate j uses subcarriers (2k, 2k+1) of symbol s, with
// s = j / (A/2) and k = j % (A/2). Throws CapacityError when 2q > A*S.
SubcarrierMap build_subcarrier_map(std::size_t q, std::size_t subcarriers, std::size_t symbols);

// Coordinates per frame are capped by A*S/2; larger models are spread over
// consecutive frames. Frame f covers [offsets[f], offsets[f+1]).
struct FramePlan {
  std::vector<std::size_t> offsets;
  std::vector<SubcarrierMap> maps;

  std::size_t frame_count() const { return maps.size(); }
};

FramePlan plan_frames(std::size_t q, std::size_t subcarriers, std::size_t symbols);

// Frequency-domain resource grid, S rows by A columns.
class OfdmFrame {
 public:
  OfdmFrame() = default;
  OfdmFrame(std::size_t symbols, std::size_t subcarriers)
      : symbols_(symbols), subcarriers_(subcarriers), grid_(symbols * subcarriers) {}

  std::size_t symbols() const { return symbols_; }
  std::size_t subcarriers() const { return subcarriers_; }

  cplx& at(std::size_t s, std::size_t l) { return grid_[s * subcarriers_ + l]; }
  const cplx& at(std::size_t s, std::size_t l) const { return grid_[s * subcarriers_ + l]; }
  cplx& at(Bin b) { return at(b.symbol, b.subcarrier); }
  const cplx& at(Bin b) const { return at(b.symbol, b.subcarrier); }

  std::span<cplx> data() { return grid_; }
  std::span<const cplx> data() const { return grid_; }

 private:
  std::size_t symbols_ = 0;
  std::size_t subcarriers_ = 0;
  std::vector<cplx> grid_;
};

// kPinned fixes every randomization symbol to 1. It exists for the
// ideal-channel equivalence tests only.
enum class Randomization { kUnitCircle, kPinned };

// Places sqrt(E0) * s_i on the plus bin when sign = +1 and on the minus bin
// when sign = -1; the other bin stays zero. s_i = exp(j*phi), phi uniform on
// [0, 2pi), drawn sequentially from `seed`. Transmit power is applied later,
// in superpose().
OfdmFrame encode_signs(const SignReport& report, const SubcarrierMap& map, std::uint64_t seed,
                       Randomization randomization = Randomization::kUnitCircle);

// Per-device transmit power multipliers.
struct PowerState {
  std::vector<double> powers;
  std::uint64_t round = 0;

  static PowerState initial(std::size_t devices) { return {std::vector<double>(devices, 1.0), 0}; }
};

// Signed agreement statistic (agree - disagree) / q of one report against the vote.
double signed_agreement(const SignReport& report, const SignReport& vote);

// P_m <- P_m + |(agree_m - disagree_m) / q|, optionally clamped to `power_cap`.
PowerState update_power(const PowerState& state, std::span<const SignReport> reports,
                        const SignReport& vote, std::optional<double> power_cap = std::nullopt);

double mean_power(const PowerState& state);

}  // namespace ncota
