#include "ncota/otaphy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ncota/errors.hpp"
#include "ncota/random.hpp"

namespace ncota {

SubcarrierMap build_subcarrier_map(std::size_t q, std::size_t subcarriers, std::size_t symbols) {
  if (subcarriers == 0 || symbols == 0) {
    throw ArgumentError("build_subcarrier_map: frame dimensions must be positive");
  }
  if (subcarriers % 2 != 0) {
    throw ArgumentError("build_subcarrier_map: subcarrier count must be even, got " +
                        std::to_string(subcarriers));
  }
  const std::size_t available = subcarriers * symbols;
  if (2 * q > available) {
    throw CapacityError("build_subcarrier_map: " + std::to_string(2 * q) + " bins required, " +
                        std::to_string(available) + " available");
  }
  SubcarrierMap map;
  map.subcarriers = subcarriers;
  map.symbols = symbols;
  map.pairs.reserve(q);
  const std::size_t per_symbol = subcarriers / 2;
  for (std::size_t j = 0; j < q; ++j) {
    const std::size_t s = j / per_symbol;
    const std::size_t k = j % per_symbol;
    map.pairs.push_back({{s, 2 * k}, {s, 2 * k + 1}});
  }
  return map;
}

FramePlan plan_frames(std::size_t q, std::size_t subcarriers, std::size_t symbols) {
  if (q == 0) throw ArgumentError("plan_frames: empty model");
  if (subcarriers < 2 || subcarriers % 2 != 0 || symbols == 0) {
    throw ArgumentError("plan_frames: need an even subcarrier count and at least one symbol");
  }
  const std::size_t capacity = subcarriers * symbols / 2;
  FramePlan plan;
  plan.offsets.push_back(0);
  for (std::size_t start = 0; start < q; start += capacity) {
    const std::size_t count = std::min(capacity, q - start);
    plan.maps.push_back(build_subcarrier_map(count, subcarriers, symbols));
    plan.offsets.push_back(start + count);
  }
  return plan;
}

OfdmFrame encode_signs(const SignReport& report, const SubcarrierMap& map, std::uint64_t seed,
                       Randomization randomization) {
  if (report.size() != map.size()) {
    throw DimensionError("encode_signs: report has " + std::to_string(report.size()) +
                         " coordinates, map has " + std::to_string(map.size()));
  }
  OfdmFrame frame(map.symbols, map.subcarriers);
  const double amplitude = std::sqrt(kSymbolEnergy);
  Rng rng(seed);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const cplx s = randomization == Randomization::kPinned ? cplx{1.0, 0.0}
                                                           : std::polar(1.0, rng.phase());
    const BinPair& pair = map.pairs[i];
    frame.at(report[i] > 0 ? pair.plus : pair.minus) = amplitude * s;
  }
  return frame;
}

double signed_agreement(const SignReport& report, const SignReport& vote) {
  if (report.size() != vote.size() || vote.size() == 0) {
    throw DimensionError("signed_agreement: report and vote must have the same nonzero length");
  }
  long balance = 0;
  for (std::size_t i = 0; i < vote.size(); ++i) balance += report[i] == vote[i] ? 1 : -1;
  return static_cast<double>(balance) / static_cast<double>(vote.size());
}

PowerState update_power(const PowerState& state, std::span<const SignReport> reports,
                        const SignReport& vote, std::optional<double> power_cap) {
  if (reports.size() != state.powers.size()) {
    throw DimensionError("update_power: " + std::to_string(reports.size()) + " reports for " +
                         std::to_string(state.powers.size()) + " devices");
  }
  if (power_cap && *power_cap < 1.0) throw ArgumentError("update_power: power cap below 1");
  PowerState next{state.powers, state.round + 1};
  for (std::size_t m = 0; m < reports.size(); ++m) {
    next.powers[m] += std::abs(signed_agreement(reports[m], vote));
    if (power_cap) next.powers[m] = std::min(next.powers[m], *power_cap);
  }
  return next;
}

double mean_power(const PowerState& state) {
  if (state.powers.empty()) throw ArgumentError("mean_power: no devices");
  return std::accumulate(state.powers.begin(), state.powers.end(), 0.0) /
         static_cast<double>(state.powers.size());
}

}  // namespace ncota
