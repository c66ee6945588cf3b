#include "ncota/detector.hpp"

#include <complex>
#include <string>

#include "ncota/errors.hpp"

namespace ncota {
namespace {

void check_bin(const OfdmFrame& frame, Bin b) {
  if (b.symbol >= frame.symbols() || b.subcarrier >= frame.subcarriers()) {
    throw DimensionError("measure_energies: bin (" + std::to_string(b.symbol) + ", " +
                         std::to_string(b.subcarrier) + ") outside " +
                         std::to_string(frame.symbols()) + "x" +
                         std::to_string(frame.subcarriers()) + " frame");
  }
}

}  // namespace

BinEnergies measure_energies(const OfdmFrame& received, const SubcarrierMap& map) {
  BinEnergies out;
  out.plus.reserve(map.size());
  out.minus.reserve(map.size());
  for (const BinPair& pair : map.pairs) {
    check_bin(received, pair.plus);
    check_bin(received, pair.minus);
    out.plus.push_back(std::norm(received.at(pair.plus)));
    out.minus.push_back(std::norm(received.at(pair.minus)));
  }
  return out;
}

SignReport detect_votes(std::span<const double> e_plus, std::span<const double> e_minus) {
  if (e_plus.size() != e_minus.size()) throw DimensionError("detect_votes: length mismatch");
  SignReport out;
  out.signs.reserve(e_plus.size());
  for (std::size_t i = 0; i < e_plus.size(); ++i) out.signs.push_back(sign_of(e_plus[i] - e_minus[i]));
  return out;
}

DetectionResult detect(const OfdmFrame& received, const SubcarrierMap& map) {
  auto energies = measure_energies(received, map);
  DetectionResult out;
  out.delta.resize(energies.plus.size());
  for (std::size_t i = 0; i < out.delta.size(); ++i) {
    out.delta[i] = energies.plus[i] - energies.minus[i];
  }
  out.votes = detect_votes(energies.plus, energies.minus);
  out.e_plus = std::move(energies.plus);
  out.e_minus = std::move(energies.minus);
  return out;
}

SignReport ideal_majority_vote(std::span<const SignReport> reports) {
  if (reports.empty()) throw ArgumentError("ideal_majority_vote: no reports");
  const std::size_t q = reports.front().size();
  std::vector<long> tally(q, 0);
  for (const auto& r : reports) {
    if (r.size() != q) throw DimensionError("ideal_majority_vote: report lengths differ");
    for (std::size_t i = 0; i < q; ++i) tally[i] += r[i];
  }
  SignReport out;
  out.signs.reserve(q);
  for (long t : tally) out.signs.push_back(t < 0 ? std::int8_t{-1} : std::int8_t{1});
  return out;
}

}  // namespace ncota
