#pragma once

#include <span>
#include <vector>

#include "ncota/otaphy.hpp"
#include "ncota/sign.hpp"

namespace ncota {

struct BinEnergies {
  std::vector<double> plus;
  std::vector<double> minus;
};

// e+_i = |y[plus bin]|^2, e-_i = |y[minus bin]|^2.
BinEnergies measure_energies(const OfdmFrame& received, const SubcarrierMap& map);

// v_i = sign(e+_i - e-_i), ties to +1.
SignReport detect_votes(std::span<const double> e_plus, std::span<const double> e_minus);

struct DetectionResult {
  std::vector<double> e_plus;
  std::vector<double> e_minus;
  std::vector<double> delta;
  SignReport votes;
};

// measure_energies followed by detect_votes, keeping the intermediate values.
DetectionResult detect(const OfdmFrame& received, const SubcarrierMap& map);

// Coordinate-wise sign of the vote sum, ties to +1. The error-free reference.
SignReport ideal_majority_vote(std::span<const SignReport> reports);

}  // namespace ncota
