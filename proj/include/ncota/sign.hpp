#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ncota {

// sign(x) with the convention sign(0) = +1, so every vote is exactly +/-1.
constexpr std::int8_t sign_of(double x) { return x < 0.0 ? std::int8_t{-1} : std::int8_t{1}; }

// One +/-1 entry per model coordinate. Used both for a device's quantized
// gradient and for the server's vote.
struct SignReport {
  std::vector<std::int8_t> signs;

  std::size_t size() const { return signs.size(); }
  std::int8_t operator[](std::size_t i) const { return signs[i]; }

  SignReport negated() const {
    SignReport out{signs};
    for (auto& s : out.signs) s = static_cast<std::int8_t>(-s);
    return out;
  }

  friend bool operator==(const SignReport&, const SignReport&) = default;
};

// Fraction of coordinates where the two reports agree.
double agreement_fraction(const SignReport& a, const SignReport& b);

}  // namespace ncota
