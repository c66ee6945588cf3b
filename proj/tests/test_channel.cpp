#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ncota/channel.hpp"
#include "ncota/errors.hpp"
#include "ncota/random.hpp"

using namespace ncota;

TEST_CASE("Rayleigh coefficients have unit mean power and zero mean") {
  ChannelConfig cfg;
  const auto h = sample_channel(1, 1000, 100, cfg, 42);
  REQUIRE(h.coefficients.size() == 100000);
  double power = 0.0;
  cplx mean{0.0, 0.0};
  for (const auto& c : h.coefficients) {
    power += std::norm(c);
    mean += c;
  }
  CHECK(power / 1e5 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(mean / 1e5) < 0.01);
}

TEST_CASE("sample_channel timing offsets") {
  ChannelConfig cfg;
  SUBCASE("zero sync error gives zero offsets") {
    const auto h = sample_channel(31, 1, 4, cfg, 1);
    for (double d : h.timing_offsets) CHECK(d == 0.0);
  }
  SUBCASE("offsets lie in [0, max]") {
    cfg.sync_error_max = 0.25;
    const auto h = sample_channel(500, 1, 2, cfg, 2);
    double hi = 0.0;
    for (double d : h.timing_offsets) {
      CHECK(d >= 0.0);
      CHECK(d <= 0.25);
      hi = std::max(hi, d);
    }
    CHECK(hi > 0.2);
  }
  SUBCASE("per-frame fading repeats one coefficient") {
    cfg.fading = FadingMode::kPerFrame;
    const auto h = sample_channel(3, 4, 8, cfg, 3);
    for (std::size_t m = 0; m < 3; ++m) {
      for (std::size_t s = 0; s < 4; ++s) {
        for (std::size_t l = 0; l < 8; ++l) CHECK(h.at(m, s, l) == h.at(m, 0, 0));
      }
    }
    CHECK(h.at(0, 0, 0) != h.at(1, 0, 0));
  }
  SUBCASE("deterministic") {
    const auto a = sample_channel(4, 2, 8, cfg, 9);
    const auto b = sample_channel(4, 2, 8, cfg, 9);
    CHECK(a.coefficients == b.coefficients);
  }
}

TEST_CASE("ChannelConfig validation") {
  ChannelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.noise_variance = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.noise_variance = 0.0;
  cfg.sync_error_max = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.sync_error_max = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.sync_error_max = 0.0;
  cfg.fft_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("apply_sync_error") {
  ChannelConfig cfg;
  cfg.sync_error_max = 0.25;
  cfg.fft_size = 64;
  const auto h = sample_channel(5, 2, 64, cfg, 17);

  const auto shifted = apply_sync_error(h, cfg);
  for (std::size_t m = 0; m < 5; ++m) {
    const double delta = h.timing_offsets[m];
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(shifted.at(m, s, 0) == h.at(m, s, 0));
      for (std::size_t l = 0; l < 64; ++l) {
        CHECK(std::abs(shifted.at(m, s, l)) == doctest::Approx(std::abs(h.at(m, s, l))).epsilon(1e-12));
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(l) * delta / 64.0;
        const cplx expect = h.at(m, s, l) * cplx{std::cos(angle), std::sin(angle)};
        CHECK(std::abs(shifted.at(m, s, l) - expect) < 1e-12);
      }
    }
  }

  ChannelRealization zero = h;
  for (double& d : zero.timing_offsets) d = 0.0;
  CHECK(apply_sync_error(zero, cfg).coefficients == zero.coefficients);
}

TEST_CASE("superpose") {
  ChannelConfig cfg;
  OfdmFrame one(1, 2);
  one.at(0, 0) = {std::sqrt(2.0), 0.0};
  const std::vector<OfdmFrame> single = {one};
  const std::vector<double> unit = {1.0};

  SUBCASE("identity channel, no noise") {
    const auto y = superpose(single, unit, ChannelRealization::unit(1, 1, 2), cfg, 1);
    CHECK(y.at(0, 0) == one.at(0, 0));
    CHECK(y.at(0, 1) == cplx{0.0, 0.0});
  }
  SUBCASE("power scales amplitude by sqrt(P)") {
    const std::vector<double> four = {4.0};
    const auto y = superpose(single, four, ChannelRealization::unit(1, 1, 2), cfg, 1);
    CHECK(y.at(0, 0).real() == doctest::Approx(2.0 * std::sqrt(2.0)));
  }
  SUBCASE("destructive interference") {
    OfdmFrame neg(1, 2);
    neg.at(0, 0) = -one.at(0, 0);
    const std::vector<OfdmFrame> pair = {one, neg};
    const std::vector<double> ones = {1.0, 1.0};
    const auto y = superpose(pair, ones, ChannelRealization::unit(2, 1, 2), cfg, 1);
    CHECK(std::norm(y.at(0, 0)) == 0.0);
  }
  SUBCASE("noise only") {
    cfg.noise_variance = 1.0;
    const std::vector<OfdmFrame> silent = {OfdmFrame(100, 1000)};
    const auto y = superpose(silent, unit, ChannelRealization::unit(1, 100, 1000), cfg, 5);
    double power = 0.0;
    double re2 = 0.0;
    for (const auto& z : y.data()) {
      power += std::norm(z);
      re2 += z.real() * z.real();
    }
    CHECK(power / 1e5 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(re2 / 1e5 == doctest::Approx(0.5).epsilon(0.02));
  }
  SUBCASE("linear in the transmitted frames") {
    Rng rng(8);
    ChannelConfig quiet;
    const auto h = sample_channel(2, 3, 4, quiet, 6);
    OfdmFrame a(3, 4);
    OfdmFrame b(3, 4);
    for (auto& z : a.data()) z = {rng.normal(), rng.normal()};
    for (auto& z : b.data()) z = {rng.normal(), rng.normal()};
    OfdmFrame zero(3, 4);
    const std::vector<double> ones = {1.0, 1.0};
    const std::vector<OfdmFrame> ab = {a, b};
    const std::vector<OfdmFrame> a0 = {a, zero};
    const std::vector<OfdmFrame> b0 = {zero, b};
    const auto both = superpose(ab, ones, h, quiet, 1);
    const auto only_a = superpose(a0, ones, h, quiet, 1);
    const auto only_b = superpose(b0, ones, h, quiet, 1);
    for (std::size_t k = 0; k < both.data().size(); ++k) {
      CHECK(std::abs(both.data()[k] - only_a.data()[k] - only_b.data()[k]) < 1e-12);
    }
  }
  SUBCASE("dimension checks") {
    const std::vector<double> two = {1.0, 1.0};
    CHECK_THROWS_AS(superpose(single, two, ChannelRealization::unit(1, 1, 2), cfg, 1), DimensionError);
    CHECK_THROWS_AS(superpose(single, unit, ChannelRealization::unit(1, 1, 4), cfg, 1), DimensionError);
    const std::vector<double> negative = {-1.0};
    CHECK_THROWS_AS(superpose(single, negative, ChannelRealization::unit(1, 1, 2), cfg, 1), ArgumentError);
  }
}

TEST_CASE("FadingMode names") {
  CHECK(parse_fading_mode("per_bin") == FadingMode::kPerBin);
  CHECK(parse_fading_mode("per_frame") == FadingMode::kPerFrame);
  CHECK(to_string(FadingMode::kPerFrame) == "per_frame");
  CHECK_THROWS_AS(parse_fading_mode("block"), ArgumentError);
}
