#include "ncota/uplink.hpp"

#include <string>

#include "ncota/detector.hpp"
#include "ncota/errors.hpp"
#include "ncota/random.hpp"

namespace ncota {

UplinkResult transmit_votes(std::span<const SignReport> reports, std::span<const double> powers,
                            const UplinkOptions& options, std::uint64_t seed) {
  if (reports.empty()) throw ArgumentError("transmit_votes: no devices");
  if (powers.size() != reports.size()) {
    throw DimensionError("transmit_votes: " + std::to_string(powers.size()) + " powers for " +
                         std::to_string(reports.size()) + " devices");
  }
  const std::size_t q = reports.front().size();
  for (const auto& r : reports) {
    if (r.size() != q) throw DimensionError("transmit_votes: report lengths differ");
  }
  options.channel.validate();

  const FramePlan plan = plan_frames(q, options.subcarriers, options.symbols);
  const std::size_t devices = reports.size();

  UplinkResult out;
  out.votes.signs.reserve(q);
  out.e_plus.reserve(q);
  out.e_minus.reserve(q);

  std::vector<OfdmFrame> frames(devices);
  SignReport slice;
  for (std::size_t f = 0; f < plan.frame_count(); ++f) {
    const std::size_t begin = plan.offsets[f];
    const std::size_t end = plan.offsets[f + 1];
    const SubcarrierMap& map = plan.maps[f];

    for (std::size_t m = 0; m < devices; ++m) {
      slice.signs.assign(reports[m].signs.begin() + static_cast<std::ptrdiff_t>(begin),
                         reports[m].signs.begin() + static_cast<std::ptrdiff_t>(end));
      frames[m] = encode_signs(slice, map, derive_seed(seed, Stream::kPhase, {f, m}),
                               options.randomization);
    }

    const ChannelRealization channel =
        options.unit_channel
            ? ChannelRealization::unit(devices, options.symbols, options.subcarriers)
            : apply_sync_error(sample_channel(devices, options.symbols, options.subcarriers,
                                              options.channel,
                                              derive_seed(seed, Stream::kChannel, {f})),
                               options.channel);

    const OfdmFrame received = superpose(frames, powers, channel, options.channel,
                                         derive_seed(seed, Stream::kNoise, {f}));
    DetectionResult det = detect(received, map);
    out.votes.signs.insert(out.votes.signs.end(), det.votes.signs.begin(), det.votes.signs.end());
    out.e_plus.insert(out.e_plus.end(), det.e_plus.begin(), det.e_plus.end());
    out.e_minus.insert(out.e_minus.end(), det.e_minus.begin(), det.e_minus.end());
  }
  return out;
}

}  // namespace ncota
