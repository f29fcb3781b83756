#pragma once

#include <cstdint>

namespace cdqkd {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Random stream addressed by (seed, pulse index, lane).
///
/// Each pulse owns independent lanes (source, eavesdropper, receiver), so
/// the draws of one stage never shift another stage's draws and results do
/// not depend on how pulses are spread over workers.
class PulseStream {
  public:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    PulseStream(std::uint64_t seed, std::uint64_t pulse_index, std::uint64_t lane)
        : state_(mix64(seed ^ mix64(pulse_index * kGolden + lane * 0xd1b54a32d192ed03ULL + 1))) {}

    std::uint64_t next() {
        state_ += kGolden;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits of `bits`.
    static double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

    double uniform() { return to_unit(next()); }

  private:
    std::uint64_t state_;
};

enum class Lane : std::uint64_t { Source = 0, Eve = 1, Receiver = 2 };

inline PulseStream make_stream(std::uint64_t seed, std::uint64_t pulse_index, Lane lane) {
    return PulseStream(seed, pulse_index, static_cast<std::uint64_t>(lane));
}

}  // namespace cdqkd
