#pragma once

// Pulse-level Monte Carlo of weak-coherent-pulse BB84 with a passive
// four-detector receiver.
//
// Receiver geometry: a balanced beam splitter sends each photon to the
// reflected arm (polarizing splitter, detectors H and V) or the transmitted
// arm (half-wave plate and polarizing splitter, detectors D and A). Click
// masks use bit 0 = H, bit 1 = V, bit 2 = D, bit 3 = A.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cdqkd/channel.hpp"
#include "cdqkd/rng.hpp"

namespace cdqkd {

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

inline constexpr int kDetectorCount = 4;
inline constexpr int kPatternCount = 16;
/// Emitted photon numbers tracked individually in per-n tallies; larger
/// counts share the last bucket.
inline constexpr int kTrackedPhotonNumbers = 8;

inline constexpr std::uint8_t detector_bit(Basis arm, int port) {
    return static_cast<std::uint8_t>(1u << (2 * static_cast<int>(arm) + port));
}

inline constexpr std::uint8_t kRectilinearMask = 0b0011;
inline constexpr std::uint8_t kDiagonalMask = 0b1100;

struct SourceParams {
    double mu = 0.1;                  ///< mean photon number per pulse
    double repetition_rate_hz = 8e7;  ///< only used to convert counts to time

    void validate() const;
    friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

struct AlicePulse {
    int n_photons = 0;
    Basis basis = Basis::Rectilinear;
    int bit = 0;
    std::uint64_t pulse_index = 0;
};

struct ClickPattern {
    std::uint8_t clicks = 0;      ///< 4-bit click mask
    std::uint8_t dark_flags = 0;  ///< clicks with no signal photon behind them
    std::uint64_t window_index = 0;

    int click_count() const;
};

enum class EveKind { None, InterceptResend, Pns };

std::string to_string(EveKind k);
EveKind parse_eve_kind(const std::string& s);

struct EveStrategy {
    EveKind kind = EveKind::None;
    /// Intercept-resend: probability a pulse is attacked.
    double fraction = 1.0;
    /// Photon-number splitting: transmissivity of the channel Eve forwards over.
    double forward_transmissivity = 1.0;
    /// Photon-number splitting: forward at most one photon (full blocking of
    /// multiphoton signatures).
    bool forward_single_photon = false;

    void validate() const;
    friend bool operator==(const EveStrategy&, const EveStrategy&) = default;
};

/// What leaves Eve toward Bob.
struct ForwardedPulse {
    int n_photons = 0;
    Basis basis = Basis::Rectilinear;  ///< polarization basis of the forwarded photons
    int bit = 0;
    double transmissivity = 1.0;  ///< survival of each photon up to Bob's receiver
    bool attacked = false;
};

/// Identity for EveKind::None (draws nothing from the Eve lane).
ForwardedPulse apply_eve(const AlicePulse& pulse, const EveStrategy& strategy,
                         const ChannelParams& channel, PulseStream& eve_stream);

struct CoincidenceStats {
    std::uint64_t empty = 0;
    std::uint64_t singles = 0;
    std::uint64_t two_fold_same = 0;       ///< {H,V} or {D,A}
    std::uint64_t two_fold_conjugate = 0;  ///< one click in each arm
    std::uint64_t three_fold = 0;
    std::uint64_t four_fold = 0;  ///< saturation events, excluded from totals

    std::uint64_t two_fold() const { return two_fold_same + two_fold_conjugate; }
    /// 2-fold plus 3-fold windows.
    std::uint64_t total() const { return two_fold() + three_fold; }

    void add(std::uint8_t mask);
    CoincidenceStats& operator+=(const CoincidenceStats& o);
    friend bool operator==(const CoincidenceStats&, const CoincidenceStats&) = default;
};

CoincidenceStats tally_coincidences(std::span<const ClickPattern> patterns);

using PatternCounts = std::array<std::uint64_t, kPatternCount>;

struct SimResult {
    std::uint64_t n_pulses = 0;
    std::uint64_t click_windows = 0;  ///< windows with at least one click
    std::uint64_t sifted_bits = 0;
    std::uint64_t errors = 0;
    std::uint64_t attacked_pulses = 0;
    double q_mu_hat = 0.0;
    double e_mu_hat = 0.0;
    CoincidenceStats coincidences;
    PatternCounts pattern_counts{};
    /// Detector patterns given the emitted photon number.
    std::array<PatternCounts, kTrackedPhotonNumbers + 1> per_n{};

    /// Binomial standard errors of the two estimators.
    double q_mu_standard_error(YieldConvention convention) const;
    double e_mu_standard_error() const;

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// One non-empty window for the raw click log.
struct ClickRecord {
    std::uint64_t window_index = 0;
    std::uint8_t clicks = 0;
    Basis alice_basis = Basis::Rectilinear;
    int alice_bit = 0;
};

struct SimOptions {
    int threads = 1;
    std::uint64_t shard_size = 1u << 16;
    /// When set, receives every non-empty window in window order.
    std::vector<ClickRecord>* click_log = nullptr;
};

/// Simulates n_pulses windows. Randomness is a pure function of
/// (seed, pulse index), so the result is bit-identical for any thread count.
///
/// Gain estimator: the fraction of windows with any click, scaled by the
/// yield convention's sifting factor. QBER estimator: errors among windows
/// with exactly one click in the basis Alice used.
SimResult run_simulation(const SourceParams& source, const ChannelParams& channel,
                         const EveStrategy& eve, std::uint64_t seed, std::uint64_t n_pulses,
                         const SimOptions& options = {});

/// Detector-pattern histogram for pulses of exactly n photons with uniformly
/// random basis and bit, no eavesdropper.
PatternCounts sample_patterns_given_n(int n, const ChannelParams& channel, std::uint64_t seed,
                                      std::uint64_t samples);

/// Header plus one `window_index,click_mask,alice_basis,alice_bit` line per
/// record. click_mask is the decimal value of the 4-bit mask.
void write_click_log(std::ostream& os, std::span<const ClickRecord> records);

}  // namespace cdqkd
