#include "cdqkd/mc_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

#include "cdqkd/errors.hpp"
#include "cdqkd/parallel.hpp"

namespace cdqkd {

void SourceParams::validate() const {
    if (!(mu >= 0.0 && std::isfinite(mu))) {
        throw DomainError("source: mu must be a finite value >= 0");
    }
    if (!(repetition_rate_hz > 0.0)) {
        throw DomainError("source: repetition_rate_hz must be > 0");
    }
}

int ClickPattern::click_count() const { return std::popcount(static_cast<unsigned>(clicks)); }

std::string to_string(EveKind k) {
    switch (k) {
        case EveKind::None: return "none";
        case EveKind::InterceptResend: return "intercept-resend";
        case EveKind::Pns: return "pns";
    }
    return "unknown";
}

EveKind parse_eve_kind(const std::string& s) {
    if (s == "none") return EveKind::None;
    if (s == "intercept-resend") return EveKind::InterceptResend;
    if (s == "pns") return EveKind::Pns;
    throw DomainError("unknown eve kind '" + s + "' (expected none, intercept-resend or pns)");
}

void EveStrategy::validate() const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw DomainError("eve: fraction must lie in [0, 1]");
    }
    if (!(forward_transmissivity >= 0.0 && forward_transmissivity <= 1.0)) {
        throw DomainError("eve: forward_transmissivity must lie in [0, 1]");
    }
}

ForwardedPulse apply_eve(const AlicePulse& pulse, const EveStrategy& strategy,
                         const ChannelParams& channel, PulseStream& eve_stream) {
    ForwardedPulse out{pulse.n_photons, pulse.basis, pulse.bit, channel.eta, false};
    switch (strategy.kind) {
        case EveKind::None:
            break;
        case EveKind::InterceptResend: {
            const std::uint64_t x = eve_stream.next();
            if (pulse.n_photons == 0 || !(PulseStream::to_unit(x) < strategy.fraction)) {
                break;
            }
            const auto eve_basis = static_cast<Basis>(x & 1u);
            const int eve_bit = eve_basis == pulse.basis ? pulse.bit : static_cast<int>((x >> 1) & 1u);
            out = {1, eve_basis, eve_bit, channel.eta, true};
            break;
        }
        case EveKind::Pns: {
            if (pulse.n_photons == 0) {
                break;
            }
            out.attacked = true;
            out.transmissivity = strategy.forward_transmissivity;
            if (pulse.n_photons == 1) {
                out.n_photons = 0;
            } else {
                out.n_photons = strategy.forward_single_photon ? 1 : pulse.n_photons - 1;
            }
            break;
        }
    }
    return out;
}

void CoincidenceStats::add(std::uint8_t mask) {
    switch (std::popcount(static_cast<unsigned>(mask))) {
        case 0: ++empty; break;
        case 1: ++singles; break;
        case 2:
            if (mask == kRectilinearMask || mask == kDiagonalMask) {
                ++two_fold_same;
            } else {
                ++two_fold_conjugate;
            }
            break;
        case 3: ++three_fold; break;
        default: ++four_fold; break;
    }
}

CoincidenceStats& CoincidenceStats::operator+=(const CoincidenceStats& o) {
    empty += o.empty;
    singles += o.singles;
    two_fold_same += o.two_fold_same;
    two_fold_conjugate += o.two_fold_conjugate;
    three_fold += o.three_fold;
    four_fold += o.four_fold;
    return *this;
}

CoincidenceStats tally_coincidences(std::span<const ClickPattern> patterns) {
    CoincidenceStats stats;
    for (const auto& p : patterns) {
        stats.add(p.clicks);
    }
    return stats;
}

double SimResult::q_mu_standard_error(YieldConvention convention) const {
    if (n_pulses == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(click_windows) / static_cast<double>(n_pulses);
    return yield_scale<double>(convention) * std::sqrt(p * (1.0 - p) / static_cast<double>(n_pulses));
}

double SimResult::e_mu_standard_error() const {
    if (sifted_bits == 0) {
        return 0.0;
    }
    return std::sqrt(e_mu_hat * (1.0 - e_mu_hat) / static_cast<double>(sifted_bits));
}

namespace {

/// Per-run constants shared by every pulse.
class PulseKernel {
  public:
    PulseKernel(const SourceParams& source, const ChannelParams& channel, const EveStrategy& eve,
                std::uint64_t seed)
        : channel_(channel), eve_(eve), seed_(seed) {
        no_dark_[0] = 1.0;
        for (int k = 1; k <= kDetectorCount; ++k) {
            no_dark_[k] = no_dark_[k - 1] * (1.0 - channel.p_dark);
        }
        // Cumulative photon-number table out to where the tail is negligible.
        double cdf = 0.0;
        for (int n = 0; n < 400; ++n) {
            cdf += poisson_pmf(source.mu, n);
            cdf_.push_back(cdf);
            if (n >= source.mu && 1.0 - cdf < 1e-17) {
                break;
            }
        }
        mu_ = source.mu;
    }

    int sample_photon_number(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it != cdf_.end()) {
            return static_cast<int>(it - cdf_.begin());
        }
        // Past the table: continue the recurrence.
        int n = static_cast<int>(cdf_.size()) - 1;
        double cdf = cdf_.back();
        double p = poisson_pmf(mu_, n);
        while (u >= cdf && p > 0.0) {
            ++n;
            p *= mu_ / n;
            cdf += p;
        }
        return n;
    }

    /// Alice's pulse, drawn from the source lane with a single 64-bit draw.
    AlicePulse alice(std::uint64_t index) const {
        PulseStream src = make_stream(seed_, index, Lane::Source);
        const std::uint64_t x = src.next();
        AlicePulse p;
        p.pulse_index = index;
        p.basis = static_cast<Basis>(x & 1u);
        p.bit = static_cast<int>((x >> 1) & 1u);
        p.n_photons = sample_photon_number(PulseStream::to_unit(x));
        return p;
    }

    ForwardedPulse eve(const AlicePulse& pulse) const {
        if (eve_.kind == EveKind::None) {
            return {pulse.n_photons, pulse.basis, pulse.bit, channel_.eta, false};
        }
        PulseStream es = make_stream(seed_, pulse.pulse_index, Lane::Eve);
        return apply_eve(pulse, eve_, channel_, es);
    }

    ClickPattern receive(const ForwardedPulse& in, std::uint64_t index) const {
        PulseStream rx = make_stream(seed_, index, Lane::Receiver);
        ClickPattern out;
        out.window_index = index;
        std::uint8_t signal = 0;
        const double survive = in.transmissivity * channel_.eta_detector;
        const double half = 0.5 * survive;
        bool matching_arm_hit = false;
        for (int i = 0; i < in.n_photons; ++i) {
            const std::uint64_t x = rx.next();
            const double u = PulseStream::to_unit(x);
            if (!(u < survive)) {
                continue;
            }
            const Basis arm = u < half ? Basis::Rectilinear : Basis::Diagonal;
            if (arm == in.basis) {
                matching_arm_hit = true;
            } else {
                signal |= detector_bit(arm, static_cast<int>(x & 1u));
            }
        }
        if (matching_arm_hit) {
            // Misalignment flips the whole pulse's polarization.
            const int flip = rx.uniform() < channel_.e_detector ? 1 : 0;
            signal |= detector_bit(in.basis, in.bit ^ flip);
        }
        const std::uint8_t dark = dark_counts(rx);
        out.clicks = signal | dark;
        out.dark_flags = dark & static_cast<std::uint8_t>(~signal);
        return out;
    }

  private:
    /// Four independent Bernoulli(p_dark) firings; one draw when none fire.
    std::uint8_t dark_counts(PulseStream& rx) const {
        if (channel_.p_dark <= 0.0 || rx.uniform() < no_dark_[kDetectorCount]) {
            return 0;
        }
        // At least one detector fired: sample sequentially conditioned on that.
        std::uint8_t mask = 0;
        for (int d = 0; d < kDetectorCount; ++d) {
            const int remaining = kDetectorCount - d;
            const double p = mask == 0 ? channel_.p_dark / (1.0 - no_dark_[remaining]) : channel_.p_dark;
            if (rx.uniform() < p) {
                mask |= static_cast<std::uint8_t>(1u << d);
            }
        }
        return mask;
    }

    ChannelParams channel_;
    EveStrategy eve_;
    std::uint64_t seed_;
    double mu_ = 0.0;
    std::array<double, kDetectorCount + 1> no_dark_{};
    std::vector<double> cdf_;
};

struct ShardTally {
    std::uint64_t n_pulses = 0;
    std::uint64_t click_windows = 0;
    std::uint64_t sifted = 0;
    std::uint64_t errors = 0;
    std::uint64_t attacked = 0;
    std::array<PatternCounts, kTrackedPhotonNumbers + 1> per_n{};
    std::vector<ClickRecord> log;
};

void run_shard(const PulseKernel& kernel, std::uint64_t begin, std::uint64_t end, bool keep_log,
               ShardTally& t) {
    for (std::uint64_t i = begin; i < end; ++i) {
        const AlicePulse a = kernel.alice(i);
        const ForwardedPulse f = kernel.eve(a);
        const ClickPattern c = kernel.receive(f, i);
        t.attacked += f.attacked ? 1 : 0;
        ++t.per_n[std::min(a.n_photons, kTrackedPhotonNumbers)][c.clicks];
        if (c.clicks == 0) {
            continue;
        }
        ++t.click_windows;
        if (keep_log) {
            t.log.push_back({i, c.clicks, a.basis, a.bit});
        }
        if (std::has_single_bit(static_cast<unsigned>(c.clicks))) {
            const int det = std::countr_zero(static_cast<unsigned>(c.clicks));
            if (static_cast<Basis>(det >> 1) == a.basis) {
                ++t.sifted;
                t.errors += (det & 1) != a.bit ? 1 : 0;
            }
        }
    }
    t.n_pulses = end - begin;
}

}  // namespace

SimResult run_simulation(const SourceParams& source, const ChannelParams& channel,
                         const EveStrategy& eve, std::uint64_t seed, std::uint64_t n_pulses,
                         const SimOptions& options) {
    source.validate();
    channel.validate();
    eve.validate();
    if (n_pulses < 1) {
        throw DomainError("run_simulation: n_pulses must be >= 1");
    }
    if (options.threads < 1 || options.shard_size < 1) {
        throw DomainError("run_simulation: threads and shard_size must be >= 1");
    }

    const PulseKernel kernel(source, channel, eve, seed);
    const std::uint64_t n_shards = (n_pulses + options.shard_size - 1) / options.shard_size;
    std::vector<ShardTally> shards(n_shards);
    const bool keep_log = options.click_log != nullptr;
    parallel_for(n_shards, options.threads, [&](std::uint64_t s) {
        const std::uint64_t begin = s * options.shard_size;
        const std::uint64_t end = std::min(n_pulses, begin + options.shard_size);
        run_shard(kernel, begin, end, keep_log, shards[s]);
    });

    SimResult r;
    for (auto& t : shards) {
        r.n_pulses += t.n_pulses;
        r.click_windows += t.click_windows;
        r.sifted_bits += t.sifted;
        r.errors += t.errors;
        r.attacked_pulses += t.attacked;
        for (int n = 0; n <= kTrackedPhotonNumbers; ++n) {
            for (int m = 0; m < kPatternCount; ++m) {
                r.per_n[n][m] += t.per_n[n][m];
            }
        }
        if (keep_log) {
            options.click_log->insert(options.click_log->end(), t.log.begin(), t.log.end());
        }
    }
    for (const auto& counts : r.per_n) {
        for (int m = 0; m < kPatternCount; ++m) {
            r.pattern_counts[m] += counts[m];
        }
    }
    for (int m = 0; m < kPatternCount; ++m) {
        const std::uint64_t count = r.pattern_counts[m];
        CoincidenceStats one;
        one.add(static_cast<std::uint8_t>(m));
        r.coincidences.empty += one.empty * count;
        r.coincidences.singles += one.singles * count;
        r.coincidences.two_fold_same += one.two_fold_same * count;
        r.coincidences.two_fold_conjugate += one.two_fold_conjugate * count;
        r.coincidences.three_fold += one.three_fold * count;
        r.coincidences.four_fold += one.four_fold * count;
    }
    r.q_mu_hat = yield_scale<double>(channel.convention) * static_cast<double>(r.click_windows) /
                 static_cast<double>(r.n_pulses);
    r.e_mu_hat = r.sifted_bits > 0
                     ? static_cast<double>(r.errors) / static_cast<double>(r.sifted_bits)
                     : 0.0;
    return r;
}

PatternCounts sample_patterns_given_n(int n, const ChannelParams& channel, std::uint64_t seed,
                                      std::uint64_t samples) {
    if (n < 0) {
        throw DomainError("sample_patterns_given_n: n must be >= 0");
    }
    channel.validate();
    const PulseKernel kernel(SourceParams{0.0}, channel, EveStrategy{}, seed);
    PatternCounts counts{};
    for (std::uint64_t i = 0; i < samples; ++i) {
        AlicePulse a = kernel.alice(i);
        a.n_photons = n;
        const ClickPattern c = kernel.receive(kernel.eve(a), i);
        ++counts[c.clicks];
    }
    return counts;
}

void write_click_log(std::ostream& os, std::span<const ClickRecord> records) {
    os << "window_index,click_mask,alice_basis,alice_bit\n";
    for (const auto& r : records) {
        os << r.window_index << ',' << static_cast<int>(r.clicks) << ','
           << static_cast<int>(r.alice_basis) << ',' << r.alice_bit << '\n';
    }
}

}  // namespace cdqkd
