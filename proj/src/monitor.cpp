#include "cdqkd/monitor.hpp"

#include <bit>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "cdqkd/errors.hpp"
#include "cdqkd/rng.hpp"
#include "cdqkd/stats.hpp"

namespace cdqkd {

namespace {

/// Signal-only mask distribution for one preparation (basis, bit).
///
/// Photon-by-photon recursion over 8 states: the conjugate-arm click mask
/// (2 bits) and whether any photon reached the matching arm. Photons in
/// the matching arm all exit the same port, so only that flag matters.
Eigen::Array<double, kPatternCount, 1> signal_masks(int n, Basis basis, int bit,
                                                    const ChannelParams& channel) {
    const double survive = channel.eta_total();
    const double lost = 1.0 - survive;
    const double matching = 0.5 * survive;
    const double conj_port = 0.25 * survive;

    Eigen::Array<double, 8, 1> state = Eigen::Array<double, 8, 1>::Zero();
    state(0) = 1.0;
    for (int i = 0; i < n; ++i) {
        Eigen::Array<double, 8, 1> next = Eigen::Array<double, 8, 1>::Zero();
        for (int s = 0; s < 8; ++s) {
            if (state(s) == 0.0) continue;
            next(s) += state(s) * lost;
            next(s | 4) += state(s) * matching;
            next(s | 1) += state(s) * conj_port;
            next(s | 2) += state(s) * conj_port;
        }
        state = next;
    }

    const Basis conj = basis == Basis::Rectilinear ? Basis::Diagonal : Basis::Rectilinear;
    Eigen::Array<double, kPatternCount, 1> out = Eigen::Array<double, kPatternCount, 1>::Zero();
    for (int s = 0; s < 8; ++s) {
        std::uint8_t mask = 0;
        if (s & 1) mask |= detector_bit(conj, 0);
        if (s & 2) mask |= detector_bit(conj, 1);
        if (s & 4) {
            out(mask | detector_bit(basis, bit)) += state(s) * (1.0 - channel.e_detector);
            out(mask | detector_bit(basis, bit ^ 1)) += state(s) * channel.e_detector;
        } else {
            out(mask) += state(s);
        }
    }
    return out;
}

PatternDistribution add_dark_counts(const PatternDistribution& signal, double p_dark) {
    PatternDistribution out = PatternDistribution::Zero();
    for (int d = 0; d < kPatternCount; ++d) {
        const int k = std::popcount(static_cast<unsigned>(d));
        const double pd = std::pow(p_dark, k) * std::pow(1.0 - p_dark, kDetectorCount - k);
        if (pd == 0.0) continue;
        for (int s = 0; s < kPatternCount; ++s) {
            out(s | d) += signal(s) * pd;
        }
    }
    return out;
}

}  // namespace

PatternDistribution conditional_pattern_distribution(int n, const ChannelParams& channel) {
    if (n < 0) {
        throw DomainError("conditional_pattern_distribution: n must be >= 0");
    }
    channel.validate();
    PatternDistribution signal = PatternDistribution::Zero();
    for (int b = 0; b < 2; ++b) {
        for (int bit = 0; bit < 2; ++bit) {
            signal += 0.25 * signal_masks(n, static_cast<Basis>(b), bit, channel);
        }
    }
    return add_dark_counts(signal, channel.p_dark);
}

PatternDistribution pattern_distribution(const SourceParams& source, const ChannelParams& channel) {
    source.validate();
    const PhotonDistribution photons(source.mu);
    PatternDistribution out = PatternDistribution::Zero();
    for (int n = 0; n <= photons.n_max(); ++n) {
        const double w = photons.pmf(n);
        if (w == 0.0) continue;
        out += w * conditional_pattern_distribution(n, channel);
    }
    return out;
}

CoincidenceExpectation expected_coincidences(const SourceParams& source,
                                             const ChannelParams& channel,
                                             std::uint64_t n_pulses) {
    const PatternDistribution p = pattern_distribution(source, channel);
    double same = 0.0, conj = 0.0, three = 0.0;
    for (int m = 0; m < kPatternCount; ++m) {
        const int k = std::popcount(static_cast<unsigned>(m));
        if (k == 2) {
            (m == kRectilinearMask || m == kDiagonalMask ? same : conj) += p(m);
        } else if (k == 3) {
            three += p(m);
        }
    }
    const double n = static_cast<double>(n_pulses);
    CoincidenceExpectation e;
    e.n_pulses = n_pulses;
    e.expected_2fold_same = n * same;
    e.expected_2fold_conjugate = n * conj;
    e.expected_2fold = n * (same + conj);
    e.expected_3fold = n * three;
    e.expected_total = n * (same + conj + three);
    e.variance_2fold = e.expected_2fold;
    e.variance_3fold = e.expected_3fold;
    e.variance_total = e.expected_total;
    return e;
}

std::string to_string(Sidedness s) { return s == Sidedness::TwoSided ? "two-sided" : "lower"; }

Sidedness parse_sidedness(const std::string& s) {
    if (s == "two-sided") return Sidedness::TwoSided;
    if (s == "lower") return Sidedness::LowerOnly;
    throw DomainError("unknown sidedness '" + s + "' (expected two-sided or lower)");
}

std::string to_string(CoincidenceStatistic s) {
    switch (s) {
        case CoincidenceStatistic::Total: return "total";
        case CoincidenceStatistic::TwoFold: return "two-fold";
        case CoincidenceStatistic::ThreeFold: return "three-fold";
    }
    return "unknown";
}

CoincidenceStatistic parse_coincidence_statistic(const std::string& s) {
    if (s == "total") return CoincidenceStatistic::Total;
    if (s == "two-fold") return CoincidenceStatistic::TwoFold;
    if (s == "three-fold") return CoincidenceStatistic::ThreeFold;
    throw DomainError("unknown coincidence statistic '" + s +
                      "' (expected total, two-fold or three-fold)");
}

void AbortSettings::validate() const {
    if (!(threshold_sigma > 0.0)) {
        throw DomainError("monitor: threshold_sigma must be > 0");
    }
}

std::string to_string(Verdict v) { return v == Verdict::Abort ? "abort" : "continue"; }

namespace {

double z_score(double actual, double expected, double variance) {
    if (variance <= 0.0) {
        if (actual != 0.0) {
            throw DegenerateError("abort_test: zero expected variance but coincidences were recorded");
        }
        return 0.0;
    }
    return (actual - expected) / std::sqrt(variance);
}

}  // namespace

AbortDecision abort_test(const CoincidenceExpectation& expected, const CoincidenceStats& actual,
                         const AbortSettings& settings) {
    settings.validate();
    const std::uint64_t windows = actual.empty + actual.singles + actual.two_fold() +
                                  actual.three_fold + actual.four_fold;
    if (windows != 0 && windows != expected.n_pulses) {
        throw DomainError("abort_test: expectation and tally cover different pulse counts");
    }
    AbortDecision d;
    d.threshold = settings.threshold_sigma;
    d.statistic = settings.statistic;
    d.z_two_fold = z_score(static_cast<double>(actual.two_fold()), expected.expected_2fold,
                           expected.variance_2fold);
    d.z_three_fold = z_score(static_cast<double>(actual.three_fold), expected.expected_3fold,
                             expected.variance_3fold);
    switch (settings.statistic) {
        case CoincidenceStatistic::Total:
            d.z_score = z_score(static_cast<double>(actual.total()), expected.expected_total,
                                expected.variance_total);
            break;
        case CoincidenceStatistic::TwoFold: d.z_score = d.z_two_fold; break;
        case CoincidenceStatistic::ThreeFold: d.z_score = d.z_three_fold; break;
    }
    const bool abort = settings.sidedness == Sidedness::TwoSided
                           ? std::abs(d.z_score) > settings.threshold_sigma
                           : d.z_score < -settings.threshold_sigma;
    d.verdict = abort ? Verdict::Abort : Verdict::Continue;
    return d;
}

std::string format_abort_record(const AbortDecision& decision,
                                std::chrono::system_clock::time_point when) {
    const std::time_t t = std::chrono::system_clock::to_time_t(when);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << "{\"timestamp\":\"" << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << "\","
       << "\"statistic\":\"" << to_string(decision.statistic) << "\","
       << "\"z\":" << std::setprecision(6) << decision.z_score << ","
       << "\"threshold\":" << decision.threshold << ","
       << "\"verdict\":\"" << to_string(decision.verdict) << "\"}";
    return os.str();
}

std::vector<Table3Row> table3_report(const std::vector<double>& mu_list,
                                     const ChannelParams& channel, std::uint64_t n_pulses,
                                     std::uint64_t seed, int threads) {
    if (mu_list.empty()) {
        throw DomainError("table3_report: mu list is empty");
    }
    std::vector<Table3Row> rows;
    rows.reserve(mu_list.size());
    for (std::size_t i = 0; i < mu_list.size(); ++i) {
        const SourceParams source{mu_list[i]};
        const auto exp = expected_coincidences(source, channel, n_pulses);
        SimOptions opts;
        opts.threads = threads;
        const auto sim = run_simulation(source, channel, EveStrategy{}, mix64(seed + i), n_pulses, opts);
        Table3Row row;
        row.mu = mu_list[i];
        row.expected = exp.expected_total;
        row.actual = sim.coincidences.total();
        row.actual_sigma = std::sqrt(static_cast<double>(row.actual));
        row.deviation_sigma = exp.expected_total > 0.0
                                  ? (static_cast<double>(row.actual) - exp.expected_total) /
                                        std::sqrt(exp.expected_total)
                                  : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cdqkd
