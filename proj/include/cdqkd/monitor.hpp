#pragma once

// Coincidence monitoring: the expected 2- and 3-fold coincidence counts of a
// characterized channel and the abort rule that compares them with what the
// receiver actually recorded.

#include <Eigen/Core>

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "cdqkd/channel.hpp"
#include "cdqkd/mc_sim.hpp"

namespace cdqkd {

using PatternDistribution = Eigen::Array<double, kPatternCount, 1>;

/// Exact probability of each 4-detector click mask for a pulse of exactly
/// n photons, averaged over Alice's four preparations. Enumerates photon
/// loss, beam-splitter routing, polarization ports, misalignment and dark
/// counts.
PatternDistribution conditional_pattern_distribution(int n, const ChannelParams& channel);

/// Poisson mixture of the conditional distributions up to the default
/// truncation order.
PatternDistribution pattern_distribution(const SourceParams& source, const ChannelParams& channel);

struct CoincidenceExpectation {
    std::uint64_t n_pulses = 0;
    double expected_2fold_same = 0.0;
    double expected_2fold_conjugate = 0.0;
    double expected_2fold = 0.0;
    double expected_3fold = 0.0;
    double expected_total = 0.0;  ///< 2-fold + 3-fold
    /// Poisson counting variances (equal to the expectations).
    double variance_2fold = 0.0;
    double variance_3fold = 0.0;
    double variance_total = 0.0;
};

CoincidenceExpectation expected_coincidences(const SourceParams& source,
                                             const ChannelParams& channel,
                                             std::uint64_t n_pulses);

enum class Sidedness { TwoSided, LowerOnly };
enum class CoincidenceStatistic { Total, TwoFold, ThreeFold };

std::string to_string(Sidedness s);
Sidedness parse_sidedness(const std::string& s);
std::string to_string(CoincidenceStatistic s);
CoincidenceStatistic parse_coincidence_statistic(const std::string& s);

struct AbortSettings {
    double threshold_sigma = 5.0;
    Sidedness sidedness = Sidedness::TwoSided;
    CoincidenceStatistic statistic = CoincidenceStatistic::Total;

    void validate() const;
    friend bool operator==(const AbortSettings&, const AbortSettings&) = default;
};

enum class Verdict { Continue, Abort };

std::string to_string(Verdict v);

struct AbortDecision {
    Verdict verdict = Verdict::Continue;
    double z_score = 0.0;  ///< for the configured statistic
    double threshold = 0.0;
    CoincidenceStatistic statistic = CoincidenceStatistic::Total;
    double z_two_fold = 0.0;
    double z_three_fold = 0.0;
};

/// z = (actual - expected) / sqrt(variance). Two-sided mode aborts on
/// |z| > threshold; lower-only mode aborts on z < -threshold.
AbortDecision abort_test(const CoincidenceExpectation& expected, const CoincidenceStats& actual,
                         const AbortSettings& settings = {});

/// Single-line structured record: timestamp, statistic, z, threshold, verdict.
std::string format_abort_record(const AbortDecision& decision,
                                std::chrono::system_clock::time_point when);

struct Table3Row {
    double mu = 0.0;
    double expected = 0.0;
    std::uint64_t actual = 0;
    double actual_sigma = 0.0;  ///< sqrt(actual)
    double deviation_sigma = 0.0;  ///< (actual - expected) / sqrt(expected)
};

/// Expected (enumeration) and simulated (Monte Carlo, no eavesdropper)
/// 2+3-fold coincidence counts for each mean photon number.
std::vector<Table3Row> table3_report(const std::vector<double>& mu_list,
                                     const ChannelParams& channel, std::uint64_t n_pulses,
                                     std::uint64_t seed, int threads = 1);

}  // namespace cdqkd
