#include <doctest.h>

#include <sstream>

#include "cdqkd/calibration.hpp"
#include "cdqkd/mc_sim.hpp"
#include "oracles.hpp"

using namespace cdqkd;

namespace {

ClickPattern mask(std::uint8_t m) {
    ClickPattern p;
    p.clicks = m;
    return p;
}

ChannelParams ideal_channel() {
    ChannelParams ch;
    ch.eta = 1.0;
    ch.eta_detector = 1.0;
    ch.p_dark = 0.0;
    ch.e_detector = 0.0;
    return ch;
}

}  // namespace

TEST_CASE("tally_coincidences classifies click masks") {
    const std::vector<ClickPattern> v{mask(0b0001), mask(0b0011), mask(0b0101), mask(0b0111),
                                      mask(0b1111), mask(0), mask(0b1100), mask(0b1010)};
    const auto t = tally_coincidences(v);
    CHECK(t.empty == 1);
    CHECK(t.singles == 1);
    CHECK(t.two_fold_same == 2);
    CHECK(t.two_fold_conjugate == 2);
    CHECK(t.three_fold == 1);
    CHECK(t.four_fold == 1);
    CHECK(t.total() == 5);
}

TEST_CASE("ideal channel produces error-free sifted key") {
    const auto r = run_simulation({0.4}, ideal_channel(), {}, 11, 200000);
    CHECK(r.sifted_bits > 0);
    CHECK(r.errors == 0);
    CHECK(r.e_mu_hat == 0.0);
}

TEST_CASE("vacuum limit without dark counts is silent") {
    ChannelParams ch = calibration::key_rate_channel();
    ch.p_dark = 0.0;
    const auto r = run_simulation({1e-6}, ch, {}, 5, 100000);
    CHECK(r.coincidences.total() == 0);
    CHECK(r.sifted_bits <= 2);
}

TEST_CASE("results do not depend on thread count or shard size") {
    const auto ch = calibration::coincidence_channel();
    SimOptions one;
    SimOptions many;
    many.threads = 3;
    many.shard_size = 1000;
    std::vector<ClickRecord> log1, log2;
    one.click_log = &log1;
    many.click_log = &log2;
    const auto a = run_simulation({0.41}, ch, {}, 99, 150000, one);
    const auto b = run_simulation({0.41}, ch, {}, 99, 150000, many);
    CHECK(a == b);
    REQUIRE(log1.size() == log2.size());
    for (std::size_t i = 0; i < log1.size(); ++i) {
        CHECK(log1[i].window_index == log2[i].window_index);
        CHECK(log1[i].clicks == log2[i].clicks);
    }
    const auto c = run_simulation({0.41}, ch, {}, 100, 150000, one);
    CHECK_FALSE(a == c);
}

TEST_CASE("intercept-resend with zero fraction equals no eavesdropper") {
    const auto ch = calibration::key_rate_channel();
    EveStrategy ir;
    ir.kind = EveKind::InterceptResend;
    ir.fraction = 0.0;
    const auto a = run_simulation({0.3}, ch, {}, 3, 100000);
    const auto b = run_simulation({0.3}, ch, ir, 3, 100000);
    CHECK(a == b);
    CHECK(b.attacked_pulses == 0);
}

TEST_CASE("full intercept-resend raises the QBER to about one quarter") {
    const auto ch = calibration::key_rate_channel();
    EveStrategy ir;
    ir.kind = EveKind::InterceptResend;
    const auto r = run_simulation({0.41}, ch, ir, 8, 400000);
    const double expected = 0.25 + ch.e_detector / 2;
    CHECK(std::abs(r.e_mu_hat - expected) < 5 * r.e_mu_standard_error() + 1e-3);
}

TEST_CASE("full-blocking PNS leaves only dark-count coincidences") {
    ChannelParams ch = calibration::key_rate_channel();
    EveStrategy pns;
    pns.kind = EveKind::Pns;
    pns.forward_single_photon = true;
    ch.p_dark = 0.0;
    CHECK(run_simulation({0.41}, ch, pns, 4, 200000).coincidences.total() == 0);
    ch.p_dark = 1e-3;
    const auto r = run_simulation({0.41}, ch, pns, 4, 200000);
    CHECK(r.coincidences.total() > 0);
    // A forwarded photon plus one dark count, or two dark counts.
    CHECK(r.coincidences.total() < 200000 * 4 * ch.p_dark);
}

TEST_CASE("coincidences without an eavesdropper include conjugate-basis pairs") {
    const auto r = run_simulation({0.41}, calibration::coincidence_channel(), {}, 21, 200000);
    CHECK(r.coincidences.two_fold_conjugate > 0);
    CHECK(r.coincidences.two_fold_same > 0);
}

TEST_CASE("invalid parameters are rejected before sampling") {
    CHECK_THROWS_AS(run_simulation({-0.1}, ideal_channel(), {}, 1, 10), DomainError);
    ChannelParams ch = ideal_channel();
    ch.eta = 1.5;
    CHECK_THROWS_AS(run_simulation({0.1}, ch, {}, 1, 10), DomainError);
    EveStrategy e;
    e.kind = EveKind::InterceptResend;
    e.fraction = 2.0;
    CHECK_THROWS_AS(run_simulation({0.1}, ideal_channel(), e, 1, 10), DomainError);
    CHECK_THROWS_AS(run_simulation({0.1}, ideal_channel(), {}, 1, 0), DomainError);
}

TEST_CASE("simulated gain and QBER agree with the analytic profile") {
    // 18 simultaneous comparisons: 3.5 standard errors keeps the family-wise
    // false-failure rate near 1%.
    const double bound = 3.5;
    std::uint64_t seed = 17;
    for (double mu : {0.13, 0.41, 0.8}) {
        for (double eta : {0.1, 0.4, 0.875}) {
            ChannelParams ch = calibration::key_rate_channel();
            ch.eta = eta;
            const auto r = run_simulation({mu}, ch, {}, seed++, 1'000'000);
            const auto p = gain_profile(PhotonDistribution(mu), ch);
            CHECK(std::abs(r.q_mu_hat - p.q_mu) < bound * r.q_mu_standard_error(ch.convention));
            CHECK(std::abs(r.e_mu_hat - p.e_mu) < bound * r.e_mu_standard_error());
        }
    }
}

TEST_CASE("per-photon-number patterns match the enumeration oracle") {
    ChannelParams ch = calibration::coincidence_channel();
    ch.p_dark = 0.01;
    ch.e_detector = 0.05;
    const std::uint64_t samples = 200000;
    for (int n = 0; n <= 3; ++n) {
        const auto counts = sample_patterns_given_n(n, ch, 1000 + n, samples);
        const auto probs = oracle::pattern_probabilities(n, ch);
        for (int m = 0; m < kPatternCount; ++m) {
            const double expected = probs[m] * samples;
            const double sd = std::sqrt(expected * (1 - probs[m])) + 1.0;
            CHECK(std::abs(static_cast<double>(counts[m]) - expected) < 5 * sd);
        }
    }
}

TEST_CASE("click log format") {
    std::vector<ClickRecord> records{{3, 0b0101, Basis::Diagonal, 1}, {7, 0b0001, Basis::Rectilinear, 0}};
    std::ostringstream os;
    write_click_log(os, records);
    CHECK(os.str() == "window_index,click_mask,alice_basis,alice_bit\n3,5,1,1\n7,1,0,0\n");
}

TEST_CASE("eve kind strings") {
    for (EveKind k : {EveKind::None, EveKind::InterceptResend, EveKind::Pns}) {
        CHECK(parse_eve_kind(to_string(k)) == k);
    }
    CHECK_THROWS(parse_eve_kind("bogus"));
}
