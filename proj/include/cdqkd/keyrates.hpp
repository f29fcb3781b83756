#pragma once

// Asymptotic secret-key-rate formulas for weak-coherent-pulse BB84: the
// ideal single-photon bound, the GLLP bound, the decoy-state bound with
// exact single-photon statistics, and the coincidence-detection rate that
// also credits two- and three-photon pulses.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "cdqkd/channel.hpp"
#include "cdqkd/errors.hpp"
#include "cdqkd/stats.hpp"

namespace cdqkd {

/// A key rate per pulse. `value` is clamped at zero; `raw` is the formula
/// output before clamping.
template <std::floating_point Scalar>
struct RateT {
    Scalar value = Scalar(0);
    Scalar raw = Scalar(0);
    bool secure = false;
    bool argument_clamped = false;  ///< an error-rate argument left [0, 1]

    static RateT from_raw(Scalar raw, bool clamped = false) {
        return {std::max(raw, Scalar(0)), raw, raw > Scalar(0), clamped};
    }
};

using Rate = RateT<double>;

template <std::floating_point Scalar>
struct KeyRateReportT {
    RateT<Scalar> r_ideal;
    RateT<Scalar> r_gllp;
    RateT<Scalar> r_decoy;
    RateT<Scalar> r_cd;
    Scalar q_factor = Scalar(0.5);
    Scalar f_ec = Scalar(1.22);
};

using KeyRateReport = KeyRateReportT<double>;

/// Passive balanced-splitter basis choice.
inline constexpr double kPassiveSiftFactor = 0.5;
/// Default reconciliation inefficiency.
inline constexpr double kDefaultErrorCorrectionEfficiency = 1.22;

/// 1 - H2(e). Error rates at or above 1/2 leave nothing to distill.
template <std::floating_point Scalar>
Scalar privacy_term(Scalar e) {
    if (e >= Scalar(0.5)) {
        return Scalar(0);
    }
    return Scalar(1) - binary_entropy(e);
}

template <std::floating_point Scalar>
RateT<Scalar> rate_ideal(Scalar e_b) {
    if (!(e_b >= Scalar(0) && e_b <= Scalar(1))) {
        throw DomainError("rate_ideal: QBER must lie in [0, 1]");
    }
    return RateT<Scalar>::from_raw(Scalar(1) - Scalar(2) * binary_entropy(e_b));
}

namespace detail {

template <std::floating_point Scalar>
void check_rate_inputs(Scalar q, Scalar f_ec) {
    if (!(q > Scalar(0) && q <= Scalar(1))) {
        throw DomainError("key rate: sifting factor q must lie in (0, 1]");
    }
    if (!(f_ec >= Scalar(1))) {
        throw DomainError("key rate: error-correction efficiency must be >= 1");
    }
}

/// Reconciliation leakage f Q_mu H2(E_mu).
template <std::floating_point Scalar>
Scalar leakage(const GainErrorProfileT<Scalar>& p, Scalar f_ec) {
    return p.q_mu * f_ec * binary_entropy(std::clamp(p.e_mu, Scalar(0), Scalar(1)));
}

}  // namespace detail

/// q Q_mu { -f H2(E_mu) + Q_1/Q_mu [1 - H2(Q_mu E_mu / Q_1)] }.
///
/// Every error is attributed to single photons, so the effective
/// single-photon error is Q_mu E_mu / Q_1.
template <std::floating_point Scalar>
RateT<Scalar> rate_gllp(const GainErrorProfileT<Scalar>& profile, Scalar q, Scalar f_ec) {
    detail::check_rate_inputs(q, f_ec);
    const Scalar q1 = profile.q(1);
    if (!(q1 > Scalar(0))) {
        throw DegenerateError("rate_gllp: single-photon gain is zero");
    }
    Scalar arg = profile.q_mu * profile.e_mu / q1;
    const bool clamped = arg > Scalar(1) + Scalar(1e-12);
    arg = std::clamp(arg, Scalar(0), Scalar(1));
    const Scalar raw = q * (-detail::leakage(profile, f_ec) + q1 * privacy_term(arg));
    return RateT<Scalar>::from_raw(raw, clamped);
}

/// q { -Q_mu f H2(E_mu) + Q_1 [1 - H2(E_1)] } with the exact single-photon
/// gain and error of the channel (infinite-decoy limit).
template <std::floating_point Scalar>
RateT<Scalar> rate_decoy(const GainErrorProfileT<Scalar>& profile, Scalar q, Scalar f_ec) {
    detail::check_rate_inputs(q, f_ec);
    const Scalar raw =
        q * (-detail::leakage(profile, f_ec) + profile.q(1) * privacy_term(profile.e(1)));
    return RateT<Scalar>::from_raw(raw);
}

/// -(1/2) Q_mu f H2(E_mu) + sum_{n=1..3} C_n Q_n [1 - H2(E_n)].
///
/// The sifting factor is already absorbed into the C_n; the leakage term
/// carries the passive-splitter factor 1/2.
template <std::floating_point Scalar>
RateT<Scalar> rate_cd(const GainErrorProfileT<Scalar>& profile, const CdCoefficients& coeffs,
                      Scalar f_ec) {
    detail::check_rate_inputs(Scalar(kPassiveSiftFactor), f_ec);
    if (profile.n_max() < 3) {
        throw DomainError("rate_cd: profile must extend to n = 3");
    }
    Scalar raw = -Scalar(kPassiveSiftFactor) * detail::leakage(profile, f_ec);
    for (int n = 1; n <= 3; ++n) {
        raw += coeffs.weight<Scalar>(n) * profile.q(n) * privacy_term(profile.e(n));
    }
    return RateT<Scalar>::from_raw(raw);
}

template <std::floating_point Scalar>
KeyRateReportT<Scalar> evaluate_key_rates(const GainErrorProfileT<Scalar>& profile,
                                          Scalar q = Scalar(kPassiveSiftFactor),
                                          Scalar f_ec = Scalar(kDefaultErrorCorrectionEfficiency)) {
    KeyRateReportT<Scalar> r;
    r.q_factor = q;
    r.f_ec = f_ec;
    r.r_ideal = rate_ideal(std::clamp(profile.e_mu, Scalar(0), Scalar(1)));
    r.r_gllp = profile.q(1) > Scalar(0) ? rate_gllp(profile, q, f_ec) : RateT<Scalar>{};
    r.r_decoy = rate_decoy(profile, q, f_ec);
    r.r_cd = rate_cd(profile, cd_coefficients(), f_ec);
    return r;
}

// ---------------------------------------------------------------------------
// Optimal mean photon number
// ---------------------------------------------------------------------------

enum class RateKind { Ideal, Gllp, Decoy, Cd };

std::string to_string(RateKind k);

/// Uniform search grid over mean photon number.
struct MuGrid {
    double min = 0.001;
    double max = 2.0;
    int points = 200;

    friend bool operator==(const MuGrid&, const MuGrid&) = default;

    std::vector<double> values() const;
    void validate() const;
};

struct RateSettings {
    double q = kPassiveSiftFactor;
    double f_ec = kDefaultErrorCorrectionEfficiency;

    friend bool operator==(const RateSettings&, const RateSettings&) = default;
};

/// Rate of the given kind at mean photon number mu over the given channel.
Rate rate_at(RateKind kind, double mu, const ChannelParams& channel,
             const RateSettings& settings = {});

struct OptimalMu {
    double mu_star = 0.0;
    double rate_star = 0.0;
    bool secure = false;
};

/// Grid search followed by golden-section refinement around the best grid
/// point. Ties go to the smaller mu. `secure` is false when every grid
/// point yields zero rate.
OptimalMu optimal_mu(RateKind kind, const ChannelParams& channel, const MuGrid& grid,
                     const RateSettings& settings = {});

}  // namespace cdqkd
