#pragma once

// Analytic channel statistics for a passive-basis BB84 receiver:
// per-photon-number transmission, yields, gains and error rates, plus the
// distance-to-transmissivity link budget used by the sweeps.

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <string>

#include "cdqkd/errors.hpp"
#include "cdqkd/stats.hpp"

namespace cdqkd {

/// How the yield is normalized.
///
/// `SiftFolded` divides the detection probability by two, folding the
/// basis-sifting factor into Y_n. `Raw` omits it (Y_n = eta_n + p_dark).
/// The error numerator scales with the same factor, so E_n does not depend
/// on the convention.
enum class YieldConvention { SiftFolded, Raw };

inline std::string to_string(YieldConvention c) {
    return c == YieldConvention::SiftFolded ? "sift-folded" : "raw";
}

inline YieldConvention parse_yield_convention(const std::string& s) {
    if (s == "sift-folded") return YieldConvention::SiftFolded;
    if (s == "raw") return YieldConvention::Raw;
    throw DomainError("unknown yield convention '" + s + "' (expected sift-folded or raw)");
}

template <std::floating_point Scalar>
struct ChannelParamsT {
    Scalar eta = Scalar(1);              ///< channel transmissivity
    Scalar p_dark = Scalar(1e-5);        ///< dark-count probability per window per detector
    Scalar e_detector = Scalar(0.01);    ///< intrinsic misalignment error
    Scalar eta_detector = Scalar(0.60);  ///< detector and coupling efficiency
    YieldConvention convention = YieldConvention::SiftFolded;

    /// Probability a single photon leaving Alice produces a detector response.
    Scalar eta_total() const { return eta * eta_detector; }

    void validate() const {
        const auto in_unit = [](Scalar v) { return v >= Scalar(0) && v <= Scalar(1); };
        if (!in_unit(eta)) throw DomainError("channel: eta must lie in [0, 1]");
        if (!in_unit(p_dark)) throw DomainError("channel: p_dark must lie in [0, 1]");
        if (!(e_detector >= Scalar(0) && e_detector <= Scalar(0.5))) {
            throw DomainError("channel: e_detector must lie in [0, 0.5]");
        }
        if (!in_unit(eta_detector)) throw DomainError("channel: eta_detector must lie in [0, 1]");
    }

    friend bool operator==(const ChannelParamsT&, const ChannelParamsT&) = default;
};

using ChannelParams = ChannelParamsT<double>;

/// Exponential attenuation from a zero-length transmissivity.
struct LinkBudget {
    double eta0 = 1.0;
    double alpha_db_per_km = 0.2;

    friend bool operator==(const LinkBudget&, const LinkBudget&) = default;
};

/// eta0 * 10^(-alpha L / 10).
inline double transmissivity_at(const LinkBudget& budget, double length_km) {
    if (!(length_km >= 0.0)) {
        throw DomainError("transmissivity_at: length must be >= 0");
    }
    if (!(budget.eta0 > 0.0 && budget.eta0 <= 1.0) || !(budget.alpha_db_per_km >= 0.0)) {
        throw DomainError("transmissivity_at: invalid link budget");
    }
    return budget.eta0 * std::pow(10.0, -budget.alpha_db_per_km * length_km / 10.0);
}

/// Probability that at least one of n photons survives a channel of
/// transmissivity eta_total.
template <std::floating_point Scalar>
Scalar eta_n(Scalar eta_total, int n) {
    if (!(eta_total >= Scalar(0) && eta_total <= Scalar(1)) || n < 0) {
        throw DomainError("eta_n: requires eta_total in [0, 1] and n >= 0");
    }
    using std::pow;
    return Scalar(1) - pow(Scalar(1) - eta_total, n);
}

template <std::floating_point Scalar>
Scalar yield_scale(YieldConvention c) {
    return c == YieldConvention::SiftFolded ? Scalar(0.5) : Scalar(1);
}

/// Y_n = (eta_n + p_dark) / 2 under the sift-folded convention.
template <std::floating_point Scalar>
Scalar yield_n(const ChannelParamsT<Scalar>& params, int n) {
    params.validate();
    return yield_scale<Scalar>(params.convention) *
           (eta_n(params.eta_total(), n) + params.p_dark);
}

/// Per-photon-number yields, gains and error rates plus their Poisson totals.
template <std::floating_point Scalar>
struct GainErrorProfileT {
    ArrayX<Scalar> yields;  ///< Y_0 .. Y_nmax
    ArrayX<Scalar> gains;   ///< Q_n = Y_n p_n
    ArrayX<Scalar> errors;  ///< E_n, E_0 = 1/4
    Scalar q_mu = Scalar(0);
    Scalar e_mu = Scalar(0);

    int n_max() const { return static_cast<int>(gains.size()) - 1; }
    Scalar q(int n) const { return n <= n_max() ? gains(n) : Scalar(0); }
    Scalar e(int n) const { return n <= n_max() ? errors(n) : Scalar(0); }
};

using GainErrorProfile = GainErrorProfileT<double>;

/// Fills Y_n, Q_n and E_n for n = 0..n_max and the totals
/// Q_mu = sum Q_n, E_mu = sum Q_n E_n / Q_mu.
///
/// E_0 is fixed at 1/4: a dark click is equally likely in any of the four
/// detectors. Throws DegenerateError when a multiphoton yield vanishes
/// (no transmission and no dark counts), since E_n is then 0/0.
template <std::floating_point Scalar>
GainErrorProfileT<Scalar> gain_profile(const PhotonDistributionT<Scalar>& source,
                                       const ChannelParamsT<Scalar>& params) {
    params.validate();
    const int n_max = source.n_max();
    const Scalar scale = yield_scale<Scalar>(params.convention);
    const Scalar eta_t = params.eta_total();

    GainErrorProfileT<Scalar> out;
    out.yields.resize(n_max + 1);
    out.gains.resize(n_max + 1);
    out.errors.resize(n_max + 1);

    Scalar error_mass = Scalar(0);
    for (int n = 0; n <= n_max; ++n) {
        const Scalar en = eta_n(eta_t, n);
        const Scalar y = scale * (en + params.p_dark);
        out.yields(n) = y;
        out.gains(n) = y * source.pmf(n);
        if (n == 0) {
            out.errors(n) = Scalar(0.25);
        } else {
            const Scalar numerator =
                scale * (en * params.e_detector + (Scalar(1) - en) * params.p_dark / Scalar(2));
            if (y == Scalar(0)) {
                throw DegenerateError("gain_profile: zero yield leaves the error rate undefined");
            }
            out.errors(n) = numerator / y;
        }
        error_mass += out.gains(n) * out.errors(n);
    }
    out.q_mu = out.gains.sum();
    out.e_mu = out.q_mu > Scalar(0) ? error_mass / out.q_mu : Scalar(0);
    return out;
}

}  // namespace cdqkd
