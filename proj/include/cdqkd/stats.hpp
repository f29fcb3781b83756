#pragma once

// Photon statistics primitives: Poisson emission, binary entropy,
// balanced beam-splitter routing and the coincidence-detection credit
// weights. Everything here is pure and header-only; the floating-point
// routines are templated on the scalar type.

#include <Eigen/Core>
#include <boost/rational.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "cdqkd/errors.hpp"

namespace cdqkd {

using Rational = boost::rational<std::int64_t>;

template <std::floating_point Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// e^-mu mu^n / n!, evaluated in log space so large n does not overflow.
template <std::floating_point Scalar>
Scalar poisson_pmf(Scalar mu, int n) {
    if (!(mu >= Scalar(0)) || n < 0) {
        throw DomainError("poisson_pmf: requires mu >= 0 and n >= 0");
    }
    if (mu == Scalar(0)) {
        return n == 0 ? Scalar(1) : Scalar(0);
    }
    using std::exp;
    using std::lgamma;
    using std::log;
    const Scalar log_p = -mu + Scalar(n) * log(mu) - lgamma(Scalar(n) + Scalar(1));
    return exp(log_p);
}

/// Default truncation order for photon-number series.
///
/// 20 covers every mean photon number up to 1 with a tail below 1e-19;
/// larger means scale the order so the tail stays below 1e-12.
inline int default_n_max(double mu) {
    if (mu <= 1.0) {
        return 20;
    }
    return static_cast<int>(std::ceil(20.0 * mu));
}

/// Poissonian photon-number distribution of a phase-randomized weak coherent pulse,
/// truncated at n_max.
template <std::floating_point Scalar>
class PhotonDistributionT {
  public:
    PhotonDistributionT(Scalar mu, int n_max) : mu_(mu), n_max_(n_max) {
        if (!(mu >= Scalar(0))) {
            throw DomainError("PhotonDistribution: mean photon number must be >= 0");
        }
        if (n_max < 3) {
            throw DomainError("PhotonDistribution: truncation order must be >= 3");
        }
        pmf_.resize(n_max + 1);
        for (int n = 0; n <= n_max; ++n) {
            pmf_(n) = poisson_pmf(mu, n);
        }
    }

    explicit PhotonDistributionT(Scalar mu)
        : PhotonDistributionT(mu, default_n_max(static_cast<double>(mu))) {}

    Scalar mu() const { return mu_; }
    int n_max() const { return n_max_; }
    const ArrayX<Scalar>& pmf() const { return pmf_; }
    Scalar pmf(int n) const { return n >= 0 && n <= n_max_ ? pmf_(n) : Scalar(0); }
    Scalar captured_mass() const { return pmf_.sum(); }

  private:
    Scalar mu_;
    int n_max_;
    ArrayX<Scalar> pmf_;
};

using PhotonDistribution = PhotonDistributionT<double>;

/// Shannon binary entropy in bits, with 0 log 0 = 0.
///
/// Inputs within 1e-12 outside [0, 1] are treated as the nearest endpoint
/// (ratios of gains drift slightly past the boundary).
template <std::floating_point Scalar>
Scalar binary_entropy(Scalar x) {
    constexpr Scalar tol = Scalar(1e-12);
    if (!(x >= -tol && x <= Scalar(1) + tol)) {
        throw DomainError("binary_entropy: argument outside [0, 1]");
    }
    if (x <= Scalar(0) || x >= Scalar(1)) {
        return Scalar(0);
    }
    using std::log2;
    return -x * log2(x) - (Scalar(1) - x) * log2(Scalar(1) - x);
}

// ---------------------------------------------------------------------------
// Balanced beam splitter
// ---------------------------------------------------------------------------

/// One way an n-photon Fock state can split at a balanced beam splitter.
struct SplittingEntry {
    int transmitted;
    int reflected;
    Rational probability;

    friend bool operator==(const SplittingEntry&, const SplittingEntry&) = default;
};

struct SplittingTable {
    int n;
    std::vector<SplittingEntry> entries;
};

inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0;
    }
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

/// |C_k^n|^2 = binom(n, k) / 2^n for k photons leaving the transmitted port.
inline Rational splitting_probability(int n, int k) {
    if (n < 1 || n > 60) {
        throw DomainError("splitting_probability: photon count must lie in [1, 60]");
    }
    if (k < 0 || k > n) {
        throw DomainError("splitting_probability: transmitted count must lie in [0, n]");
    }
    return Rational(binomial(n, k), std::int64_t{1} << n);
}

/// All n + 1 routing outcomes, ordered by transmitted count.
inline SplittingTable splitting_table(int n) {
    SplittingTable table{n, {}};
    table.entries.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        table.entries.push_back({k, n - k, splitting_probability(n, k)});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Coincidence-detection credit weights
// ---------------------------------------------------------------------------

/// Fraction of 1-, 2- and 3-photon gains credited to the key by the
/// coincidence-detection protocol. The basis-sifting factor is folded in.
struct CdCoefficients {
    Rational c1;
    Rational c2;
    Rational c3;

    friend bool operator==(const CdCoefficients&, const CdCoefficients&) = default;

    template <std::floating_point Scalar = double>
    Scalar weight(int n) const {
        const Rational& c = n == 1 ? c1 : n == 2 ? c2 : c3;
        if (n < 1 || n > 3) {
            throw DomainError("CdCoefficients: weights exist for n = 1, 2, 3 only");
        }
        return Scalar(c.numerator()) / Scalar(c.denominator());
    }
};

/// A single photon lands in the right basis half the time. A photon pair
/// contributes when it splits (1/2) plus the one bunched case that exits
/// toward the correct basis (1/4). A triple contributes whenever at least
/// one photon reaches the correct basis: both mixed splits (3/8 + 3/8) and
/// one bunched case (1/8).
inline CdCoefficients cd_coefficients() {
    return {Rational(1, 2), Rational(3, 4), Rational(7, 8)};
}

inline std::string to_string(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace cdqkd
