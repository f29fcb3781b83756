#include "cdqkd/keyrates.hpp"

#include <cmath>

namespace cdqkd {

std::string to_string(RateKind k) {
    switch (k) {
        case RateKind::Ideal: return "ideal";
        case RateKind::Gllp: return "gllp";
        case RateKind::Decoy: return "decoy";
        case RateKind::Cd: return "cd";
    }
    return "unknown";
}

void MuGrid::validate() const {
    if (!(min > 0.0 && max <= 2.0 && min <= max)) {
        throw DomainError("mu grid must satisfy 0 < min <= max <= 2");
    }
    if (points < 1) {
        throw DomainError("mu grid needs at least one point");
    }
}

std::vector<double> MuGrid::values() const {
    validate();
    std::vector<double> v(points);
    if (points == 1) {
        v[0] = min;
        return v;
    }
    const double step = (max - min) / (points - 1);
    for (int i = 0; i < points; ++i) {
        v[i] = min + step * i;
    }
    v.back() = max;
    return v;
}

Rate rate_at(RateKind kind, double mu, const ChannelParams& channel, const RateSettings& settings) {
    const PhotonDistribution source(mu);
    const auto profile = gain_profile(source, channel);
    switch (kind) {
        case RateKind::Ideal: return rate_ideal(std::clamp(profile.e_mu, 0.0, 1.0));
        case RateKind::Gllp:
            return profile.q(1) > 0.0 ? rate_gllp(profile, settings.q, settings.f_ec) : Rate{};
        case RateKind::Decoy: return rate_decoy(profile, settings.q, settings.f_ec);
        case RateKind::Cd: return rate_cd(profile, cd_coefficients(), settings.f_ec);
    }
    return {};
}

OptimalMu optimal_mu(RateKind kind, const ChannelParams& channel, const MuGrid& grid,
                     const RateSettings& settings) {
    const auto mus = grid.values();
    const auto rate = [&](double mu) { return rate_at(kind, mu, channel, settings).value; };

    std::size_t best = 0;
    double best_rate = rate(mus[0]);
    for (std::size_t i = 1; i < mus.size(); ++i) {
        const double r = rate(mus[i]);
        if (r > best_rate) {
            best = i;
            best_rate = r;
        }
    }
    if (!(best_rate > 0.0)) {
        return {mus[0], 0.0, false};
    }
    if (mus.size() == 1) {
        return {mus[0], best_rate, true};
    }

    // Golden-section search inside the two grid cells around the best point.
    double a = mus[best == 0 ? 0 : best - 1];
    double b = mus[best + 1 == mus.size() ? best : best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = rate(x1);
    double f2 = rate(x2);
    while (b - a > 1e-10) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = rate(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = rate(x2);
        }
    }
    const double refined = 0.5 * (a + b);
    const double refined_rate = rate(refined);
    if (refined_rate > best_rate) {
        return {refined, refined_rate, true};
    }
    return {mus[best], best_rate, true};
}

}  // namespace cdqkd
