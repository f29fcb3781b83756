#include <doctest.h>

#include <random>

#include "cdqkd/stats.hpp"

using namespace cdqkd;

TEST_CASE("poisson_pmf reference values") {
    CHECK(poisson_pmf(0.0, 0) == 1.0);
    CHECK(poisson_pmf(0.0, 3) == 0.0);
    // 40-digit evaluations of e^-0.41 and e^-0.41 * 0.41^2 / 2.
    CHECK(poisson_pmf(0.41, 0) == doctest::Approx(0.66365025013631936591).epsilon(1e-14));
    CHECK(poisson_pmf(0.41, 2) == doctest::Approx(0.05577980352395764270).epsilon(1e-14));
}

TEST_CASE("poisson_pmf rejects negative arguments") {
    CHECK_THROWS_AS(poisson_pmf(-0.1, 0), DomainError);
    CHECK_THROWS_AS(poisson_pmf(0.1, -1), DomainError);
}

TEST_CASE("poisson_pmf stays finite for large n") {
    const double p = poisson_pmf(50.0, 400);
    CHECK(std::isfinite(p));
    CHECK(p >= 0.0);
    CHECK(poisson_pmf(50.0, 50) == doctest::Approx(0.05632501556));
}

TEST_CASE("poisson_pmf ratio recurrence") {
    for (double mu : {0.01, 0.13, 0.41, 1.0, 1.9, 7.5}) {
        for (int n = 0; n < 40; ++n) {
            const double a = poisson_pmf(mu, n);
            const double b = poisson_pmf(mu, n + 1);
            if (a < 1e-300) continue;
            CHECK(b / a == doctest::Approx(mu / (n + 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("PhotonDistribution captures the mass") {
    for (double mu : {0.0, 0.05, 0.41, 1.0, 2.0, 3.5}) {
        const PhotonDistribution d(mu);
        CHECK(d.n_max() >= 20);
        CHECK((d.pmf() >= 0.0).all());
        CHECK(d.captured_mass() <= 1.0 + 1e-15);
        CHECK(d.captured_mass() >= 1.0 - 1e-12);
    }
    CHECK_THROWS_AS(PhotonDistribution(0.3, 2), DomainError);
    CHECK_THROWS_AS(PhotonDistribution(-1.0), DomainError);
}

TEST_CASE("binary_entropy reference values") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(0.49991595816452799564).epsilon(1e-14));
}

TEST_CASE("binary_entropy domain and clamping") {
    CHECK(binary_entropy(-5e-13) == 0.0);
    CHECK(binary_entropy(1.0 + 5e-13) == 0.0);
    CHECK_THROWS_AS(binary_entropy(-1e-9), DomainError);
    CHECK_THROWS_AS(binary_entropy(1.001), DomainError);
    CHECK_THROWS_AS(binary_entropy(std::nan("")), DomainError);
}

TEST_CASE("binary_entropy is symmetric and concave") {
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-12));
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        CHECK(binary_entropy(0.5 * (a + b)) >=
              0.5 * (binary_entropy(a) + binary_entropy(b)) - 1e-15);
    }
}

TEST_CASE("splitting probabilities of the two- and three-photon tables") {
    CHECK(splitting_probability(2, 1) == Rational(1, 2));
    CHECK(splitting_probability(2, 0) == Rational(1, 4));
    CHECK(splitting_probability(2, 2) == Rational(1, 4));
    CHECK(splitting_probability(3, 1) == Rational(3, 8));
    CHECK(splitting_probability(3, 2) == Rational(3, 8));
    CHECK(splitting_probability(3, 0) == Rational(1, 8));
    CHECK(splitting_probability(3, 3) == Rational(1, 8));
    CHECK_THROWS_AS(splitting_probability(2, 3), DomainError);
    CHECK_THROWS_AS(splitting_probability(0, 0), DomainError);
}

TEST_CASE("splitting tables are complete and normalized") {
    for (int n = 1; n <= 10; ++n) {
        const auto t = splitting_table(n);
        CHECK(t.entries.size() == static_cast<std::size_t>(n + 1));
        Rational total(0);
        for (const auto& e : t.entries) {
            CHECK(e.transmitted + e.reflected == n);
            total += e.probability;
        }
        CHECK(total == Rational(1));
    }
}

TEST_CASE("cd_coefficients are the exact credit weights") {
    const auto c = cd_coefficients();
    CHECK(c.c1 == Rational(1, 2));
    CHECK(c.c2 == Rational(3, 4));
    CHECK(c.c3 == Rational(7, 8));
    CHECK(c.weight(2) == 0.75);
    CHECK_THROWS_AS(c.weight(4), DomainError);
}

TEST_CASE("cd_coefficients follow from the splitting tables") {
    // A split pulse always leaves a photon in the correct basis; a bunched
    // pulse exits whole through one of the two arms, so only one of the two
    // bunched entries contributes.
    const auto c = cd_coefficients();
    const Rational expected[] = {c.c1, c.c2, c.c3};
    for (int n = 1; n <= 3; ++n) {
        Rational credit(0);
        for (const auto& e : splitting_table(n).entries) {
            const bool bunched = e.transmitted == 0 || e.reflected == 0;
            credit += bunched ? e.probability / 2 : e.probability;
        }
        CHECK(credit == expected[n - 1]);
    }
}
