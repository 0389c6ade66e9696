#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "rlad/chain.hpp"
#include "rlad/error.hpp"

using namespace rlad;

TEST_CASE("transition matrix entries")
{
    const TransitionMatrix two = build_q(ChainParams(2, 0.0));
    CHECK(two.states() == 2);
    CHECK(two(0, 0) == 0.0);
    CHECK(two(0, 1) == 1.0);
    CHECK(two(1, 0) == 1.0);
    CHECK(two(1, 1) == 0.0);

    const TransitionMatrix three = build_q(ChainParams(3, 0.0));  // M = 3
    CHECK(three(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(three(1, 1) == 0.0);
    CHECK(three(1, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(three(1, 3) == 0.0);

    for (std::size_t n : {2u, 5u, 20u}) {
        for (double alpha : {0.0, 0.3, 0.9}) {
            const ChainParams p(n, alpha);
            const auto q = build_q(p);
            const std::size_t m = p.links();
            CHECK(m == n * (n - 1) / 2);
            for (std::size_t k = 0; k <= m; ++k) {
                double row = 0.0;
                for (std::size_t j = 0; j <= m; ++j) {
                    row += q(k, j);
                    if (j + 1 < k || j > k + 1) CHECK(q(k, j) == 0.0);
                }
                CHECK(std::abs(row - 1.0) < 1e-14);
                CHECK(q(k, k) == doctest::Approx(alpha));
            }
            CHECK(q(0, 1) == doctest::Approx(1.0 - alpha));
            CHECK(q(m, m - 1) == doctest::Approx(1.0 - alpha));
        }
    }
}

TEST_CASE("parameter validation")
{
    CHECK_THROWS_AS(ChainParams(1, 0.0), DomainError);
    CHECK_THROWS_AS(ChainParams(5, 1.0), DomainError);
    CHECK_THROWS_AS(ChainParams(5, -0.1), DomainError);
    CHECK_THROWS_AS(ChainParams::from_links(0, 0.0), DomainError);
    CHECK(ChainParams::from_links(3, 0.0).nodes() == 3);
    CHECK(ChainParams::from_links(2, 0.0).nodes() == 0);
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.6, 0.0, 1.0;
    CHECK_THROWS_AS(TransitionMatrix{bad}, DomainError);
    bad << 1.5, -0.5, 0.0, 1.0;
    CHECK_THROWS_AS(TransitionMatrix{bad}, DomainError);
}

TEST_CASE("matrix powers")
{
    const auto q1 = build_q(ChainParams::from_links(1, 0.0));
    const auto id = n_step(q1, 0);
    CHECK(id.matrix().isIdentity());
    CHECK(n_step(q1, 2).matrix().isIdentity());

    const auto q2 = build_q(ChainParams::from_links(2, 0.0));
    const auto p2 = n_step(q2, 2);
    CHECK(p2(0, 0) == doctest::Approx(0.5));
    CHECK(p2(0, 1) == doctest::Approx(0.0));
    CHECK(p2(0, 2) == doctest::Approx(0.5));

    const auto q = build_q(ChainParams(8, 0.2));
    Eigen::MatrixXd direct = Eigen::MatrixXd::Identity(q.matrix().rows(), q.matrix().cols());
    for (int k = 0; k < 37; ++k) direct = direct * q.matrix();
    const auto fast = n_step(q, 37);
    CHECK((fast.matrix() - direct).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((fast.matrix().array() >= 0.0).all());
    for (Eigen::Index k = 0; k < fast.matrix().rows(); ++k) {
        CHECK(std::abs(fast.matrix().row(k).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("stationary law is binomial and invariant")
{
    const auto pi2 = stationary(ChainParams::from_links(2, 0.0));
    CHECK(pi2 == std::vector<double>{0.25, 0.5, 0.25});

    const auto pi = stationary(ChainParams(20, 0.0));
    double mean = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) mean += k * pi[k];
    CHECK(std::abs(mean - 95.0) < 1e-10);
    const auto ref = oracle::binomial_pmf(190, 0.5);
    for (std::size_t k = 0; k < pi.size(); ++k) CHECK(std::abs(pi[k] - ref[k]) < 1e-15);

    for (double alpha : {0.0, 0.3}) {
        for (std::size_t n : {3u, 10u, 20u}) {
            const ChainParams p(n, alpha);
            const auto s = stationary(p);
            const auto q = build_q(p);
            CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) < 1e-12);
            for (std::size_t j = 0; j < s.size(); ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < s.size(); ++k) v += s[k] * q(k, j);
                CHECK(std::abs(v - s[j]) < 1e-12);
            }
            // detailed balance
            for (std::size_t k = 0; k + 1 < s.size(); ++k) {
                const double flow = s[k] * q(k, k + 1);
                CHECK(std::abs(flow - s[k + 1] * q(k + 1, k)) <= 1e-11 * flow);
            }
        }
    }
}

TEST_CASE("mean recursion of the delayed Ehrenfest chain")
{
    for (double alpha : {0.0, 0.25, 0.6}) {
        const ChainParams p(9, alpha);
        const auto q = build_q(p);
        const double m = static_cast<double>(p.links());
        for (std::size_t k = 1; k < p.links(); ++k) {
            double next = 0.0;
            for (std::size_t j = 0; j <= p.links(); ++j) next += q(k, j) * j;
            const double kd = static_cast<double>(k);
            CHECK(next == doctest::Approx(kd + (1 - alpha) * (1 - 2 * kd / m)).epsilon(1e-14));
        }
    }
}

TEST_CASE("degree distribution")
{
    CHECK(degree_distribution(ChainParams(3, 0.0)) == std::vector<double>{0.25, 0.5, 0.25});
    const auto d = degree_distribution(ChainParams(20, 0.0));
    CHECK(d.size() == 20);
    double mean = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) mean += k * d[k];
    CHECK(std::abs(mean - 9.5) < 1e-12);
    CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) < 1e-14);
    CHECK_THROWS_AS(degree_distribution(ChainParams::from_links(2, 0.0)), DomainError);
}

TEST_CASE("spectral decomposition")
{
    const auto s1 = spectral(build_q(ChainParams::from_links(1, 0.0)));
    CHECK(s1.values(0) == doctest::Approx(-1.0));
    CHECK(s1.values(1) == doctest::Approx(1.0));

    // characteristic polynomial of [[0,1,0],[1/2,0,1/2],[0,1,0]] is -l^3 + l
    const auto s2 = spectral(build_q(ChainParams::from_links(2, 0.0)));
    CHECK(s2.values(0) == doctest::Approx(-1.0));
    CHECK(std::abs(s2.values(1)) < 1e-14);
    CHECK(s2.values(2) == doctest::Approx(1.0));

    for (std::size_t m : {1u, 2u, 6u, 15u, 28u}) {
        for (double alpha : {0.0, 0.4}) {
            const auto q = build_q(ChainParams::from_links(m, alpha));
            const auto s = spectral(q);
            CHECK(s.reconstruction_error <= 1e-10);
            CHECK((s.values.array() >= -1.0 - 1e-12).all());
            CHECK((s.values.array() <= 1.0 + 1e-12).all());
            // Ehrenfest eigenvalues: alpha + (1 - alpha)(1 - 2k/M)
            for (std::size_t k = 0; k <= m; ++k) {
                const double lam = alpha + (1 - alpha) * (1 - 2.0 * k / m);
                CHECK(std::abs(s.values(static_cast<Eigen::Index>(m - k)) - lam) < 1e-10);
            }
            const Eigen::Index top = s.values.size() - 1;
            const Eigen::VectorXd v = s.right.col(top) / s.right(0, top);
            CHECK((v.array() - 1.0).abs().maxCoeff() < 1e-8);
        }
    }
    CHECK_THROWS_AS(spectral(build_q(ChainParams(20, 0.0))), ConditioningError);
}
