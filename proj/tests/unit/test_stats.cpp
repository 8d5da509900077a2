#include "oracles.hpp"

#include "txnet/error.hpp"
#include "txnet/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace txnet;

TEST_SUITE("stats") {

TEST_CASE("bh examples") {
    CHECK(stats::bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04}) == std::vector<double>(4, 0.04));
    CHECK(stats::bh_adjust(std::vector<double>{1, 1, 1}) == std::vector<double>(3, 1.0));
    CHECK(stats::bh_adjust(std::vector<double>{0.03}) == std::vector<double>{0.03});
    CHECK(stats::bh_adjust(std::vector<double>{}).empty());
}

TEST_CASE("bh matches the direct formula") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> p(1 + rep * 7);
        for (auto& x : p) {
            x = rep % 3 == 0 ? std::pow(u(rng), 6) : u(rng);
        }
        if (rep % 5 == 0 && p.size() > 3) {
            p[1] = p[2] = p[3]; // ties
        }
        CHECK(stats::bh_adjust(p) == oracle::bh(p));
    }
}

TEST_CASE("bh q >= p and monotone in p") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> p(300);
    for (auto& x : p) {
        x = u(rng) * u(rng);
    }
    const auto q = stats::bh_adjust(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(q[i] >= p[i]);
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p[i] < p[j]) {
                CHECK(q[i] <= q[j]);
            }
        }
    }
}

TEST_CASE("bh rejects out-of-range p") {
    CHECK_THROWS_AS(stats::bh_adjust(std::vector<double>{0.5, 1.5}), Error);
    CHECK_THROWS_AS(stats::bh_adjust(std::vector<double>{-0.1}), Error);
    CHECK_THROWS_AS(stats::bh_adjust(std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("distribution tails") {
    CHECK(stats::chi2_upper_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(stats::chi2_upper_tail(0, 1) == 1.0);
    CHECK(stats::chi2_upper_tail(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-12));
    // df = 2 has the closed form exp(-x/2)
    CHECK(stats::chi2_upper_tail(7.3, 2) == doctest::Approx(std::exp(-3.65)).epsilon(1e-13));
    CHECK(stats::t_two_sided(2.2281388519862747, 10) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(stats::t_quantile(0.975, 10) == doctest::Approx(2.2281388519862747).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
}

TEST_CASE("quantile, median and mad") {
    CHECK(stats::quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK(stats::quantile({5}, 0.3) == 5);
    CHECK(stats::median({3, 1, 2}) == 2);
    CHECK(stats::median({4, 1, 2, 3}) == 2.5);
    const std::vector<double> v{1, 2, 3, 4, 100};
    CHECK(stats::mad(v) == doctest::Approx(1.4826));
}

}
