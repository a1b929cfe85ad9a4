#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "voxweave/error.hpp"
#include "voxweave/rewards.hpp"

using namespace voxweave;

TEST_CASE("length reward examples") {
    CHECK(binary_length_reward({0, 10}, 100) == 0);
    CHECK(binary_length_reward({100, 10}, 100) == 1);
    CHECK(binary_length_reward({101, 10}, 100) == 0);
    CHECK(binary_length_reward({1, 0}, 100) == 1);
    CHECK_THROWS_AS(binary_length_reward({1, 0}, 0), InvalidConfig);
}

TEST_CASE("length reward is a step on [1, max_len]") {
    for (std::size_t max_len = 1; max_len <= 200; ++max_len)
        for (std::size_t t = 0; t <= max_len + 2; ++t)
            REQUIRE(binary_length_reward({t, 0}, max_len) == ((t >= 1 && t <= max_len) ? 1 : 0));
}

TEST_CASE("group advantage examples") {
    const std::vector<double> a{1, 0, 1, 0};
    CHECK(group_advantage(a) == std::vector<double>{1, -1, 1, -1});
    const std::vector<double> c{0.7, 0.7, 0.7};
    CHECK(group_advantage(c) == std::vector<double>{0, 0, 0});
    const std::vector<double> b{2, 0};
    CHECK(group_advantage(b) == std::vector<double>{1, -1});
    CHECK_THROWS_AS(group_advantage(std::vector<double>{1}), GroupTooSmall);
    CHECK_THROWS_AS(group_advantage(std::vector<double>{}), GroupTooSmall);
}

TEST_CASE("group advantage is standardized and order preserving") {
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> size(2, 16);
    std::normal_distribution<double> r(0.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> g(size(rng));
        for (auto& x : g) x = r(rng);
        const auto adv = group_advantage(g);
        const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
        double var = 0;
        for (double x : adv) var += (x - mean) * (x - mean);
        REQUIRE(std::abs(mean) < 1e-9);
        REQUIRE(std::abs(var / adv.size() - 1.0) < 1e-9);
        for (std::size_t p = 0; p < g.size(); ++p)
            for (std::size_t q = 0; q < g.size(); ++q)
                if (g[p] < g[q]) REQUIRE(adv[p] < adv[q]);
    }
}
