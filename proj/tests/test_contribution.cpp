#include "dpe/contribution.hpp"
#include "dpe/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dpe;

TEST_CASE("norms: zeros give zero scores") {
    Tensor3 q(2, 5, 8), k(2, 5, 8);
    const auto p = collect_norms(q, k);
    CHECK(p.heads == 2);
    CHECK(p.pairs == 4);
    CHECK(p.sample_count == 5);
    for (double s : p.scores) CHECK(s == 0.0);
}

TEST_CASE("norms: single position (3,4) x (0,1) scores 5") {
    Tensor3 q(1, 1, 2), k(1, 1, 2);
    q.at(0, 0, 0) = 3;
    q.at(0, 0, 1) = 4;
    k.at(0, 0, 1) = 1;
    CHECK(collect_norms(q, k).score(0, 0) == 5.0);
    CHECK(collect_norms(q, k, NormAveraging::Joint).score(0, 0) == 5.0);
}

TEST_CASE("norms: brute-force oracle, both averaging orders") {
    std::mt19937_64 rng(11);
    const auto q = oracle::random_tensor(rng, 2, 16, 8);
    const auto k = oracle::random_tensor(rng, 2, 16, 8);
    const auto fac = collect_norms(q, k);
    const auto joint = collect_norms(q, k, NormAveraging::Joint);
    for (std::size_t h = 0; h < 2; ++h) {
        for (int j = 0; j < 4; ++j) {
            long double mq = 0, mk = 0, mj = 0;
            for (std::size_t m = 0; m < 16; ++m) {
                const long double nq = std::hypot((long double)q.at(h, m, 2 * j), (long double)q.at(h, m, 2 * j + 1));
                const long double nk = std::hypot((long double)k.at(h, m, 2 * j), (long double)k.at(h, m, 2 * j + 1));
                mq += nq / 16;
                mk += nk / 16;
                mj += nq * nk / 16;
            }
            CHECK(fac.score(h, j) == doctest::Approx(static_cast<double>(mq * mk)).epsilon(1e-12));
            CHECK(joint.score(h, j) == doctest::Approx(static_cast<double>(mj)).epsilon(1e-12));
        }
    }
}

TEST_CASE("norms: errors") {
    CHECK_THROWS_AS(collect_norms(Tensor3(1, 0, 4), Tensor3(1, 0, 4)), ValidationError);
    CHECK_THROWS_AS(collect_norms(Tensor3(1, 2, 4), Tensor3(1, 3, 4)), ValidationError);
    CHECK_THROWS_AS(collect_norms(Tensor3(1, 2, 3), Tensor3(1, 2, 3)), ValidationError);
}

TEST_CASE("top-k: ties go to the lower index") {
    NormProfile p;
    p.heads = 1;
    p.pairs = 4;
    p.scores = {1, 9, 9, 3};
    p.sample_count = 1;
    CHECK(select_key_dims(p, 2) == std::vector<std::vector<int>>{{1, 2}});
    CHECK(select_key_dims(p, 1) == std::vector<std::vector<int>>{{1}});
    CHECK(select_key_dims(p, 0) == std::vector<std::vector<int>>{{}});
    CHECK(select_key_dims(p, 4) == std::vector<std::vector<int>>{{0, 1, 2, 3}});
    CHECK_THROWS_AS(select_key_dims(p, 5), ValidationError);
    CHECK_THROWS_AS(select_key_dims(p, -1), ValidationError);
}

TEST_CASE("top-k: matches exhaustive sort on random integer-valued profiles") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> val(0, 5);  // plenty of ties
    for (int rep = 0; rep < 100; ++rep) {
        NormProfile p;
        p.heads = 3;
        p.pairs = 16;
        p.sample_count = 1;
        for (int i = 0; i < 48; ++i) p.scores.push_back(val(rng));
        const int k = rep % 17;
        const auto got = select_key_dims(p, k);
        for (std::size_t h = 0; h < 3; ++h) {
            std::vector<double> row(p.scores.begin() + static_cast<long>(h * 16), p.scores.begin() + static_cast<long>(h * 16 + 16));
            CHECK(got[h] == oracle::top_k(row, k));
        }
    }
}
