#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mcoin/rng.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace mcoin;

TEST_CASE("streams are deterministic and keyed")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    // Any change to seed, node or purpose moves the whole stream.
    Rng base(7, 1, 2);
    Rng seed(8, 1, 2);
    Rng node(7, 2, 2);
    Rng purpose(7, 1, 3);
    Rng again(7, 1, 2);
    int differ_seed = 0, differ_node = 0, differ_purpose = 0;
    for (int i = 0; i < 64; ++i) {
        uint64_t x = base.next();
        differ_seed += x != seed.next();
        differ_node += x != node.next();
        differ_purpose += x != purpose.next();
        CHECK(x == again.next());
    }
    CHECK(differ_seed > 60);
    CHECK(differ_node > 60);
    CHECK(differ_purpose > 60);
}

TEST_CASE("below stays in range and spreads evenly")
{
    Rng r(1234);
    std::vector<int> bucket(8, 0);
    const int draws = 80000;
    for (int i = 0; i < draws; ++i) {
        uint64_t v = r.below(8);
        REQUIRE(v < 8);
        ++bucket[v];
    }
    for (int c : bucket) {
        CHECK(c > draws / 8 - 600);
        CHECK(c < draws / 8 + 600);
    }
    CHECK(Rng(9).below(1) == 0);
}

TEST_CASE("integer log matches the math library")
{
    // The library never links libm; the test uses it as an oracle.
    auto check_at = [](uint32_t u) {
        double want = -std::log(double(u) / 4294967296.0);
        double got = double(neg_ln_q32(u)) / 4294967296.0;
        CHECK(std::fabs(got - want) < 1e-6);
    };
    check_at(1);
    check_at(2);
    check_at(3);
    check_at(0x80000000u);            // exactly ln 2
    check_at(0xFFFFFFFFu);            // ~0
    check_at(0x12345678u);
    Rng r(5);
    for (int i = 0; i < 2000; ++i) {
        uint32_t u = uint32_t(r.next() >> 32);
        if (u == 0) u = 1;
        check_at(u);
    }
}

TEST_CASE("exponential gaps have the requested mean")
{
    Rng r(2026, 3, 1);
    const uint64_t mean = 1000;
    const int n = 200000;
    unsigned long long sum = 0;
    uint64_t biggest = 0;
    for (int i = 0; i < n; ++i) {
        uint64_t t = r.exp_ticks(mean);
        REQUIRE(t >= 1);
        sum += t;
        if (t > biggest) biggest = t;
    }
    double avg = double(sum) / n;
    CHECK(avg > mean * 0.98);
    CHECK(avg < mean * 1.02);
    // Heavy tail actually shows up.
    CHECK(biggest > mean * 5);
}
