#include <cmath>
#include <set>

#include "doctest.h"
#include "fito/rng.hpp"

using namespace fito::rng;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32_10).
TEST_CASE("Philox4x32-10 known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    PhiloxStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<std::uint32_t> va, vb, vc, vd;
    for (int i = 0; i < 64; ++i) {
        va.push_back(a());
        vb.push_back(b());
        vc.push_back(c());
        vd.push_back(d());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(std::set<std::uint32_t>(va.begin(), va.end()).size() == va.size());
}

TEST_CASE("normal stream moments") {
    NormalStream z(1, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = z();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    // Standard errors 1/sqrt(n) and sqrt(2/n).
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}
