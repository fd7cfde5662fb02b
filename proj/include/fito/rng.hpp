#pragma once

// Philox4x32-10 counter-based generator. Every (seed, stream) pair addresses
// an independent sequence, so path i draws the same numbers no matter which
// worker simulates it.

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace fito::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter counter, Key key);

// Uniform random bit generator over one stream.
class PhiloxStream {
public:
    using result_type = std::uint32_t;

    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    Key key_;
    Counter counter_;
    Counter block_{};
    unsigned used_ = 4;
};

// Standard normal draws from one stream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : bits_(seed, stream) {}
    double operator()() { return dist_(bits_); }

private:
    PhiloxStream bits_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace fito::rng
