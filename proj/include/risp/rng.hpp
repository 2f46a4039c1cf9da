#pragma once

#include <cstdint>
#include <random>

#include "risp/signal.hpp"

namespace risp {

/// Deterministic random source. std::mt19937_64 is bit-exact across platforms,
/// but the standard distributions are not, so uniform and normal draws are
/// generated here by hand (53-bit uniforms, Box-Muller normals).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t integer(std::uint64_t bound) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t v = 0;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    Signal normal_signal(std::size_t d) {
        Signal s(d);
        for (double& v : s.data) v = normal();
        return s;
    }

    Signal normal_signal(std::size_t r, std::size_t c) {
        Signal s(r, c);
        for (double& v : s.data) v = normal();
        return s;
    }

    Signal uniform_signal(std::size_t d, double lo, double hi) {
        Signal s(d);
        for (double& v : s.data) v = uniform(lo, hi);
        return s;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace risp
