#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "risp/rng.hpp"
#include "risp/signal.hpp"

namespace risp {

/// Normalized Gaussian stencil of odd-preferred size; sum is exactly 1.
inline Signal gaussian_kernel(std::size_t size, double std_dev) {
    if (size == 0 || !(std_dev > 0.0))
        throw std::invalid_argument("gaussian_kernel: bad size or std");
    Signal k(size, size);
    const double c = (static_cast<double>(size) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t cc = 0; cc < size; ++cc) {
            const double dr = static_cast<double>(r) - c;
            const double dc = static_cast<double>(cc) - c;
            const double v = std::exp(-(dr * dr + dc * dc) / (2.0 * std_dev * std_dev));
            k.at(r, cc) = v;
            total += v;
        }
    for (double& v : k.data) v /= total;
    return k;
}

inline Signal uniform_kernel(std::size_t size) {
    if (size == 0) throw std::invalid_argument("uniform_kernel: bad size");
    Signal k(size, size);
    const double v = 1.0 / static_cast<double>(size * size);
    for (double& e : k.data) e = v;
    return k;
}

/// Seeded random-walk motion kernel: visit counts of a walk across the
/// stencil, normalized to sum 1. Nonnegative by construction.
inline Signal motion_kernel(std::size_t size, std::uint64_t seed) {
    if (size == 0) throw std::invalid_argument("motion_kernel: bad size");
    Signal k(size, size);
    Rng rng(seed);
    double r = (static_cast<double>(size) - 1.0) / 2.0;
    double c = r;
    double vr = rng.normal() * 0.5;
    double vc = rng.normal() * 0.5;
    const std::size_t steps = size * size * 4;
    for (std::size_t s = 0; s < steps; ++s) {
        const auto ir = static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(size - 1)));
        const auto ic = static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(size - 1)));
        k.at(ir, ic) += 1.0;
        vr = 0.9 * vr + 0.3 * rng.normal();
        vc = 0.9 * vc + 0.3 * rng.normal();
        r = std::clamp(r + vr, 0.0, static_cast<double>(size - 1));
        c = std::clamp(c + vc, 0.0, static_cast<double>(size - 1));
    }
    double total = 0.0;
    for (double v : k.data) total += v;
    for (double& v : k.data) v /= total;
    return k;
}

inline Signal delta_kernel(std::size_t size = 1) {
    Signal k(size, size);
    k.at(size / 2, size / 2) = 1.0;
    return k;
}

}  // namespace risp
