#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "risp/fft.hpp"
#include "risp/rng.hpp"
#include "risp/signal.hpp"

namespace risp {

enum class PhantomKind { blobs, checkerboard, smooth_random };

inline PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "blobs") return PhantomKind::blobs;
    if (s == "checkerboard") return PhantomKind::checkerboard;
    if (s == "smooth_random") return PhantomKind::smooth_random;
    throw std::invalid_argument("unknown phantom kind: " + s);
}

/// Deterministic synthetic image in [0,1]. blobs = sum of seeded Gaussians,
/// checkerboard = smoothed squares, smooth_random = low-pass filtered noise.
inline Signal make_phantom(PhantomKind kind, std::size_t h, std::size_t w, std::uint64_t seed,
                           std::size_t blob_count = 6) {
    if (h < 4 || w < 4) throw std::invalid_argument("make_phantom: size too small");
    Signal img(h, w);
    Rng rng(seed);
    switch (kind) {
        case PhantomKind::blobs: {
            for (std::size_t b = 0; b < blob_count; ++b) {
                const double cr = rng.uniform(0.15, 0.85) * static_cast<double>(h);
                const double cc = rng.uniform(0.15, 0.85) * static_cast<double>(w);
                const double radius = rng.uniform(0.05, 0.22) * static_cast<double>(std::min(h, w));
                const double amp = rng.uniform(0.35, 1.0);
                for (std::size_t r = 0; r < h; ++r)
                    for (std::size_t c = 0; c < w; ++c) {
                        const double dr = static_cast<double>(r) - cr;
                        const double dc = static_cast<double>(c) - cc;
                        img.at(r, c) += amp * std::exp(-(dr * dr + dc * dc) / (2.0 * radius * radius));
                    }
            }
            break;
        }
        case PhantomKind::checkerboard: {
            const double period = std::max<double>(4.0, static_cast<double>(std::min(h, w)) / 4.0);
            const double sharp = 6.0;
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t c = 0; c < w; ++c) {
                    const double sr = std::sin(2.0 * std::numbers::pi * static_cast<double>(r) / period);
                    const double sc = std::sin(2.0 * std::numbers::pi * static_cast<double>(c) / period);
                    img.at(r, c) = 0.5 + 0.5 * std::tanh(sharp * sr) * std::tanh(sharp * sc);
                }
            break;
        }
        case PhantomKind::smooth_random: {
            Signal noise = rng.normal_signal(h, w);
            Spectrum f = dft2(noise);
            const double cutoff = 0.15;
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t c = 0; c < w; ++c) {
                    const double fr = std::min<double>(r, h - r) / static_cast<double>(h);
                    const double fc = std::min<double>(c, w - c) / static_cast<double>(w);
                    const double rad = std::sqrt(fr * fr + fc * fc);
                    f.at(r, c) *= std::exp(-(rad * rad) / (2.0 * cutoff * cutoff / 9.0));
                }
            img = idft2(f);
            double lo = img[0], hi = img[0];
            for (double v : img.data) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double span = hi > lo ? hi - lo : 1.0;
            for (double& v : img.data) v = (v - lo) / span;
            break;
        }
    }
    return clamp01(img);
}

}  // namespace risp
