#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "risp/signal.hpp"

namespace risp {

namespace detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 Cooley-Tukey, unnormalized, sign = -1 forward.
inline void fft_radix2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

/// Direct O(n^2) transform for non-power-of-two lengths; fine at desk scale.
inline void dft_direct(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang =
                sign * 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
            out[k] += a[j] * cplx(std::cos(ang), std::sin(ang));
        }
    }
    a = std::move(out);
}

inline void transform_1d(std::vector<cplx>& a, int sign) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_radix2(a, sign);
    else
        dft_direct(a, sign);
}

/// Row-column transform of a rows x cols grid held row-major in `a`.
inline void transform_2d(std::vector<cplx>& a, std::size_t rows, std::size_t cols, int sign) {
    std::vector<cplx> line;
    line.reserve(std::max(rows, cols));
    for (std::size_t r = 0; r < rows; ++r) {
        line.assign(a.begin() + r * cols, a.begin() + (r + 1) * cols);
        transform_1d(line, sign);
        std::copy(line.begin(), line.end(), a.begin() + r * cols);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        line.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) line[r] = a[r * cols + c];
        transform_1d(line, sign);
        for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] = line[r];
    }
}

}  // namespace detail

/// 2-D DFT, unnormalized forward convention: constant image of value c maps to
/// a DC bin of n*c. Requires a shaped signal.
inline Spectrum dft2(const Signal& s) {
    require_shape(s, "dft2");
    Spectrum out(s.rows, s.cols);
    for (std::size_t i = 0; i < s.size(); ++i) out.data[i] = {s[i], 0.0};
    detail::transform_2d(out.data, s.rows, s.cols, -1);
    return out;
}

/// Inverse 2-D DFT (1/d scaling). Returns the real part; for spectra of real
/// signals the imaginary part is roundoff only.
inline Signal idft2(const Spectrum& f) {
    std::vector<detail::cplx> a = f.data;
    detail::transform_2d(a, f.rows, f.cols, +1);
    Signal out(f.rows, f.cols);
    const double inv = 1.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real() * inv;
    return out;
}

/// Inverse 2-D DFT keeping the complex result.
inline Spectrum idft2_complex(const Spectrum& f) {
    Spectrum out = f;
    detail::transform_2d(out.data, f.rows, f.cols, +1);
    const double inv = 1.0 / static_cast<double>(f.size());
    for (auto& v : out.data) v *= inv;
    return out;
}

/// Embeds a small centered kernel stencil on an h x w grid, rolled so the
/// kernel center lands at index (0,0). Symmetric kernels then get real spectra.
inline Signal embed_kernel(const Signal& kernel, std::size_t h, std::size_t w) {
    require_shape(kernel, "embed_kernel");
    if (kernel.rows > h || kernel.cols > w)
        throw ShapeError("embed_kernel: kernel larger than target grid");
    Signal out(h, w);
    const std::size_t cr = kernel.rows / 2;
    const std::size_t cc = kernel.cols / 2;
    for (std::size_t r = 0; r < kernel.rows; ++r) {
        for (std::size_t c = 0; c < kernel.cols; ++c) {
            const std::size_t rr = (r + h - cr) % h;
            const std::size_t cc2 = (c + w - cc) % w;
            out.at(rr, cc2) += kernel.at(r, c);
        }
    }
    return out;
}

/// Circular (periodic-boundary) convolution of two same-shape signals via DFT.
inline Signal circ_conv(const Signal& s, const Signal& kernel) {
    require_shape(s, "circ_conv");
    require_shape(kernel, "circ_conv");
    if (s.rows != kernel.rows || s.cols != kernel.cols)
        throw ShapeError("circ_conv: shape mismatch");
    Spectrum fs = dft2(s);
    const Spectrum fk = dft2(kernel);
    for (std::size_t i = 0; i < fs.size(); ++i) fs.data[i] *= fk.data[i];
    return idft2(fs);
}

}  // namespace risp
