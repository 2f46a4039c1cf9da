#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "risp/rng.hpp"
#include "risp/signal.hpp"

// Dense, spatial-domain oracles shared by the test suites. Everything here is
// built from first principles (no calls into the library's FFT/prox paths) so
// the comparisons stay independent.

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector to_eigen(const risp::Signal& s) {
    Vector v(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = s[i];
    return v;
}

inline risp::Signal from_eigen(const Vector& v, std::size_t rows = 0, std::size_t cols = 0) {
    risp::Signal s(static_cast<std::size_t>(v.size()));
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = v[static_cast<Eigen::Index>(i)];
    s.rows = rows;
    s.cols = cols;
    return s;
}

/// Direct spatial-domain circular convolution with a full-grid kernel.
inline risp::Signal circ_conv_direct(const risp::Signal& x, const risp::Signal& kernel) {
    const std::size_t h = x.rows, w = x.cols;
    risp::Signal out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    acc += kernel.at(i, j) * x.at((r + h - i) % h, (c + w - j) % w);
            out.at(r, c) = acc;
        }
    return out;
}

/// Dense matrix of the circular convolution operator (columns = images of
/// basis vectors under the direct spatial convolution).
inline Matrix conv_matrix(const risp::Signal& kernel) {
    const std::size_t d = kernel.size();
    Matrix a(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        risp::Signal e(kernel.rows, kernel.cols);
        e[j] = 1.0;
        const risp::Signal col = circ_conv_direct(e, kernel);
        for (std::size_t i = 0; i < d; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    return a;
}

/// Dense s-fold downsampling matrix (m x d) on an h x w grid.
inline Matrix downsample_matrix(std::size_t h, std::size_t w, std::size_t s) {
    const std::size_t mh = h / s, mw = w / s;
    Matrix m = Matrix::Zero(mh * mw, h * w);
    for (std::size_t r = 0; r < mh; ++r)
        for (std::size_t c = 0; c < mw; ++c)
            m(static_cast<Eigen::Index>(r * mw + c), static_cast<Eigen::Index>(r * s * w + c * s)) = 1.0;
    return m;
}

/// Direct O(d^2) 2-D DFT, unnormalized forward convention.
inline std::vector<std::complex<double>> dft2_direct(const risp::Signal& x) {
    const std::size_t h = x.rows, w = x.cols;
    std::vector<std::complex<double>> out(h * w);
    for (std::size_t k1 = 0; k1 < h; ++k1)
        for (std::size_t k2 = 0; k2 < w; ++k2) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t n1 = 0; n1 < h; ++n1)
                for (std::size_t n2 = 0; n2 < w; ++n2) {
                    const double ang = -2.0 * std::numbers::pi *
                                       (static_cast<double>(k1 * n1) / static_cast<double>(h) +
                                        static_cast<double>(k2 * n2) / static_cast<double>(w));
                    acc += x.at(n1, n2) * std::complex<double>(std::cos(ang), std::sin(ang));
                }
            out[k1 * w + k2] = acc;
        }
    return out;
}

/// Prox of a dense quadratic f(x) = lambda/2 |A x - y|^2:
/// solves (I + eta lambda A^T A) x = z + eta lambda A^T y.
inline Vector dense_prox(const Matrix& a, const Vector& y, double lambda, const Vector& z,
                         double eta) {
    const double mu = eta * lambda;
    const Matrix lhs = Matrix::Identity(a.cols(), a.cols()) + mu * a.transpose() * a;
    const Vector rhs = z + mu * a.transpose() * y;
    return lhs.ldlt().solve(rhs);
}

inline risp::Signal random_image(risp::Rng& rng, std::size_t h, std::size_t w) {
    risp::Signal s = rng.normal_signal(h, w);
    return s;
}

/// Conjugate-symmetric 0/1 sampling mask (one draw per {k,-k} pair, DC kept).
inline risp::Signal symmetric_mask(risp::Rng& rng, std::size_t h, std::size_t w, double fraction) {
    risp::Signal mask(h, w);
    mask.at(0, 0) = 1.0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            if (r == 0 && c == 0) continue;
            const std::size_t rr = (h - r) % h;
            const std::size_t cc = (w - c) % w;
            if (std::make_pair(rr, cc) < std::make_pair(r, c)) {
                mask.at(r, c) = mask.at(rr, cc);
                continue;
            }
            mask.at(r, c) = rng.uniform() < fraction ? 1.0 : 0.0;
        }
    return mask;
}

}  // namespace oracle
