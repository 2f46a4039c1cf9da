#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "risp/fft.hpp"
#include "risp/signal.hpp"

namespace risp {

struct FidelityConstants {
    double lipschitz_grad = 0.0;  // L_f
    double lipschitz_hess = 0.0;  // rho_f
    bool convex = true;
};

/// Data-fidelity term f with gradient and proximal map. The weight lambda is
/// part of f itself: value() and grad() are those of f = lambda * f0, and
/// prox(z, eta) solves argmin_x 1/2 |x - z|^2 + eta f(x).
class Fidelity {
public:
    virtual ~Fidelity() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(const Signal& x) const = 0;
    virtual Signal grad(const Signal& x) const = 0;
    virtual Signal prox(const Signal& z, double eta) const = 0;
    virtual FidelityConstants constants() const = 0;
    virtual double weight() const = 0;
};

/// First-order prox optimality residual |(x - z)/eta + grad f(x)|.
inline double prox_residual(const Fidelity& fid, const Signal& z, double eta, const Signal& x) {
    Signal r = (1.0 / eta) * (x - z);
    r += fid.grad(x);
    return norm(r);
}

// ---------------------------------------------------------------------------
// Deblurring: f = lambda/2 |A x - y|^2 with A the circular convolution by a
// registered kernel, diagonalized by the 2-D DFT. Gradient and prox are exact
// in the spectrum domain.
// ---------------------------------------------------------------------------

class DeblurFidelity final : public Fidelity {
public:
    /// `kernel` is the full-grid embedded kernel (see embed_kernel); `y` the
    /// blurred observation on the same grid.
    DeblurFidelity(const Signal& kernel, Signal y, double lambda, double noise_sigma)
        : y_(std::move(y)), lambda_(lambda), noise_sigma_(noise_sigma) {
        require_shape(y_, "DeblurFidelity");
        if (kernel.rows != y_.rows || kernel.cols != y_.cols)
            throw ShapeError("DeblurFidelity: kernel/observation shape mismatch");
        if (lambda <= 0.0) throw std::invalid_argument("DeblurFidelity: lambda must be positive");
        spectrum_ = dft2(kernel);
        fy_ = dft2(y_);
    }

    std::size_t dim() const override { return y_.size(); }

    double value(const Signal& x) const override {
        Spectrum fx = dft2(shaped(x));
        for (std::size_t i = 0; i < fx.size(); ++i) fx.data[i] *= spectrum_.data[i];
        const Signal ax = idft2(fx);
        return 0.5 * lambda_ * norm2(ax - y_);
    }

    Signal grad(const Signal& x) const override {
        Spectrum fx = dft2(shaped(x));
        for (std::size_t i = 0; i < fx.size(); ++i)
            fx.data[i] = std::conj(spectrum_.data[i]) * (spectrum_.data[i] * fx.data[i] - fy_.data[i]);
        return lambda_ * idft2(fx);
    }

    Signal prox(const Signal& z, double eta) const override {
        const double mu = eta * lambda_;
        Spectrum fz = dft2(shaped(z));
        for (std::size_t i = 0; i < fz.size(); ++i) {
            const auto lam = spectrum_.data[i];
            fz.data[i] = (fz.data[i] + mu * std::conj(lam) * fy_.data[i]) /
                         (1.0 + mu * std::norm(lam));
        }
        return idft2(fz);
    }

    FidelityConstants constants() const override {
        double top = 0.0;
        for (const auto& lam : spectrum_.data) top = std::max(top, std::norm(lam));
        return {lambda_ * top, 0.0, true};
    }

    double weight() const override { return lambda_; }
    double noise_sigma() const { return noise_sigma_; }
    const Spectrum& kernel_spectrum() const { return spectrum_; }
    const Signal& observation() const { return y_; }

private:
    Signal shaped(const Signal& x) const {
        return x.has_shape() ? x : reshaped(x, y_.rows, y_.cols);
    }

    Signal y_;
    Spectrum spectrum_;
    Spectrum fy_;
    double lambda_;
    double noise_sigma_;
};

inline std::unique_ptr<Fidelity> deblur_fidelity(const Signal& kernel, Signal y, double lambda,
                                                 double noise_sigma = 0.0) {
    return std::make_unique<DeblurFidelity>(kernel, std::move(y), lambda, noise_sigma);
}

// ---------------------------------------------------------------------------
// Inpainting: masked quadratic with a diagonal 0/1 operator; prox entrywise.
// ---------------------------------------------------------------------------

class InpaintFidelity final : public Fidelity {
public:
    InpaintFidelity(Signal mask, Signal y, double lambda)
        : mask_(std::move(mask)), y_(std::move(y)), lambda_(lambda) {
        require_same_size(mask_, y_, "InpaintFidelity");
        if (lambda <= 0.0) throw std::invalid_argument("InpaintFidelity: lambda must be positive");
        for (double m : mask_.data)
            if (m != 0.0 && m != 1.0)
                throw std::invalid_argument("InpaintFidelity: mask must be binary");
    }

    std::size_t dim() const override { return y_.size(); }

    double value(const Signal& x) const override {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = x[i] - y_[i];
            acc += mask_[i] * r * r;
        }
        return 0.5 * lambda_ * acc;
    }

    Signal grad(const Signal& x) const override {
        Signal g = x - y_;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= lambda_ * mask_[i];
        return g;
    }

    Signal prox(const Signal& z, double eta) const override {
        const double mu = eta * lambda_;
        Signal out = z;
        for (std::size_t i = 0; i < z.size(); ++i)
            if (mask_[i] != 0.0) out[i] = (z[i] + mu * y_[i]) / (1.0 + mu);
        return out;
    }

    FidelityConstants constants() const override { return {lambda_, 0.0, true}; }
    double weight() const override { return lambda_; }
    const Signal& mask() const { return mask_; }

private:
    Signal mask_;
    Signal y_;
    double lambda_;
};

inline std::unique_ptr<Fidelity> inpaint_fidelity(Signal mask, Signal y, double lambda) {
    return std::make_unique<InpaintFidelity>(std::move(mask), std::move(y), lambda);
}

// ---------------------------------------------------------------------------
// Single-image super-resolution: f = lambda/2 |S H x - y|^2 with H a circular
// anti-aliasing blur and S the standard s-downsampling. The prox uses the
// block spectral decomposition (Woodbury on the s^2 aliased bins): with
// mu = eta lambda and Z the spectrum of z + mu H^T S^T y,
//   X = Z - conj(Lam) . repl( mu fold(Lam Z) / (1 + mu gbar) ),
// where fold sums the s^2 alias blocks scaled by 1/s^2 and
// gbar[k] = 1/s^2 sum_j |Lam[alias_j(k)]|^2 is the spectrum of S H H^T S^T.
// ---------------------------------------------------------------------------

class SisrFidelity final : public Fidelity {
public:
    /// `kernel` embedded on the high-res grid; `y` the low-res observation of
    /// shape (rows/s, cols/s).
    SisrFidelity(const Signal& kernel, std::size_t factor, Signal y, double lambda)
        : y_(std::move(y)), s_(factor), lambda_(lambda) {
        require_shape(y_, "SisrFidelity");
        if (factor == 0) throw std::invalid_argument("SisrFidelity: factor must be >= 1");
        rows_ = y_.rows * s_;
        cols_ = y_.cols * s_;
        if (kernel.rows != rows_ || kernel.cols != cols_)
            throw ShapeError("SisrFidelity: kernel must live on the high-res grid");
        spectrum_ = dft2(kernel);
        // alias-folded squared spectrum (m bins)
        gbar_.assign(y_.size(), 0.0);
        for (std::size_t k1 = 0; k1 < y_.rows; ++k1)
            for (std::size_t k2 = 0; k2 < y_.cols; ++k2) {
                double acc = 0.0;
                for (std::size_t j1 = 0; j1 < s_; ++j1)
                    for (std::size_t j2 = 0; j2 < s_; ++j2)
                        acc += std::norm(spectrum_.at(k1 + j1 * y_.rows, k2 + j2 * y_.cols));
                gbar_[k1 * y_.cols + k2] = acc / static_cast<double>(s_ * s_);
            }
        aty_ = apply_adjoint(y_);
    }

    std::size_t dim() const override { return rows_ * cols_; }

    double value(const Signal& x) const override {
        return 0.5 * lambda_ * norm2(apply_forward(shaped(x)) - y_);
    }

    Signal grad(const Signal& x) const override {
        return lambda_ * apply_adjoint(apply_forward(shaped(x)) - y_);
    }

    Signal prox(const Signal& z, double eta) const override {
        const double mu = eta * lambda_;
        Signal zb = shaped(z);
        axpy(zb, mu, aty_);
        Spectrum fz = dft2(zb);
        // v = mu fold(Lam Z) / (1 + mu gbar) on the m grid
        Spectrum v(y_.rows, y_.cols);
        const double inv_s2 = 1.0 / static_cast<double>(s_ * s_);
        for (std::size_t k1 = 0; k1 < y_.rows; ++k1)
            for (std::size_t k2 = 0; k2 < y_.cols; ++k2) {
                std::complex<double> acc(0.0, 0.0);
                for (std::size_t j1 = 0; j1 < s_; ++j1)
                    for (std::size_t j2 = 0; j2 < s_; ++j2) {
                        const std::size_t r = k1 + j1 * y_.rows;
                        const std::size_t c = k2 + j2 * y_.cols;
                        acc += spectrum_.at(r, c) * fz.at(r, c);
                    }
                v.at(k1, k2) = mu * inv_s2 * acc / (1.0 + mu * gbar_[k1 * y_.cols + k2]);
            }
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                fz.at(r, c) -= std::conj(spectrum_.at(r, c)) * v.at(r % y_.rows, c % y_.cols);
        return idft2(fz);
    }

    FidelityConstants constants() const override {
        double top = 0.0;
        for (double g : gbar_) top = std::max(top, g);
        return {lambda_ * top, 0.0, true};
    }

    double weight() const override { return lambda_; }

    Signal apply_forward(const Signal& x) const {
        Spectrum fx = dft2(x);
        for (std::size_t i = 0; i < fx.size(); ++i) fx.data[i] *= spectrum_.data[i];
        const Signal hx = idft2(fx);
        Signal out(y_.rows, y_.cols);
        for (std::size_t r = 0; r < y_.rows; ++r)
            for (std::size_t c = 0; c < y_.cols; ++c) out.at(r, c) = hx.at(r * s_, c * s_);
        return out;
    }

    Signal apply_adjoint(const Signal& r) const {
        Signal up(rows_, cols_);
        for (std::size_t i = 0; i < y_.rows; ++i)
            for (std::size_t j = 0; j < y_.cols; ++j) up.at(i * s_, j * s_) = r.at(i, j);
        Spectrum fu = dft2(up);
        for (std::size_t i = 0; i < fu.size(); ++i) fu.data[i] *= std::conj(spectrum_.data[i]);
        return idft2(fu);
    }

private:
    Signal shaped(const Signal& x) const {
        return x.has_shape() ? x : reshaped(x, rows_, cols_);
    }

    Signal y_;
    Signal aty_;
    Spectrum spectrum_;
    std::vector<double> gbar_;
    std::size_t s_;
    std::size_t rows_ = 0, cols_ = 0;
    double lambda_;
};

inline std::unique_ptr<Fidelity> sisr_fidelity(const Signal& kernel, std::size_t factor, Signal y,
                                               double lambda) {
    return std::make_unique<SisrFidelity>(kernel, factor, std::move(y), lambda);
}

// ---------------------------------------------------------------------------
// MRI: masked k-space quadratic f = lambda/(2d) |M . (F x - y)|^2, normalized
// so the per-frequency prox is (Fz + eta lambda y)/(1 + eta lambda) on sampled
// bins and Fz elsewhere. Real part enforced on reconstruction output.
// ---------------------------------------------------------------------------

class MriFidelity final : public Fidelity {
public:
    MriFidelity(Signal sample_mask, Spectrum y, double lambda)
        : mask_(std::move(sample_mask)), y_(std::move(y)), lambda_(lambda) {
        require_shape(mask_, "MriFidelity");
        if (mask_.rows != y_.rows || mask_.cols != y_.cols || mask_.size() != y_.size())
            throw ShapeError("MriFidelity: mask/observation mismatch");
        for (double m : mask_.data)
            if (m != 0.0 && m != 1.0) throw std::invalid_argument("MriFidelity: mask must be binary");
        // real-valued reconstruction: sampling must pair k with -k, otherwise
        // the per-frequency prox is not the prox over real signals
        for (std::size_t r = 0; r < mask_.rows; ++r)
            for (std::size_t c = 0; c < mask_.cols; ++c)
                if (mask_.at(r, c) !=
                    mask_.at((mask_.rows - r) % mask_.rows, (mask_.cols - c) % mask_.cols))
                    throw std::invalid_argument("MriFidelity: mask must be conjugate-symmetric");
        if (lambda <= 0.0) throw std::invalid_argument("MriFidelity: lambda must be positive");
    }

    std::size_t dim() const override { return mask_.size(); }

    double value(const Signal& x) const override {
        const Spectrum fx = dft2(shaped(x));
        double acc = 0.0;
        for (std::size_t i = 0; i < fx.size(); ++i)
            if (mask_[i] != 0.0) acc += std::norm(fx.data[i] - y_.data[i]);
        return 0.5 * lambda_ * acc / static_cast<double>(dim());
    }

    Signal grad(const Signal& x) const override {
        Spectrum fx = dft2(shaped(x));
        for (std::size_t i = 0; i < fx.size(); ++i)
            fx.data[i] = mask_[i] != 0.0 ? fx.data[i] - y_.data[i] : std::complex<double>(0.0, 0.0);
        return lambda_ * idft2(fx);
    }

    Signal prox(const Signal& z, double eta) const override {
        const double mu = eta * lambda_;
        Spectrum fz = dft2(shaped(z));
        for (std::size_t i = 0; i < fz.size(); ++i)
            if (mask_[i] != 0.0) fz.data[i] = (fz.data[i] + mu * y_.data[i]) / (1.0 + mu);
        return idft2(fz);
    }

    FidelityConstants constants() const override { return {lambda_, 0.0, true}; }
    double weight() const override { return lambda_; }
    const Signal& mask() const { return mask_; }

private:
    Signal shaped(const Signal& x) const {
        return x.has_shape() ? x : reshaped(x, mask_.rows, mask_.cols);
    }

    Signal mask_;
    Spectrum y_;
    double lambda_;
};

inline std::unique_ptr<Fidelity> mri_fidelity(Signal sample_mask, Spectrum y, double lambda) {
    return std::make_unique<MriFidelity>(std::move(sample_mask), std::move(y), lambda);
}

}  // namespace risp
