#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "risp/fft.hpp"
#include "risp/rng.hpp"
#include "risp/signal.hpp"

namespace risp {

enum class ConstantTag { exact, estimated };

struct TaggedConstant {
    double value = 0.0;
    ConstantTag tag = ConstantTag::estimated;
};

/// Smoothness constants of a regularizer g: Lipschitz constant of the
/// gradient (L_g), Lipschitz constant of the Hessian (rho_g), and the weak
/// convexity modulus (nu). Estimated values are lower bounds of the truth.
struct PriorConstants {
    TaggedConstant lipschitz_grad;
    TaggedConstant lipschitz_hess;
    TaggedConstant weak_convexity;
};

/// A score-based prior: regularizer g with score S = -grad g. The score is a
/// gradient field, so its Jacobian is symmetric everywhere.
class ScorePrior {
public:
    virtual ~ScorePrior() = default;

    virtual std::size_t dim() const = 0;
    virtual double reg_value(const Signal& x) const = 0;
    virtual Signal score(const Signal& x) const = 0;
    virtual PriorConstants constants() const = 0;

    /// Denoising strength sigma when the prior is tied to an MMSE denoiser.
    virtual std::optional<double> denoise_sigma() const { return std::nullopt; }
};

/// D_sigma(x) = x + sigma^2 S(x): the MMSE denoiser induced by the score via
/// Tweedie's identity. Errors when the prior carries no sigma.
inline Signal mmse_denoiser_from_score(const ScorePrior& prior, const Signal& x) {
    const auto sigma = prior.denoise_sigma();
    if (!sigma) throw std::invalid_argument("mmse_denoiser_from_score: prior carries no sigma");
    Signal out = x;
    axpy(out, (*sigma) * (*sigma), prior.score(x));
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian prior: g(x) = 1/2 <x - mu, P (x - mu)> with P diagonal or
// DFT-diagonal PSD. All constants exact.
// ---------------------------------------------------------------------------

class GaussianPrior final : public ScorePrior {
public:
    /// Diagonal precision: P = diag(precision), entries >= 0.
    GaussianPrior(Signal mean, Signal precision_diag,
                  std::optional<double> sigma = std::nullopt)
        : mean_(std::move(mean)), diag_(std::move(precision_diag)), sigma_(sigma) {
        require_same_size(mean_, diag_, "GaussianPrior");
        for (double p : diag_.data)
            if (p < 0.0) throw std::invalid_argument("GaussianPrior: precision must be PSD");
    }

    /// DFT-diagonal precision: P = F^-1 diag(gains) F with real gains >= 0.
    /// The mean must be shaped; gains live on the same grid.
    static GaussianPrior dft_diagonal(Signal mean, Signal gains,
                                      std::optional<double> sigma = std::nullopt) {
        require_shape(mean, "GaussianPrior::dft_diagonal");
        GaussianPrior p(std::move(mean), std::move(gains), sigma);
        p.spectral_ = true;
        return p;
    }

    std::size_t dim() const override { return mean_.size(); }

    double reg_value(const Signal& x) const override {
        const Signal r = x - mean_;
        return 0.5 * dot(r, apply_precision(r));
    }

    Signal score(const Signal& x) const override {
        return -1.0 * apply_precision(x - mean_);
    }

    PriorConstants constants() const override {
        double lmax = 0.0;
        for (double p : diag_.data) lmax = std::max(lmax, p);
        return {{lmax, ConstantTag::exact}, {0.0, ConstantTag::exact}, {0.0, ConstantTag::exact}};
    }

    std::optional<double> denoise_sigma() const override { return sigma_; }

private:
    Signal apply_precision(const Signal& r) const {
        if (!spectral_) return hadamard(diag_, r);
        Spectrum fr = dft2(reshaped(r, mean_.rows, mean_.cols));
        for (std::size_t i = 0; i < fr.size(); ++i) fr.data[i] *= diag_[i];
        return idft2(fr);
    }

    Signal mean_;
    Signal diag_;
    std::optional<double> sigma_;
    bool spectral_ = false;
};

// ---------------------------------------------------------------------------
// Gaussian mixture prior: g = -log sum_i w_i N(x; mu_i, (s_i^2 + sigma^2) I).
// Genuinely nonconvex for >= 2 separated components (rho_g > 0).
// ---------------------------------------------------------------------------

struct MixtureComponent {
    double weight = 1.0;
    Signal mean;
    double variance = 1.0;  // s_i^2, isotropic
};

class MixturePrior final : public ScorePrior {
public:
    MixturePrior(std::vector<MixtureComponent> components, double smoothing_sigma)
        : components_(std::move(components)), sigma_(smoothing_sigma) {
        if (components_.empty()) throw std::invalid_argument("MixturePrior: empty mixture");
        double total = 0.0;
        for (const auto& c : components_) {
            if (c.weight <= 0.0 || c.variance <= 0.0)
                throw std::invalid_argument("MixturePrior: weights and variances must be positive");
            require_same_size(c.mean, components_.front().mean, "MixturePrior");
            total += c.weight;
        }
        for (auto& c : components_) c.weight /= total;
    }

    std::size_t dim() const override { return components_.front().mean.size(); }

    double reg_value(const Signal& x) const override { return -log_density(x, nullptr); }

    /// S(x) = sum_i r_i(x) (mu_i - x) / v_i with log-sum-exp responsibilities;
    /// stable for arbitrarily large |x|.
    Signal score(const Signal& x) const override {
        std::vector<double> resp(components_.size());
        log_density(x, &resp);
        Signal s(x.size());
        s.rows = x.rows;
        s.cols = x.cols;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const double c = resp[i] / smoothed_variance(i);
            for (std::size_t j = 0; j < x.size(); ++j)
                s[j] += c * (components_[i].mean[j] - x[j]);
        }
        return s;
    }

    PriorConstants constants() const override {
        // Upper curvature is bounded by max_i 1/v_i; the lower side and the
        // Hessian Lipschitz constant have no closed form here.
        double lmax = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            lmax = std::max(lmax, 1.0 / smoothed_variance(i));
        return {{lmax, ConstantTag::estimated},
                {0.0, ConstantTag::estimated},
                {0.0, ConstantTag::estimated}};
    }

    std::optional<double> denoise_sigma() const override {
        if (sigma_ > 0.0) return sigma_;
        return std::nullopt;
    }

    std::size_t component_count() const { return components_.size(); }
    double smoothed_variance(std::size_t i) const {
        return components_[i].variance + sigma_ * sigma_;
    }

private:
    /// log p(x); when resp != nullptr also fills normalized responsibilities.
    double log_density(const Signal& x, std::vector<double>* resp) const {
        const double half_d = 0.5 * static_cast<double>(x.size());
        std::vector<double> logs(components_.size());
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const double v = smoothed_variance(i);
            double q = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double dj = x[j] - components_[i].mean[j];
                q += dj * dj;
            }
            logs[i] = std::log(components_[i].weight) -
                      half_d * std::log(2.0 * std::numbers::pi * v) - 0.5 * q / v;
            peak = std::max(peak, logs[i]);
        }
        double acc = 0.0;
        for (double l : logs) acc += std::exp(l - peak);
        const double lse = peak + std::log(acc);
        if (resp) {
            for (std::size_t i = 0; i < logs.size(); ++i) (*resp)[i] = std::exp(logs[i] - lse);
        }
        return lse;
    }

    std::vector<MixtureComponent> components_;
    double sigma_;
};

// ---------------------------------------------------------------------------
// Gradient-step prior over a small two-layer softplus map N(x):
//   g_sigma(x) = 1/(2 sigma^2) |x - N(x)|^2,
//   sigma^2 grad g(x) = r - J_N(x)^T r   with r = x - N(x).
// The Jacobian-transpose product is exact reverse-mode through both layers.
// ---------------------------------------------------------------------------

class SoftplusNetPrior final : public ScorePrior {
public:
    /// Seeded construction; each layer is rescaled to operator norm <= 1.
    SoftplusNetPrior(std::size_t d, std::size_t width, std::uint64_t seed, double sigma)
        : d_(d), w_(width), sigma_(sigma) {
        if (sigma <= 0.0) throw std::invalid_argument("SoftplusNetPrior: sigma must be positive");
        Rng rng(seed);
        w1_.resize(w_ * d_);
        w2_.resize(d_ * w_);
        b1_.resize(w_);
        b2_.resize(d_);
        for (double& v : w1_) v = rng.normal() / std::sqrt(static_cast<double>(d_));
        for (double& v : w2_) v = rng.normal() / std::sqrt(static_cast<double>(w_));
        for (double& v : b1_) v = 0.1 * rng.normal();
        for (double& v : b2_) v = 0.1 * rng.normal();
        normalize_layer(w1_, w_, d_);
        normalize_layer(w2_, d_, w_);
    }

    /// Explicit weights (rows x cols, row-major); used for degenerate cases
    /// like the constant map. No rescaling is applied.
    SoftplusNetPrior(std::size_t d, std::size_t width, std::vector<double> w1,
                     std::vector<double> b1, std::vector<double> w2, std::vector<double> b2,
                     double sigma)
        : d_(d), w_(width), w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)),
          b2_(std::move(b2)), sigma_(sigma) {
        if (sigma <= 0.0) throw std::invalid_argument("SoftplusNetPrior: sigma must be positive");
        if (w1_.size() != w_ * d_ || w2_.size() != d_ * w_ || b1_.size() != w_ || b2_.size() != d_)
            throw ShapeError("SoftplusNetPrior: weight shapes inconsistent");
    }

    std::size_t dim() const override { return d_; }

    Signal denoiser_output(const Signal& x) const {
        std::vector<double> u(w_), phi(w_);
        forward(x, u, phi);
        Signal out(d_);
        out.rows = x.rows;
        out.cols = x.cols;
        for (std::size_t i = 0; i < d_; ++i) {
            double acc = b2_[i];
            for (std::size_t j = 0; j < w_; ++j) acc += w2_[i * w_ + j] * phi[j];
            out[i] = acc;
        }
        return out;
    }

    double reg_value(const Signal& x) const override {
        if (x.size() != d_) throw ShapeError("SoftplusNetPrior: dim mismatch");
        const Signal r = x - denoiser_output(x);
        return 0.5 * norm2(r) / (sigma_ * sigma_);
    }

    Signal score(const Signal& x) const override {
        if (x.size() != d_) throw ShapeError("SoftplusNetPrior: dim mismatch");
        std::vector<double> u(w_), phi(w_);
        forward(x, u, phi);
        Signal r = x;
        for (std::size_t i = 0; i < d_; ++i) {
            double acc = b2_[i];
            for (std::size_t j = 0; j < w_; ++j) acc += w2_[i * w_ + j] * phi[j];
            r[i] -= acc;
        }
        // J_N^T r = W1^T (softplus'(u) o (W2^T r))
        std::vector<double> back(w_, 0.0);
        for (std::size_t j = 0; j < w_; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d_; ++i) acc += w2_[i * w_ + j] * r[i];
            back[j] = acc * softplus_d1(u[j]);
        }
        Signal s(d_);
        s.rows = x.rows;
        s.cols = x.cols;
        for (std::size_t i = 0; i < d_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < w_; ++j) acc += w1_[j * d_ + i] * back[j];
            s[i] = -(r[i] - acc) / (sigma_ * sigma_);
        }
        return s;
    }

    PriorConstants constants() const override {
        // With both layer norms <= 1 and |softplus'| <= 1: |J_N| <= 1, so
        // |I - J_N| <= 2 and the residual term adds |d J^T| |r|-dependent
        // curvature. The crude closed bounds are loose; report estimates.
        const double inv_s2 = 1.0 / (sigma_ * sigma_);
        return {{4.0 * inv_s2, ConstantTag::estimated},
                {0.0, ConstantTag::estimated},
                {0.0, ConstantTag::estimated}};
    }

    std::optional<double> denoise_sigma() const override { return sigma_; }

private:
    static double softplus(double x) {
        return x > 30.0 ? x : std::log1p(std::exp(x));
    }
    static double softplus_d1(double x) { return 1.0 / (1.0 + std::exp(-x)); }

    void forward(const Signal& x, std::vector<double>& u, std::vector<double>& phi) const {
        for (std::size_t j = 0; j < w_; ++j) {
            double acc = b1_[j];
            for (std::size_t i = 0; i < d_; ++i) acc += w1_[j * d_ + i] * x[i];
            u[j] = acc;
            phi[j] = softplus(acc);
        }
    }

    void normalize_layer(std::vector<double>& w, std::size_t rows, std::size_t cols) {
        // power iteration on W^T W, then divide by the top singular value
        Rng rng(rows * 1315423911ull + cols);
        std::vector<double> v(cols), tmp(rows);
        for (double& e : v) e = rng.normal();
        double s = 1.0;
        for (int it = 0; it < 50; ++it) {
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * v[c];
                tmp[r] = acc;
            }
            std::vector<double> next(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) next[c] += w[r * cols + c] * tmp[r];
            double n = 0.0;
            for (double e : next) n += e * e;
            n = std::sqrt(n);
            if (n == 0.0) return;
            s = std::sqrt(n);
            for (std::size_t c = 0; c < cols; ++c) v[c] = next[c] / n;
        }
        const double scale = 1.0 / (s * (1.0 + 1e-12));
        for (double& e : w) e *= scale;
    }

    std::size_t d_;
    std::size_t w_;
    std::vector<double> w1_, b1_, w2_, b2_;
    double sigma_;
};

// ---------------------------------------------------------------------------
// Sampling-based constant estimation.
// ---------------------------------------------------------------------------

struct DomainBox {
    std::size_t dim = 0;
    double lo = 0.0;
    double hi = 1.0;
};

struct EstimatedConstants {
    double lipschitz_grad = 0.0;  // max |S(x)-S(y)| / |x-y|
    double lipschitz_hess = 0.0;  // max |(H(x)-H(y)) v| / (|x-y|), unit v
    double weak_convexity = 0.0;  // max(0, -lambda_min(H)) over probes
};

namespace detail {

/// Hessian-vector product of g by central differences on the score:
/// H_g(x) v = -J_S(x) v ~ -(S(x + h v) - S(x - h v)) / (2 h) for unit v.
inline Signal fd_hessian_vec(const ScorePrior& prior, const Signal& x, const Signal& v, double h) {
    Signal xp = x;
    axpy(xp, h, v);
    Signal xm = x;
    axpy(xm, -h, v);
    Signal out = prior.score(xm) - prior.score(xp);
    return (1.0 / (2.0 * h)) * out;
}

}  // namespace detail

/// Empirical (L_g, rho_g, nu) over seeded samples in a box. All three are
/// lower bounds of the true constants and are tagged estimated by callers.
inline EstimatedConstants estimate_constants(const ScorePrior& prior, const DomainBox& box,
                                             std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("estimate_constants: needs >= 2 samples");
    if (!(box.hi > box.lo) || box.dim == 0)
        throw std::invalid_argument("estimate_constants: degenerate box");
    Rng rng(seed);
    const double fd_h = 1e-5 * (1.0 + std::max(std::abs(box.lo), std::abs(box.hi)));

    EstimatedConstants est;
    for (std::size_t i = 0; i < samples; ++i) {
        const Signal x = rng.uniform_signal(box.dim, box.lo, box.hi);
        const Signal y = rng.uniform_signal(box.dim, box.lo, box.hi);
        const double dxy = norm(x - y);
        if (dxy == 0.0) continue;
        est.lipschitz_grad =
            std::max(est.lipschitz_grad, norm(prior.score(x) - prior.score(y)) / dxy);

        Signal v = rng.normal_signal(box.dim);
        const double nv = norm(v);
        if (nv == 0.0) continue;
        v = (1.0 / nv) * v;
        const Signal hx = detail::fd_hessian_vec(prior, x, v, fd_h);
        const Signal hy = detail::fd_hessian_vec(prior, y, v, fd_h);
        est.lipschitz_hess = std::max(est.lipschitz_hess, norm(hx - hy) / dxy);
    }

    // eigenvalue probing at a few points: |H(x)| sharpens the L estimate, and
    // lambda_min(H) via power iteration on (c I - H) gives nu = max(0, -min).
    const std::size_t probes = std::min<std::size_t>(8, samples);
    for (std::size_t p = 0; p < probes; ++p) {
        const Signal x = rng.uniform_signal(box.dim, box.lo, box.hi);
        Signal v = rng.normal_signal(box.dim);
        double spectral = 0.0;
        for (int it = 0; it < 40; ++it) {
            Signal w = detail::fd_hessian_vec(prior, x, v, fd_h);
            const double n = norm(w);
            if (n == 0.0) break;
            spectral = n;
            v = (1.0 / n) * w;
        }
        est.lipschitz_grad = std::max(est.lipschitz_grad, spectral);

        const double shift = spectral + 1.0;
        v = rng.normal_signal(box.dim);
        double top = 0.0;
        for (int it = 0; it < 40; ++it) {
            Signal w = shift * v - detail::fd_hessian_vec(prior, x, v, fd_h);
            const double n = norm(w);
            if (n == 0.0) break;
            top = n;
            v = (1.0 / n) * w;
        }
        const double lambda_min = shift - top;
        est.weak_convexity = std::max(est.weak_convexity, std::max(0.0, -lambda_min));
    }
    return est;
}

}  // namespace risp
