#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "risp/bessel.hpp"
#include "risp/fidelity.hpp"
#include "risp/signal.hpp"

namespace risp {

/// Rician noise removal observation: y entrywise nonnegative, noise sigma_y.
struct RicianSpec {
    Signal y;
    double sigma_y = 1.0;
};

/// Negative Rician log-likelihood (constants dropped):
///   f(x) = lambda <1, x^2/(2 s^2) - log I0(x.y / s^2)>,  s = sigma_y,
///   grad f = lambda (x/s^2 - (y/s^2) B(x.y / s^2)).
/// Momentum can push iterates slightly negative; the Bessel argument is
/// clamped at zero from below (B(0) = 0), which keeps the gradient continuous.
class RicianFidelity final : public Fidelity {
public:
    explicit RicianFidelity(RicianSpec spec, double lambda = 1.0, std::size_t irl1_max = 10)
        : y_(std::move(spec.y)), sigma_(spec.sigma_y), lambda_(lambda), irl1_max_(irl1_max) {
        if (sigma_ <= 0.0) throw std::invalid_argument("RicianFidelity: sigma_y must be positive");
        if (lambda_ <= 0.0) throw std::invalid_argument("RicianFidelity: lambda must be positive");
        for (double v : y_.data)
            if (v < 0.0) throw std::invalid_argument("RicianFidelity: observation must be nonnegative");
    }

    std::size_t dim() const override { return y_.size(); }

    double value(const Signal& x) const override {
        require_same_size(x, y_, "RicianFidelity::value");
        const double inv_s2 = 1.0 / (sigma_ * sigma_);
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double arg = std::max(x[i] * y_[i], 0.0) * inv_s2;
            acc += 0.5 * x[i] * x[i] * inv_s2 - std::log(bessel_i0(arg));
        }
        return lambda_ * acc;
    }

    Signal grad(const Signal& x) const override {
        require_same_size(x, y_, "RicianFidelity::grad");
        const double inv_s2 = 1.0 / (sigma_ * sigma_);
        Signal g = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double arg = std::max(x[i] * y_[i], 0.0) * inv_s2;
            g[i] = lambda_ * inv_s2 * (x[i] - y_[i] * bessel_ratio_b(arg));
        }
        return g;
    }

    /// IRL1 inner loop, a majorize-minimize scheme: split eta f into the
    /// convex part mu <1, x^2/(2 s^2) - x.y/s^2> + 1/2 |x - z|^2 and the
    /// concave part mu <1, x.y/s^2 - log I0(x.y/s^2)>, linearize the latter
    /// around x^t, and solve the quadratic subproblem:
    ///   x^{t+1/2} = (y/s^2) B(x^t . y / s^2),
    ///   x^{t+1}   = (z + mu x^{t+1/2}) / (1 + mu/s^2),
    /// with mu = eta lambda and x^0 = z. The fixed point satisfies
    /// (x - z)/eta + grad f(x) = 0 exactly. (The y/s^2 contributions of the
    /// two parts cancel in the subproblem's optimality condition.)
    Signal prox(const Signal& z, double eta) const override {
        return prox_with_stats(z, eta).x;
    }

    struct ProxStats {
        Signal x;
        double first_order_residual = 0.0;
        std::size_t inner_iters = 0;
    };

    ProxStats prox_with_stats(const Signal& z, double eta) const {
        require_same_size(z, y_, "RicianFidelity::prox");
        const double mu = eta * lambda_;
        const double inv_s2 = 1.0 / (sigma_ * sigma_);
        Signal x = z;
        std::size_t t = 0;
        for (; t < irl1_max_; ++t) {
            Signal next(x.size());
            next.rows = x.rows;
            next.cols = x.cols;
            double step = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double arg = std::max(x[i] * y_[i], 0.0) * inv_s2;
                const double half = y_[i] * inv_s2 * bessel_ratio_b(arg);
                next[i] = (z[i] + mu * half) / (1.0 + mu * inv_s2);
                step = std::max(step, std::abs(next[i] - x[i]));
            }
            x = std::move(next);
            if (step < 1e-14 * (1.0 + linf(x))) {
                ++t;
                break;
            }
        }
        return {x, prox_residual(*this, z, eta, x), t};
    }

    FidelityConstants constants() const override {
        // f'' = lambda/s^2 (1 - (y^2/s^2) B'(xy/s^2)) with B' in [0, 1/2]: the
        // magnitude peaks either at the bare quadratic or at x = 0 where
        // B' = 1/2. f''' = -lambda (y^3/s^6) B'' and |B''| <= 1/4.
        const double s2 = sigma_ * sigma_;
        const double ymax = linf(y_);
        const double lf = lambda_ * std::max(1.0 / s2, ymax * ymax / (2.0 * s2 * s2) - 1.0 / s2);
        const double rho = 0.25 * lambda_ * ymax * ymax * ymax / (s2 * s2 * s2);
        return {lf, rho, false};
    }

    double weight() const override { return lambda_; }
    double sigma_y() const { return sigma_; }
    const Signal& observation() const { return y_; }

private:
    Signal y_;
    double sigma_;
    double lambda_;
    std::size_t irl1_max_;
};

inline std::unique_ptr<Fidelity> rician_fidelity(RicianSpec spec, double lambda = 1.0) {
    return std::make_unique<RicianFidelity>(std::move(spec), lambda);
}

}  // namespace risp
