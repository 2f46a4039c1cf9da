#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "risp/fidelity.hpp"
#include "risp/linear_op.hpp"
#include "risp/signal.hpp"

namespace risp {

/// First-Born scattering model: y = H(u . x) + n, with H the discretized
/// system response and u the probing field.
struct ScatterSpec {
    LinearOp h;
    Signal field_u;
    Signal y;
    double lambda = 1.0;
    std::size_t inner_max = 100;    // T, inner gradient-descent cap
    double inner_eps = 2e-3;        // stop when |grad L|^2 <= eps
    double inner_gamma = 0.0;       // step; <= 0 selects 400/(lambda eta)
};

class ScatterDivergenceError : public std::runtime_error {
public:
    explicit ScatterDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// f = lambda/2 |H(u . x) - y|^2. The prox has no closed form; it is solved by
/// an inner gradient-descent loop on
///   L(x; y, z) = eta lambda/2 |H(u . x) - y|^2 + 1/2 |x - z|^2
/// started at x^0 = z. Three consecutive objective increases trigger one
/// step-halving retry before erroring out.
class ScatterFidelity final : public Fidelity {
public:
    explicit ScatterFidelity(ScatterSpec spec) : spec_(std::move(spec)) {
        if (spec_.h.dim_in != spec_.field_u.size())
            throw ShapeError("ScatterFidelity: field dimension mismatch");
        if (spec_.h.dim_out != spec_.y.size())
            throw ShapeError("ScatterFidelity: observation dimension mismatch");
        if (spec_.lambda <= 0.0) throw std::invalid_argument("ScatterFidelity: lambda must be positive");
        h_norm_ = operator_norm_estimate(spec_.h, 60, 0x5ca77e5u);
    }

    std::size_t dim() const override { return spec_.h.dim_in; }

    double value(const Signal& x) const override {
        return 0.5 * spec_.lambda * norm2(spec_.h.apply(hadamard(spec_.field_u, x)) - spec_.y);
    }

    Signal grad(const Signal& x) const override {
        const Signal r = spec_.h.apply(hadamard(spec_.field_u, x)) - spec_.y;
        return spec_.lambda * hadamard(spec_.field_u, spec_.h.adjoint(r));
    }

    Signal prox(const Signal& z, double eta) const override {
        double gamma = spec_.inner_gamma > 0.0 ? spec_.inner_gamma
                                               : 400.0 / (spec_.lambda * eta);
        for (int attempt = 0; attempt < 12; ++attempt) {
            Signal x = z;
            double prev_obj = inner_objective(x, z, eta);
            int rises = 0;
            bool diverged = false;
            for (std::size_t t = 0; t < spec_.inner_max; ++t) {
                const Signal g = inner_grad(x, z, eta);
                if (norm2(g) <= spec_.inner_eps) break;
                axpy(x, -gamma, g);
                const double obj = inner_objective(x, z, eta);
                if (!std::isfinite(obj) || obj > prev_obj) {
                    if (!std::isfinite(obj) || ++rises >= 3) {
                        diverged = true;
                        break;
                    }
                } else {
                    rises = 0;
                }
                prev_obj = obj;
            }
            if (!diverged) return x;
            gamma *= 0.5;
        }
        throw ScatterDivergenceError("ScatterFidelity::prox: inner loop diverged after step halvings");
    }

    FidelityConstants constants() const override {
        return {spec_.lambda * h_norm_ * h_norm_ * linf(spec_.field_u) * linf(spec_.field_u), 0.0,
                true};
    }

    double weight() const override { return spec_.lambda; }
    const ScatterSpec& spec() const { return spec_; }

private:
    double inner_objective(const Signal& x, const Signal& z, double eta) const {
        return eta * value(x) + 0.5 * norm2(x - z);
    }

    Signal inner_grad(const Signal& x, const Signal& z, double eta) const {
        Signal g = eta * grad(x);
        g += x - z;
        return g;
    }

    ScatterSpec spec_;
    double h_norm_ = 0.0;
};

inline std::unique_ptr<Fidelity> scatter_fidelity(ScatterSpec spec) {
    return std::make_unique<ScatterFidelity>(std::move(spec));
}

}  // namespace risp
