#pragma once

#include <cstdint>
#include <functional>

#include "risp/rng.hpp"
#include "risp/signal.hpp"

namespace risp {

/// Matrix-free linear operator A: R^d -> R^m with its adjoint.
struct LinearOp {
    std::size_t dim_in = 0;
    std::size_t dim_out = 0;
    std::function<Signal(const Signal&)> apply;
    std::function<Signal(const Signal&)> adjoint;
};

inline LinearOp identity_op(std::size_t d) {
    return LinearOp{d, d, [](const Signal& x) { return x; }, [](const Signal& x) { return x; }};
}

/// Max relative adjoint defect |<Ax,y> - <x,A^T y>| / (|Ax| |y|) over seeded
/// Gaussian probes. Every operator registered with the library should sit
/// below 1e-10 here.
inline double adjoint_check(const LinearOp& op, std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("adjoint_check: trials must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Signal x = rng.normal_signal(op.dim_in);
        const Signal y = rng.normal_signal(op.dim_out);
        const Signal ax = op.apply(x);
        const Signal aty = op.adjoint(y);
        const double lhs = dot(ax, y);
        const double rhs = dot(x, aty);
        const double scale = norm(ax) * norm(y);
        const double defect = scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
        worst = std::max(worst, defect);
    }
    return worst;
}

/// Largest singular value of A estimated by power iteration on A^T A.
inline double operator_norm_estimate(const LinearOp& op, std::size_t iters, std::uint64_t seed) {
    Rng rng(seed);
    Signal v = rng.normal_signal(op.dim_in);
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Signal w = op.adjoint(op.apply(v));
        const double n = norm(w);
        if (n == 0.0) return 0.0;
        lambda = n;
        v = (1.0 / n) * w;
    }
    return std::sqrt(lambda);
}

}  // namespace risp
