#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "risp/rng.hpp"
#include "risp/signal.hpp"
#include "risp/solvers.hpp"

namespace risp {

/// Max relative error of an analytic gradient against central finite
/// differences, h = h_fd (1 + |x|_inf). Per-coordinate up to d = 64, then 32
/// seeded random unit directions. Errors are relative to |grad|.
inline double fd_gradient_check(const std::function<double(const Signal&)>& value,
                                const std::function<Signal(const Signal&)>& grad, const Signal& x,
                                double h_fd = 1e-5) {
    if (!(h_fd > 0.0)) throw std::invalid_argument("fd_gradient_check: h_fd must be positive");
    const double h = h_fd * (1.0 + linf(x));
    const Signal g = grad(x);
    const double scale = std::max(norm(g), 1e-12);

    auto directional = [&](const Signal& e) {
        Signal xp = x;
        axpy(xp, h, e);
        Signal xm = x;
        axpy(xm, -h, e);
        return (value(xp) - value(xm)) / (2.0 * h);
    };

    double worst = 0.0;
    if (x.size() <= 64) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            Signal e(x.size());
            e.rows = x.rows;
            e.cols = x.cols;
            e[i] = 1.0;
            worst = std::max(worst, std::abs(directional(e) - g[i]) / scale);
        }
    } else {
        Rng rng(0xfdc11ull);
        for (int k = 0; k < 32; ++k) {
            Signal e = rng.normal_signal(x.size());
            e.rows = x.rows;
            e.cols = x.cols;
            e = (1.0 / norm(e)) * e;
            worst = std::max(worst, std::abs(directional(e) - dot(g, e)) / scale);
        }
    }
    return worst;
}

/// Peak signal-to-noise ratio in dB; +infinity on an exact match.
inline double psnr(const Signal& x, const Signal& ref, double peak = 1.0) {
    require_same_size(x, ref, "psnr");
    const double err = norm2(x - ref);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak * static_cast<double>(x.size()) / err);
}

/// Per-iteration |x^{k+1} - x^k| / |x^0| read off a trace.
inline std::vector<double> relative_error_series(const RunTrace& trace) {
    if (trace.records.empty()) throw std::invalid_argument("relative_error_series: empty trace");
    if (!(trace.x0_norm > 0.0))
        throw std::invalid_argument("relative_error_series: zero initial norm");
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const auto& rec : trace.records) out.push_back(rec.residual / trace.x0_norm);
    return out;
}

/// Monotone min-envelope env_n = min_{k <= n} series_k.
inline std::vector<double> min_envelope(const std::vector<double>& series) {
    std::vector<double> env;
    env.reserve(series.size());
    double running = std::numeric_limits<double>::infinity();
    for (double v : series) {
        running = std::min(running, v);
        env.push_back(running);
    }
    return env;
}

struct FitWindow {
    std::size_t lo = 0;  // 0 selects the default (10% of the trace)
    std::size_t hi = 0;  // 0 selects the last iteration
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
    std::vector<double> envelope;
};

/// Least-squares slope of log |grad F| min-envelope against log iteration.
/// The first 10% of iterations are always excluded; at least 50 points must
/// remain in the window.
inline RateFit fit_rate(const RunTrace& trace, FitWindow window = {}) {
    std::vector<double> grads;
    std::vector<double> iters;
    grads.reserve(trace.records.size());
    for (const auto& rec : trace.records) {
        grads.push_back(rec.grad_norm);
        iters.push_back(trace.continuous_time ? rec.time : static_cast<double>(rec.global_iter));
    }
    RateFit fit;
    fit.envelope = min_envelope(grads);
    if (grads.empty()) throw std::invalid_argument("fit_rate: empty trace");

    const double last = iters.back();
    double lo = window.lo > 0 ? static_cast<double>(window.lo) : 0.0;
    lo = std::max(lo, 0.1 * last);
    const double hi = window.hi > 0 ? static_cast<double>(window.hi) : last;

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (iters[i] < lo || iters[i] > hi || iters[i] <= 0.0) continue;
        if (!(fit.envelope[i] > 0.0)) continue;
        xs.push_back(std::log(iters[i]));
        ys.push_back(std::log(fit.envelope[i]));
    }
    if (xs.size() < 50) throw std::invalid_argument("fit_rate: fewer than 50 points in window");

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.window_lo = static_cast<std::size_t>(lo);
    fit.window_hi = static_cast<std::size_t>(hi);
    return fit;
}

/// Iterations (or time) needed to drive |grad F| at or below `target`;
/// empty when the trace never reaches it.
inline std::optional<double> iterations_to_target(const RunTrace& trace, double target) {
    for (const auto& rec : trace.records)
        if (rec.grad_norm <= target)
            return trace.continuous_time ? rec.time : static_cast<double>(rec.global_iter);
    return std::nullopt;
}

}  // namespace risp
