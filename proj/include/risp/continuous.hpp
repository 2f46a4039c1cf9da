#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "risp/fidelity.hpp"
#include "risp/priors.hpp"
#include "risp/signal.hpp"
#include "risp/solvers.hpp"

namespace risp {

/// Objective with gradient, the continuous module's view of F = f + g.
struct Objective {
    std::function<double(const Signal&)> value;
    std::function<Signal(const Signal&)> grad;
};

inline Objective make_objective(const Fidelity& fid, const ScorePrior& prior) {
    return Objective{
        [&fid, &prior](const Signal& x) { return fid.value(x) + prior.reg_value(x); },
        [&fid, &prior](const Signal& x) {
            Signal g = fid.grad(x);
            g -= prior.score(x);
            return g;
        }};
}

/// Heavy-ball trajectory state. t is epoch-local; path_integral accumulates
/// int_0^t |xdot|^2 ds and both reset to zero on a restart.
struct OdeState {
    Signal x;
    Signal v;
    double t = 0.0;
    double path_integral = 0.0;
};

/// E = F(x) + 1/2 |v|^2; dissipates at rate -alpha |v|^2 along heavy-ball flow.
inline double energy(const Objective& objective, const OdeState& state) {
    return objective.value(state.x) + 0.5 * norm2(state.v);
}

/// One damped symplectic-Euler step of xdd + alpha xd + grad F(x) = 0:
///   v+ = (v - h grad F(x)) / (1 + alpha h),  x+ = x + h v+.
/// First order, and dissipative for every h > 0. The path integral advances
/// by the rectangle rule h |v+|^2.
inline OdeState heavy_ball_step(const Objective& objective, OdeState state, double alpha,
                                double h) {
    if (!(h > 0.0)) throw std::invalid_argument("heavy_ball_step: h must be positive");
    Signal v = state.v;
    axpy(v, -h, objective.grad(state.x));
    v = (1.0 / (1.0 + alpha * h)) * v;
    axpy(state.x, h, v);
    state.v = std::move(v);
    state.t += h;
    state.path_integral += h * norm2(state.v);
    if (!all_finite(state.x) || !all_finite(state.v))
        throw std::runtime_error("heavy_ball_step: non-finite state");
    return state;
}

struct ContParams {
    double alpha = 1.0;
    double t_max = 1.0;                  // per-epoch time cap
    double restart_b = kNoRestart;       // B; infinity disables restarts
    double step_h = 1e-3;
    double total_time = std::numeric_limits<double>::infinity();
};

struct ContResult {
    RunTrace trace;          // continuous_time = true, time column populated
    Signal x_hat;            // averaged output of the final epoch
    double k0_time = 0.0;    // argmin |v| location within [t_max/2, t_max]
    OdeState final_state;
};

namespace detail {

struct StoredState {
    double t;
    Signal x;
    double vnorm;
};

inline void record_cont(RunTrace& trace, const Objective& objective, std::size_t epoch,
                        double global_time, const OdeState& s, double residual, bool restarted) {
    TraceRecord rec;
    rec.global_iter = trace.records.size();
    rec.epoch = epoch;
    rec.time = global_time;
    rec.grad_norm = norm(objective.grad(s.x));
    rec.objective = objective.value(s.x);
    rec.residual = residual;
    rec.restarted = restarted;
    trace.records.push_back(rec);
}

}  // namespace detail

/// Restarted heavy-ball flow. Integrates epochs of xdd + alpha xd + grad F = 0
/// from a standstill; restarts (v = 0, t = 0, path integral = 0) when
/// t * int |xdot|^2 exceeds B^2; stops when an epoch completes t_max without
/// restarting or the total time budget runs out. The output x_hat is the
/// trapezoidal time-average of x over [0, K0], with K0 the argmin of |v| over
/// stored states in [t_max/2, t_max] (ties to the earliest).
inline ContResult continuous_risp(const Objective& objective, const ContParams& params,
                                  const Signal& x0) {
    if (!(params.step_h > 0.0) || !(params.t_max > 0.0))
        throw std::invalid_argument("continuous_risp: step_h and t_max must be positive");
    ContResult result;
    result.trace.continuous_time = true;
    result.trace.x0_norm = norm(x0);

    OdeState state{x0, Signal(x0.size()), 0.0, 0.0};
    state.v.rows = x0.rows;
    state.v.cols = x0.cols;
    std::size_t epoch = 0;
    double consumed = 0.0;  // time spent in completed epochs

    std::vector<detail::StoredState> stored;
    stored.push_back({0.0, state.x, 0.0});
    detail::record_cont(result.trace, objective, epoch, 0.0, state, 0.0, false);

    bool epoch_completed = false;
    while (!epoch_completed && consumed + state.t < params.total_time) {
        const Signal prev_x = state.x;
        state = heavy_ball_step(objective, std::move(state), params.alpha, params.step_h);
        const double residual = norm(state.x - prev_x);
        const bool restarted =
            state.t * state.path_integral > params.restart_b * params.restart_b;
        detail::record_cont(result.trace, objective, epoch, consumed + state.t, state, residual,
                            restarted);
        if (restarted) {
            consumed += state.t;
            ++epoch;
            ++result.trace.restart_count;
            for (double& v : state.v.data) v = 0.0;
            state.t = 0.0;
            state.path_integral = 0.0;
            stored.clear();
            stored.push_back({0.0, state.x, 0.0});
        } else {
            stored.push_back({state.t, state.x, norm(state.v)});
            if (state.t >= params.t_max) epoch_completed = true;
        }
    }

    // K0 over the stored final epoch; if the budget cut the epoch short the
    // search window shrinks to [t_end/2, t_end].
    const double t_end = stored.back().t;
    const double hi = std::min(params.t_max, t_end);
    const double lo = hi / 2.0;
    std::size_t k0 = stored.size();
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].t < lo || stored[i].t > hi) continue;
        if (k0 == stored.size() || stored[i].vnorm < stored[k0].vnorm) k0 = i;
    }
    if (k0 == stored.size()) k0 = stored.size() - 1;
    result.k0_time = stored[k0].t;

    // trapezoidal average of x over [0, K0]
    Signal acc(x0.size());
    acc.rows = x0.rows;
    acc.cols = x0.cols;
    if (k0 == 0 || stored[k0].t == 0.0) {
        acc = stored[k0].x;
    } else {
        for (std::size_t i = 0; i < k0; ++i) {
            const double w = 0.5 * (stored[i + 1].t - stored[i].t);
            axpy(acc, w, stored[i].x);
            axpy(acc, w, stored[i + 1].x);
        }
        acc = (1.0 / stored[k0].t) * acc;
    }
    result.x_hat = std::move(acc);
    result.final_state = std::move(state);
    return result;
}

/// Explicit-Euler gradient flow xd = -grad F(x); records |grad F| against t.
inline RunTrace gradient_flow(const Objective& objective, double total_time, double h,
                              const Signal& x0) {
    if (!(h > 0.0)) throw std::invalid_argument("gradient_flow: h must be positive");
    RunTrace trace;
    trace.continuous_time = true;
    trace.x0_norm = norm(x0);
    Signal x = x0;
    double t = 0.0;
    OdeState probe{x, Signal(x.size()), 0.0, 0.0};
    detail::record_cont(trace, objective, 0, 0.0, probe, 0.0, false);
    while (t < total_time) {
        const Signal g = objective.grad(x);
        Signal prev = x;
        axpy(x, -h, g);
        t += h;
        if (!all_finite(x)) {
            trace.output = prev;
            throw DivergenceError("gradient_flow: non-finite state", std::move(trace));
        }
        probe.x = x;
        probe.t = t;
        detail::record_cont(trace, objective, 0, t, probe, norm(x - prev), false);
    }
    trace.output = x;
    return trace;
}

/// Sup-norm gap between the discrete inertial iteration (B = infinity) and the
/// damped heavy-ball flow with alpha = theta / sqrt(eta), matched on the time
/// grid t_k = sqrt(eta) k. The ODE is integrated at h = sqrt(eta)/100, so the
/// gap measures the discretization error of the iteration, which shrinks like
/// sqrt(eta).
inline double discretization_gap(const Objective& objective, double eta, double theta, double T,
                                 const Signal& x0) {
    const double sqrt_eta = std::sqrt(eta);
    const double alpha = theta / sqrt_eta;
    if (!std::isfinite(alpha)) throw std::invalid_argument("discretization_gap: theta/sqrt(eta) not finite");

    const std::size_t steps = static_cast<std::size_t>(std::floor(T / sqrt_eta));
    const std::size_t substeps = 100;
    const double h = sqrt_eta / static_cast<double>(substeps);

    Signal x_prev = x0;
    Signal x_curr = x0;
    OdeState ode{x0, Signal(x0.size()), 0.0, 0.0};
    double gap = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        // discrete: z = x + (1 - theta)(x - x^-), x+ = z - eta grad F(z)
        Signal z = x_curr;
        axpy(z, 1.0 - theta, x_curr - x_prev);
        Signal next = z;
        axpy(next, -eta, objective.grad(z));
        x_prev = std::move(x_curr);
        x_curr = std::move(next);
        for (std::size_t s = 0; s < substeps; ++s)
            ode = heavy_ball_step(objective, std::move(ode), alpha, h);
        gap = std::max(gap, norm(x_curr - ode.x));
    }
    return gap;
}

}  // namespace risp
