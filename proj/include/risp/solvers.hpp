#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "risp/fidelity.hpp"
#include "risp/priors.hpp"
#include "risp/signal.hpp"

namespace risp {

inline constexpr double kNoRestart = std::numeric_limits<double>::infinity();

enum class SolverMode { theory, practical };
enum class OutputRule { averaged_z, min_grad_iterate };

/// Restart criterion: fire when k * sum_{t<k} |x^{t+1} - x^t|^2 > B^2.
/// Never fires at k = 0 (empty sum) or with the B = infinity sentinel.
inline bool restart_check(std::size_t k, double sumsq, double restart_b) {
    if (k == 0 || sumsq < 0.0) return false;
    return static_cast<double>(k) * sumsq > restart_b * restart_b;
}

struct SolverConfig {
    double eta = 0.1;                 // step size
    double theta = 1.0;               // inertia weight in (0, 1]
    double restart_b = kNoRestart;    // restart budget B; infinity disables
    std::size_t epoch_k = 0;          // epoch cap K (theory mode)
    std::optional<double> tau;        // RED residual weight; empty = exactly 1/sigma^2
    SolverMode mode = SolverMode::practical;
    std::size_t budget = 1000;        // global iteration cap n
    OutputRule output_rule = OutputRule::min_grad_iterate;

    void validate() const {
        if (!(eta > 0.0)) throw std::invalid_argument("SolverConfig: eta must be positive");
        if (!(theta > 0.0 && theta <= 1.0))
            throw std::invalid_argument("SolverConfig: theta must lie in (0, 1]");
        if (restart_b < 0.0) throw std::invalid_argument("SolverConfig: B must be >= 0");
        if (tau && *tau <= 0.0) throw std::invalid_argument("SolverConfig: tau must be positive");
        if (mode == SolverMode::theory && epoch_k == 0)
            throw std::invalid_argument("SolverConfig: theory mode requires epoch_k");
    }
};

struct TraceRecord {
    std::size_t global_iter = 0;
    std::size_t epoch = 0;
    double time = 0.0;  // continuous traces only
    double grad_norm = 0.0;
    double objective = 0.0;
    double residual = 0.0;
    bool restarted = false;
    double psnr = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t elapsed_ticks = 0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    Signal output;
    std::size_t restart_count = 0;
    double x0_norm = 0.0;
    std::size_t fidelity_evals = 0;  // update-path grad/prox evaluations only
    bool continuous_time = false;
    std::vector<std::string> warnings;
};

/// Divergence aborts carry the partial trace for post-mortem inspection.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string what, RunTrace partial)
        : std::runtime_error(std::move(what)), trace(std::move(partial)) {}
    RunTrace trace;
};

class InsufficientEpochError : public std::runtime_error {
public:
    explicit InsufficientEpochError(const std::string& what) : std::runtime_error(what) {}
};

/// Epoch-local solver state: the current/previous iterates, the accumulated
/// squared displacement, and the z / residual buffers feeding select_output.
struct EpochState {
    Signal x_prev;
    Signal x_curr;
    std::size_t k = 0;
    double sumsq = 0.0;
    std::vector<Signal> z_buffer;
    std::vector<double> residual_buffer;

    void reset_to(const Signal& x) {
        x_prev = x;
        x_curr = x;
        k = 0;
        sumsq = 0.0;
        z_buffer.clear();
        residual_buffer.clear();
    }
};

/// Output selection of the restarted solvers: K0 minimizes the displacement
/// over the second half of the epoch (ties to the smallest index), and the
/// output averages z^0..z^K0.
inline std::pair<std::size_t, Signal> select_output(const EpochState& epoch, std::size_t K) {
    if (K == 0 || epoch.residual_buffer.size() < K)
        throw InsufficientEpochError("select_output: epoch shorter than K");
    std::size_t k0 = K / 2;
    for (std::size_t k = K / 2; k < K; ++k)
        if (epoch.residual_buffer[k] < epoch.residual_buffer[k0]) k0 = k;
    Signal avg(epoch.z_buffer.front().size());
    avg.rows = epoch.z_buffer.front().rows;
    avg.cols = epoch.z_buffer.front().cols;
    for (std::size_t k = 0; k <= k0; ++k) avg += epoch.z_buffer[k];
    return {k0, (1.0 / static_cast<double>(k0 + 1)) * avg};
}

namespace detail {

/// Regularizer pull shared by all four solvers. With tau unset the pull is
/// the exact score form -S(w) (tau = 1/sigma^2 folded analytically), which is
/// what makes the theta = 1 reduction identities exact. An explicit tau
/// evaluates the literal denoiser residual tau (w - D_sigma(w)).
struct RegPull {
    const ScorePrior& prior;
    std::optional<double> tau;

    Signal operator()(const Signal& w) const {
        if (!tau) return -1.0 * prior.score(w);
        const double s2 = [&] {
            const auto s = prior.denoise_sigma();
            return s ? (*s) * (*s) : 1.0;
        }();
        Signal d = w;
        axpy(d, s2, prior.score(w));
        return (*tau) * (w - d);
    }

    /// Effective regularizer weight in F = f + c g.
    double reg_weight() const {
        if (!tau) return 1.0;
        const auto s = prior.denoise_sigma();
        return (*tau) * (s ? (*s) * (*s) : 1.0);
    }
};

struct SolverProblem {
    const Fidelity& fid;
    const ScorePrior& prior;
    RegPull pull;
    const Signal* reference = nullptr;  // PSNR ground truth, optional
    double psnr_peak = 1.0;
    const std::function<void(std::size_t, const Signal&)>* observer = nullptr;

    void observe(std::size_t iter, const Signal& x) const {
        if (observer && *observer) (*observer)(iter, x);
    }

    double objective(const Signal& x) const {
        return fid.value(x) + pull.reg_weight() * prior.reg_value(x);
    }
    Signal grad_objective(const Signal& x) const {
        Signal g = fid.grad(x);
        g += pull(x);
        return g;
    }
};

inline double trace_psnr(const SolverProblem& p, const Signal& x) {
    if (!p.reference) return std::numeric_limits<double>::quiet_NaN();
    const double err = norm2(x - *p.reference);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    const double peak2 = p.psnr_peak * p.psnr_peak * static_cast<double>(x.size());
    return 10.0 * std::log10(peak2 / err);
}

inline void record_state(RunTrace& trace, const SolverProblem& p, std::size_t iter,
                         std::size_t epoch, const Signal& x, double residual, bool restarted,
                         std::uint64_t ticks) {
    TraceRecord rec;
    rec.global_iter = iter;
    rec.epoch = epoch;
    rec.grad_norm = norm(p.grad_objective(x));
    rec.objective = p.objective(x);
    rec.residual = residual;
    rec.restarted = restarted;
    rec.psnr = trace_psnr(p, x);
    rec.elapsed_ticks = ticks;
    trace.records.push_back(rec);
}

inline void warn_step_size(RunTrace& trace, const SolverProblem& p, double eta) {
    const double lf = p.fid.constants().lipschitz_grad;
    const double lg = p.prior.constants().lipschitz_grad.value;
    const double l = lf + lg;
    if (l > 0.0 && eta > 1.0 / l + 1e-15)
        trace.warnings.push_back("eta = " + std::to_string(eta) + " exceeds 1/L = " +
                                 std::to_string(1.0 / l) + "; convergence not guaranteed");
}

enum class Step { gradient, proximal };

/// One solver update from the extrapolated point w:
///   gradient:  w - eta (grad f(w) + pull(w))
///   proximal:  prox_{eta f}(w - eta pull(w))
inline Signal apply_step(const SolverProblem& p, Step step, const Signal& w, double eta,
                         std::size_t& fidelity_evals) {
    ++fidelity_evals;
    if (step == Step::gradient) {
        Signal g = p.fid.grad(w);
        g += p.pull(w);
        Signal out = w;
        axpy(out, -eta, g);
        return out;
    }
    Signal arg = w;
    axpy(arg, -eta, p.pull(w));
    return p.fid.prox(arg, eta);
}

inline RunTrace run_red(const SolverProblem& p, Step step, const SolverConfig& cfg,
                        const Signal& x0) {
    cfg.validate();
    RunTrace trace;
    trace.x0_norm = norm(x0);
    warn_step_size(trace, p, cfg.eta);

    Signal x = x0;
    record_state(trace, p, 0, 0, x, 0.0, false, 0);
    p.observe(0, x);
    Signal best = x;
    double best_grad = trace.records.front().grad_norm;

    for (std::size_t k = 0; k < cfg.budget; ++k) {
        Signal next = apply_step(p, step, x, cfg.eta, trace.fidelity_evals);
        if (!all_finite(next)) {
            trace.output = best;
            throw DivergenceError("red solver diverged at iteration " + std::to_string(k + 1),
                                  std::move(trace));
        }
        const double residual = norm(next - x);
        x = std::move(next);
        record_state(trace, p, k + 1, 0, x, residual, false, k + 1);
        p.observe(k + 1, x);
        if (trace.records.back().grad_norm < best_grad) {
            best_grad = trace.records.back().grad_norm;
            best = x;
        }
    }
    trace.output = best;
    return trace;
}

inline RunTrace run_risp(const SolverProblem& p, Step step, const SolverConfig& cfg,
                         const Signal& x0) {
    cfg.validate();
    RunTrace trace;
    trace.x0_norm = norm(x0);
    warn_step_size(trace, p, cfg.eta);

    EpochState epoch;
    epoch.reset_to(x0);
    std::size_t epoch_id = 0;
    std::size_t global = 0;

    record_state(trace, p, 0, 0, x0, 0.0, false, 0);
    p.observe(0, x0);
    Signal best = x0;
    double best_grad = trace.records.front().grad_norm;

    const bool theory = cfg.mode == SolverMode::theory;
    while (global < cfg.budget) {
        if (theory && epoch.k >= cfg.epoch_k) break;  // epoch survived K iterations

        // z^k = x^k + (1 - theta)(x^k - x^{k-1})
        Signal z = epoch.x_curr;
        axpy(z, 1.0 - cfg.theta, epoch.x_curr - epoch.x_prev);
        Signal next = apply_step(p, step, z, cfg.eta, trace.fidelity_evals);
        if (!all_finite(next)) {
            trace.output = best;
            throw DivergenceError(
                "risp solver diverged at iteration " + std::to_string(global + 1),
                std::move(trace));
        }
        const double residual = norm(next - epoch.x_curr);
        epoch.sumsq += residual * residual;
        epoch.z_buffer.push_back(std::move(z));
        epoch.residual_buffer.push_back(residual);
        ++epoch.k;
        ++global;

        const bool restarted = restart_check(epoch.k, epoch.sumsq, cfg.restart_b);
        record_state(trace, p, global, epoch_id, next, residual, restarted, global);
        p.observe(global, next);
        if (trace.records.back().grad_norm < best_grad) {
            best_grad = trace.records.back().grad_norm;
            best = next;
        }
        if (restarted) {
            epoch.reset_to(next);
            ++epoch_id;
            ++trace.restart_count;
        } else {
            epoch.x_prev = std::move(epoch.x_curr);
            epoch.x_curr = std::move(next);
        }
    }

    if (cfg.output_rule == OutputRule::averaged_z) {
        const std::size_t K = cfg.epoch_k > 0 ? cfg.epoch_k : epoch.residual_buffer.size();
        trace.output = select_output(epoch, K).second;
    } else {
        trace.output = best;
    }
    return trace;
}

}  // namespace detail

struct SolverExtras {
    const Signal* reference = nullptr;  // optional ground truth for PSNR rows
    double psnr_peak = 1.0;
    // test/diagnostic hook, called with every iterate including x^0
    std::function<void(std::size_t, const Signal&)> on_iterate;
};

/// RED gradient method: x+ = x - eta (grad f(x) + tau (x - D_sigma(x))).
/// Returns the iterate with minimum recorded |grad F|.
inline RunTrace red_gm(const Fidelity& fid, const ScorePrior& prior, const SolverConfig& cfg,
                       const Signal& x0, const SolverExtras& extras = {}) {
    detail::SolverProblem p{fid,   prior, {prior, cfg.tau}, extras.reference, extras.psnr_peak,
                            &extras.on_iterate};
    return detail::run_red(p, detail::Step::gradient, cfg, x0);
}

/// RED proximal method: x+ = prox_{eta f}(x - eta tau (x - D_sigma(x))).
inline RunTrace red_prox(const Fidelity& fid, const ScorePrior& prior, const SolverConfig& cfg,
                         const Signal& x0, const SolverExtras& extras = {}) {
    detail::SolverProblem p{fid,   prior, {prior, cfg.tau}, extras.reference, extras.psnr_peak,
                            &extras.on_iterate};
    return detail::run_red(p, detail::Step::proximal, cfg, x0);
}

/// Restarted inertia, gradient variant (inertia z = x + (1-theta)(x - x^-),
/// update x+ = z - eta (grad f(z) - S(z)), restart per restart_check).
inline RunTrace risp_gm(const Fidelity& fid, const ScorePrior& prior, const SolverConfig& cfg,
                        const Signal& x0, const SolverExtras& extras = {}) {
    detail::SolverProblem p{fid,   prior, {prior, cfg.tau}, extras.reference, extras.psnr_peak,
                            &extras.on_iterate};
    return detail::run_risp(p, detail::Step::gradient, cfg, x0);
}

/// Restarted inertia, proximal variant: x+ = prox_{eta f}(z + eta S(z)).
inline RunTrace risp_prox(const Fidelity& fid, const ScorePrior& prior, const SolverConfig& cfg,
                          const Signal& x0, const SolverExtras& extras = {}) {
    detail::SolverProblem p{fid,   prior, {prior, cfg.tau}, extras.reference, extras.psnr_peak,
                            &extras.on_iterate};
    return detail::run_risp(p, detail::Step::proximal, cfg, x0);
}

// ---------------------------------------------------------------------------
// Theorem-driven parameter derivation.
// ---------------------------------------------------------------------------

enum class TheoryVariant { gm, prox, continuous };

class DegenerateCurvatureError : public std::invalid_argument {
public:
    explicit DegenerateCurvatureError(const std::string& what) : std::invalid_argument(what) {}
};

class HypothesisError : public std::invalid_argument {
public:
    explicit HypothesisError(const std::string& what) : std::invalid_argument(what) {}
};

/// Closed-form parameters. For gm/prox: eta, epsilon, B, theta = 4 (eps rho
/// eta^2)^{1/4}, K = ceil(1/theta). For continuous: alpha, T_max, B. The prox
/// variant also reports the weak-convexity threshold nu_max of its hypothesis.
struct TheoryParams {
    TheoryVariant variant = TheoryVariant::gm;
    double epsilon = 0.0;
    double eta = 0.0;
    double theta = 0.0;
    double restart_b = 0.0;
    std::size_t epoch_k = 0;
    double nu_max = 0.0;  // prox variant only
    double alpha = 0.0;   // continuous only
    double t_max = 0.0;   // continuous only
};

/// `budget` is the iteration budget n for gm/prox and the total time T for
/// the continuous variant.
inline TheoryParams theory_params(double lipschitz, double rho, double delta_f, double budget,
                                  TheoryVariant variant) {
    if (!(lipschitz > 0.0) || !(delta_f > 0.0) || !(budget > 0.0))
        throw std::invalid_argument("theory_params: L, Delta_F, n must be positive");
    if (!(rho > 0.0))
        throw DegenerateCurvatureError(
            "theory_params: rho = 0 is degenerate (theta = 4 (eps rho eta^2)^{1/4} collapses)");

    TheoryParams out;
    out.variant = variant;
    const double n = budget;
    switch (variant) {
        case TheoryVariant::gm:
            out.eta = 1.0 / (4.0 * lipschitz);
            out.epsilon = std::pow(2.0, 4.0 / 7.0) * std::pow(delta_f, 4.0 / 7.0) *
                              std::pow(lipschitz, 2.0 / 7.0) * std::pow(rho, 1.0 / 7.0) *
                              std::pow(n, -4.0 / 7.0) +
                          lipschitz * lipschitz / (rho * std::pow(n, 4.0));
            out.restart_b = std::sqrt(out.epsilon / rho);
            break;
        case TheoryVariant::prox:
            out.eta = 1.0 / (8.0 * lipschitz);
            out.epsilon = std::pow(delta_f, 4.0 / 7.0) * std::pow(2.0 * lipschitz, 2.0 / 7.0) *
                              std::pow(rho, 1.0 / 7.0) * std::pow(n, -4.0 / 7.0) +
                          4.0 * lipschitz * lipschitz / (rho * std::pow(n, 4.0));
            out.restart_b = std::sqrt(out.epsilon / (4.0 * rho));
            out.nu_max = 8.0 * std::pow(out.epsilon * rho, 0.25) * std::sqrt(lipschitz);
            break;
        case TheoryVariant::continuous:
            out.epsilon = std::pow(2.0, 4.0 / 7.0) * std::pow(rho, 1.0 / 7.0) *
                              std::pow(delta_f, 4.0 / 7.0) * std::pow(n, -4.0 / 7.0) +
                          16.0 / (rho * std::pow(n, 4.0));
            out.alpha = std::pow(out.epsilon * rho, 0.25);
            out.t_max = std::pow(out.epsilon * rho, -0.25);
            out.restart_b = std::sqrt(out.epsilon / rho);
            return out;
    }
    out.theta = 4.0 * std::pow(out.epsilon * rho * out.eta * out.eta, 0.25);
    if (out.theta >= 1.0)
        throw HypothesisError("theory_params: theta = 4 (eps rho eta^2)^{1/4} = " +
                              std::to_string(out.theta) +
                              " >= 1 violates the theorem hypothesis theta in (0,1)");
    out.epoch_k = static_cast<std::size_t>(std::ceil(1.0 / out.theta));
    return out;
}

/// SolverConfig matching a theory derivation (averaged-z output, epoch stop).
inline SolverConfig theory_config(const TheoryParams& tp, std::size_t budget) {
    SolverConfig cfg;
    cfg.eta = tp.eta;
    cfg.theta = tp.theta;
    cfg.restart_b = tp.restart_b;
    cfg.epoch_k = tp.epoch_k;
    cfg.mode = SolverMode::theory;
    cfg.budget = budget;
    cfg.output_rule = OutputRule::averaged_z;
    return cfg;
}

}  // namespace risp
