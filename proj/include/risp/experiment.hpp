#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "risp/config.hpp"
#include "risp/diagnostics.hpp"
#include "risp/graymap.hpp"
#include "risp/instance.hpp"
#include "risp/phantom.hpp"
#include "risp/solvers.hpp"

namespace risp {

namespace detail {

inline std::string csv_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Trace CSV schema: one row per recorded iterate,
///   global_iter,epoch,grad_norm,objective,residual,restarted,psnr
/// (continuous runs replace global_iter with time). LF endings, floats with
/// 17 significant digits, restarted in {0,1}.
inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF on every platform
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << (trace.continuous_time ? "time" : "global_iter")
        << ",epoch,grad_norm,objective,residual,restarted,psnr\n";
    for (const auto& r : trace.records) {
        if (trace.continuous_time)
            out << detail::csv_double(r.time);
        else
            out << r.global_iter;
        out << "," << r.epoch << "," << detail::csv_double(r.grad_norm) << ","
            << detail::csv_double(r.objective) << "," << detail::csv_double(r.residual) << ","
            << (r.restarted ? 1 : 0) << "," << detail::csv_double(r.psnr) << "\n";
    }
}

inline RunTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("read_trace_csv: empty file " + path);
    RunTrace trace;
    trace.continuous_time = header.rfind("time,", 0) == 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        TraceRecord rec;
        auto next = [&]() {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("read_trace_csv: short row in " + path);
            return field;
        };
        if (trace.continuous_time)
            rec.time = std::stod(next());
        else
            rec.global_iter = std::stoull(next());
        rec.epoch = std::stoull(next());
        rec.grad_norm = std::stod(next());
        rec.objective = std::stod(next());
        rec.residual = std::stod(next());
        rec.restarted = next() == "1";
        const std::string p = next();
        rec.psnr = p == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(p);
        trace.records.push_back(rec);
        if (rec.restarted) ++trace.restart_count;
    }
    return trace;
}

struct SolverSummary {
    std::string solver;
    double final_psnr = std::numeric_limits<double>::quiet_NaN();
    double iters_to_target = -1.0;  // -1 when the target was never reached
    std::size_t restarts = 0;
    bool diverged = false;
    std::string trace_path;
};

struct ExperimentResult {
    std::vector<SolverSummary> summaries;
    std::string summary_path;
};

namespace detail {

inline Signal initial_iterate(ProblemKind problem, const ProblemInstance& inst) {
    const Signal& gt = inst.ground_truth;
    switch (problem) {
        case ProblemKind::deblur:
        case ProblemKind::inpaint:
        case ProblemKind::rician:
        case ProblemKind::mri:
            return inst.observation_image;
        case ProblemKind::sisr: {
            Signal x0(gt.rows, gt.cols);
            const std::size_t s = gt.rows / inst.observation_image.rows;
            for (std::size_t r = 0; r < gt.rows; ++r)
                for (std::size_t c = 0; c < gt.cols; ++c)
                    x0.at(r, c) = inst.observation_image.at(r / s, c / s);
            return x0;
        }
        case ProblemKind::scatter: {
            Signal x0(gt.rows, gt.cols);
            for (double& v : x0.data) v = 0.5;
            return x0;
        }
    }
    return gt;
}

inline RunTrace dispatch_solver(const std::string& method, const Fidelity& fid,
                                const ScorePrior& prior, const SolverConfig& cfg, const Signal& x0,
                                const SolverExtras& extras) {
    if (method == "red_gm") return red_gm(fid, prior, cfg, x0, extras);
    if (method == "red_prox") return red_prox(fid, prior, cfg, x0, extras);
    if (method == "risp_gm") return risp_gm(fid, prior, cfg, x0, extras);
    if (method == "risp_prox") return risp_prox(fid, prior, cfg, x0, extras);
    throw ConfigError("unknown solver method: " + method);
}

inline std::size_t thread_cap(std::size_t requested) {
    if (const char* env = std::getenv("RISP_THREADS")) {
        try {
            const std::size_t v = std::stoull(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return requested > 0 ? requested : 1;
}

}  // namespace detail

/// Runs every configured solver on the generated instance, writes one trace
/// CSV plus a final-image graymap per solver, and a summary CSV after all
/// runs join. Independent solver runs execute concurrently (capped by
/// `threads`, overridden by RISP_THREADS); outputs are keyed by solver name
/// so the files are identical for any thread count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t threads = 1) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);

    const Signal phantom = make_phantom(phantom_kind_from_string(spec.phantom.kind),
                                        spec.phantom.height, spec.phantom.width, spec.phantom.seed,
                                        spec.phantom.blobs);
    const ProblemInstance instance = generate_instance(spec.problem, phantom, spec.seed, spec.params);
    const auto prior = build_prior(spec.prior, phantom.size());
    const Signal x0 = detail::initial_iterate(spec.problem, instance);

    struct RunOutput {
        SolverSummary summary;
        RunTrace trace;
        bool has_trace = false;
    };

    auto run_one = [&](const SolverEntry& entry) {
        RunOutput out;
        out.summary.solver = entry.name;
        SolverExtras extras{&instance.ground_truth, 1.0};
        try {
            out.trace = detail::dispatch_solver(entry.method, *instance.fidelity, *prior,
                                                entry.config, x0, extras);
            out.has_trace = true;
        } catch (const DivergenceError& err) {
            out.trace = err.trace;
            out.has_trace = true;
            out.summary.diverged = true;
        }
        if (out.has_trace && !out.trace.records.empty()) {
            out.summary.final_psnr = out.trace.records.back().psnr;
            out.summary.restarts = out.trace.restart_count;
            if (const auto it = iterations_to_target(out.trace, spec.grad_target))
                out.summary.iters_to_target = *it;
        }
        return out;
    };

    const std::size_t cap = detail::thread_cap(threads);
    std::vector<RunOutput> outputs(spec.solvers.size());
    for (std::size_t base = 0; base < spec.solvers.size(); base += cap) {
        const std::size_t batch = std::min(cap, spec.solvers.size() - base);
        std::vector<std::future<RunOutput>> futs;
        futs.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i)
            futs.push_back(std::async(std::launch::async, run_one, spec.solvers[base + i]));
        for (std::size_t i = 0; i < batch; ++i) outputs[base + i] = futs[i].get();
    }

    ExperimentResult result;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        auto& out = outputs[i];
        const std::string stem = spec.output_dir + "/" + spec.name + "_" + spec.solvers[i].name;
        out.summary.trace_path = stem + ".csv";
        write_trace_csv(out.trace, out.summary.trace_path);
        if (out.trace.output.size() == phantom.size())
            write_graymap(reshaped(clamp01(out.trace.output), phantom.rows, phantom.cols),
                          stem + ".pgm");
        result.summaries.push_back(out.summary);
    }

    result.summary_path = spec.output_dir + "/" + spec.name + "_summary.csv";
    std::ofstream sum(result.summary_path, std::ios::binary);
    sum << "solver,final_psnr,iters_to_grad_target,restarts,diverged\n";
    for (const auto& s : result.summaries)
        sum << s.solver << "," << detail::csv_double(s.final_psnr) << ","
            << detail::csv_double(s.iters_to_target) << "," << s.restarts << ","
            << (s.diverged ? 1 : 0) << "\n";
    return result;
}

}  // namespace risp
