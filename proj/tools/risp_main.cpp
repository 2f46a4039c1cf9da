#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "risp/diagnostics.hpp"
#include "risp/experiment.hpp"

namespace {

int cmd_run(const std::string& spec_path, std::size_t threads) {
    const risp::ExperimentSpec spec = risp::load_spec(spec_path);
    std::cout << "experiment " << spec.name << ": problem=" << risp::to_string(spec.problem)
              << " lambda=" << spec.params.lambda << " noise_sigma=" << spec.params.noise_sigma
              << " prior=" << spec.prior.kind << " sigma=" << spec.prior.sigma << "\n";
    for (const auto& s : spec.solvers)
        std::cout << "  solver " << s.name << ": method=" << s.method << " eta=" << s.config.eta
                  << " theta=" << s.config.theta << " B=" << s.config.restart_b
                  << " iters=" << s.config.budget << "\n";
    const risp::ExperimentResult result = risp::run_experiment(spec, threads);
    bool diverged = false;
    for (const auto& s : result.summaries) {
        std::cout << s.solver << ": final_psnr=" << s.final_psnr
                  << " iters_to_target=" << s.iters_to_target << " restarts=" << s.restarts
                  << (s.diverged ? " DIVERGED" : "") << " trace=" << s.trace_path << "\n";
        diverged |= s.diverged;
    }
    std::cout << "summary: " << result.summary_path << "\n";
    return diverged ? 1 : 0;
}

int cmd_check_grad(const std::string& spec_path) {
    const risp::ExperimentSpec spec = risp::load_spec(spec_path);
    const risp::Signal phantom =
        risp::make_phantom(risp::phantom_kind_from_string(spec.phantom.kind), spec.phantom.height,
                           spec.phantom.width, spec.phantom.seed, spec.phantom.blobs);
    const risp::ProblemInstance inst =
        risp::generate_instance(spec.problem, phantom, spec.seed, spec.params);
    const auto prior = risp::build_prior(spec.prior, phantom.size());

    risp::Rng rng(spec.seed ^ 0xc0ffee);
    double worst_fid = 0.0, worst_prior = 0.0;
    for (int i = 0; i < 20; ++i) {
        risp::Signal x = rng.uniform_signal(phantom.size(), 0.05, 0.95);
        x.rows = phantom.rows;
        x.cols = phantom.cols;
        worst_fid = std::max(
            worst_fid,
            risp::fd_gradient_check([&](const risp::Signal& p) { return inst.fidelity->value(p); },
                                    [&](const risp::Signal& p) { return inst.fidelity->grad(p); },
                                    x));
        worst_prior = std::max(
            worst_prior,
            risp::fd_gradient_check([&](const risp::Signal& p) { return prior->reg_value(p); },
                                    [&](const risp::Signal& p) {
                                        return -1.0 * prior->score(p);
                                    },
                                    x));
    }
    std::cout << "fidelity gradient max relative FD error: " << worst_fid << "\n";
    std::cout << "prior score max relative FD error:       " << worst_prior << "\n";
    const bool ok = worst_fid < 1e-6 && worst_prior < 1e-6;
    std::cout << (ok ? "OK" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int cmd_rate_fit(const std::string& trace_path, std::size_t lo, std::size_t hi) {
    const risp::RunTrace trace = risp::read_trace_csv(trace_path);
    const risp::RateFit fit = risp::fit_rate(trace, {lo, hi});
    std::cout << "slope = " << fit.slope << "\nintercept = " << fit.intercept
              << "\nr2 = " << fit.r2 << "\nwindow = [" << fit.window_lo << ", " << fit.window_hi
              << "]\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& param,
              const std::vector<double>& values, std::size_t threads) {
    risp::ExperimentSpec base = risp::load_spec(spec_path);
    std::ofstream sum(base.output_dir + "/" + base.name + "_sweep_summary.csv", std::ios::binary);
    sum << "param,value,solver,final_psnr,iters_to_grad_target,restarts,diverged\n";
    bool diverged = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        risp::ExperimentSpec spec = base;
        spec.name = base.name + "_" + param + "_" + std::to_string(i);
        const double v = values[i];
        if (param == "lambda") spec.params.lambda = v;
        else if (param == "noise_sigma") spec.params.noise_sigma = v;
        else if (param == "sigma") spec.prior.sigma = v;
        else if (param == "eta") { for (auto& s : spec.solvers) s.config.eta = v; }
        else if (param == "theta") { for (auto& s : spec.solvers) s.config.theta = v; }
        else if (param == "restart_b") { for (auto& s : spec.solvers) s.config.restart_b = v; }
        else if (param == "iters") {
            for (auto& s : spec.solvers) s.config.budget = static_cast<std::size_t>(v);
        } else {
            std::cerr << "unknown sweep parameter: " << param << "\n";
            return 2;
        }
        const risp::ExperimentResult result = risp::run_experiment(spec, threads);
        for (const auto& s : result.summaries) {
            sum << param << "," << v << "," << s.solver << "," << s.final_psnr << ","
                << s.iters_to_target << "," << s.restarts << "," << (s.diverged ? 1 : 0) << "\n";
            diverged |= s.diverged;
        }
        std::cout << "sweep " << param << " = " << v << " done\n";
    }
    return diverged ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restarted inertia with score-based priors: experiment runner"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string trace_path;
    std::string param;
    std::vector<double> values;
    std::size_t threads = 1;
    std::size_t lo = 0, hi = 0;

    auto* run = app.add_subcommand("run", "run an experiment spec");
    run->add_option("spec", spec_path, "experiment config file")->required();
    run->add_option("--threads", threads, "instance parallelism cap");

    auto* check = app.add_subcommand("check-grad", "finite-difference gradient check");
    check->add_option("spec", spec_path, "experiment config file")->required();

    auto* rate = app.add_subcommand("rate-fit", "fit a convergence-rate slope to a trace CSV");
    rate->add_option("trace", trace_path, "trace csv")->required();
    rate->add_option("--lo", lo, "window lower iteration");
    rate->add_option("--hi", hi, "window upper iteration");

    auto* sweep = app.add_subcommand("sweep", "re-run a spec over parameter values");
    sweep->add_option("spec", spec_path, "experiment config file")->required();
    sweep->add_option("--param", param, "parameter name")->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    sweep->add_option("--threads", threads, "instance parallelism cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(spec_path, threads);
        if (check->parsed()) return cmd_check_grad(spec_path);
        if (rate->parsed()) return cmd_rate_fit(trace_path, lo, hi);
        if (sweep->parsed()) return cmd_sweep(spec_path, param, values, threads);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
