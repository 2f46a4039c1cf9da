#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "risp/instance.hpp"
#include "risp/phantom.hpp"
#include "risp/priors.hpp"
#include "risp/signal.hpp"
#include "risp/solvers.hpp"

namespace risp {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct PhantomSpec {
    std::string kind = "blobs";
    std::size_t height = 32;
    std::size_t width = 32;
    std::uint64_t seed = 7;
    std::size_t blobs = 6;
};

struct PriorSpec {
    std::string kind = "gaussian";  // gaussian | mixture | softplus_net
    double sigma = 0.1;
    // gaussian
    double precision = 1.0;
    double mean_value = 0.0;
    // mixture
    std::size_t components = 3;
    std::uint64_t component_seed = 3;
    std::vector<double> variances = {1.0};  // length 1 broadcasts
    double mean_scale = 0.2;
    // softplus_net
    std::size_t width = 16;
    std::uint64_t net_seed = 5;
};

struct SolverEntry {
    std::string name;
    std::string method;  // red_gm | red_prox | risp_gm | risp_prox
    SolverConfig config;
};

struct ExperimentSpec {
    int spec_version = 1;
    std::string name = "experiment";
    ProblemKind problem = ProblemKind::deblur;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    double grad_target = 1e-3;
    PhantomSpec phantom;
    PriorSpec prior;
    InstanceParams params;
    std::vector<SolverEntry> solvers;
};

inline std::unique_ptr<ScorePrior> build_prior(const PriorSpec& spec, std::size_t d) {
    if (spec.kind == "gaussian") {
        Signal mean(d);
        for (double& v : mean.data) v = spec.mean_value;
        Signal prec(d);
        for (double& v : prec.data) v = spec.precision;
        return std::make_unique<GaussianPrior>(std::move(mean), std::move(prec),
                                               spec.sigma > 0.0 ? std::optional<double>(spec.sigma)
                                                                : std::nullopt);
    }
    if (spec.kind == "mixture") {
        Rng rng(spec.component_seed);
        std::vector<MixtureComponent> comps;
        for (std::size_t i = 0; i < spec.components; ++i) {
            MixtureComponent c;
            c.weight = 1.0;
            c.mean = Signal(d);
            for (double& v : c.mean.data) v = 0.5 + spec.mean_scale * rng.normal();
            c.variance = spec.variances[i % spec.variances.size()];
            comps.push_back(std::move(c));
        }
        return std::make_unique<MixturePrior>(std::move(comps), spec.sigma);
    }
    if (spec.kind == "softplus_net")
        return std::make_unique<SoftplusNetPrior>(d, spec.width, spec.net_seed, spec.sigma);
    throw ConfigError("unknown prior kind: " + spec.kind);
}

namespace detail {

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, int line) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": not a number: " + s);
    }
}

inline std::uint64_t parse_uint(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": not an integer: " + s);
    }
}

inline std::vector<double> parse_array(const std::string& s, int line) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": empty array item");
        out.push_back(parse_double(item.substr(b, e - b + 1), line));
    }
    if (out.empty()) throw ConfigError("line " + std::to_string(line) + ": empty array");
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses the experiment config grammar: `[section]` or `[solver <name>]`
/// headers, `key = value` scalars, comma-separated arrays, `#` comments.
/// Unknown keys and duplicate solver names are rejected with line numbers.
inline ExperimentSpec parse_spec(std::istream& in) {
    ExperimentSpec spec;
    bool saw_version = false;
    bool saw_problem = false;
    std::set<std::string> solver_names;
    std::string section;
    SolverEntry* solver = nullptr;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string text = detail::trim(raw);
        if (text.empty()) continue;

        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
            const std::string inner = detail::trim(text.substr(1, text.size() - 2));
            if (inner.rfind("solver", 0) == 0) {
                const std::string name = detail::trim(inner.substr(6));
                if (name.empty())
                    throw ConfigError("line " + std::to_string(line) + ": solver section needs a name");
                if (!solver_names.insert(name).second)
                    throw ConfigError("line " + std::to_string(line) + ": duplicate solver " + name);
                spec.solvers.push_back(SolverEntry{name, "", {}});
                solver = &spec.solvers.back();
                section = "solver";
            } else if (inner == "experiment" || inner == "phantom" || inner == "problem" ||
                       inner == "prior") {
                section = inner;
                solver = nullptr;
            } else {
                throw ConfigError("line " + std::to_string(line) + ": unknown section [" + inner + "]");
            }
            continue;
        }

        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key or value");

        auto unknown = [&]() -> ConfigError {
            return ConfigError("line " + std::to_string(line) + ": unknown key '" + key +
                               "' in section [" + (section.empty() ? "top" : section) + "]");
        };

        if (section.empty()) {
            if (key == "spec_version") {
                if (detail::parse_uint(value, line) != 1)
                    throw ConfigError("line " + std::to_string(line) + ": unsupported spec_version");
                saw_version = true;
            } else {
                throw unknown();
            }
        } else if (section == "experiment") {
            if (key == "name") spec.name = value;
            else if (key == "problem") { spec.problem = problem_kind_from_string(value); saw_problem = true; }
            else if (key == "seed") spec.seed = detail::parse_uint(value, line);
            else if (key == "output_dir") spec.output_dir = value;
            else if (key == "grad_target") spec.grad_target = detail::parse_double(value, line);
            else throw unknown();
        } else if (section == "phantom") {
            if (key == "kind") spec.phantom.kind = value;
            else if (key == "height") spec.phantom.height = detail::parse_uint(value, line);
            else if (key == "width") spec.phantom.width = detail::parse_uint(value, line);
            else if (key == "seed") spec.phantom.seed = detail::parse_uint(value, line);
            else if (key == "blobs") spec.phantom.blobs = detail::parse_uint(value, line);
            else throw unknown();
        } else if (section == "problem") {
            auto& p = spec.params;
            if (key == "lambda") p.lambda = detail::parse_double(value, line);
            else if (key == "noise_sigma") p.noise_sigma = detail::parse_double(value, line);
            else if (key == "kernel") p.kernel_kind = value;
            else if (key == "kernel_size") p.kernel_size = detail::parse_uint(value, line);
            else if (key == "kernel_std") p.kernel_std = detail::parse_double(value, line);
            else if (key == "kernel_seed") p.kernel_seed = detail::parse_uint(value, line);
            else if (key == "observed_fraction") p.observed_fraction = detail::parse_double(value, line);
            else if (key == "sr_factor") p.sr_factor = detail::parse_uint(value, line);
            else if (key == "mri_sample_fraction") p.mri_sample_fraction = detail::parse_double(value, line);
            else if (key == "scatter_m") p.scatter_m = detail::parse_uint(value, line);
            else if (key == "scatter_h_scale") p.scatter_h_scale = detail::parse_double(value, line);
            else if (key == "scatter_inner_max") p.scatter_inner_max = detail::parse_uint(value, line);
            else if (key == "scatter_inner_eps") p.scatter_inner_eps = detail::parse_double(value, line);
            else if (key == "scatter_inner_gamma") p.scatter_inner_gamma = detail::parse_double(value, line);
            else throw unknown();
        } else if (section == "prior") {
            auto& p = spec.prior;
            if (key == "kind") p.kind = value;
            else if (key == "sigma") p.sigma = detail::parse_double(value, line);
            else if (key == "precision") p.precision = detail::parse_double(value, line);
            else if (key == "mean_value") p.mean_value = detail::parse_double(value, line);
            else if (key == "components") p.components = detail::parse_uint(value, line);
            else if (key == "component_seed") p.component_seed = detail::parse_uint(value, line);
            else if (key == "variances") p.variances = detail::parse_array(value, line);
            else if (key == "mean_scale") p.mean_scale = detail::parse_double(value, line);
            else if (key == "width") p.width = detail::parse_uint(value, line);
            else if (key == "net_seed") p.net_seed = detail::parse_uint(value, line);
            else throw unknown();
        } else if (section == "solver") {
            auto& c = solver->config;
            if (key == "method") solver->method = value;
            else if (key == "eta") c.eta = detail::parse_double(value, line);
            else if (key == "theta") c.theta = detail::parse_double(value, line);
            else if (key == "restart_b") c.restart_b = detail::parse_double(value, line);
            else if (key == "iters") c.budget = detail::parse_uint(value, line);
            else if (key == "tau") c.tau = detail::parse_double(value, line);
            else if (key == "epoch_k") c.epoch_k = detail::parse_uint(value, line);
            else if (key == "mode") {
                if (value == "theory") c.mode = SolverMode::theory;
                else if (value == "practical") c.mode = SolverMode::practical;
                else throw ConfigError("line " + std::to_string(line) + ": unknown mode " + value);
            } else if (key == "output_rule") {
                if (value == "averaged_z") c.output_rule = OutputRule::averaged_z;
                else if (value == "min_grad") c.output_rule = OutputRule::min_grad_iterate;
                else throw ConfigError("line " + std::to_string(line) + ": unknown output_rule " + value);
            } else {
                throw unknown();
            }
        }
    }

    if (!saw_version) throw ConfigError("missing required key spec_version");
    if (!saw_problem) throw ConfigError("missing required key problem in [experiment]");
    if (spec.solvers.empty()) throw ConfigError("no [solver <name>] sections");
    for (const auto& s : spec.solvers) {
        if (s.method != "red_gm" && s.method != "red_prox" && s.method != "risp_gm" &&
            s.method != "risp_prox")
            throw ConfigError("solver " + s.name + ": unknown or missing method '" + s.method + "'");
    }
    return spec;
}

inline ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file: " + path);
    return parse_spec(in);
}

/// Canonical serialization; parse(save(spec)) reproduces the object exactly
/// (floats carry 17 significant digits).
inline std::string save_spec(const ExperimentSpec& spec) {
    using detail::format_double;
    std::ostringstream out;
    out << "spec_version = 1\n\n";
    out << "[experiment]\n";
    out << "name = " << spec.name << "\n";
    out << "problem = " << to_string(spec.problem) << "\n";
    out << "seed = " << spec.seed << "\n";
    out << "output_dir = " << spec.output_dir << "\n";
    out << "grad_target = " << format_double(spec.grad_target) << "\n\n";

    out << "[phantom]\n";
    out << "kind = " << spec.phantom.kind << "\n";
    out << "height = " << spec.phantom.height << "\n";
    out << "width = " << spec.phantom.width << "\n";
    out << "seed = " << spec.phantom.seed << "\n";
    out << "blobs = " << spec.phantom.blobs << "\n\n";

    const auto& p = spec.params;
    out << "[problem]\n";
    out << "lambda = " << format_double(p.lambda) << "\n";
    out << "noise_sigma = " << format_double(p.noise_sigma) << "\n";
    out << "kernel = " << p.kernel_kind << "\n";
    out << "kernel_size = " << p.kernel_size << "\n";
    out << "kernel_std = " << format_double(p.kernel_std) << "\n";
    out << "kernel_seed = " << p.kernel_seed << "\n";
    out << "observed_fraction = " << format_double(p.observed_fraction) << "\n";
    out << "sr_factor = " << p.sr_factor << "\n";
    out << "mri_sample_fraction = " << format_double(p.mri_sample_fraction) << "\n";
    out << "scatter_m = " << p.scatter_m << "\n";
    out << "scatter_h_scale = " << format_double(p.scatter_h_scale) << "\n";
    out << "scatter_inner_max = " << p.scatter_inner_max << "\n";
    out << "scatter_inner_eps = " << format_double(p.scatter_inner_eps) << "\n";
    out << "scatter_inner_gamma = " << format_double(p.scatter_inner_gamma) << "\n\n";

    const auto& pr = spec.prior;
    out << "[prior]\n";
    out << "kind = " << pr.kind << "\n";
    out << "sigma = " << format_double(pr.sigma) << "\n";
    out << "precision = " << format_double(pr.precision) << "\n";
    out << "mean_value = " << format_double(pr.mean_value) << "\n";
    out << "components = " << pr.components << "\n";
    out << "component_seed = " << pr.component_seed << "\n";
    out << "variances = ";
    for (std::size_t i = 0; i < pr.variances.size(); ++i)
        out << (i ? ", " : "") << format_double(pr.variances[i]);
    out << "\n";
    out << "mean_scale = " << format_double(pr.mean_scale) << "\n";
    out << "width = " << pr.width << "\n";
    out << "net_seed = " << pr.net_seed << "\n";

    for (const auto& s : spec.solvers) {
        out << "\n[solver " << s.name << "]\n";
        out << "method = " << s.method << "\n";
        out << "eta = " << format_double(s.config.eta) << "\n";
        out << "theta = " << format_double(s.config.theta) << "\n";
        out << "restart_b = " << format_double(s.config.restart_b) << "\n";
        out << "iters = " << s.config.budget << "\n";
        if (s.config.tau) out << "tau = " << format_double(*s.config.tau) << "\n";
        out << "mode = " << (s.config.mode == SolverMode::theory ? "theory" : "practical") << "\n";
        if (s.config.epoch_k > 0) out << "epoch_k = " << s.config.epoch_k << "\n";
        out << "output_rule = "
            << (s.config.output_rule == OutputRule::averaged_z ? "averaged_z" : "min_grad") << "\n";
    }
    return out.str();
}

}  // namespace risp
