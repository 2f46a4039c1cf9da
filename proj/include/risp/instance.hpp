#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "risp/fft.hpp"
#include "risp/fidelity.hpp"
#include "risp/kernels.hpp"
#include "risp/rician.hpp"
#include "risp/rng.hpp"
#include "risp/scatter.hpp"
#include "risp/signal.hpp"

namespace risp {

enum class ProblemKind { deblur, inpaint, sisr, mri, rician, scatter };

inline ProblemKind problem_kind_from_string(const std::string& s) {
    if (s == "deblur") return ProblemKind::deblur;
    if (s == "inpaint") return ProblemKind::inpaint;
    if (s == "sisr") return ProblemKind::sisr;
    if (s == "mri") return ProblemKind::mri;
    if (s == "rician") return ProblemKind::rician;
    if (s == "scatter") return ProblemKind::scatter;
    throw std::invalid_argument("unknown problem: " + s);
}

inline std::string to_string(ProblemKind p) {
    switch (p) {
        case ProblemKind::deblur: return "deblur";
        case ProblemKind::inpaint: return "inpaint";
        case ProblemKind::sisr: return "sisr";
        case ProblemKind::mri: return "mri";
        case ProblemKind::rician: return "rician";
        case ProblemKind::scatter: return "scatter";
    }
    return "?";
}

/// Forward-model parameters; which fields matter depends on the problem.
struct InstanceParams {
    double lambda = 1.0;
    double noise_sigma = 0.0;

    std::string kernel_kind = "gaussian";  // gaussian | uniform | motion | delta
    std::size_t kernel_size = 9;
    double kernel_std = 1.6;
    std::uint64_t kernel_seed = 1;

    double observed_fraction = 0.2;  // inpaint: fraction of pixels kept
    std::size_t sr_factor = 2;
    double mri_sample_fraction = 0.125;  // fraction of k-space bins kept

    std::size_t scatter_m = 24;  // receiver count
    double scatter_h_scale = 0.05;
    std::size_t scatter_inner_max = 100;
    double scatter_inner_eps = 2e-3;
    double scatter_inner_gamma = 0.0;  // <= 0 selects 400/(lambda eta)
};

struct ProblemInstance {
    std::unique_ptr<Fidelity> fidelity;
    Signal ground_truth;
    Signal observation_image;  // real-space rendering of y, for output only
};

inline Signal build_kernel(const InstanceParams& p, std::size_t h, std::size_t w) {
    Signal stencil;
    if (p.kernel_kind == "gaussian")
        stencil = gaussian_kernel(p.kernel_size, p.kernel_std);
    else if (p.kernel_kind == "uniform")
        stencil = uniform_kernel(p.kernel_size);
    else if (p.kernel_kind == "motion")
        stencil = motion_kernel(p.kernel_size, p.kernel_seed);
    else if (p.kernel_kind == "delta")
        stencil = delta_kernel(p.kernel_size);
    else
        throw std::invalid_argument("unknown kernel kind: " + p.kernel_kind);
    return embed_kernel(stencil, h, w);
}

/// Applies the forward model to a phantom in [0,1], injects seeded noise, and
/// returns the fidelity together with the ground truth for PSNR.
inline ProblemInstance generate_instance(ProblemKind problem, const Signal& phantom,
                                         std::uint64_t noise_seed, const InstanceParams& params) {
    require_shape(phantom, "generate_instance");
    for (double v : phantom.data)
        if (v < 0.0 || v > 1.0)
            throw std::invalid_argument("generate_instance: phantom must lie in [0,1]");
    Rng rng(noise_seed);
    ProblemInstance out;
    out.ground_truth = phantom;

    switch (problem) {
        case ProblemKind::deblur: {
            const Signal kernel = build_kernel(params, phantom.rows, phantom.cols);
            Signal y = circ_conv(phantom, kernel);
            if (params.noise_sigma > 0.0)
                for (double& v : y.data) v += params.noise_sigma * rng.normal();
            out.observation_image = y;
            out.fidelity = deblur_fidelity(kernel, std::move(y), params.lambda, params.noise_sigma);
            break;
        }
        case ProblemKind::inpaint: {
            Signal mask(phantom.rows, phantom.cols);
            for (double& m : mask.data) m = rng.uniform() < params.observed_fraction ? 1.0 : 0.0;
            Signal y = phantom;
            if (params.noise_sigma > 0.0)
                for (double& v : y.data) v += params.noise_sigma * rng.normal();
            y = hadamard(mask, y);
            out.observation_image = y;
            out.fidelity = inpaint_fidelity(std::move(mask), std::move(y), params.lambda);
            break;
        }
        case ProblemKind::sisr: {
            const std::size_t s = params.sr_factor;
            if (s == 0 || phantom.rows % s != 0 || phantom.cols % s != 0)
                throw std::invalid_argument("generate_instance: image size not divisible by factor");
            const Signal kernel = build_kernel(params, phantom.rows, phantom.cols);
            SisrFidelity probe(kernel, s, Signal(phantom.rows / s, phantom.cols / s), params.lambda);
            Signal y = probe.apply_forward(phantom);
            if (params.noise_sigma > 0.0)
                for (double& v : y.data) v += params.noise_sigma * rng.normal();
            out.observation_image = y;
            out.fidelity = sisr_fidelity(kernel, s, std::move(y), params.lambda);
            break;
        }
        case ProblemKind::mri: {
            // conjugate-symmetric sampling: one draw per {k, -k} pair, DC kept
            Signal mask(phantom.rows, phantom.cols);
            mask.at(0, 0) = 1.0;
            for (std::size_t r = 0; r < mask.rows; ++r)
                for (std::size_t c = 0; c < mask.cols; ++c) {
                    if (r == 0 && c == 0) continue;
                    const std::size_t rr = (mask.rows - r) % mask.rows;
                    const std::size_t cc = (mask.cols - c) % mask.cols;
                    if (std::make_pair(rr, cc) < std::make_pair(r, c)) {
                        mask.at(r, c) = mask.at(rr, cc);
                        continue;
                    }
                    mask.at(r, c) = rng.uniform() < params.mri_sample_fraction ? 1.0 : 0.0;
                }
            // k-space noise with sigma quoted in image-equivalent units:
            // adding AWGN to the image and transforming are the same thing.
            Signal noisy = phantom;
            if (params.noise_sigma > 0.0)
                for (double& v : noisy.data) v += params.noise_sigma * rng.normal();
            Spectrum y = dft2(noisy);
            for (std::size_t i = 0; i < y.size(); ++i)
                if (mask[i] == 0.0) y.data[i] = {0.0, 0.0};
            Spectrum filled = y;
            out.observation_image = idft2(filled);
            out.fidelity = mri_fidelity(std::move(mask), std::move(y), params.lambda);
            break;
        }
        case ProblemKind::rician: {
            Signal y(phantom.rows, phantom.cols);
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double nr = params.noise_sigma > 0.0 ? params.noise_sigma * rng.normal() : 0.0;
                const double ni = params.noise_sigma > 0.0 ? params.noise_sigma * rng.normal() : 0.0;
                const double re = phantom[i] + nr;
                y[i] = std::sqrt(re * re + ni * ni);
            }
            out.observation_image = y;
            out.fidelity = rician_fidelity(RicianSpec{std::move(y), std::max(params.noise_sigma, 1e-3)},
                                           params.lambda);
            break;
        }
        case ProblemKind::scatter: {
            const std::size_t d = phantom.size();
            const std::size_t m = params.scatter_m;
            // near-isometric seeded H so the paper-default inner loop converges
            auto h_matrix = std::make_shared<std::vector<double>>(m * d);
            {
                Rng hrng(noise_seed ^ 0x9e3779b97f4a7c15ull);
                for (double& v : *h_matrix) v = hrng.normal() / std::sqrt(static_cast<double>(m));
                for (double& v : *h_matrix) v *= params.scatter_h_scale;
            }
            LinearOp h;
            h.dim_in = d;
            h.dim_out = m;
            h.apply = [h_matrix, d, m](const Signal& x) {
                Signal y(m);
                for (std::size_t r = 0; r < m; ++r) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < d; ++c) acc += (*h_matrix)[r * d + c] * x[c];
                    y[r] = acc;
                }
                return y;
            };
            h.adjoint = [h_matrix, d, m](const Signal& y) {
                Signal x(d);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < d; ++c) x[c] += (*h_matrix)[r * d + c] * y[r];
                return x;
            };
            Signal u(d);
            for (double& v : u.data) v = rng.uniform(0.9, 1.1);
            Signal y = h.apply(hadamard(u, phantom));
            if (params.noise_sigma > 0.0)
                for (double& v : y.data) v += params.noise_sigma * rng.normal();
            out.observation_image = y;
            ScatterSpec spec{std::move(h), std::move(u), std::move(y), params.lambda,
                             params.scatter_inner_max, params.scatter_inner_eps,
                             params.scatter_inner_gamma};
            out.fidelity = scatter_fidelity(std::move(spec));
            break;
        }
    }
    return out;
}

}  // namespace risp
