#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "risp/experiment.hpp"
#include "risp/graymap.hpp"
#include "risp/phantom.hpp"

namespace fs = std::filesystem;
using risp::ExperimentSpec;
using risp::PhantomKind;
using risp::Rng;
using risp::Signal;

namespace {

const char* kMinimalSpec = R"(spec_version = 1

[experiment]
problem = deblur
seed = 11
grad_target = 1e-3

[phantom]
kind = blobs
height = 16
width = 16
seed = 3

[problem]
lambda = 15.0
noise_sigma = 0.049019607843137254
kernel = gaussian
kernel_size = 9
kernel_std = 1.6

[prior]
kind = gaussian
sigma = 0.1
precision = 1.0

[solver red]
method = red_gm
eta = 0.05
iters = 40
)";

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("risp_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Phantom, DeterministicAndInRange) {
    const Signal a = risp::make_phantom(PhantomKind::blobs, 32, 32, 7);
    const Signal b = risp::make_phantom(PhantomKind::blobs, 32, 32, 7);
    EXPECT_EQ(risp::linf(a - b), 0.0);
    for (double v : a.data) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    const Signal c = risp::make_phantom(PhantomKind::checkerboard, 24, 24, 1);
    const Signal d = risp::make_phantom(PhantomKind::smooth_random, 24, 24, 1);
    for (double v : c.data) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    for (double v : d.data) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Phantom, ZeroBlobsGiveZeroImage) {
    const Signal z = risp::make_phantom(PhantomKind::blobs, 16, 16, 5, 0);
    EXPECT_EQ(risp::norm(z), 0.0);
}

TEST(Phantom, TooSmallRejected) {
    EXPECT_THROW(risp::make_phantom(PhantomKind::blobs, 2, 16, 1), std::invalid_argument);
}

TEST(Graymap, RoundTripWithinQuantization) {
    const fs::path dir = fresh_dir("pgm");
    Rng rng(1);
    const Signal img = risp::make_phantom(PhantomKind::smooth_random, 16, 16, 9);
    const std::string path = (dir / "img.pgm").string();
    risp::write_graymap(img, path);
    const Signal back = risp::read_graymap(path);
    EXPECT_EQ(back.rows, img.rows);
    EXPECT_LE(risp::linf(back - img), 0.5 / 65535.0 + 1e-12);
}

TEST(Graymap, AllZeroPayload) {
    const fs::path dir = fresh_dir("pgm0");
    const std::string path = (dir / "zero.pgm").string();
    risp::write_graymap(Signal(4, 4), path);
    const Signal back = risp::read_graymap(path);
    EXPECT_EQ(risp::norm(back), 0.0);
}

TEST(Graymap, OutOfRangeValuesClamped) {
    const fs::path dir = fresh_dir("pgmc");
    Signal img(2, 2);
    img[0] = 1.5;
    img[1] = -0.25;
    const std::string path = (dir / "clamp.pgm").string();
    risp::write_graymap(img, path);
    const Signal back = risp::read_graymap(path);
    EXPECT_EQ(back[0], 1.0);
    EXPECT_EQ(back[1], 0.0);
}

TEST(Graymap, MalformedFileRejected) {
    const fs::path dir = fresh_dir("pgmbad");
    const std::string path = (dir / "bad.pgm").string();
    std::ofstream(path) << "P2\n2 2\n255\n0 0 0 0\n";
    EXPECT_THROW(risp::read_graymap(path), risp::GraymapError);
}

TEST(Config, MinimalSpecRoundTripsBitIdentically) {
    std::istringstream in(kMinimalSpec);
    const ExperimentSpec spec = risp::parse_spec(in);
    const std::string once = risp::save_spec(spec);
    std::istringstream in2(once);
    const std::string twice = risp::save_spec(risp::parse_spec(in2));
    EXPECT_EQ(once, twice);
}

TEST(Config, TableOneDeblurRowAccepted) {
    std::string text = kMinimalSpec;
    text += R"(
[solver risp]
method = risp_gm
eta = 0.07
theta = 0.2
restart_b = 5000
iters = 40
)";
    std::istringstream in(text);
    const ExperimentSpec spec = risp::parse_spec(in);
    EXPECT_EQ(spec.params.lambda, 15.0);
    EXPECT_EQ(spec.prior.sigma, 0.1);
    const auto& risp_cfg = spec.solvers.back().config;
    EXPECT_EQ(risp_cfg.eta, 0.07);
    EXPECT_EQ(risp_cfg.theta, 0.2);
    EXPECT_EQ(risp_cfg.restart_b, 5000.0);
}

TEST(Config, DuplicateSolverRejected) {
    std::string text = kMinimalSpec;
    text += "\n[solver red]\nmethod = red_prox\n";
    std::istringstream in(text);
    EXPECT_THROW(risp::parse_spec(in), risp::ConfigError);
}

TEST(Config, UnknownKeyRejectedWithLineNumber) {
    std::string text = kMinimalSpec;
    text += "\n[prior]\nwibble = 3\n";
    std::istringstream in(text);
    try {
        risp::parse_spec(in);
        FAIL() << "expected ConfigError";
    } catch (const risp::ConfigError& err) {
        EXPECT_NE(std::string(err.what()).find("wibble"), std::string::npos);
        EXPECT_NE(std::string(err.what()).find("line"), std::string::npos);
    }
}

TEST(Config, MissingRequiredFieldsRejected) {
    std::istringstream no_version("[experiment]\nproblem = deblur\n[solver s]\nmethod = red_gm\n");
    EXPECT_THROW(risp::parse_spec(no_version), risp::ConfigError);
    std::istringstream no_solver("spec_version = 1\n[experiment]\nproblem = deblur\n");
    EXPECT_THROW(risp::parse_spec(no_solver), risp::ConfigError);
}

TEST(Config, ArraysParse) {
    std::string text = kMinimalSpec;
    text += "\n[prior]\nkind = mixture\ncomponents = 3\nvariances = 0.5, 1.0, 2.0\n";
    std::istringstream in(text);
    const ExperimentSpec spec = risp::parse_spec(in);
    const std::vector<double> want = {0.5, 1.0, 2.0};
    EXPECT_EQ(spec.prior.variances, want);
}

TEST(TraceCsv, WriteReadRoundTrip) {
    const fs::path dir = fresh_dir("csv");
    risp::RunTrace trace;
    for (std::size_t i = 0; i < 5; ++i) {
        risp::TraceRecord rec;
        rec.global_iter = i;
        rec.epoch = i / 2;
        rec.grad_norm = std::pow(0.3, static_cast<double>(i)) * 1.2345678901234567;
        rec.objective = 1.0 / (static_cast<double>(i) + 1.7);
        rec.residual = rec.grad_norm * 0.5;
        rec.restarted = (i == 3);
        rec.psnr = 20.0 + static_cast<double>(i);
        trace.records.push_back(rec);
    }
    const std::string path = (dir / "trace.csv").string();
    risp::write_trace_csv(trace, path);
    const risp::RunTrace back = risp::read_trace_csv(path);
    ASSERT_EQ(back.records.size(), trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        EXPECT_EQ(back.records[i].global_iter, trace.records[i].global_iter);
        EXPECT_EQ(back.records[i].grad_norm, trace.records[i].grad_norm);  // 17 digits round-trip
        EXPECT_EQ(back.records[i].objective, trace.records[i].objective);
        EXPECT_EQ(back.records[i].restarted, trace.records[i].restarted);
    }
    EXPECT_EQ(back.restart_count, 1u);
}

TEST(RunExperiment, ProducesTracesSummaryAndIsRerunStable) {
    const fs::path dir = fresh_dir("run");
    std::istringstream in(kMinimalSpec);
    ExperimentSpec spec = risp::parse_spec(in);
    spec.output_dir = (dir / "out").string();
    spec.solvers.push_back({"risp", "risp_gm", {}});
    spec.solvers.back().config.eta = 0.05;
    spec.solvers.back().config.theta = 0.2;
    spec.solvers.back().config.budget = 40;

    const auto r1 = risp::run_experiment(spec, 1);
    ASSERT_EQ(r1.summaries.size(), 2u);
    for (const auto& s : r1.summaries) {
        EXPECT_TRUE(fs::exists(s.trace_path));
        EXPECT_FALSE(s.diverged);
    }
    EXPECT_TRUE(fs::exists(r1.summary_path));

    // summary PSNR equals the last trace row's PSNR
    const auto trace = risp::read_trace_csv(r1.summaries[0].trace_path);
    EXPECT_EQ(trace.records.back().psnr, r1.summaries[0].final_psnr);

    // rerun with more threads: bit-identical outputs
    std::vector<std::string> before;
    for (const auto& s : r1.summaries) before.push_back(file_bytes(s.trace_path));
    const std::string summary_before = file_bytes(r1.summary_path);
    const auto r2 = risp::run_experiment(spec, 4);
    for (std::size_t i = 0; i < r2.summaries.size(); ++i)
        EXPECT_EQ(file_bytes(r2.summaries[i].trace_path), before[i]);
    EXPECT_EQ(file_bytes(r2.summary_path), summary_before);
}

TEST(RunExperiment, EnvThreadCapOverrides) {
    const fs::path dir = fresh_dir("env");
    std::istringstream in(kMinimalSpec);
    ExperimentSpec spec = risp::parse_spec(in);
    spec.output_dir = (dir / "out").string();
    setenv("RISP_THREADS", "2", 1);
    const auto before = risp::run_experiment(spec, 1);
    unsetenv("RISP_THREADS");
    const auto after = risp::run_experiment(spec, 1);
    EXPECT_EQ(file_bytes(before.summaries[0].trace_path),
              file_bytes(after.summaries[0].trace_path));
}

TEST(RunExperiment, EveryProblemKindRuns) {
    for (const char* problem : {"deblur", "inpaint", "sisr", "mri", "rician", "scatter"}) {
        const fs::path dir = fresh_dir(std::string("kind_") + problem);
        std::string text = kMinimalSpec;
        text.replace(text.find("problem = deblur"), 16, std::string("problem = ") + problem);
        std::istringstream in(text);
        ExperimentSpec spec = risp::parse_spec(in);
        spec.output_dir = (dir / "out").string();
        spec.solvers[0].config.budget = 10;
        spec.params.noise_sigma = 0.02;
        if (spec.problem == risp::ProblemKind::scatter) {
            spec.params.lambda = 1e4;
            spec.solvers[0].config.eta = 1e-4;
            spec.params.scatter_inner_gamma = 1e-5;
        } else if (spec.problem == risp::ProblemKind::rician) {
            spec.params.lambda = 0.05;
            spec.solvers[0].config.eta = 0.3;
        }
        const auto result = risp::run_experiment(spec, 1);
        EXPECT_FALSE(result.summaries[0].diverged) << problem;
    }
}
