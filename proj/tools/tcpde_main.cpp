#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcpde/benchmark.hpp"
#include "tcpde/config.hpp"
#include "tcpde/conv.hpp"
#include "tcpde/errors.hpp"
#include "tcpde/image_io.hpp"
#include "tcpde/metrics.hpp"
#include "tcpde/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tcpde;

namespace {

std::string default_output_dir() {
    if (const char* env = std::getenv("TCPDE_OUT_DIR")) return env;
    return ".";
}

double sample_stddev(const ImageGrid& a, const ImageGrid& b) {
    const std::size_t n = a.pixel_count();
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a.data()[k] - b.data()[k];
        sum += d;
        sumsq += d * d;
    }
    const double mean = sum / static_cast<double>(n);
    return std::sqrt(sumsq / static_cast<double>(n) - mean * mean);
}

ModelParams resolve_params(const std::string& model_arg, const std::string& params_file) {
    const auto model = model_from_name(model_arg);
    if (!model)
        throw ConfigError("unknown model '" + model_arg +
                          "' (expected tcpde, acpde, sys, cao or tde)");
    if (params_file.empty()) return model_params_from_json(*model, json::object());

    std::ifstream in(params_file);
    if (!in) throw IoError(params_file + ": cannot open params file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(params_file + ": JSON parse error: " + e.what());
    }
    // Accept either a bare parameter block or a full experiment config with
    // a models.<name> section.
    if (j.contains("models")) {
        if (!j.at("models").contains(model_arg))
            throw ConfigError(params_file + ": no models." + model_arg + " section");
        return model_params_from_json(*model, j.at("models").at(model_arg));
    }
    return model_params_from_json(*model, j);
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out << body;
    if (!out) throw IoError(path + ": write failed");
}

int cmd_add_noise(const std::string& in_path, const std::string& out_path, double sigma,
                  double mean, std::uint64_t seed) {
    const ImageGrid input = load_image(in_path);
    NoiseSpec spec{mean, sigma, seed};
    const ImageGrid noisy = add_gaussian_noise(input, spec);

    json echo = {{"command", "add-noise"}, {"sigma", sigma}, {"mean", mean}, {"seed", seed}};
    save_image(noisy, out_path, echo.dump());
    std::printf("wrote %s (requested sigma %.4f, sample sigma %.4f)\n", out_path.c_str(),
                sigma, sample_stddev(noisy, input));
    return exit_code::ok;
}

int cmd_denoise(const std::string& in_path, const std::string& out_path,
                const std::string& model_arg, const std::string& params_file,
                std::optional<double> sigma, std::optional<double> tau,
                std::optional<double> epsilon, std::optional<int> max_iters,
                std::optional<double> lambda_const, const std::string& trace_path,
                std::string report_path, const std::string& clean_path, bool quantize) {
    ModelParams params = resolve_params(model_arg, params_file);
    if (tau) params.tau = *tau;
    if (lambda_const) {
        params.lambda_mode = LambdaMode::Constant;
        params.lambda0 = *lambda_const;
    }
    params.validate();

    StopRule stop;
    if (epsilon) stop.epsilon = *epsilon;
    if (max_iters) stop.max_iters = *max_iters;

    const bool wants_rof = (params.model() == Model::Tcpde || params.model() == Model::Acpde) &&
                           params.lambda_mode == LambdaMode::RofDynamic;
    if (wants_rof && (!sigma || !(*sigma > 0.0)))
        throw ConfigError("model '" + model_arg +
                          "' with lambda mode 'rof' needs --sigma > 0 (the noise level)");

    const ImageGrid noisy = load_image(in_path);
    const RunResult result = run(noisy, params, stop, sigma.value_or(0.0));

    const json params_echo = model_params_to_json(params);
    save_image(result.image, out_path, params_echo.dump());

    json report;
    report["command"] = "denoise";
    report["input"] = in_path;
    report["output"] = out_path;
    report["model"] = model_name(params.model());
    report["params"] = params_echo;
    report["stop"] = {{"epsilon", stop.epsilon}, {"max_iters", stop.max_iters}};
    report["noise_sigma"] = sigma.value_or(0.0);
    report["iterations"] = result.trace.iterations;
    report["converged"] = result.trace.converged;
    report["final_rel_change"] =
        result.trace.entries.empty() ? 0.0 : result.trace.entries.back().rel_change;
    report["wall_ms"] = result.trace.wall_ms;
    report["metrics_quantized"] = quantize;

    const ImageGrid test = prepare_for_metrics(result.image, quantize);
    report["psnr_vs_input"] = [&] {
        const double v = psnr(prepare_for_metrics(noisy, quantize), test);
        return std::isinf(v) ? json("inf") : json(v);
    }();
    if (!clean_path.empty()) {
        const ImageGrid clean = prepare_for_metrics(load_image(clean_path), quantize);
        const double p = psnr(clean, test);
        report["clean"] = clean_path;
        report["psnr"] = std::isinf(p) ? json("inf") : json(p);
        report["mssim"] = mssim(clean, test);
    }

    if (report_path.empty()) report_path = out_path + ".report.json";
    write_text_file(report_path, report.dump(2) + "\n");

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw IoError(trace_path + ": cannot open file for writing");
        out << "iteration,rel_change,lambda\n";
        char buf[128];
        for (const auto& e : result.trace.entries) {
            std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", e.iteration, e.rel_change,
                          e.lambda);
            out << buf;
        }
    }

    std::printf("%s: %d iteration(s), %s, wrote %s\n", model_name(params.model()),
                result.trace.iterations, result.trace.converged ? "converged" : "max iterations",
                out_path.c_str());
    return exit_code::ok;
}

int cmd_benchmark(const std::string& config_path, const std::string& output_dir_flag,
                  std::optional<std::uint64_t> seed_flag, int jobs) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!output_dir_flag.empty())
        cfg.output_dir = output_dir_flag;
    else if (cfg.output_dir.empty())
        cfg.output_dir = default_output_dir();
    if (seed_flag) cfg.seed = *seed_flag;
    cfg.validate();

    const auto cells = run_benchmark(cfg, jobs);

    fs::create_directories(cfg.output_dir);
    const std::string results_path = (fs::path(cfg.output_dir) / "results.csv").string();
    const std::string pivot_path = (fs::path(cfg.output_dir) / "results_pivot.csv").string();
    const std::string echo_path = (fs::path(cfg.output_dir) / "results.config.json").string();
    {
        std::ofstream out(results_path);
        if (!out) throw IoError(results_path + ": cannot open file for writing");
        write_benchmark_csv(cells, out);
    }
    {
        std::ofstream out(pivot_path);
        if (!out) throw IoError(pivot_path + ": cannot open file for writing");
        write_pivot_csv(cells, out);
    }
    write_text_file(echo_path, experiment_to_json(cfg).dump(2) + "\n");

    int failures = 0;
    for (const auto& c : cells) {
        if (c.failed) {
            ++failures;
            std::printf("%-24s sigma %-6g %-6s FAILED: %s\n", c.image.c_str(), c.sigma,
                        model_name(c.model), c.error.c_str());
        } else {
            std::printf("%-24s sigma %-6g %-6s psnr %7.3f  mssim %6.4f  iters %4d\n",
                        c.image.c_str(), c.sigma, model_name(c.model), c.report.psnr_db,
                        c.report.mssim, c.report.iterations);
        }
    }
    std::printf("wrote %s, %s (%zu cells, %d failed)\n", results_path.c_str(),
                pivot_path.c_str(), cells.size(), failures);
    return exit_code::ok;
}

int cmd_export(const std::string& in_path, std::optional<int> slice_row,
               const std::string& ratio_noisy, bool surface, const std::string& out_path) {
    const int modes = (slice_row ? 1 : 0) + (!ratio_noisy.empty() ? 1 : 0) + (surface ? 1 : 0);
    if (modes != 1)
        throw ConfigError("export: choose exactly one of --slice, --ratio, --surface");

    const ImageGrid img = load_image(in_path);
    if (slice_row) {
        const auto slice = extract_slice(img, *slice_row);
        std::ofstream out(out_path);
        if (!out) throw IoError(out_path + ": cannot open file for writing");
        out << "x,intensity\n";
        char buf[64];
        for (std::size_t i = 0; i < slice.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, slice[i]);
            out << buf;
        }
    } else if (!ratio_noisy.empty()) {
        const ImageGrid noisy = load_image(ratio_noisy);
        save_image(ratio_image(noisy, img), out_path, "ratio of " + ratio_noisy + " over " + in_path);
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError(out_path + ": cannot open file for writing");
        char buf[64];
        for (int j = 0; j < img.height(); ++j) {
            for (int i = 0; i < img.width(); ++i) {
                std::snprintf(buf, sizeof(buf), "%s%.12g", i ? " " : "", img(i, j));
                out << buf;
            }
            out << '\n';
        }
    }
    std::printf("wrote %s\n", out_path.c_str());
    return exit_code::ok;
}

int cmd_metrics(const std::string& ref_path, const std::string& test_path, double peak,
                bool quantize) {
    const ImageGrid ref = prepare_for_metrics(load_image(ref_path), quantize);
    const ImageGrid test = prepare_for_metrics(load_image(test_path), quantize);
    json out;
    out["ref"] = ref_path;
    out["test"] = test_path;
    out["quantized"] = quantize;
    const double p = psnr(ref, test, peak);
    out["psnr"] = std::isinf(p) ? json("inf") : json(p);
    if (ref.width() >= 11 && ref.height() >= 11) out["mssim"] = mssim(ref, test);
    std::printf("%s\n", out.dump(2).c_str());
    return exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Telegraph-coupled PDE image denoising toolkit"};
    app.require_subcommand(1);

    // add-noise
    auto* noise_cmd = app.add_subcommand("add-noise", "Degrade an image with seeded Gaussian noise");
    std::string n_in, n_out;
    double n_sigma = 0.0, n_mean = 0.0;
    std::uint64_t n_seed = 0;
    noise_cmd->add_option("input", n_in, "input image (PGM/PNG)")->required();
    noise_cmd->add_option("output", n_out, "output image")->required();
    noise_cmd->add_option("--sigma", n_sigma, "noise standard deviation")->required();
    noise_cmd->add_option("--mean", n_mean, "noise mean (default 0)");
    noise_cmd->add_option("--seed", n_seed, "RNG seed (default 0)");

    // denoise
    auto* den_cmd = app.add_subcommand("denoise", "Run one denoising model to convergence");
    std::string d_in, d_out, d_model, d_params, d_trace, d_report, d_clean;
    std::optional<double> d_sigma, d_tau, d_eps, d_lambda;
    std::optional<int> d_maxit;
    bool d_quant = false;
    den_cmd->add_option("input", d_in, "noisy input image")->required();
    den_cmd->add_option("output", d_out, "denoised output image")->required();
    den_cmd->add_option("--model", d_model, "tcpde|acpde|sys|cao|tde")->required();
    den_cmd->add_option("--params", d_params, "JSON parameter file (block or full config)");
    den_cmd->add_option("--sigma", d_sigma, "noise level (needed for lambda mode 'rof')");
    den_cmd->add_option("--tau", d_tau, "override time step");
    den_cmd->add_option("--epsilon", d_eps, "override stopping threshold");
    den_cmd->add_option("--max-iters", d_maxit, "override iteration cap");
    den_cmd->add_option("--lambda", d_lambda, "use a constant fidelity weight");
    den_cmd->add_option("--trace", d_trace, "write per-iteration trace CSV here");
    den_cmd->add_option("--report", d_report, "report JSON path (default <output>.report.json)");
    den_cmd->add_option("--clean", d_clean, "clean reference for PSNR/MSSIM");
    den_cmd->add_flag("--quantize-metrics", d_quant, "compute metrics on rounded 8-bit values");

    // benchmark
    auto* bench_cmd = app.add_subcommand("benchmark", "Run an experiment grid from a config file");
    std::string b_config, b_outdir;
    std::optional<std::uint64_t> b_seed;
    int b_jobs = 1;
    bench_cmd->add_option("--config", b_config, "experiment config JSON")->required();
    bench_cmd->add_option("--output-dir", b_outdir, "override output directory");
    bench_cmd->add_option("--seed", b_seed, "override master seed");
    bench_cmd->add_option("--jobs", b_jobs, "parallel benchmark cells (default 1)");

    // export
    auto* exp_cmd = app.add_subcommand("export", "Extract diagnostic data from an image");
    std::string e_in, e_out, e_ratio;
    std::optional<int> e_slice;
    bool e_surface = false;
    exp_cmd->add_option("input", e_in, "image to export from")->required();
    exp_cmd->add_option("--out", e_out, "output file")->required();
    exp_cmd->add_option("--slice", e_slice, "export this row as CSV");
    exp_cmd->add_option("--ratio", e_ratio, "export ratio image against this noisy image");
    exp_cmd->add_flag("--surface", e_surface, "export the full grid as plain text");

    // metrics
    auto* met_cmd = app.add_subcommand("metrics", "PSNR/MSSIM between two images");
    std::string m_ref, m_test;
    double m_peak = 255.0;
    bool m_quant = false;
    met_cmd->add_option("reference", m_ref, "reference image")->required();
    met_cmd->add_option("test", m_test, "image under test")->required();
    met_cmd->add_option("--peak", m_peak, "peak value (default 255)");
    met_cmd->add_flag("--quantize", m_quant, "compute on rounded 8-bit values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::config_error;
    }

    try {
        if (*noise_cmd) return cmd_add_noise(n_in, n_out, n_sigma, n_mean, n_seed);
        if (*den_cmd)
            return cmd_denoise(d_in, d_out, d_model, d_params, d_sigma, d_tau, d_eps, d_maxit,
                               d_lambda, d_trace, d_report, d_clean, d_quant);
        if (*bench_cmd) return cmd_benchmark(b_config, b_outdir, b_seed, b_jobs);
        if (*exp_cmd) return cmd_export(e_in, e_slice, e_ratio, e_surface, e_out);
        if (*met_cmd) return cmd_metrics(m_ref, m_test, m_peak, m_quant);
    } catch (const BlowupError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code::blowup;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code::config_error;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code::config_error;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code::io_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code::ok;
}
