#include "tcpde/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "tcpde/conv.hpp"
#include "tcpde/errors.hpp"
#include "tcpde/image_io.hpp"

namespace tcpde {

namespace {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string format_double(const char* fmt, double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string sigma_label(double sigma) { return format_double("%g", sigma); }

std::string cell_stem(const ExperimentConfig& cfg, const CellResult& cell) {
    return (fs::path(cfg.output_dir) /
            (fs::path(cell.image).stem().string() + "_s" + sigma_label(cell.sigma) + "_" +
             model_name(cell.model)))
        .string();
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out << "iteration,rel_change,lambda\n";
    for (const auto& e : trace.entries)
        out << e.iteration << "," << format_double("%.12g", e.rel_change) << ","
            << format_double("%.12g", e.lambda) << "\n";
}

void write_slice_csv(const std::vector<double>& slice, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out << "x,intensity\n";
    for (std::size_t i = 0; i < slice.size(); ++i)
        out << i << "," << format_double("%.12g", slice[i]) << "\n";
}

void write_surface_grid(const ImageGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    for (int j = 0; j < g.height(); ++j) {
        for (int i = 0; i < g.width(); ++i) {
            if (i) out << ' ';
            out << format_double("%.17g", g(i, j));
        }
        out << '\n';
    }
}

CellResult run_cell(const ExperimentConfig& cfg, std::size_t image_idx,
                    std::size_t sigma_idx, const ModelParams& params) {
    CellResult cell;
    cell.image = cfg.images[image_idx];
    cell.sigma = cfg.sigmas[sigma_idx];
    cell.model = params.model();
    try {
        const ImageGrid clean = load_image(cell.image);
        NoiseSpec noise;
        noise.sigma = cell.sigma;
        noise.seed = cell_noise_seed(cfg.seed, image_idx, sigma_idx);
        const ImageGrid noisy = add_gaussian_noise(clean, noise);

        const RunResult result = run(noisy, params, cfg.stop, cell.sigma);

        const ImageGrid ref = prepare_for_metrics(clean, cfg.metrics_quantize);
        const ImageGrid test = prepare_for_metrics(result.image, cfg.metrics_quantize);
        cell.report.psnr_db = psnr(ref, test);
        cell.report.mssim = mssim(ref, test);
        cell.report.iterations = result.trace.iterations;
        cell.report.wall_ms = result.trace.wall_ms;
        cell.report.model = model_name(cell.model);
        cell.report.params_json = model_params_to_json(params).dump();
        cell.report.noise_sigma = cell.sigma;
        cell.report.quantized = cfg.metrics_quantize;

        const std::string stem = cell_stem(cfg, cell);
        save_image(result.image, stem + ".pgm", cell.report.params_json);
        if (cfg.exports.trace) write_trace_csv(result.trace, stem + "_trace.csv");
        if (cfg.exports.ratio)
            save_image(ratio_image(prepare_for_metrics(noisy, false), test),
                       stem + "_ratio.pgm", cell.report.params_json);
        if (cfg.exports.slice_row >= 0 && cfg.exports.slice_row < result.image.height())
            write_slice_csv(extract_slice(result.image, cfg.exports.slice_row),
                            stem + "_slice.csv");
        if (cfg.exports.surface) write_surface_grid(result.image, stem + "_surface.txt");
    } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

std::uint64_t cell_noise_seed(std::uint64_t master, std::size_t image_index,
                              std::size_t sigma_index) {
    std::uint64_t s = splitmix64(master ^ (0x1000ULL + image_index));
    return splitmix64(s ^ (0x2000ULL + sigma_index));
}

std::vector<CellResult> run_benchmark(const ExperimentConfig& config, int jobs) {
    config.validate();
    ExperimentConfig cfg = config;
    if (cfg.output_dir.empty()) cfg.output_dir = ".";
    fs::create_directories(cfg.output_dir);

    struct CellSpec {
        std::size_t image_idx, sigma_idx, model_idx;
    };
    std::vector<CellSpec> specs;
    for (std::size_t ii = 0; ii < cfg.images.size(); ++ii)
        for (std::size_t si = 0; si < cfg.sigmas.size(); ++si)
            for (std::size_t mi = 0; mi < cfg.models.size(); ++mi)
                specs.push_back({ii, si, mi});

    std::vector<CellResult> cells(specs.size());
    if (jobs < 1) jobs = 1;
    if (jobs == 1) {
        for (std::size_t k = 0; k < specs.size(); ++k)
            cells[k] = run_cell(cfg, specs[k].image_idx, specs[k].sigma_idx,
                                cfg.models[specs[k].model_idx]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> workers;
        const int nworkers = std::min<int>(jobs, static_cast<int>(specs.size()));
        for (int t = 0; t < nworkers; ++t)
            workers.push_back(std::async(std::launch::async, [&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= specs.size()) return;
                    cells[k] = run_cell(cfg, specs[k].image_idx, specs[k].sigma_idx,
                                        cfg.models[specs[k].model_idx]);
                }
            }));
        for (auto& w : workers) w.get();
    }

    std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        if (a.image != b.image) return a.image < b.image;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return presentation_order(a.model) < presentation_order(b.model);
    });
    return cells;
}

void write_benchmark_csv(const std::vector<CellResult>& cells, std::ostream& out) {
    out << "image,sigma,model,psnr,mssim,iterations,wall_ms,error\n";
    for (const auto& c : cells) {
        out << c.image << "," << sigma_label(c.sigma) << "," << model_name(c.model) << ",";
        if (c.failed) {
            std::string msg = c.error;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
            out << ",,,," << msg << "\n";
        } else {
            out << format_double("%.6f", c.report.psnr_db) << ","
                << format_double("%.6f", c.report.mssim) << "," << c.report.iterations << ","
                << format_double("%.3f", c.report.wall_ms) << ",\n";
        }
    }
}

void write_pivot_csv(const std::vector<CellResult>& cells, std::ostream& out) {
    std::vector<Model> models;
    for (const auto& c : cells)
        if (std::find(models.begin(), models.end(), c.model) == models.end())
            models.push_back(c.model);
    std::sort(models.begin(), models.end(),
              [](Model a, Model b) { return presentation_order(a) < presentation_order(b); });

    out << "image,sigma";
    for (Model m : models) out << "," << model_name(m) << "_mssim," << model_name(m) << "_psnr";
    out << "\n";

    std::map<std::pair<std::string, double>, std::map<Model, const CellResult*>> rows;
    for (const auto& c : cells) rows[{c.image, c.sigma}][c.model] = &c;

    for (const auto& [key, row] : rows) {
        out << key.first << "," << sigma_label(key.second);
        for (Model m : models) {
            const auto it = row.find(m);
            if (it == row.end() || it->second->failed) {
                out << ",,";
            } else {
                out << "," << format_double("%.4f", it->second->report.mssim) << ","
                    << format_double("%.2f", it->second->report.psnr_db);
            }
        }
        out << "\n";
    }
}

}  // namespace tcpde
