#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcpde/config.hpp"
#include "tcpde/metrics.hpp"
#include "tcpde/models.hpp"

namespace tcpde {

/// Outcome of one (image, sigma, model) benchmark cell. Failed cells carry
/// the error text and keep the run going.
struct CellResult {
    std::string image;
    double sigma = 0.0;
    Model model = Model::Tcpde;
    MetricsReport report;
    bool failed = false;
    std::string error;
};

/// Deterministic per-(image, sigma) noise seed so every model in a cell
/// denoises the same realization.
std::uint64_t cell_noise_seed(std::uint64_t master, std::size_t image_index,
                              std::size_t sigma_index);

/// Runs the full experiment grid. Cells are independent and are dispatched
/// to `jobs` workers; results come back sorted by (image, sigma, model
/// presentation order) so output files do not depend on scheduling.
/// Artifact files (denoised images, traces, ...) are written under
/// config.output_dir per the export toggles.
std::vector<CellResult> run_benchmark(const ExperimentConfig& config, int jobs = 1);

/// One row per cell: image,sigma,model,psnr,mssim,iterations,wall_ms,error.
/// Everything except wall_ms is deterministic for a fixed config and seed.
void write_benchmark_csv(const std::vector<CellResult>& cells, std::ostream& out);

/// Wide table with one row per (image, sigma) and MSSIM/PSNR columns per
/// model, mirroring the usual comparison-table layout.
void write_pivot_csv(const std::vector<CellResult>& cells, std::ostream& out);

}  // namespace tcpde
