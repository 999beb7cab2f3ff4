#pragma once

#include <string>
#include <vector>

#include "tcpde/grid.hpp"

namespace tcpde {

/// One evaluation cell: quality of a restored image against its clean
/// reference, plus run bookkeeping.
struct MetricsReport {
    double psnr_db = 0.0;
    double mssim = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    std::string model;
    std::string params_json;  // resolved parameter echo
    double noise_sigma = 0.0;
    bool quantized = false;   // whether metrics ran on rounded 8-bit values
};

/// 10 log10(peak^2 / MSE); identical images give +infinity.
double psnr(const ImageGrid& ref, const ImageGrid& test, double peak = 255.0);

/// Mean SSIM over all fully-interior 11x11 windows with a sigma=1.5
/// Gaussian weighting and the canonical stabilizers C1=(0.01*255)^2,
/// C2=(0.03*255)^2. Both images must be at least 11 pixels in each
/// dimension.
double mssim(const ImageGrid& ref, const ImageGrid& test);

/// Pixelwise noisy/(denoised + 1e-6), affinely rescaled to [0,255].
/// A constant ratio (min == max) degenerates to mid-gray 127.5.
ImageGrid ratio_image(const ImageGrid& noisy, const ImageGrid& denoised);

/// Row `row` of the grid, ordered by column.
std::vector<double> extract_slice(const ImageGrid& g, int row);

/// Clamps to [0,255]; with quantize also rounds half-up to integers.
/// This is the canonical preparation step before computing metrics on
/// solver output (solvers themselves never clamp).
ImageGrid prepare_for_metrics(const ImageGrid& g, bool quantize);

}  // namespace tcpde
