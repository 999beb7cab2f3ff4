#include "tcpde/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcpde {

double psnr(const ImageGrid& ref, const ImageGrid& test, double peak) {
    if (!ref.same_shape(test))
        throw std::domain_error("psnr: image dimensions differ");
    if (!(peak > 0.0))
        throw std::domain_error("psnr: peak must be > 0");
    const double mse =
        sum_squared_diff(ref, test) / static_cast<double>(ref.pixel_count());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

/// 11x11 Gaussian window, normalized to unit sum.
const std::vector<double>& ssim_window() {
    static const std::vector<double> w = [] {
        std::vector<double> win(kWindow * kWindow);
        double sum = 0.0;
        for (int y = 0; y < kWindow; ++y)
            for (int x = 0; x < kWindow; ++x) {
                const double dx = x - (kWindow - 1) / 2.0;
                const double dy = y - (kWindow - 1) / 2.0;
                const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kWindowSigma * kWindowSigma));
                win[y * kWindow + x] = v;
                sum += v;
            }
        for (double& v : win) v /= sum;
        return win;
    }();
    return w;
}

}  // namespace

double mssim(const ImageGrid& ref, const ImageGrid& test) {
    if (!ref.same_shape(test))
        throw std::domain_error("mssim: image dimensions differ");
    if (ref.width() < kWindow || ref.height() < kWindow)
        throw std::domain_error("mssim: image smaller than the 11x11 window");

    const auto& win = ssim_window();
    double total = 0.0;
    long windows = 0;

    for (int y0 = 0; y0 + kWindow <= ref.height(); ++y0) {
        for (int x0 = 0; x0 + kWindow <= ref.width(); ++x0) {
            double mu_x = 0.0, mu_y = 0.0;
            for (int y = 0; y < kWindow; ++y)
                for (int x = 0; x < kWindow; ++x) {
                    const double wgt = win[y * kWindow + x];
                    mu_x += wgt * ref(x0 + x, y0 + y);
                    mu_y += wgt * test(x0 + x, y0 + y);
                }
            double var_x = 0.0, var_y = 0.0, cov = 0.0;
            for (int y = 0; y < kWindow; ++y)
                for (int x = 0; x < kWindow; ++x) {
                    const double wgt = win[y * kWindow + x];
                    const double dx = ref(x0 + x, y0 + y) - mu_x;
                    const double dy = test(x0 + x, y0 + y) - mu_y;
                    var_x += wgt * dx * dx;
                    var_y += wgt * dy * dy;
                    cov += wgt * dx * dy;
                }
            const double num = (2.0 * mu_x * mu_y + kC1) * (2.0 * cov + kC2);
            const double den = (mu_x * mu_x + mu_y * mu_y + kC1) * (var_x + var_y + kC2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

ImageGrid ratio_image(const ImageGrid& noisy, const ImageGrid& denoised) {
    if (!noisy.same_shape(denoised))
        throw std::domain_error("ratio_image: image dimensions differ");

    ImageGrid out(noisy.width(), noisy.height(), noisy.spacing());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < out.height(); ++j)
        for (int i = 0; i < out.width(); ++i) {
            const double r = noisy(i, j) / (denoised(i, j) + 1e-6);
            out(i, j) = r;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }

    if (lo == hi) {
        out.fill(127.5);
        return out;
    }
    const double gain = 255.0 / (hi - lo);
    for (double& v : out.data()) v = (v - lo) * gain;
    return out;
}

std::vector<double> extract_slice(const ImageGrid& g, int row) {
    if (row < 0 || row >= g.height())
        throw std::domain_error("extract_slice: row out of range");
    std::vector<double> s(static_cast<std::size_t>(g.width()));
    for (int i = 0; i < g.width(); ++i) s[static_cast<std::size_t>(i)] = g(i, row);
    return s;
}

ImageGrid prepare_for_metrics(const ImageGrid& g, bool quantize) {
    ImageGrid out = g;
    for (double& v : out.data()) {
        v = std::min(std::max(v, 0.0), 255.0);
        if (quantize) v = std::floor(v + 0.5);
    }
    return out;
}

}  // namespace tcpde
