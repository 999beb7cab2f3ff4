#include "tcpde/conv.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tcpde {

int reflect_index(int t, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    t %= period;
    if (t < 0) t += period;
    return t < n ? t : period - 1 - t;
}

GaussianKernel make_kernel(double xi) {
    if (!(xi > 0.0))
        throw std::domain_error("make_kernel: xi must be > 0");
    GaussianKernel k;
    k.xi = xi;
    k.radius = static_cast<int>(std::ceil(3.0 * xi));
    k.taps.resize(2 * k.radius + 1);
    double sum = 0.0;
    for (int d = -k.radius; d <= k.radius; ++d) {
        const double v = std::exp(-(static_cast<double>(d) * d) / (2.0 * xi * xi));
        k.taps[k.radius + d] = v;
        sum += v;
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

ImageGrid convolve(const ImageGrid& g, const GaussianKernel& k) {
    const int w = g.width();
    const int h = g.height();
    const int r = k.radius;
    if (r >= std::min(w, h))
        throw std::domain_error("convolve: kernel radius must be smaller than both image dimensions");

    ImageGrid rows(w, h, g.spacing());
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d)
                acc += k.taps[r + d] * g(reflect_index(i + d, w), j);
            rows(i, j) = acc;
        }
    }

    ImageGrid out(w, h, g.spacing());
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d)
                acc += k.taps[r + d] * rows(i, reflect_index(j + d, h));
            out(i, j) = acc;
        }
    }
    return out;
}

namespace {

// Uniform in (0,1), built from the top 53 bits of the mt19937_64 stream.
// Never returns 0 or 1, so the Box-Muller logarithm is always finite.
inline double unit_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

ImageGrid add_gaussian_noise(const ImageGrid& g, const NoiseSpec& spec) {
    if (spec.sigma < 0.0)
        throw std::domain_error("add_gaussian_noise: sigma must be >= 0");

    ImageGrid out = g;
    std::mt19937_64 rng(spec.seed);
    auto& data = out.data();

    // Box-Muller over pixel pairs in storage order. std::normal_distribution
    // is avoided on purpose: its output is implementation-defined, this is not.
    const std::size_t n = data.size();
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t p = 0; p < n; p += 2) {
        const double u1 = unit_open(rng);
        const double u2 = unit_open(rng);
        const double mag = std::sqrt(-2.0 * std::log(u1));
        data[p] += spec.mean + spec.sigma * (mag * std::cos(two_pi * u2));
        if (p + 1 < n)
            data[p + 1] += spec.mean + spec.sigma * (mag * std::sin(two_pi * u2));
    }
    return out;
}

}  // namespace tcpde
