#pragma once

#include <cstdint>
#include <vector>

#include "tcpde/grid.hpp"

namespace tcpde {

/// Discrete normalized 1-D Gaussian, used separably in both axes.
/// taps has length 2*radius+1 and sums to 1; taps[radius+d] covers offset d.
struct GaussianKernel {
    double xi = 1.0;
    int radius = 1;
    std::vector<double> taps;
};

/// Additive Gaussian noise specification. The generator is mt19937_64
/// seeded with `seed`, mapped to normals by Box-Muller; see conv.cpp for
/// the exact construction. Same seed and dimensions give identical output
/// on every platform.
struct NoiseSpec {
    double mean = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Samples exp(-d^2/(2 xi^2)) on [-radius, radius] with radius = ceil(3 xi)
/// and renormalizes to unit sum.
GaussianKernel make_kernel(double xi);

/// Separable row-then-column convolution with mirror extension. Output
/// dimensions and spacing equal the input's. Mirror extension repeats the
/// edge sample (index -1 maps to 0, -2 to 1, ...), consistent with the grid
/// ghost rule, and preserves the pixel sum for any symmetric kernel.
ImageGrid convolve(const ImageGrid& g, const GaussianKernel& k);

/// out = g + eta with eta i.i.d. Normal(mean, sigma^2), deterministic in
/// spec.seed. Values are not clamped; clamping happens only at export.
ImageGrid add_gaussian_noise(const ImageGrid& g, const NoiseSpec& spec);

/// Maps any integer onto [0, n) by repeated mirror reflection about the
/// array edges (-1 -> 0, -2 -> 1, n -> n-1, ...).
int reflect_index(int t, int n);

}  // namespace tcpde
