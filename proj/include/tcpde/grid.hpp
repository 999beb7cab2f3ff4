#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tcpde {

/// 2-D scalar field on a pixel lattice with mirror (symmetric) boundary
/// semantics. Column index i runs along x, row index j along y; storage is
/// row-major. Intensities are kept as 64-bit reals regardless of the 8-bit
/// origin of most inputs.
///
/// The mirror rule matches the classic ghost definition for zero normal
/// derivative: index -1 maps to 0 and index width maps to width-1 (same in
/// y). Ghosts are resolved on the fly; no padded buffer is materialized.
class ImageGrid {
public:
    ImageGrid() = default;

    ImageGrid(int width, int height, double spacing = 1.0, double fill = 0.0)
        : width_(width), height_(height), spacing_(spacing),
          data_(static_cast<std::size_t>(width > 0 ? width : 0) *
                    static_cast<std::size_t>(height > 0 ? height : 0),
                fill) {
        if (width < 1 || height < 1)
            throw std::domain_error("ImageGrid: width and height must be >= 1");
        if (!(spacing > 0.0))
            throw std::domain_error("ImageGrid: spacing must be > 0");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double spacing() const noexcept { return spacing_; }

    void set_spacing(double spacing) {
        if (!(spacing > 0.0))
            throw std::domain_error("ImageGrid: spacing must be > 0");
        spacing_ = spacing;
    }

    std::size_t pixel_count() const noexcept { return data_.size(); }

    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(j) * width_ + i];
    }
    double& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(j) * width_ + i];
    }

    /// Mirror-extended read with a single ghost ring: i in [-1, width],
    /// j in [-1, height]. Anything deeper is a hard error rather than a
    /// silent wraparound.
    double at_symmetric(int i, int j) const {
        if (i < -1 || i > width_ || j < -1 || j > height_)
            throw std::domain_error("ImageGrid::at_symmetric: index outside ghost ring");
        const int ii = i < 0 ? 0 : (i >= width_ ? width_ - 1 : i);
        const int jj = j < 0 ? 0 : (j >= height_ ? height_ - 1 : j);
        return (*this)(ii, jj);
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool same_shape(const ImageGrid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

    friend bool operator==(const ImageGrid& a, const ImageGrid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    double spacing_ = 1.0;
    std::vector<double> data_;
};

struct Gradient {
    double x = 0.0;
    double y = 0.0;
};

/// Central difference gradient, one ghost ring by mirror reflection.
inline Gradient grad_central(const ImageGrid& g, int i, int j) {
    const double inv2h = 1.0 / (2.0 * g.spacing());
    return {(g.at_symmetric(i + 1, j) - g.at_symmetric(i - 1, j)) * inv2h,
            (g.at_symmetric(i, j + 1) - g.at_symmetric(i, j - 1)) * inv2h};
}

inline Gradient grad_forward(const ImageGrid& g, int i, int j) {
    const double invh = 1.0 / g.spacing();
    const double c = g.at_symmetric(i, j);
    return {(g.at_symmetric(i + 1, j) - c) * invh,
            (g.at_symmetric(i, j + 1) - c) * invh};
}

inline Gradient grad_backward(const ImageGrid& g, int i, int j) {
    const double invh = 1.0 / g.spacing();
    const double c = g.at_symmetric(i, j);
    return {(c - g.at_symmetric(i - 1, j)) * invh,
            (c - g.at_symmetric(i, j - 1)) * invh};
}

/// Five-point Laplacian with mirror ghosts. On a boundary pixel the
/// reflected neighbor cancels the center once, which realizes the zero-flux
/// condition.
inline double laplacian(const ImageGrid& g, int i, int j) {
    const double invh2 = 1.0 / (g.spacing() * g.spacing());
    const double c = g(i, j);
    const double dx = g.at_symmetric(i + 1, j) - 2.0 * c + g.at_symmetric(i - 1, j);
    const double dy = g.at_symmetric(i, j + 1) - 2.0 * c + g.at_symmetric(i, j - 1);
    return (dx + dy) * invh2;
}

inline double grad_magnitude(const ImageGrid& g, int i, int j) {
    const Gradient d = grad_central(g, i, j);
    return std::sqrt(d.x * d.x + d.y * d.y);
}

/// Weighted divergence: forward difference of (weight times backward
/// difference), per axis. The weight multiplies the backward difference
/// evaluated at the same index, so the flux entering the forward difference
/// at (i,j) is w(i+1,j)*(f(i+1,j)-f(i,j)) and w(i,j)*(f(i,j)-f(i-1,j)).
/// With unit weights this reduces to the five-point Laplacian, including on
/// the boundary, where the mirrored ghost kills the outward flux.
inline double div_weighted(const ImageGrid& w, const ImageGrid& f, int i, int j) {
    if (!w.same_shape(f))
        throw std::domain_error("div_weighted: weight and field dimensions differ");
    const double invh2 = 1.0 / (f.spacing() * f.spacing());
    const double c = f(i, j);

    // Backward differences one step ahead and at the pixel, weights at the
    // matching index. The ghost weight reflects like everything else; the
    // ghost backward difference vanishes because the mirrored value repeats.
    const double flux_xp = w.at_symmetric(i + 1, j) * (f.at_symmetric(i + 1, j) - c);
    const double flux_xm = w(i, j) * (c - f.at_symmetric(i - 1, j));
    const double flux_yp = w.at_symmetric(i, j + 1) * (f.at_symmetric(i, j + 1) - c);
    const double flux_ym = w(i, j) * (c - f.at_symmetric(i, j - 1));

    return (flux_xp - flux_xm + flux_yp - flux_ym) * invh2;
}

// Small whole-grid helpers shared by solvers and metrics.

inline double max_abs(const ImageGrid& g) {
    double m = 0.0;
    for (double v : g.data()) m = std::max(m, std::abs(v));
    return m;
}

inline double mean(const ImageGrid& g) {
    double s = 0.0;
    for (double v : g.data()) s += v;
    return s / static_cast<double>(g.pixel_count());
}

inline bool all_finite(const ImageGrid& g) {
    for (double v : g.data())
        if (!std::isfinite(v)) return false;
    return true;
}

/// Sum of squared pixel values (the squared discrete L2 norm).
inline double sum_squares(const ImageGrid& g) {
    double s = 0.0;
    for (double v : g.data()) s += v * v;
    return s;
}

inline double sum_squared_diff(const ImageGrid& a, const ImageGrid& b) {
    if (!a.same_shape(b))
        throw std::domain_error("sum_squared_diff: dimensions differ");
    double s = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t k = 0; k < da.size(); ++k) {
        const double d = da[k] - db[k];
        s += d * d;
    }
    return s;
}

}  // namespace tcpde
