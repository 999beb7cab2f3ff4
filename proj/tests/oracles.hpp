// Independent reference implementations used only by tests. Everything here
// is written as plain triple loops directly from the discrete formulas, with
// its own boundary handling, so it shares no code path with the library.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tcpde/grid.hpp"
#include "tcpde/models.hpp"

namespace oracle {

using tcpde::ImageGrid;

// One-ring mirror read, written as clamping (identical to reflection at
// depth one, which is as far as any stencil reaches).
inline double at(const ImageGrid& g, int i, int j) {
    if (i < 0) i = 0;
    if (i > g.width() - 1) i = g.width() - 1;
    if (j < 0) j = 0;
    if (j > g.height() - 1) j = g.height() - 1;
    return g(i, j);
}

// Arbitrary-depth mirror reflection by stepwise folding.
inline int reflect(int t, int n) {
    while (t < 0 || t >= n) {
        if (t < 0)
            t = -t - 1;
        else
            t = 2 * n - 1 - t;
    }
    return t;
}

inline double grad_x(const ImageGrid& g, int i, int j) {
    return (at(g, i + 1, j) - at(g, i - 1, j)) / (2.0 * g.spacing());
}
inline double grad_y(const ImageGrid& g, int i, int j) {
    return (at(g, i, j + 1) - at(g, i, j - 1)) / (2.0 * g.spacing());
}
inline double grad_fwd_x(const ImageGrid& g, int i, int j) {
    return (at(g, i + 1, j) - at(g, i, j)) / g.spacing();
}
inline double grad_fwd_y(const ImageGrid& g, int i, int j) {
    return (at(g, i, j + 1) - at(g, i, j)) / g.spacing();
}
inline double grad_bwd_x(const ImageGrid& g, int i, int j) {
    return (at(g, i, j) - at(g, i - 1, j)) / g.spacing();
}
inline double grad_bwd_y(const ImageGrid& g, int i, int j) {
    return (at(g, i, j) - at(g, i, j - 1)) / g.spacing();
}

inline double laplacian(const ImageGrid& g, int i, int j) {
    const double h2 = g.spacing() * g.spacing();
    return (at(g, i + 1, j) - 2.0 * at(g, i, j) + at(g, i - 1, j)) / h2 +
           (at(g, i, j + 1) - 2.0 * at(g, i, j) + at(g, i, j - 1)) / h2;
}

inline double grad_mag(const ImageGrid& g, int i, int j) {
    const double gx = grad_x(g, i, j);
    const double gy = grad_y(g, i, j);
    return std::sqrt(gx * gx + gy * gy);
}

// Forward difference of (weight times backward difference), both axes.
inline double div_weighted(const ImageGrid& w, const ImageGrid& f, int i, int j) {
    const double h = f.spacing();
    auto qx = [&](int a, int b) { return at(w, a, b) * (at(f, a, b) - at(f, a - 1, b)) / h; };
    auto qy = [&](int a, int b) { return at(w, a, b) * (at(f, a, b) - at(f, a, b - 1)) / h; };
    return (qx(i + 1, j) - qx(i, j)) / h + (qy(i, j + 1) - qy(i, j)) / h;
}

// Gaussian taps rebuilt from the definition.
inline std::vector<double> kernel_taps(double xi) {
    const int r = static_cast<int>(std::ceil(3.0 * xi));
    std::vector<double> taps(2 * r + 1);
    double sum = 0.0;
    for (int d = -r; d <= r; ++d) {
        taps[r + d] = std::exp(-(double(d) * d) / (2.0 * xi * xi));
        sum += taps[r + d];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Direct (non-separable) 2-D convolution with the outer-product kernel and
// mirror extension.
inline ImageGrid convolve2d(const ImageGrid& g, double xi) {
    const auto taps = kernel_taps(xi);
    const int r = (static_cast<int>(taps.size()) - 1) / 2;
    ImageGrid out(g.width(), g.height(), g.spacing());
    for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    acc += taps[r + dx] * taps[r + dy] *
                           g(reflect(i + dx, g.width()), reflect(j + dy, g.height()));
            out(i, j) = acc;
        }
    return out;
}

inline double edge_g(double u, double k) { return 1.0 / (1.0 + std::abs(u) / (k * k)); }
inline double pm_g(double s, double K) { return 1.0 / (1.0 + (s / K) * (s / K)); }
inline double h_fn(double theta, double cap) { return 0.1 + std::min(theta * theta, cap); }

// ---------------------------------------------------------------------------
// Whole-step references. Each advances (I, u, v) one level using the direct
// (non-increment) form of the two-level updates.

struct StepFields {
    ImageGrid I, I_prev, u, u_prev, v;
};

inline ImageGrid edge_source_field(const ImageGrid& I, double xi, double cap, bool squared) {
    const ImageGrid s = convolve2d(I, xi);
    ImageGrid out(I.width(), I.height(), I.spacing());
    for (int j = 0; j < I.height(); ++j)
        for (int i = 0; i < I.width(); ++i) {
            const double m = grad_mag(s, i, j);
            out(i, j) = h_fn(squared ? m * m : m, cap);
        }
    return out;
}

inline double rof_lambda(const ImageGrid& In, const ImageGrid& I0, double sigma) {
    double sum = 0.0;
    for (int j = 0; j < In.height(); ++j)
        for (int i = 0; i < In.width(); ++i) {
            const double gx = grad_x(In, i, j), gy = grad_y(In, i, j);
            const double mag = std::sqrt(gx * gx + gy * gy);
            sum += mag - (grad_x(I0, i, j) * gx + grad_y(I0, i, j) * gy) / std::max(mag, 1e-6);
        }
    const double lam = sum / (2.0 * sigma * sigma * double(In.pixel_count()));
    return lam < 0.0 ? 0.0 : lam;
}

inline StepFields tcpde_step(const StepFields& in, const ImageGrid& I0,
                             const tcpde::TcpdeParams& p, double tau, double xi,
                             tcpde::LambdaMode mode, double lambda0, double sigma) {
    const int W = in.I.width(), H = in.I.height();
    StepFields out = in;

    const ImageGrid hsrc = edge_source_field(in.I, xi, p.h_cap, p.h_squared);
    ImageGrid u_next(W, H, in.u.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            u_next(i, j) = ((2.0 + p.beta * tau) * in.u(i, j) - in.u_prev(i, j) +
                            p.kappa * tau * tau *
                                (hsrc(i, j) - in.u(i, j) +
                                 0.5 * p.nu * p.nu * oracle::laplacian(in.u, i, j))) /
                           (1.0 + p.beta * tau);

    ImageGrid v_next(W, H, in.v.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            v_next(i, j) = in.v(i, j) + tau * oracle::laplacian(in.v, i, j) -
                           tau * (I0(i, j) - in.I(i, j));

    const double lam =
        mode == tcpde::LambdaMode::Constant ? lambda0 : rof_lambda(in.I, I0, sigma);

    const ImageGrid us = convolve2d(u_next, xi);
    ImageGrid w(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) w(i, j) = edge_g(us(i, j), p.k_thresh);

    ImageGrid I_next(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            I_next(i, j) = ((2.0 + p.alpha * tau) * in.I(i, j) - in.I_prev(i, j) +
                            tau * tau * oracle::div_weighted(w, in.I, i, j) -
                            2.0 * tau * tau * lam * v_next(i, j)) /
                           (1.0 + p.alpha * tau);

    out.I_prev = in.I;
    out.I = I_next;
    out.u_prev = in.u;
    out.u = u_next;
    out.v = v_next;
    return out;
}

inline StepFields acpde_step(const StepFields& in, const ImageGrid& I0,
                             const tcpde::AcpdeParams& p, double tau, double xi,
                             tcpde::LambdaMode mode, double lambda0, double sigma) {
    const int W = in.I.width(), H = in.I.height();
    StepFields out = in;

    const ImageGrid hsrc = edge_source_field(in.I, xi, p.h_cap, p.h_squared);
    ImageGrid u_next(W, H, in.u.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            u_next(i, j) = in.u(i, j) + tau * p.kappa *
                                            (hsrc(i, j) - in.u(i, j) +
                                             0.5 * p.nu * p.nu * oracle::laplacian(in.u, i, j));

    ImageGrid v_next(W, H, in.v.spacing());  // boundary ring stays zero
    for (int j = 1; j < H - 1; ++j)
        for (int i = 1; i < W - 1; ++i)
            v_next(i, j) = in.v(i, j) + tau * oracle::laplacian(in.v, i, j) -
                           tau * (I0(i, j) - in.I(i, j));

    const double lam =
        mode == tcpde::LambdaMode::Constant ? lambda0 : rof_lambda(in.I, I0, sigma);

    const ImageGrid us = convolve2d(u_next, xi);
    ImageGrid w(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) w(i, j) = edge_g(us(i, j), p.k_thresh);
    ImageGrid I_next(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            I_next(i, j) = in.I(i, j) +
                           tau * (oracle::div_weighted(w, in.I, i, j) - 2.0 * lam * v_next(i, j));

    out.I_prev = in.I;
    out.I = I_next;
    out.u_prev = in.u;
    out.u = u_next;
    out.v = v_next;
    return out;
}

inline StepFields sys_step(const StepFields& in, const tcpde::SysParams& p, double tau) {
    const int W = in.I.width(), H = in.I.height();
    StepFields out = in;

    ImageGrid w(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            w(i, j) = p.diffusivity == tcpde::SysDiffusivity::PeronaMalik
                          ? pm_g(in.u(i, j), p.k_thresh)
                          : 1.0 / std::max(std::abs(in.u(i, j)), 1e-6);

    ImageGrid I_next(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            I_next(i, j) = in.I(i, j) + tau * oracle::div_weighted(w, in.I, i, j);

    ImageGrid u_next(W, H, in.u.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            u_next(i, j) = ((2.0 + tau) * in.u(i, j) - in.u_prev(i, j) +
                            tau * tau *
                                (p.lambda_bal * oracle::laplacian(in.u, i, j) +
                                 (1.0 - p.lambda_bal) * (grad_mag(in.I, i, j) - in.u(i, j)))) /
                           (1.0 + tau);

    out.I_prev = in.I;
    out.I = I_next;
    out.u_prev = in.u;
    out.u = u_next;
    return out;
}

// TDE and Cao share the damped-wave image update; `smoothed` selects the
// Cao variant (diffusivity from the smoothed gradient).
inline StepFields tde_like_step(const StepFields& in, double gamma, double K, double tau,
                                double xi, bool smoothed) {
    const int W = in.I.width(), H = in.I.height();
    StepFields out = in;

    const ImageGrid base = smoothed ? convolve2d(in.I, xi) : in.I;
    ImageGrid w(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i) w(i, j) = pm_g(grad_mag(base, i, j), K);

    ImageGrid I_next(W, H, in.I.spacing());
    for (int j = 0; j < H; ++j)
        for (int i = 0; i < W; ++i)
            I_next(i, j) = ((2.0 + gamma * tau) * in.I(i, j) - in.I_prev(i, j) +
                            tau * tau * oracle::div_weighted(w, in.I, i, j)) /
                           (1.0 + gamma * tau);

    out.I_prev = in.I;
    out.I = I_next;
    return out;
}

// Naive metric references.

inline double psnr(const ImageGrid& a, const ImageGrid& b, double peak) {
    double mse = 0.0;
    for (int j = 0; j < a.height(); ++j)
        for (int i = 0; i < a.width(); ++i) {
            const double d = a(i, j) - b(i, j);
            mse += d * d;
        }
    mse /= double(a.pixel_count());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

// SSIM with raw-moment accumulation (the library uses centered moments).
inline double mssim(const ImageGrid& a, const ImageGrid& b) {
    const int win = 11;
    const double sigma = 1.5;
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double c2 = (0.03 * 255) * (0.03 * 255);

    std::vector<double> g1(win);
    double gsum = 0.0;
    for (int t = 0; t < win; ++t) {
        g1[t] = std::exp(-((t - 5.0) * (t - 5.0)) / (2.0 * sigma * sigma));
        gsum += g1[t];
    }
    for (double& v : g1) v /= gsum;

    double total = 0.0;
    long count = 0;
    for (int y0 = 0; y0 + win <= a.height(); ++y0)
        for (int x0 = 0; x0 + win <= a.width(); ++x0) {
            double ex = 0, ey = 0, exx = 0, eyy = 0, exy = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    const double wgt = g1[x] * g1[y];
                    const double va = a(x0 + x, y0 + y);
                    const double vb = b(x0 + x, y0 + y);
                    ex += wgt * va;
                    ey += wgt * vb;
                    exx += wgt * va * va;
                    eyy += wgt * vb * vb;
                    exy += wgt * va * vb;
                }
            const double vx = exx - ex * ex;
            const double vy = eyy - ey * ey;
            const double cxy = exy - ex * ey;
            total += ((2 * ex * ey + c1) * (2 * cxy + c2)) /
                     ((ex * ex + ey * ey + c1) * (vx + vy + c2));
            ++count;
        }
    return total / double(count);
}

}  // namespace oracle
