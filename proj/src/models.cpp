#include "tcpde/models.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tcpde/errors.hpp"

namespace tcpde {

namespace {

constexpr double kGradRegularizer = 1e-6;   // floor for |grad I| in lambda and 1/|s|
constexpr double kBlowupMagnitude = 1e6;    // runaway threshold on max |I|

void require_positive(std::ostringstream& bad, const char* name, double v) {
    if (!(v > 0.0)) bad << (bad.tellp() > 0 ? ", " : "") << name;
}

void check_finite_or_blowup(const SolverState& st, const ImageGrid& I_next,
                            const ImageGrid* u_next, const ImageGrid* v_next) {
    bool ok = all_finite(I_next) && max_abs(I_next) <= kBlowupMagnitude;
    if (ok && u_next) ok = all_finite(*u_next);
    if (ok && v_next) ok = all_finite(*v_next);
    if (!ok)
        throw BlowupError("numerical blowup: non-finite or runaway field values", st.n);
}

/// Squared central-gradient magnitude field of g.
ImageGrid squared_gradient(const ImageGrid& g) {
    ImageGrid out(g.width(), g.height(), g.spacing());
    for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) {
            const Gradient d = grad_central(g, i, j);
            out(i, j) = d.x * d.x + d.y * d.y;
        }
    return out;
}

ImageGrid gradient_magnitude_field(const ImageGrid& g) {
    ImageGrid out(g.width(), g.height(), g.spacing());
    for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) out(i, j) = grad_magnitude(g, i, j);
    return out;
}

/// Edge source h applied to the gradient of the smoothed image.
ImageGrid edge_source(const ImageGrid& I, double xi, double cap, bool squared) {
    const ImageGrid smooth = convolve(I, make_kernel(xi));
    ImageGrid out(I.width(), I.height(), I.spacing());
    for (int j = 0; j < I.height(); ++j)
        for (int i = 0; i < I.width(); ++i) {
            const double mag = grad_magnitude(smooth, i, j);
            out(i, j) = h_truncate(squared ? mag * mag : mag, cap);
        }
    return out;
}

/// Diffusion weights g(u_xi) from the smoothed edge map. In debug builds
/// every weight is checked against the lower bound 1/(1 + max|u_xi|/k^2),
/// which must stay strictly positive for the scheme to diffuse at all.
ImageGrid edge_weights(const ImageGrid& u, double xi, double k_thresh) {
    const ImageGrid us = convolve(u, make_kernel(xi));
    ImageGrid w(u.width(), u.height(), u.spacing());
#ifndef NDEBUG
    const double gamma_low = 1.0 / (1.0 + max_abs(us) / (k_thresh * k_thresh));
#endif
    for (int j = 0; j < u.height(); ++j)
        for (int i = 0; i < u.width(); ++i) {
            const double g = edge_diffusivity(us(i, j), k_thresh);
            assert(g >= gamma_low - 1e-12 && g <= 1.0);
            w(i, j) = g;
        }
    return w;
}

/// v^{n+1} = v^n + tau (Lap v^n - (I0 - I^n)) with mirror ghosts.
ImageGrid fidelity_update_mirror(const SolverState& st, double tau) {
    const ImageGrid& v = st.v_curr;
    ImageGrid out(v.width(), v.height(), v.spacing());
    for (int j = 0; j < v.height(); ++j)
        for (int i = 0; i < v.width(); ++i)
            out(i, j) = v(i, j) + tau * laplacian(v, i, j)
                        - tau * (st.I0(i, j) - st.I_curr(i, j));
    return out;
}

/// Same update but with the fidelity field pinned to zero on the boundary
/// ring; only interior pixels evolve.
ImageGrid fidelity_update_dirichlet(const SolverState& st, double tau) {
    const ImageGrid& v = st.v_curr;
    ImageGrid out(v.width(), v.height(), v.spacing());  // boundary stays 0
    for (int j = 1; j < v.height() - 1; ++j)
        for (int i = 1; i < v.width() - 1; ++i)
            out(i, j) = v(i, j) + tau * laplacian(v, i, j)
                        - tau * (st.I0(i, j) - st.I_curr(i, j));
    return out;
}

/// Two-level damped-wave update for the edge map:
///   (1+damping*tau) u^{n+1} = (2+damping*tau) u^n - u^{n-1} + tau^2 * forcing
/// in increment form.
ImageGrid telegraph_field_update(const ImageGrid& curr, const ImageGrid& prev,
                                 const ImageGrid& forcing, double damping, double tau) {
    ImageGrid out(curr.width(), curr.height(), curr.spacing());
    const double denom = 1.0 + damping * tau;
    const double tau2 = tau * tau;
    const auto& c = curr.data();
    const auto& p = prev.data();
    const auto& f = forcing.data();
    auto& o = out.data();
    for (std::size_t k = 0; k < o.size(); ++k)
        o[k] = c[k] + ((c[k] - p[k]) + tau2 * f[k]) / denom;
    return out;
}

void shift_image_levels(SolverState& st, ImageGrid&& I_next) {
    st.I_prev = std::move(st.I_curr);
    st.I_curr = std::move(I_next);
    ++st.n;
}

}  // namespace

const char* model_name(Model m) {
    switch (m) {
        case Model::Tcpde: return "tcpde";
        case Model::Acpde: return "acpde";
        case Model::Sys: return "sys";
        case Model::Cao: return "cao";
        case Model::Tde: return "tde";
    }
    return "?";
}

std::optional<Model> model_from_name(std::string_view name) {
    for (Model m : {Model::Tcpde, Model::Acpde, Model::Sys, Model::Cao, Model::Tde})
        if (name == model_name(m)) return m;
    return std::nullopt;
}

void ModelParams::validate() const {
    std::ostringstream bad;
    require_positive(bad, "tau", tau);
    require_positive(bad, "h_spacing", h_spacing);
    require_positive(bad, "xi", xi);
    require_positive(bad, "intensity_scale", intensity_scale);
    if (lambda_mode == LambdaMode::Constant && lambda0 < 0.0) bad << (bad.tellp() > 0 ? ", " : "") << "lambda0";

    std::visit(
        [&bad](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TcpdeParams>) {
                require_positive(bad, "alpha", p.alpha);
                require_positive(bad, "beta", p.beta);
                require_positive(bad, "kappa", p.kappa);
                require_positive(bad, "nu", p.nu);
                require_positive(bad, "k", p.k_thresh);
                require_positive(bad, "h_cap", p.h_cap);
            } else if constexpr (std::is_same_v<T, AcpdeParams>) {
                require_positive(bad, "kappa", p.kappa);
                require_positive(bad, "nu", p.nu);
                require_positive(bad, "k", p.k_thresh);
                require_positive(bad, "h_cap", p.h_cap);
            } else if constexpr (std::is_same_v<T, SysParams>) {
                if (!(p.lambda_bal > 0.0 && p.lambda_bal < 1.0))
                    bad << (bad.tellp() > 0 ? ", " : "") << "lambda (must be in (0,1))";
                require_positive(bad, "K", p.k_thresh);
            } else if constexpr (std::is_same_v<T, CaoParams>) {
                require_positive(bad, "gamma", p.gamma);
                require_positive(bad, "K", p.k_thresh);
            } else {
                require_positive(bad, "gamma", p.gamma);
                require_positive(bad, "K", p.k_thresh);
            }
        },
        variant);

    if (bad.tellp() > 0)
        throw std::domain_error(std::string("invalid model parameters: ") + bad.str());

    const double ct = tau * tau / (h_spacing * h_spacing);
    if (!std::isfinite(ct))
        throw std::domain_error("invalid model parameters: tau/h_spacing stencil weight not finite");
}

double edge_diffusivity(double u_smoothed, double k_thresh) {
    return 1.0 / (1.0 + std::abs(u_smoothed) / (k_thresh * k_thresh));
}

double pm_diffusivity(double s, double k_thresh) {
    const double r = s / k_thresh;
    return 1.0 / (1.0 + r * r);
}

double h_truncate(double theta, double cap) {
    return 0.1 + std::min(theta * theta, cap);
}

SolverState init_state(const ImageGrid& I0, const ModelParams& params) {
    params.validate();
    if (I0.width() < 3 || I0.height() < 3)
        throw std::domain_error("init_state: solvers need at least a 3x3 grid");
    if (!all_finite(I0))
        throw std::domain_error("init_state: observed image contains non-finite values");

    SolverState st;
    st.I0 = I0;
    st.I0.set_spacing(params.h_spacing);
    st.I_curr = st.I0;
    st.I_prev = st.I0;
    st.v_curr = ImageGrid(I0.width(), I0.height(), params.h_spacing, 0.0);
    st.n = 1;
    st.lambda_n = 0.0;

    switch (params.model()) {
        case Model::Tcpde:
        case Model::Acpde:
            st.u_curr = convolve(squared_gradient(st.I0), make_kernel(params.xi));
            break;
        case Model::Sys:
            st.u_curr = gradient_magnitude_field(st.I0);
            break;
        case Model::Cao:
        case Model::Tde:
            st.u_curr = ImageGrid(I0.width(), I0.height(), params.h_spacing, 0.0);
            break;
    }
    st.u_prev = st.u_curr;
    return st;
}

double compute_lambda(const SolverState& state, double sigma, LambdaMode mode, double lambda0) {
    if (mode == LambdaMode::Constant) return lambda0;
    if (!(sigma > 0.0))
        throw std::domain_error("compute_lambda: sigma must be > 0 in dynamic mode");

    const ImageGrid& In = state.I_curr;
    const ImageGrid& I0 = state.I0;
    double sum = 0.0;
    for (int j = 0; j < In.height(); ++j)
        for (int i = 0; i < In.width(); ++i) {
            const Gradient gn = grad_central(In, i, j);
            const Gradient g0 = grad_central(I0, i, j);
            const double mag = std::sqrt(gn.x * gn.x + gn.y * gn.y);
            const double dot = g0.x * gn.x + g0.y * gn.y;
            sum += mag - dot / std::max(mag, kGradRegularizer);
        }
    const double lambda =
        sum / (2.0 * sigma * sigma * static_cast<double>(In.pixel_count()));
    return std::max(lambda, 0.0);
}

ImageGrid telegraph_image_update(const ImageGrid& I_curr, const ImageGrid& I_prev,
                                 const ImageGrid& weights, double damping, double tau,
                                 double lambda, const ImageGrid* v) {
    ImageGrid out(I_curr.width(), I_curr.height(), I_curr.spacing());
    const double denom = 1.0 + damping * tau;
    const double tau2 = tau * tau;
    for (int j = 0; j < I_curr.height(); ++j)
        for (int i = 0; i < I_curr.width(); ++i) {
            double force = div_weighted(weights, I_curr, i, j);
            if (v) force -= 2.0 * lambda * (*v)(i, j);
            out(i, j) = I_curr(i, j)
                        + ((I_curr(i, j) - I_prev(i, j)) + tau2 * force) / denom;
        }
    return out;
}

void tcpde_step(SolverState& st, const ModelParams& params) {
    const auto& p = std::get<TcpdeParams>(params.variant);
    const double tau = params.tau;

    // Edge map u^{n+1}: damped wave relaxing toward the edge source.
    const ImageGrid hsrc = edge_source(st.I_curr, params.xi, p.h_cap, p.h_squared);
    ImageGrid forcing(st.u_curr.width(), st.u_curr.height(), st.u_curr.spacing());
    for (int j = 0; j < forcing.height(); ++j)
        for (int i = 0; i < forcing.width(); ++i)
            forcing(i, j) = p.kappa * (hsrc(i, j) - st.u_curr(i, j)
                                       + 0.5 * p.nu * p.nu * laplacian(st.u_curr, i, j));
    ImageGrid u_next = telegraph_field_update(st.u_curr, st.u_prev, forcing, p.beta, tau);

    // Fidelity v^{n+1} from level-n fields, mirror boundary.
    ImageGrid v_next = fidelity_update_mirror(st, tau);

    st.lambda_n = compute_lambda(st, params.noise_sigma, params.lambda_mode, params.lambda0);

    // Image I^{n+1} consumes the fresh u and v.
    const ImageGrid w = edge_weights(u_next, params.xi, p.k_thresh);
    ImageGrid I_next = telegraph_image_update(st.I_curr, st.I_prev, w, p.alpha, tau,
                                              st.lambda_n, &v_next);

    check_finite_or_blowup(st, I_next, &u_next, &v_next);
    st.u_prev = std::move(st.u_curr);
    st.u_curr = std::move(u_next);
    st.v_curr = std::move(v_next);
    shift_image_levels(st, std::move(I_next));
}

void acpde_step(SolverState& st, const ModelParams& params) {
    const auto& p = std::get<AcpdeParams>(params.variant);
    const double tau = params.tau;

    // Forward-Euler edge map.
    const ImageGrid hsrc = edge_source(st.I_curr, params.xi, p.h_cap, p.h_squared);
    ImageGrid u_next(st.u_curr.width(), st.u_curr.height(), st.u_curr.spacing());
    for (int j = 0; j < u_next.height(); ++j)
        for (int i = 0; i < u_next.width(); ++i)
            u_next(i, j) = st.u_curr(i, j)
                           + tau * p.kappa * (hsrc(i, j) - st.u_curr(i, j)
                                              + 0.5 * p.nu * p.nu * laplacian(st.u_curr, i, j));

    // Fidelity with zero boundary.
    ImageGrid v_next = fidelity_update_dirichlet(st, tau);

    st.lambda_n = compute_lambda(st, params.noise_sigma, params.lambda_mode, params.lambda0);

    const ImageGrid w = edge_weights(u_next, params.xi, p.k_thresh);
    ImageGrid I_next(st.I_curr.width(), st.I_curr.height(), st.I_curr.spacing());
    for (int j = 0; j < I_next.height(); ++j)
        for (int i = 0; i < I_next.width(); ++i)
            I_next(i, j) = st.I_curr(i, j)
                           + tau * (div_weighted(w, st.I_curr, i, j)
                                    - 2.0 * st.lambda_n * v_next(i, j));

    check_finite_or_blowup(st, I_next, &u_next, &v_next);
    st.u_prev = std::move(st.u_curr);
    st.u_curr = std::move(u_next);
    st.v_curr = std::move(v_next);
    shift_image_levels(st, std::move(I_next));
}

void sys_step(SolverState& st, const ModelParams& params) {
    const auto& p = std::get<SysParams>(params.variant);
    const double tau = params.tau;

    // Image update reads the level-n edge map directly (no smoothing).
    ImageGrid w(st.u_curr.width(), st.u_curr.height(), st.u_curr.spacing());
    for (int j = 0; j < w.height(); ++j)
        for (int i = 0; i < w.width(); ++i) {
            const double u = st.u_curr(i, j);
            w(i, j) = p.diffusivity == SysDiffusivity::PeronaMalik
                          ? pm_diffusivity(u, p.k_thresh)
                          : 1.0 / std::max(std::abs(u), kGradRegularizer);
        }
    ImageGrid I_next(st.I_curr.width(), st.I_curr.height(), st.I_curr.spacing());
    for (int j = 0; j < I_next.height(); ++j)
        for (int i = 0; i < I_next.width(); ++i)
            I_next(i, j) = st.I_curr(i, j) + tau * div_weighted(w, st.I_curr, i, j);

    // Edge map relaxes toward |grad I^n| under unit damping.
    ImageGrid forcing(st.u_curr.width(), st.u_curr.height(), st.u_curr.spacing());
    for (int j = 0; j < forcing.height(); ++j)
        for (int i = 0; i < forcing.width(); ++i)
            forcing(i, j) = p.lambda_bal * laplacian(st.u_curr, i, j)
                            + (1.0 - p.lambda_bal)
                                  * (grad_magnitude(st.I_curr, i, j) - st.u_curr(i, j));
    ImageGrid u_next = telegraph_field_update(st.u_curr, st.u_prev, forcing, 1.0, tau);

    check_finite_or_blowup(st, I_next, &u_next, nullptr);
    st.u_prev = std::move(st.u_curr);
    st.u_curr = std::move(u_next);
    shift_image_levels(st, std::move(I_next));
}

void cao_step(SolverState& st, const ModelParams& params) {
    const auto& p = std::get<CaoParams>(params.variant);
    const ImageGrid smooth = convolve(st.I_curr, make_kernel(params.xi));
    ImageGrid w(st.I_curr.width(), st.I_curr.height(), st.I_curr.spacing());
    for (int j = 0; j < w.height(); ++j)
        for (int i = 0; i < w.width(); ++i)
            w(i, j) = pm_diffusivity(grad_magnitude(smooth, i, j), p.k_thresh);

    ImageGrid I_next = telegraph_image_update(st.I_curr, st.I_prev, w, p.gamma, params.tau);
    check_finite_or_blowup(st, I_next, nullptr, nullptr);
    shift_image_levels(st, std::move(I_next));
}

void tde_step(SolverState& st, const ModelParams& params) {
    const auto& p = std::get<TdeParams>(params.variant);
    ImageGrid w(st.I_curr.width(), st.I_curr.height(), st.I_curr.spacing());
    for (int j = 0; j < w.height(); ++j)
        for (int i = 0; i < w.width(); ++i)
            w(i, j) = pm_diffusivity(grad_magnitude(st.I_curr, i, j), p.k_thresh);

    ImageGrid I_next = telegraph_image_update(st.I_curr, st.I_prev, w, p.gamma, params.tau);
    check_finite_or_blowup(st, I_next, nullptr, nullptr);
    shift_image_levels(st, std::move(I_next));
}

void step(SolverState& st, const ModelParams& params) {
    switch (params.model()) {
        case Model::Tcpde: tcpde_step(st, params); break;
        case Model::Acpde: acpde_step(st, params); break;
        case Model::Sys: sys_step(st, params); break;
        case Model::Cao: cao_step(st, params); break;
        case Model::Tde: tde_step(st, params); break;
    }
}

namespace {

ImageGrid scaled(const ImageGrid& g, double factor) {
    ImageGrid out = g;
    for (double& v : out.data()) v *= factor;
    return out;
}

}  // namespace

RunResult run(const ImageGrid& I0, const ModelParams& params, const StopRule& stop,
              double sigma, int snapshot_every) {
    params.validate();
    if (!(stop.epsilon > 0.0))
        throw std::domain_error("run: stop.epsilon must be > 0");
    if (stop.max_iters < 1)
        throw std::domain_error("run: stop.max_iters must be >= 1");

    ModelParams p = params;
    const double scale = params.intensity_scale;
    p.noise_sigma = sigma / scale;

    const auto t0 = std::chrono::steady_clock::now();
    SolverState st = init_state(scaled(I0, 1.0 / scale), p);

    RunResult result;
    for (int it = 1; it <= stop.max_iters; ++it) {
        const ImageGrid before = st.I_curr;
        step(st, p);
        const double change = sum_squared_diff(st.I_curr, before);
        const double norm = sum_squares(before);
        const double rel = norm > 0.0 ? change / norm : change;
        result.trace.entries.push_back({it, rel, st.lambda_n});
        if (snapshot_every > 0 && it % snapshot_every == 0)
            result.trace.snapshots.emplace_back(it, scaled(st.I_curr, scale));
        if (rel <= stop.epsilon) {
            result.trace.converged = true;
            break;
        }
    }
    const auto t1 = std::chrono::steady_clock::now();

    result.trace.iterations = static_cast<int>(result.trace.entries.size());
    result.trace.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.image = scaled(st.I_curr, scale);
    return result;
}

}  // namespace tcpde
