#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tcpde/conv.hpp"
#include "tcpde/grid.hpp"

namespace tcpde {

enum class Model { Tcpde, Acpde, Sys, Cao, Tde };

const char* model_name(Model m);
std::optional<Model> model_from_name(std::string_view name);

/// How the fidelity weight lambda^n is obtained each iteration: a fixed
/// constant, or re-estimated from the current iterate by the classic
/// constrained-denoising formula (see compute_lambda).
enum class LambdaMode { Constant, RofDynamic };

enum class SysDiffusivity { PeronaMalik, InverseGradient };

/// Coupled telegraph system: damped wave equations for both the image and
/// the edge map, plus a parabolic fidelity field.
struct TcpdeParams {
    double alpha = 1.0;     // image damping
    double beta = 20.0;     // edge-map damping
    double kappa = 1.0;     // edge-map relaxation rate
    double nu = 1.0;        // edge-map spread
    double k_thresh = 2.0;  // edge threshold in the diffusivity
    double h_cap = 255.0 * 255.0;  // saturation cap of the edge source
    bool h_squared = false;        // feed |grad S|^2 instead of |grad S| to the source
};

/// Parabolic coupled system: forward-Euler image/edge/fidelity updates.
/// The fidelity field uses a zero boundary, unlike every other field here.
struct AcpdeParams {
    double kappa = 1.0;
    double nu = 1.0;
    double k_thresh = 3.0;
    double h_cap = 255.0 * 255.0;
    bool h_squared = true;
};

/// Parabolic image equation driven by an edge map with its own telegraph
/// dynamics relaxing toward |grad I|.
struct SysParams {
    double lambda_bal = 0.1;  // balance between edge-map spread and relaxation, in (0,1)
    double k_thresh = 5.0;
    SysDiffusivity diffusivity = SysDiffusivity::PeronaMalik;
};

/// Damped wave image equation, diffusivity from the smoothed gradient.
struct CaoParams {
    double gamma = 20.0;
    double k_thresh = 6.0;
};

/// Damped wave image equation, diffusivity from the raw gradient.
struct TdeParams {
    double gamma = 5.0;
    double k_thresh = 15.0;
};

using VariantParams = std::variant<TcpdeParams, AcpdeParams, SysParams, CaoParams, TdeParams>;

/// Full parameter set for one solver run. The variant index is the model tag.
///
/// intensity_scale: solvers evolve intensities divided by this value, so the
/// nonlinearity thresholds (k, K) and sigma are expressed in units of
/// `intensity_scale` gray levels. The default 256 maps 8-bit data into
/// [0,1); being a power of two, the scaling is bitwise lossless. Set to 1
/// to run on raw gray values.
struct ModelParams {
    double tau = 0.2;
    double h_spacing = 1.0;
    double xi = 1.0;
    double intensity_scale = 256.0;
    LambdaMode lambda_mode = LambdaMode::RofDynamic;
    double lambda0 = 0.0;
    double noise_sigma = 0.0;  // used by LambdaMode::RofDynamic; run() fills it in
    VariantParams variant = TcpdeParams{};

    Model model() const noexcept { return static_cast<Model>(variant.index()); }

    /// Throws std::domain_error naming every offending field.
    void validate() const;
};

/// Convergence control: stop once the relative squared L2 change between
/// successive iterates drops to epsilon, or after max_iters steps.
struct StopRule {
    double epsilon = 1e-4;
    int max_iters = 1000;
};

/// Evolving fields of one solver run. The scheme is two-level in time, so
/// the state always holds levels n and n-1; models that do not use the edge
/// or fidelity fields leave them identically zero.
struct SolverState {
    ImageGrid I_curr, I_prev;
    ImageGrid u_curr, u_prev;
    ImageGrid v_curr;
    ImageGrid I0;  // observed image, immutable over the run
    int n = 1;
    double lambda_n = 0.0;
};

/// Edge-stopping function 1/(1 + |u|/k^2), in (0,1], decreasing in |u|.
double edge_diffusivity(double u_smoothed, double k_thresh);

/// Classic gradient-threshold diffusivity 1/(1 + (s/K)^2).
double pm_diffusivity(double s, double k_thresh);

/// Bounded edge source 0.1 + min(theta^2, cap).
double h_truncate(double theta, double cap = 255.0 * 255.0);

/// Builds the two-level initial state: image levels equal the observation,
/// the edge map is the smoothed squared gradient (TCPDE/ACPDE) or the raw
/// gradient magnitude (SYS), and the fidelity field starts at zero.
SolverState init_state(const ImageGrid& I0, const ModelParams& params);

/// Fidelity weight for the current iterate. Constant mode returns lambda0.
/// Dynamic mode evaluates
///   (1/(2 sigma^2 W H)) * sum_ij [ |grad I^n| - (grad I^0 . grad I^n)/max(|grad I^n|, 1e-6) ]
/// clamped to >= 0; sigma must be positive there.
double compute_lambda(const SolverState& state, double sigma, LambdaMode mode, double lambda0);

/// One explicit step of the named system. Each computes the level-(n+1)
/// edge/fidelity fields from level-n data first, then the image update
/// consumes them; buffers are swapped at the end and n is incremented.
/// Throws BlowupError if any field goes non-finite or the image magnitude
/// runs away.
void tcpde_step(SolverState& state, const ModelParams& params);
void acpde_step(SolverState& state, const ModelParams& params);
void sys_step(SolverState& state, const ModelParams& params);
void cao_step(SolverState& state, const ModelParams& params);
void tde_step(SolverState& state, const ModelParams& params);

/// Dispatch on params.model().
void step(SolverState& state, const ModelParams& params);

/// Shared damped-wave image update used by the TDE/Cao/TCPDE image
/// equations:
///   (1+damping*tau) I^{n+1} = (2+damping*tau) I^n - I^{n-1}
///                             + tau^2 [ div(w grad I^n) - 2 lambda v ]
/// evaluated in the equivalent increment form, which leaves constant fields
/// bitwise untouched. Pass v = nullptr when there is no fidelity term.
ImageGrid telegraph_image_update(const ImageGrid& I_curr, const ImageGrid& I_prev,
                                 const ImageGrid& weights, double damping, double tau,
                                 double lambda = 0.0, const ImageGrid* v = nullptr);

struct TraceEntry {
    int iteration = 0;
    double rel_change = 0.0;
    double lambda = 0.0;
};

struct RunTrace {
    std::vector<TraceEntry> entries;
    bool converged = false;
    int iterations = 0;
    double wall_ms = 0.0;
    std::vector<std::pair<int, ImageGrid>> snapshots;
};

struct RunResult {
    ImageGrid image;
    RunTrace trace;
};

/// Full solver run: scales intensities by params.intensity_scale, iterates
/// the model's step until the stop rule fires, and scales back. sigma is
/// the noise level in raw gray values (required when lambda_mode is
/// RofDynamic). If the iterate norm is zero the stop rule falls back to the
/// absolute squared change. snapshot_every > 0 stores intermediate images.
RunResult run(const ImageGrid& I0, const ModelParams& params, const StopRule& stop,
              double sigma = 0.0, int snapshot_every = 0);

}  // namespace tcpde
