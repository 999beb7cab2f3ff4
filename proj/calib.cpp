// Scratch calibration driver (not part of the build tree).
#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include "tests/test_support.hpp"
#include "tcpde/benchmark.hpp"
#include "tcpde/conv.hpp"
#include "tcpde/metrics.hpp"
#include "tcpde/models.hpp"

using namespace tcpde;

struct Cand {
    std::string label;
    ModelParams p;
};

int main(int argc, char** argv) {
    const int max_iters = argc > 1 ? std::atoi(argv[1]) : 400;
    struct Scene {
        const char* name;
        ImageGrid clean;
    };
    std::vector<Scene> scenes;
    scenes.push_back({"phantom", testsup::make_phantom(128, 128)});
    scenes.push_back({"stripes", testsup::make_stripes(128, 128)});
    const std::vector<double> sigmas = {20.0, 40.0, 60.0};

    std::vector<Cand> cands;
    auto addc = [&](std::string label, ModelParams p) { cands.push_back({std::move(label), std::move(p)}); };

    // TDE / Cao sweeps
    for (double gamma : {1.0, 2.0, 5.0})
        for (double K : {0.02, 0.05, 0.1, 0.25}) {
            ModelParams p;
            p.variant = TdeParams{gamma, K};
            p.lambda_mode = LambdaMode::Constant;
            char buf[64];
            snprintf(buf, sizeof(buf), "tde g%.1f K%.2f", gamma, K);
            addc(buf, p);
        }
    for (double gamma : {1.0, 2.0, 20.0})
        for (double K : {0.01, 0.03, 0.08, 0.2}) {
            ModelParams p;
            p.variant = CaoParams{gamma, K};
            p.lambda_mode = LambdaMode::Constant;
            char buf[64];
            snprintf(buf, sizeof(buf), "cao g%.1f K%.2f", gamma, K);
            addc(buf, p);
        }
    for (double lam : {0.1, 0.5, 0.9})
        for (double K : {0.02, 0.05, 0.15, 0.4}) {
            ModelParams p;
            p.variant = SysParams{lam, K, SysDiffusivity::PeronaMalik};
            p.lambda_mode = LambdaMode::Constant;
            char buf[64];
            snprintf(buf, sizeof(buf), "sys l%.1f K%.2f", lam, K);
            addc(buf, p);
        }
    for (double k : {0.5, 1.0, 3.0})
        for (int rof : {0, 1}) {
            ModelParams p;
            p.variant = AcpdeParams{1.0, 1.0, k, 255.0 * 255.0, true};
            p.lambda_mode = rof ? LambdaMode::RofDynamic : LambdaMode::Constant;
            char buf[64];
            snprintf(buf, sizeof(buf), "acpde k%.1f %s", k, rof ? "rof" : "l0");
            addc(buf, p);
        }
    for (double alpha : {0.2, 0.5, 1.0, 2.0})
        for (double beta : {1.0, 20.0})
            for (double k : {0.3, 0.5, 1.0, 2.0})
                for (double kappa : {1.0, 8.0})
                    for (int rof : {0, 1}) {
                        ModelParams p;
                        p.variant = TcpdeParams{alpha, beta, kappa, 1.0, k, 255.0 * 255.0, false};
                        p.lambda_mode = rof ? LambdaMode::RofDynamic : LambdaMode::Constant;
                        char buf[96];
                        snprintf(buf, sizeof(buf), "tcpde a%.1f b%.0f k%.2f kap%.0f %s", alpha,
                                 beta, k, kappa, rof ? "rof" : "l0");
                        addc(buf, p);
                    }

    for (const auto& scene : scenes) {
        const ImageGrid ref = prepare_for_metrics(scene.clean, false);
        for (double sigma : sigmas) {
            const ImageGrid noisy =
                add_gaussian_noise(scene.clean, {0.0, sigma, 555000 + (std::uint64_t)sigma});
            const double noisy_psnr = psnr(ref, prepare_for_metrics(noisy, false));
            std::printf("=== %s sigma %g (noisy %.2f dB) ===\n", scene.name, sigma, noisy_psnr);

            std::vector<std::future<std::string>> futs;
            for (const auto& c : cands)
                futs.push_back(std::async(std::launch::async, [&, c] {
                    char line[256];
                    try {
                        const RunResult r = run(noisy, c.p, StopRule{1e-4, max_iters}, sigma);
                        const double v = psnr(ref, prepare_for_metrics(r.image, false));
                        const double ms = mssim(ref, prepare_for_metrics(r.image, false));
                        snprintf(line, sizeof(line), "%-28s %7.3f dB  mssim %.4f  iters %4d%s",
                                 c.label.c_str(), v, ms, r.trace.iterations,
                                 r.trace.converged ? "" : " (cap)");
                    } catch (const std::exception& e) {
                        snprintf(line, sizeof(line), "%-28s FAILED %s", c.label.c_str(), e.what());
                    }
                    return std::string(line);
                }));
            for (auto& f : futs) std::printf("%s\n", f.get().c_str());
        }
    }
    return 0;
}
