#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcpde/models.hpp"

namespace tcpde {

/// Optional per-cell artifacts emitted by benchmark runs.
struct ExportToggles {
    bool trace = false;
    bool ratio = false;
    int slice_row = -1;  // -1 disables slice export
    bool surface = false;
};

/// One benchmark campaign: images x noise levels x models, plus the shared
/// stop rule, seed and output options. See README for the JSON schema.
struct ExperimentConfig {
    std::vector<std::string> images;
    std::vector<double> sigmas;
    std::vector<ModelParams> models;
    StopRule stop;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool metrics_quantize = false;
    ExportToggles exports;

    /// Throws ConfigError listing every problem found (missing images,
    /// empty model list, bad sigma values, ...).
    void validate() const;
};

/// Parses one model's parameter block. Unknown keys are a hard error so
/// that typos cannot silently fall back to defaults.
ModelParams model_params_from_json(Model model, const nlohmann::json& block);

/// Resolved-parameter echo, embeddable in reports and file headers.
nlohmann::json model_params_to_json(const ModelParams& params);

ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

/// Fixed presentation order for result tables: baselines first, the
/// coupled-telegraph model last.
int presentation_order(Model m);

}  // namespace tcpde
