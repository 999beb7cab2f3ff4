#include "tcpde/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tcpde/errors.hpp"

namespace tcpde {

namespace {

using nlohmann::json;

/// Pulls a key of the expected type, tracking which keys were consumed.
class BlockReader {
public:
    BlockReader(const json& block, std::string context)
        : block_(block), context_(std::move(context)) {
        if (!block.is_object())
            throw ConfigError(context_ + ": expected a JSON object");
    }

    double number(const char* key, double fallback) {
        if (!block_.contains(key)) return fallback;
        used_.insert(key);
        const json& v = block_.at(key);
        if (!v.is_number())
            throw ConfigError(context_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    bool boolean(const char* key, bool fallback) {
        if (!block_.contains(key)) return fallback;
        used_.insert(key);
        const json& v = block_.at(key);
        if (!v.is_boolean())
            throw ConfigError(context_ + "." + key + ": expected a boolean");
        return v.get<bool>();
    }

    std::string text(const char* key, const std::string& fallback) {
        if (!block_.contains(key)) return fallback;
        used_.insert(key);
        const json& v = block_.at(key);
        if (!v.is_string())
            throw ConfigError(context_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    const json* object(const char* key) {
        if (!block_.contains(key)) return nullptr;
        used_.insert(key);
        return &block_.at(key);
    }

    void reject_unknown() const {
        std::vector<std::string> unknown;
        for (auto it = block_.begin(); it != block_.end(); ++it)
            if (!used_.count(it.key())) unknown.push_back(it.key());
        if (!unknown.empty()) {
            std::ostringstream msg;
            msg << context_ << ": unknown key(s):";
            for (const auto& k : unknown) msg << " " << k;
            throw ConfigError(msg.str());
        }
    }

private:
    const json& block_;
    std::string context_;
    std::set<std::string> used_;
};

void read_lambda(BlockReader& r, const std::string& context, ModelParams& p) {
    const json* lam = r.object("lambda");
    if (!lam) return;
    BlockReader lr(*lam, context + ".lambda");
    const std::string mode = lr.text("mode", "rof");
    if (mode == "rof") {
        p.lambda_mode = LambdaMode::RofDynamic;
    } else if (mode == "constant") {
        p.lambda_mode = LambdaMode::Constant;
    } else {
        throw ConfigError(context + ".lambda.mode: expected 'rof' or 'constant'");
    }
    p.lambda0 = lr.number("value", p.lambda0);
    lr.reject_unknown();
}

}  // namespace

int presentation_order(Model m) {
    switch (m) {
        case Model::Tde: return 0;
        case Model::Cao: return 1;
        case Model::Sys: return 2;
        case Model::Acpde: return 3;
        case Model::Tcpde: return 4;
    }
    return 5;
}

ModelParams model_params_from_json(Model model, const nlohmann::json& block) {
    const std::string context = std::string("models.") + model_name(model);
    BlockReader r(block, context);

    ModelParams p;
    switch (model) {
        case Model::Tcpde: {
            TcpdeParams v;
            v.alpha = r.number("alpha", v.alpha);
            v.beta = r.number("beta", v.beta);
            v.kappa = r.number("kappa", v.kappa);
            v.nu = r.number("nu", v.nu);
            v.k_thresh = r.number("k", v.k_thresh);
            v.h_cap = r.number("h_cap", v.h_cap);
            v.h_squared = r.boolean("h_squared", v.h_squared);
            p.variant = v;
            read_lambda(r, context, p);
            break;
        }
        case Model::Acpde: {
            AcpdeParams v;
            v.kappa = r.number("kappa", v.kappa);
            v.nu = r.number("nu", v.nu);
            v.k_thresh = r.number("k", v.k_thresh);
            v.h_cap = r.number("h_cap", v.h_cap);
            v.h_squared = r.boolean("h_squared", v.h_squared);
            p.variant = v;
            read_lambda(r, context, p);
            break;
        }
        case Model::Sys: {
            SysParams v;
            v.lambda_bal = r.number("lambda", v.lambda_bal);
            v.k_thresh = r.number("K", v.k_thresh);
            const std::string d = r.text("diffusivity", "pm");
            if (d == "pm") {
                v.diffusivity = SysDiffusivity::PeronaMalik;
            } else if (d == "inverse") {
                v.diffusivity = SysDiffusivity::InverseGradient;
            } else {
                throw ConfigError(context + ".diffusivity: expected 'pm' or 'inverse'");
            }
            p.variant = v;
            break;
        }
        case Model::Cao: {
            CaoParams v;
            v.gamma = r.number("gamma", v.gamma);
            v.k_thresh = r.number("K", v.k_thresh);
            p.variant = v;
            break;
        }
        case Model::Tde: {
            TdeParams v;
            v.gamma = r.number("gamma", v.gamma);
            v.k_thresh = r.number("K", v.k_thresh);
            p.variant = v;
            break;
        }
    }

    p.tau = r.number("tau", p.tau);
    p.h_spacing = r.number("h", p.h_spacing);
    p.xi = r.number("xi", p.xi);
    p.intensity_scale = r.number("scale", p.intensity_scale);
    r.reject_unknown();

    try {
        p.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(context + ": " + e.what());
    }
    return p;
}

nlohmann::json model_params_to_json(const ModelParams& p) {
    json j;
    j["model"] = model_name(p.model());
    j["tau"] = p.tau;
    j["h"] = p.h_spacing;
    j["xi"] = p.xi;
    j["scale"] = p.intensity_scale;
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TcpdeParams>) {
                j["alpha"] = v.alpha;
                j["beta"] = v.beta;
                j["kappa"] = v.kappa;
                j["nu"] = v.nu;
                j["k"] = v.k_thresh;
                j["h_cap"] = v.h_cap;
                j["h_squared"] = v.h_squared;
            } else if constexpr (std::is_same_v<T, AcpdeParams>) {
                j["kappa"] = v.kappa;
                j["nu"] = v.nu;
                j["k"] = v.k_thresh;
                j["h_cap"] = v.h_cap;
                j["h_squared"] = v.h_squared;
            } else if constexpr (std::is_same_v<T, SysParams>) {
                j["lambda"] = v.lambda_bal;
                j["K"] = v.k_thresh;
                j["diffusivity"] =
                    v.diffusivity == SysDiffusivity::PeronaMalik ? "pm" : "inverse";
            } else if constexpr (std::is_same_v<T, CaoParams>) {
                j["gamma"] = v.gamma;
                j["K"] = v.k_thresh;
            } else {
                j["gamma"] = v.gamma;
                j["K"] = v.k_thresh;
            }
        },
        p.variant);
    if (p.model() == Model::Tcpde || p.model() == Model::Acpde) {
        j["lambda"] = {{"mode", p.lambda_mode == LambdaMode::RofDynamic ? "rof" : "constant"}};
        if (p.lambda_mode == LambdaMode::Constant) j["lambda"]["value"] = p.lambda0;
    }
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    BlockReader r(j, "config");
    ExperimentConfig cfg;

    if (const json* images = r.object("images")) {
        if (!images->is_array())
            throw ConfigError("config.images: expected an array of paths");
        for (const auto& v : *images) {
            if (!v.is_string()) throw ConfigError("config.images: entries must be strings");
            cfg.images.push_back(v.get<std::string>());
        }
    }
    if (const json* sigmas = r.object("sigmas")) {
        if (!sigmas->is_array())
            throw ConfigError("config.sigmas: expected an array of numbers");
        for (const auto& v : *sigmas) {
            if (!v.is_number()) throw ConfigError("config.sigmas: entries must be numbers");
            cfg.sigmas.push_back(v.get<double>());
        }
    }

    if (const json* stop = r.object("stop")) {
        BlockReader sr(*stop, "config.stop");
        cfg.stop.epsilon = sr.number("epsilon", cfg.stop.epsilon);
        cfg.stop.max_iters = static_cast<int>(sr.number("max_iters", cfg.stop.max_iters));
        sr.reject_unknown();
    }
    if (const json* metrics = r.object("metrics")) {
        BlockReader mr(*metrics, "config.metrics");
        cfg.metrics_quantize = mr.boolean("quantize", false);
        mr.reject_unknown();
    }
    if (const json* exports = r.object("export")) {
        BlockReader er(*exports, "config.export");
        cfg.exports.trace = er.boolean("trace", false);
        cfg.exports.ratio = er.boolean("ratio", false);
        cfg.exports.slice_row = static_cast<int>(er.number("slice_row", -1));
        cfg.exports.surface = er.boolean("surface", false);
        er.reject_unknown();
    }
    cfg.seed = static_cast<std::uint64_t>(r.number("seed", 0));
    cfg.output_dir = r.text("output_dir", "");

    if (const json* models = r.object("models")) {
        if (!models->is_object())
            throw ConfigError("config.models: expected an object keyed by model name");
        for (auto it = models->begin(); it != models->end(); ++it)
            if (!model_from_name(it.key()))
                throw ConfigError("config.models: unknown model '" + it.key() + "'");
        // Canonical order keeps result files deterministic no matter how
        // the JSON was written.
        for (Model m : {Model::Tde, Model::Cao, Model::Sys, Model::Acpde, Model::Tcpde}) {
            const char* name = model_name(m);
            if (models->contains(name))
                cfg.models.push_back(model_params_from_json(m, models->at(name)));
        }
    }
    r.reject_unknown();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": JSON parse error: " + e.what());
    }
    return experiment_from_json(j);
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
    json j;
    j["images"] = cfg.images;
    j["sigmas"] = cfg.sigmas;
    j["seed"] = cfg.seed;
    if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
    j["stop"] = {{"epsilon", cfg.stop.epsilon}, {"max_iters", cfg.stop.max_iters}};
    j["metrics"] = {{"quantize", cfg.metrics_quantize}};
    j["export"] = {{"trace", cfg.exports.trace},
                   {"ratio", cfg.exports.ratio},
                   {"slice_row", cfg.exports.slice_row},
                   {"surface", cfg.exports.surface}};
    json models = json::object();
    for (const auto& p : cfg.models) models[model_name(p.model())] = model_params_to_json(p);
    j["models"] = models;
    return j;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    if (images.empty()) problems.push_back("images: at least one input image is required");
    if (models.empty()) problems.push_back("models: at least one model is required");
    if (sigmas.empty()) problems.push_back("sigmas: at least one noise level is required");
    for (const auto& s : sigmas)
        if (s < 0.0) problems.push_back("sigmas: negative value " + std::to_string(s));
    for (const auto& path : images)
        if (!std::filesystem::exists(path)) problems.push_back("images: missing file " + path);
    if (!(stop.epsilon > 0.0)) problems.push_back("stop.epsilon: must be > 0");
    if (stop.max_iters < 1) problems.push_back("stop.max_iters: must be >= 1");

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid experiment config:";
        for (const auto& p : problems) msg << "\n  - " << p;
        throw ConfigError(msg.str());
    }
}

}  // namespace tcpde
