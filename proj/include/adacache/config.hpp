#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cache.hpp"
#include "codebook.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "motion.hpp"
#include "sampler.hpp"

namespace adacache {

/*============================ experiment config ===========================*/

struct ExperimentConfig {
    ModelConfig model;
    SamplerConfig sampler;
    std::string codebook = "fast30";  // preset name or inline threshold:rate list
    MoRegConfig moreg;
    MetricConfig metric;
    std::vector<uint64_t> seeds = {0};
    std::string output_dir      = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/*=========================== enum <-> text names ==========================*/

inline std::string to_string(MetricKind k) {
    switch (k) {
        case MetricKind::l1:     return "l1";
        case MetricKind::l2:     return "l2";
        case MetricKind::cosine: return "cosine";
    }
    return "?";
}

inline std::string to_string(MetricLocation l) {
    switch (l) {
        case MetricLocation::start:    return "start";
        case MetricLocation::mid:      return "mid";
        case MetricLocation::end:      return "end";
        case MetricLocation::averaged: return "averaged";
    }
    return "?";
}

inline std::string to_string(ResidualChoice r) {
    switch (r) {
        case ResidualChoice::p: return "p";
        case ResidualChoice::q: return "q";
        case ResidualChoice::r: return "r";
    }
    return "?";
}

namespace detail {

inline MetricKind metric_kind_from(const std::string& s, const std::string& path) {
    if (s == "l1") return MetricKind::l1;
    if (s == "l2") return MetricKind::l2;
    if (s == "cosine") return MetricKind::cosine;
    throw config_error(path + ": expected l1|l2|cosine, got '" + s + "'");
}

inline MetricLocation metric_location_from(const std::string& s, const std::string& path) {
    if (s == "start") return MetricLocation::start;
    if (s == "mid") return MetricLocation::mid;
    if (s == "end") return MetricLocation::end;
    if (s == "averaged") return MetricLocation::averaged;
    throw config_error(path + ": expected start|mid|end|averaged, got '" + s + "'");
}

inline ResidualChoice residual_from(const std::string& s, const std::string& path) {
    if (s == "p") return ResidualChoice::p;
    if (s == "q") return ResidualChoice::q;
    if (s == "r") return ResidualChoice::r;
    throw config_error(path + ": expected p|q|r, got '" + s + "'");
}

inline int int_from(const std::string& s, const std::string& path) {
    size_t pos = 0;
    int v      = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw config_error(path + ": expected integer, got '" + s + "'");
    }
    if (pos != s.size()) throw config_error(path + ": expected integer, got '" + s + "'");
    return v;
}

inline uint64_t uint64_from(const std::string& s, const std::string& path) {
    size_t pos  = 0;
    uint64_t v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw config_error(path + ": expected unsigned integer, got '" + s + "'");
    }
    if (pos != s.size()) throw config_error(path + ": expected unsigned integer, got '" + s + "'");
    return v;
}

inline double double_from(const std::string& s, const std::string& path) {
    size_t pos = 0;
    double v   = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw config_error(path + ": expected number, got '" + s + "'");
    }
    if (pos != s.size()) throw config_error(path + ": expected number, got '" + s + "'");
    return v;
}

inline bool bool_from(const std::string& s, const std::string& path) {
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw config_error(path + ": expected true|false, got '" + s + "'");
}

inline std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/*================================= parsing ================================*/

// Sectioned key = value text; '#' starts a comment; keys are reported with
// their full section.key path in errors.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw config_error("line " + std::to_string(lineno) + ": malformed section header");
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "sampler" && section != "cache" &&
                section != "moreg" && section != "run") {
                throw config_error(section + ": unknown section");
            }
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key   = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string path  = section.empty() ? key : section + "." + key;
        if (section.empty()) throw config_error(path + ": key outside any section");

        if (section == "model") {
            if (key == "layers")           cfg.model.layers = detail::int_from(value, path);
            else if (key == "channels")    cfg.model.channels = detail::int_from(value, path);
            else if (key == "heads")       cfg.model.heads = detail::int_from(value, path);
            else if (key == "frames")      cfg.model.frames = detail::int_from(value, path);
            else if (key == "tokens_per_frame") cfg.model.tokens_per_frame = detail::int_from(value, path);
            else if (key == "steps")       cfg.model.steps = detail::int_from(value, path);
            else if (key == "cond_tokens") cfg.model.cond_tokens = detail::int_from(value, path);
            else if (key == "seed")        cfg.model.seed = detail::uint64_from(value, path);
            else if (key == "t_embed_scale") cfg.model.t_embed_scale = detail::double_from(value, path);
            else throw config_error(path + ": unknown key");
        } else if (section == "sampler") {
            if (key == "steps")           cfg.sampler.steps = detail::int_from(value, path);
            else if (key == "beta_start") cfg.sampler.beta_start = detail::double_from(value, path);
            else if (key == "beta_end")   cfg.sampler.beta_end = detail::double_from(value, path);
            else throw config_error(path + ": unknown key");
        } else if (section == "cache") {
            if (key == "codebook")      cfg.codebook = value;
            else if (key == "metric")   cfg.metric.kind = detail::metric_kind_from(value, path);
            else if (key == "location") cfg.metric.location = detail::metric_location_from(value, path);
            else if (key == "residual") cfg.metric.residual = detail::residual_from(value, path);
            else throw config_error(path + ": unknown key");
        } else if (section == "moreg") {
            if (key == "enabled")         cfg.moreg.enabled = detail::bool_from(value, path);
            else if (key == "frame_step") cfg.moreg.frame_step = detail::int_from(value, path);
            else throw config_error(path + ": unknown key");
        } else {  // run
            if (key == "seeds") {
                cfg.seeds.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    cfg.seeds.push_back(detail::uint64_from(detail::trim(item), path));
                }
                if (cfg.seeds.empty()) throw config_error(path + ": expected at least one seed");
            } else if (key == "output_dir") {
                cfg.output_dir = value;
            } else {
                throw config_error(path + ": unknown key");
            }
        }
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/*=============================== serializing ==============================*/

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[model]\n";
    os << "layers = " << cfg.model.layers << "\n";
    os << "channels = " << cfg.model.channels << "\n";
    os << "heads = " << cfg.model.heads << "\n";
    os << "frames = " << cfg.model.frames << "\n";
    os << "tokens_per_frame = " << cfg.model.tokens_per_frame << "\n";
    os << "steps = " << cfg.model.steps << "\n";
    os << "cond_tokens = " << cfg.model.cond_tokens << "\n";
    os << "seed = " << cfg.model.seed << "\n";
    os << "t_embed_scale = " << detail::double_to_string(cfg.model.t_embed_scale) << "\n";
    os << "\n[sampler]\n";
    os << "steps = " << cfg.sampler.steps << "\n";
    os << "beta_start = " << detail::double_to_string(cfg.sampler.beta_start) << "\n";
    os << "beta_end = " << detail::double_to_string(cfg.sampler.beta_end) << "\n";
    os << "\n[cache]\n";
    os << "codebook = " << cfg.codebook << "\n";
    os << "metric = " << to_string(cfg.metric.kind) << "\n";
    os << "location = " << to_string(cfg.metric.location) << "\n";
    os << "residual = " << to_string(cfg.metric.residual) << "\n";
    os << "\n[moreg]\n";
    os << "enabled = " << (cfg.moreg.enabled ? "true" : "false") << "\n";
    os << "frame_step = " << cfg.moreg.frame_step << "\n";
    os << "\n[run]\n";
    os << "seeds = ";
    for (size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (i) os << ",";
        os << cfg.seeds[i];
    }
    os << "\n";
    os << "output_dir = " << cfg.output_dir << "\n";
    return os.str();
}

/*================================ validation ==============================*/

inline void validate_config(const ExperimentConfig& cfg) {
    try {
        cfg.model.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    try {
        cfg.sampler.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    if (cfg.sampler.steps != cfg.model.steps) {
        throw config_error("sampler.steps: must equal model.steps");
    }
    resolve_codebook(cfg.codebook).validate();
    if (cfg.moreg.frame_step < 1 || cfg.moreg.frame_step >= cfg.model.frames) {
        throw config_error("moreg.frame_step: must be in [1, model.frames)");
    }
    if (cfg.seeds.empty()) throw config_error("run.seeds: expected at least one seed");
    if (cfg.output_dir.empty()) throw config_error("run.output_dir: must not be empty");
}

}  // namespace adacache
