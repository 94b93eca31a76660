#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "io.hpp"
#include "report.hpp"
#include "sampler.hpp"

namespace adacache {

/*=============================== experiments ==============================*/

struct SeedResult {
    uint64_t seed = 0;
    RunTrace trace;
    FlopsReport flops;
    Latent final_latent;
};

inline constexpr int default_hist_bins = 10;

inline std::string flops_report_json(const FlopsReport& r, uint64_t seed) {
    nlohmann::ordered_json j;
    j["seed"]             = seed;
    j["computed_steps"]   = r.computed_steps;
    j["cached_steps"]     = r.cached_steps;
    j["total_flops"]      = r.total_flops;
    j["baseline_flops"]   = r.baseline_flops;
    j["speedup_estimate"] = r.speedup_estimate;
    return j.dump(2) + "\n";
}

// One denoising run per seed; artifacts land in output_dir as
// trace_<seed>.jsonl, latent_<seed>.bin, hist_metric_<seed>.csv (plus
// hist_m/hist_mg when MoReg is on) and report_<seed>.json. Rerunning with
// the same config rewrites byte-identical files.
inline std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const Codebook cb = resolve_codebook(cfg.codebook);
    const Model model = init_model(cfg.model);

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw io_error("cannot create output dir '" + cfg.output_dir + "': " + ec.message());
    }

    std::vector<SeedResult> results;
    results.reserve(cfg.seeds.size());
    for (uint64_t seed : cfg.seeds) {
        DenoiseResult run = denoise(model, seed, cb, cfg.moreg, cfg.sampler, cfg.metric);

        SeedResult sr;
        sr.seed         = seed;
        sr.trace        = std::move(run.trace);
        sr.flops        = make_flops_report(sr.trace, cfg.model);
        sr.final_latent = std::move(run.final_latent);

        const std::string tag = std::to_string(seed);
        const std::filesystem::path dir(cfg.output_dir);
        write_trace((dir / ("trace_" + tag + ".jsonl")).string(), sr.trace);
        write_latent((dir / ("latent_" + tag + ".bin")).string(), sr.final_latent.f);
        write_text_file((dir / ("hist_metric_" + tag + ".csv")).string(),
                        histogram_csv(sr.trace, HistField::metric, default_hist_bins));
        if (cfg.moreg.enabled) {
            write_text_file((dir / ("hist_m_" + tag + ".csv")).string(),
                            histogram_csv(sr.trace, HistField::m, default_hist_bins));
            write_text_file((dir / ("hist_mg_" + tag + ".csv")).string(),
                            histogram_csv(sr.trace, HistField::mg, default_hist_bins));
        }
        write_text_file((dir / ("report_" + tag + ".json")).string(),
                        flops_report_json(sr.flops, seed));

        results.push_back(std::move(sr));
    }
    return results;
}

}  // namespace adacache
