// Command-line front end: run experiments, compare latents, export
// histograms, and list the built-in codebooks.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <adacache/adacache.hpp>

namespace {

using namespace adacache;

struct RunOptions {
    std::string config_path;
    std::string codebook;
    std::string out_dir;
    std::optional<uint64_t> seed;
    std::optional<int> steps;
    bool moreg = false;
};

int cmd_run(const RunOptions& opt) {
    ExperimentConfig cfg;
    if (!opt.config_path.empty()) cfg = parse_config_file(opt.config_path);
    if (!opt.codebook.empty()) cfg.codebook = opt.codebook;
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    if (opt.seed) cfg.seeds = {*opt.seed};
    if (opt.steps) {
        cfg.model.steps   = *opt.steps;
        cfg.sampler.steps = *opt.steps;
    }
    if (opt.moreg) cfg.moreg.enabled = true;

    const auto results = run_experiment(cfg);
    for (const auto& res : results) {
        std::printf("seed %llu: computed %d/%d steps, speedup %.5f\n",
                    static_cast<unsigned long long>(res.seed), res.flops.computed_steps,
                    res.flops.computed_steps + res.flops.cached_steps,
                    res.flops.speedup_estimate);
    }
    std::printf("artifacts written to %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
    Latent a, b;
    a.f = read_latent(path_a);
    b.f = read_latent(path_b);
    const ComparisonReport rep = compare_runs(a, b);
    std::printf("psnr_db %s\n", detail::double_to_string(rep.psnr).c_str());
    std::printf("mean_abs_err %s\n", detail::double_to_string(rep.mean_abs_err).c_str());
    for (size_t i = 0; i < rep.per_frame_psnr.size(); ++i) {
        std::printf("frame %zu psnr_db %s\n", i,
                    detail::double_to_string(rep.per_frame_psnr[i]).c_str());
    }
    return 0;
}

int cmd_hist(const std::string& trace_path, const std::string& field, int bins,
             const std::string& out_path) {
    const RunTrace trace  = read_trace(trace_path);
    const std::string csv = histogram_csv(trace, hist_field_from(field), bins);
    if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        write_text_file(out_path, csv);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_presets() {
    for (const auto& [name, cb] : codebook_presets()) {
        std::printf("%-12s %s\n", name.c_str(), codebook_to_string(cb).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive residual-caching denoiser harness"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "execute an experiment and write artifacts");
    run->add_option("--config", run_opt.config_path, "experiment config file (INI)");
    run->add_option("--codebook", run_opt.codebook, "codebook preset name or inline thr:rate list");
    run->add_option("--seed", run_opt.seed, "run a single seed instead of the configured list");
    run->add_option("--steps", run_opt.steps, "override the denoising step count");
    run->add_option("--out", run_opt.out_dir, "output directory for artifacts");
    run->add_flag("--moreg", run_opt.moreg, "enable motion regularization");

    std::string cmp_a, cmp_b;
    auto* compare = app.add_subcommand("compare", "compare two latent files");
    compare->add_option("a", cmp_a, "reference latent file")->required();
    compare->add_option("b", cmp_b, "candidate latent file")->required();

    std::string hist_trace, hist_field = "metric", hist_out;
    int hist_bins = default_hist_bins;
    auto* hist = app.add_subcommand("hist", "export a histogram CSV from a trace");
    hist->add_option("trace", hist_trace, "trace file (JSONL)")->required();
    hist->add_option("--field", hist_field, "metric, m, or mg");
    hist->add_option("--bins", hist_bins, "histogram bin count");
    hist->add_option("--out", hist_out, "output CSV path (default: stdout)");

    auto* presets = app.add_subcommand("presets", "list built-in codebooks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b);
        if (hist->parsed()) return cmd_hist(hist_trace, hist_field, hist_bins, hist_out);
        if (presets->parsed()) return cmd_presets();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
