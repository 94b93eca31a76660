#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cache.hpp"
#include "codebook.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace adacache {

/*============================ sampler schedule ============================*/

struct SamplerConfig {
    int steps         = 30;
    double beta_start = 1e-4;
    double beta_end   = 2e-2;

    void validate() const {
        if (steps < 1) throw std::invalid_argument("sampler.steps: must be >= 1");
        if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0)) {
            throw std::invalid_argument("sampler.schedule: need 0 < beta_start < beta_end < 1");
        }
    }

    bool operator==(const SamplerConfig&) const = default;
};

// Cumulative products of (1 - beta) over a linear beta schedule.
inline std::vector<double> alpha_bars(const SamplerConfig& cfg) {
    cfg.validate();
    std::vector<double> ab(static_cast<size_t>(cfg.steps));
    double prod = 1.0;
    for (int i = 0; i < cfg.steps; ++i) {
        const double beta = cfg.steps == 1
            ? cfg.beta_start
            : cfg.beta_start + (cfg.beta_end - cfg.beta_start) * i / (cfg.steps - 1);
        prod *= 1.0 - beta;
        ab[static_cast<size_t>(i)] = prod;
    }
    return ab;
}

/*=============================== step update ==============================*/

// Deterministic x0-prediction update (eta = 0). t runs from steps-1 down to
// 0 over a run; t = 0 produces the final latent (alpha-bar before the first
// step is 1).
inline Latent step_update(const Latent& f, const Tensor& noise_pred, int t,
                          const SamplerConfig& cfg) {
    if (t < 0 || t >= cfg.steps) {
        throw std::invalid_argument("step_update: step index out of range");
    }
    check_same_shape(f.f, noise_pred, "step_update");
    const std::vector<double> ab = alpha_bars(cfg);

    const double a    = ab[static_cast<size_t>(t)];
    const double ap   = t > 0 ? ab[static_cast<size_t>(t - 1)] : 1.0;
    const double sa   = std::sqrt(a);
    const double sna  = std::sqrt(1.0 - a);
    const double sap  = std::sqrt(ap);
    const double snap = std::sqrt(1.0 - ap);

    Latent out = f;
    for (size_t i = 0; i < out.f.data.size(); ++i) {
        const double x  = f.f.data[i];
        const double e  = noise_pred.data[i];
        const double x0 = (x - sna * e) / sa;
        out.f.data[i]   = static_cast<float>(sap * x0 + snap * e);
    }
    out.step = f.step + 1;
    return out;
}

/*================================= trace ==================================*/

struct StepRecord {
    int step      = 0;
    bool computed = false;
    std::optional<double> metric;
    std::optional<int> rate;
    std::optional<double> m;
    std::optional<double> mg;
    uint64_t flops = 0;

    bool operator==(const StepRecord&) const = default;
};

struct RunTrace {
    std::vector<StepRecord> steps;

    int computed_steps() const {
        int n = 0;
        for (const auto& r : steps) n += r.computed ? 1 : 0;
        return n;
    }
    uint64_t total_flops() const {
        uint64_t n = 0;
        for (const auto& r : steps) n += r.flops;
        return n;
    }

    bool operator==(const RunTrace&) const = default;
};

/*================================ denoise =================================*/

struct DenoiseResult {
    Latent final_latent;
    RunTrace trace;
};

namespace detail {

inline Latent initial_latent(const ModelConfig& cfg, uint64_t seed) {
    gaussian_rng rng(seed, /*stream=*/1);
    Latent f;
    f.f = Tensor({cfg.frames, cfg.tokens_per_frame, cfg.channels});
    for (float& v : f.f.data) v = rng.next_gaussian();
    f.step = 0;
    return f;
}

}  // namespace detail

// Full caching run: every step consults the engine; computed steps refresh
// the cache, the rest reuse it. The denoising update itself runs at every
// step regardless.
inline DenoiseResult denoise(const Model& model, uint64_t seed, const Codebook& cb,
                             MoRegConfig moreg, const SamplerConfig& scfg,
                             MetricConfig mcfg = {}) {
    scfg.validate();
    cb.validate();
    if (scfg.steps != model.cfg.steps) {
        throw std::invalid_argument("sampler.steps: must equal model.steps");
    }
    const int T = scfg.steps;
    const uint64_t full_cost   = flops_per_step(model.cfg, false);
    const uint64_t cached_cost = flops_per_step(model.cfg, true);

    Latent f      = detail::initial_latent(model.cfg, seed);
    CacheState st = make_cache_state(model.cfg.layers, mcfg, moreg);

    DenoiseResult out;
    out.trace.steps.reserve(static_cast<size_t>(T));
    for (int s = 0; s < T; ++s) {
        StepRecord rec;
        rec.step     = s;
        rec.computed = should_compute(st, s);

        Tensor eps;
        if (rec.computed) {
            auto [e, residuals] =
                dit_forward(model, f, model.cond_embed, s, all_compute_decisions(model.cfg.layers));
            eps = std::move(e);
            const CacheDecision d = on_compute(st, residuals, s, cb);
            rec.metric = d.metric;
            rec.rate   = d.selected_rate;
            rec.m      = d.m;
            rec.mg     = d.mg;
            rec.flops  = full_cost;
        } else {
            auto [e, residuals] =
                dit_forward(model, f, model.cond_embed, s, all_reuse_decisions(st.cached));
            eps = std::move(e);
            mark_reused(st, s);
            rec.flops = cached_cost;
        }
        out.trace.steps.push_back(rec);

        f = step_update(f, eps, T - 1 - s, scfg);
    }
    out.final_latent = std::move(f);
    return out;
}

// Reference loop with no cache engine at all: every step computes fresh.
inline DenoiseResult denoise_baseline(const Model& model, uint64_t seed,
                                      const SamplerConfig& scfg) {
    scfg.validate();
    if (scfg.steps != model.cfg.steps) {
        throw std::invalid_argument("sampler.steps: must equal model.steps");
    }
    const int T              = scfg.steps;
    const uint64_t full_cost = flops_per_step(model.cfg, false);

    Latent f = detail::initial_latent(model.cfg, seed);
    DenoiseResult out;
    out.trace.steps.reserve(static_cast<size_t>(T));
    for (int s = 0; s < T; ++s) {
        auto [eps, residuals] =
            dit_forward(model, f, model.cond_embed, s, all_compute_decisions(model.cfg.layers));
        StepRecord rec;
        rec.step     = s;
        rec.computed = true;
        rec.flops    = full_cost;
        out.trace.steps.push_back(rec);
        f = step_update(f, eps, T - 1 - s, scfg);
    }
    out.final_latent = std::move(f);
    return out;
}

}  // namespace adacache
