#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "codebook.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "motion.hpp"
#include "tensor.hpp"

namespace adacache {

/*============================== metric config =============================*/

enum class MetricKind { l1, l2, cosine };
enum class MetricLocation { start, mid, end, averaged };
enum class ResidualChoice { p, q, r };

struct MetricConfig {
    MetricKind kind         = MetricKind::l1;
    MetricLocation location = MetricLocation::mid;
    ResidualChoice residual = ResidualChoice::p;

    bool operator==(const MetricConfig&) const = default;
};

/*=============================== cache state ==============================*/

// Scheduler state for one generation run. One instance per run; the cached
// residuals are replaced wholesale at every computed step, which is what
// keeps the schedule common across all layers.
struct CacheState {
    std::vector<BlockResiduals> cached;
    bool has_cache         = false;
    int last_computed_step = -1;
    int current_rate       = 1;   // tau
    int steps_since_compute = 0;  // k, 0 <= k <= tau
    double last_metric = 0.0;     // c
    bool has_metric    = false;
    int metric_layer   = 0;  // -1 means averaged over all layers
    MetricConfig metric;
    MoRegConfig moreg;
    MotionState motion;
};

// Per-step decision record. metric/selected_rate are present only when a
// prior residual existed to measure against (absent on the bootstrap step).
struct CacheDecision {
    bool compute = false;
    int step     = 0;
    std::optional<double> metric;
    std::optional<int> selected_rate;
    std::optional<double> m;
    std::optional<double> mg;

    bool operator==(const CacheDecision&) const = default;
};

inline CacheState make_cache_state(int layers, MetricConfig metric = {}, MoRegConfig moreg = {}) {
    if (layers < 1) throw config_error("cache: layer count must be >= 1");
    CacheState st;
    st.metric = metric;
    st.moreg  = moreg;
    switch (metric.location) {
        case MetricLocation::start:    st.metric_layer = 0; break;
        case MetricLocation::mid:      st.metric_layer = layers / 2; break;
        case MetricLocation::end:      st.metric_layer = layers - 1; break;
        case MetricLocation::averaged: st.metric_layer = -1; break;
    }
    return st;
}

/*=============================== the metric ===============================*/

// Change between the last two computed residuals, normalized per element
// and divided by the step gap k.
inline double compute_metric(const Tensor& p_prev, const Tensor& p_curr, int k, MetricKind kind) {
    if (k < 1) throw std::invalid_argument("compute_metric: step gap must be >= 1");
    switch (kind) {
        case MetricKind::l1:
            return mean_abs_diff(p_prev, p_curr) / static_cast<double>(k);
        case MetricKind::l2:
            return std::sqrt(mean_sq_diff(p_prev, p_curr)) / static_cast<double>(k);
        case MetricKind::cosine:
            return (1.0 - cosine_similarity(p_prev, p_curr)) / static_cast<double>(k);
    }
    throw std::invalid_argument("compute_metric: unknown metric kind");
}

inline double compute_metric(const Tensor& p_prev, const Tensor& p_curr, int k) {
    return compute_metric(p_prev, p_curr, k, MetricKind::l1);
}

/*============================== the decision ==============================*/

// True on the bootstrap step (nothing cached) and whenever the schedule has
// run out (k reached tau).
inline bool should_compute(const CacheState& st, int t) {
    if (!st.has_cache) return true;
    return (t - st.last_computed_step) == st.current_rate;
}

// Bookkeeping for a step served from cache.
inline void mark_reused(CacheState& st, int t) {
    const int k = t - st.last_computed_step;
    if (!st.has_cache || k < 1 || k > st.current_rate) {
        throw std::logic_error("mark_reused: step outside the current schedule");
    }
    st.steps_since_compute = k;
}

namespace detail {

inline const Tensor& pick_residual(const BlockResiduals& r, ResidualChoice choice) {
    switch (choice) {
        case ResidualChoice::p: return r.p;
        case ResidualChoice::q: return r.q;
        case ResidualChoice::r: return r.r;
    }
    throw std::invalid_argument("pick_residual: unknown residual choice");
}

}  // namespace detail

// Refresh the cache with freshly computed residuals at step t: measure the
// metric against the previous cache (skipped on bootstrap, when there is
// nothing to measure against), apply motion regularization if enabled, pick
// the next rate from the codebook, and reset the schedule.
inline CacheDecision on_compute(CacheState& st, const std::vector<BlockResiduals>& fresh,
                                int t, const Codebook& cb) {
    const int layers = static_cast<int>(fresh.size());
    if (layers < 1) throw std::invalid_argument("on_compute: no residuals");
    if (st.metric_layer >= layers) {
        throw config_error("cache.location: metric layer out of range");
    }
    if (st.has_cache && static_cast<int>(st.cached.size()) != layers) {
        throw std::invalid_argument("on_compute: layer count changed mid-run");
    }

    CacheDecision d;
    d.compute = true;
    d.step    = t;

    if (st.has_cache) {
        const int k = t - st.last_computed_step;
        if (k < 1) throw std::invalid_argument("on_compute: step did not advance");

        double c;
        if (st.metric_layer < 0) {
            double acc = 0.0;
            for (int l = 0; l < layers; ++l) {
                acc += compute_metric(detail::pick_residual(st.cached[static_cast<size_t>(l)], st.metric.residual),
                                      detail::pick_residual(fresh[static_cast<size_t>(l)], st.metric.residual),
                                      k, st.metric.kind);
            }
            c = acc / layers;
        } else {
            c = compute_metric(detail::pick_residual(st.cached[static_cast<size_t>(st.metric_layer)], st.metric.residual),
                               detail::pick_residual(fresh[static_cast<size_t>(st.metric_layer)], st.metric.residual),
                               k, st.metric.kind);
        }

        if (st.moreg.enabled) {
            const int motion_layer = st.metric_layer < 0 ? layers / 2 : st.metric_layer;
            update_motion(st.motion,
                          detail::pick_residual(fresh[static_cast<size_t>(motion_layer)], st.metric.residual),
                          st.moreg.frame_step, t);
            c    = regularize(c, st.motion.m, st.motion.mg);
            d.m  = st.motion.m;
            d.mg = st.motion.mg;
        }

        st.last_metric = c;
        st.has_metric  = true;
        st.current_rate = lookup_rate(cb, c);
        d.metric        = c;
        d.selected_rate = st.current_rate;
    } else {
        // Bootstrap: no metric is computable from one sample; assume maximal
        // change and take the codebook's most conservative (catch-all) rate.
        st.current_rate = cb.min_rate();
    }

    st.cached              = fresh;
    st.has_cache           = true;
    st.last_computed_step  = t;
    st.steps_since_compute = 0;
    return d;
}

/*================================= replay =================================*/

// Drive the engine with a scripted per-step residual stream instead of live
// model outputs: one single-layer residual per step, decisions recorded as
// in a real run. Used to pin schedules against hand-simulated oracles.
inline std::vector<CacheDecision> replay_schedule(const std::vector<Tensor>& stream,
                                                  const Codebook& cb,
                                                  MetricKind kind = MetricKind::l1,
                                                  MoRegConfig moreg = {}) {
    cb.validate();
    MetricConfig mc;
    mc.kind     = kind;
    mc.location = MetricLocation::start;
    mc.residual = ResidualChoice::p;
    CacheState st = make_cache_state(1, mc, moreg);

    std::vector<CacheDecision> out;
    out.reserve(stream.size());
    for (size_t t = 0; t < stream.size(); ++t) {
        const int ti = static_cast<int>(t);
        if (should_compute(st, ti)) {
            BlockResiduals r;
            r.p                = stream[t];
            r.q                = Tensor(stream[t].shape, 0.0f);
            r.r                = Tensor(stream[t].shape, 0.0f);
            r.layer            = 0;
            r.computed_at_step = ti;
            out.push_back(on_compute(st, {r}, ti, cb));
        } else {
            mark_reused(st, ti);
            CacheDecision d;
            d.compute = false;
            d.step    = ti;
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace adacache
