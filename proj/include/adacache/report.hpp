#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "format.hpp"
#include "model.hpp"
#include "sampler.hpp"
#include "tensor.hpp"

namespace adacache {

/*============================== flops report ==============================*/

struct FlopsReport {
    uint64_t total_flops    = 0;
    int computed_steps      = 0;
    int cached_steps        = 0;
    uint64_t baseline_flops = 0;
    double speedup_estimate = 1.0;

    bool operator==(const FlopsReport&) const = default;
};

inline FlopsReport make_flops_report(const RunTrace& trace, const ModelConfig& cfg) {
    FlopsReport r;
    r.total_flops    = trace.total_flops();
    r.computed_steps = trace.computed_steps();
    r.cached_steps   = static_cast<int>(trace.steps.size()) - r.computed_steps;
    r.baseline_flops = static_cast<uint64_t>(trace.steps.size()) * flops_per_step(cfg, false);
    r.speedup_estimate =
        static_cast<double>(r.baseline_flops) / static_cast<double>(r.total_flops);
    return r;
}

/*============================ comparison report ===========================*/

struct ComparisonReport {
    double psnr         = 0.0;  // dB; +infinity iff identical
    double mean_abs_err = 0.0;
    std::vector<double> per_frame_psnr;
};

namespace detail {

inline double psnr_from(double range, double mse) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    if (range <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(range * range / mse);
}

}  // namespace detail

// PSNR over the dynamic range of the reference a, plus elementwise MAE.
// Per-frame rows reuse the reference's global range so frames stay
// comparable with each other.
inline ComparisonReport compare_runs(const Latent& a, const Latent& b) {
    check_same_shape(a.f, b.f, "compare_runs");
    const double range = static_cast<double>(max_value(a.f)) - static_cast<double>(min_value(a.f));

    ComparisonReport rep;
    rep.mean_abs_err = mean_abs_diff(a.f, b.f);
    rep.psnr         = detail::psnr_from(range, mean_sq_diff(a.f, b.f));

    if (a.f.ndim() == 3) {
        const int frames   = a.f.shape[0];
        const size_t chunk = a.f.data.size() / static_cast<size_t>(frames);
        rep.per_frame_psnr.reserve(static_cast<size_t>(frames));
        for (int n = 0; n < frames; ++n) {
            double mse = 0.0;
            for (size_t i = 0; i < chunk; ++i) {
                const size_t at = static_cast<size_t>(n) * chunk + i;
                const double d  = static_cast<double>(a.f.data[at]) - static_cast<double>(b.f.data[at]);
                mse += d * d;
            }
            mse /= static_cast<double>(chunk);
            rep.per_frame_psnr.push_back(detail::psnr_from(range, mse));
        }
    }
    return rep;
}

/*=============================== histograms ===============================*/

enum class HistField { metric, m, mg };

inline std::string to_string(HistField f) {
    switch (f) {
        case HistField::metric: return "metric";
        case HistField::m:      return "m";
        case HistField::mg:     return "mg";
    }
    return "?";
}

inline HistField hist_field_from(const std::string& s) {
    if (s == "metric") return HistField::metric;
    if (s == "m") return HistField::m;
    if (s == "mg") return HistField::mg;
    throw std::invalid_argument("hist field: expected metric|m|mg, got '" + s + "'");
}

namespace detail {

inline std::string csv_num(double v) { return double_to_string(v); }

}  // namespace detail

// Per-step series of one trace field followed by an equal-width binned
// histogram. Records that do not carry the field are skipped; if none
// carry it, the artifact is the series header alone. Identical values
// collapse to a single bin.
inline std::string histogram_csv(const RunTrace& trace, HistField field, int bins) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");

    std::vector<std::pair<int, double>> series;
    for (const auto& rec : trace.steps) {
        const std::optional<double>& v = field == HistField::metric ? rec.metric
                                       : field == HistField::m      ? rec.m
                                                                    : rec.mg;
        if (v) series.emplace_back(rec.step, *v);
    }

    std::string out = "step,value\n";
    if (series.empty()) return out;
    for (const auto& [step, v] : series) {
        out += std::to_string(step) + "," + detail::csv_num(v) + "\n";
    }

    double lo = series.front().second, hi = series.front().second;
    for (const auto& [step, v] : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    out += "\nbin_start,bin_end,count\n";
    if (lo == hi) {
        out += detail::csv_num(lo) + "," + detail::csv_num(hi) + "," +
               std::to_string(series.size()) + "\n";
        return out;
    }
    const double width = (hi - lo) / bins;
    std::vector<size_t> counts(static_cast<size_t>(bins), 0);
    for (const auto& [step, v] : series) {
        int idx = static_cast<int>((v - lo) / width);
        idx     = std::min(idx, bins - 1);
        counts[static_cast<size_t>(idx)]++;
    }
    for (int i = 0; i < bins; ++i) {
        out += detail::csv_num(lo + width * i) + "," + detail::csv_num(lo + width * (i + 1)) +
               "," + std::to_string(counts[static_cast<size_t>(i)]) + "\n";
    }
    return out;
}

}  // namespace adacache
