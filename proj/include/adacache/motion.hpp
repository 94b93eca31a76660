#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tensor.hpp"

namespace adacache {

/*============================ motion regularizer ==========================*/

struct MoRegConfig {
    bool enabled   = false;
    int frame_step = 1;

    bool operator==(const MoRegConfig&) const = default;
};

// Motion estimate carried across computed steps. Updated only when fresh
// residuals exist; between computes the last values persist.
struct MotionState {
    double m  = 0.0;  // latest motion-score
    double mg = 0.0;  // latest motion-gradient
    bool has_last   = false;
    double last_m   = 0.0;
    int last_m_step = 0;

    bool operator==(const MotionState&) const = default;
};

// Mean absolute difference between frame slices offset by i:
// mean |p[i:N] - p[0:N-i]| over the overlapping frames.
inline double motion_score(const Tensor& p, int i) {
    if (p.ndim() != 3) {
        throw std::invalid_argument("motion_score: expects [frames, tokens, channels]");
    }
    const int n = p.shape[0];
    if (i < 1 || i >= n) {
        throw std::invalid_argument("motion_score: frame step must be in [1, frames)");
    }
    const size_t frame = static_cast<size_t>(p.shape[1]) * p.shape[2];
    double acc = 0.0;
    for (int f = 0; f + i < n; ++f) {
        const float* a = p.data.data() + static_cast<size_t>(f + i) * frame;
        const float* b = p.data.data() + static_cast<size_t>(f) * frame;
        for (size_t j = 0; j < frame; ++j) {
            acc += std::fabs(static_cast<double>(a[j]) - static_cast<double>(b[j]));
        }
    }
    return acc / (static_cast<double>(n - i) * frame);
}

// Finite difference of the motion-score across a gap of k steps; may be
// negative when motion collapses.
inline double motion_gradient(double m_curr, double m_prev, int k) {
    if (k < 1) throw std::invalid_argument("motion_gradient: step gap must be >= 1");
    return (m_curr - m_prev) / static_cast<double>(k);
}

// Scales the distance metric by the predicted motion; a negative (m + mg)
// is clamped to 0, which selects the largest cache-rate downstream.
inline double regularize(double c, double m, double mg) {
    return c * std::max(0.0, m + mg);
}

// Measure a fresh residual at computed step t. The first measurement has no
// predecessor, so its gradient is 0 by definition.
inline void update_motion(MotionState& st, const Tensor& p, int frame_step, int t) {
    const double m_new = motion_score(p, frame_step);
    st.mg = st.has_last ? motion_gradient(m_new, st.last_m, t - st.last_m_step) : 0.0;
    st.m  = m_new;
    st.last_m      = m_new;
    st.last_m_step = t;
    st.has_last    = true;
}

}  // namespace adacache
