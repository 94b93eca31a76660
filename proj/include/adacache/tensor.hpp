#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace adacache {

/*================================ Tensor =================================*/

// Dense row-major float tensor. All kernels below are pure functions over
// immutable inputs (32-bit storage, 64-bit accumulation in reductions) and
// are safe to call concurrently.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> s, float fill = 0.0f) : shape(std::move(s)) {
        data.assign(numel_of(shape), fill);
    }
    Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape)) {
            throw std::invalid_argument("tensor: data length does not match shape");
        }
    }

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) {
            if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
            n *= static_cast<size_t>(d);
        }
        return n;
    }

    size_t numel() const { return data.size(); }
    int ndim() const { return static_cast<int>(shape.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    Tensor reshaped(std::vector<int> s) const {
        if (numel_of(s) != data.size()) {
            throw std::invalid_argument("reshape: element count mismatch");
        }
        Tensor out;
        out.shape = std::move(s);
        out.data  = data;
        return out;
    }

    bool all_finite() const {
        for (float v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool operator==(const Tensor& o) const = default;
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string r = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) r += ",";
        r += std::to_string(s[i]);
    }
    return r + "]";
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape) + " vs " + shape_str(b.shape));
    }
}

/*============================ kernel counters =============================*/

// Per-thread invocation counts, used by tests to assert that reuse paths
// never touch the compute kernels.
struct KernelCounters {
    uint64_t matmul     = 0;
    uint64_t softmax    = 0;
    uint64_t layer_norm = 0;
    uint64_t attention  = 0;
};

inline KernelCounters& kernel_counters() {
    thread_local KernelCounters counters;
    return counters;
}

inline void reset_kernel_counters() { kernel_counters() = KernelCounters{}; }

/*=============================== elementwise ==============================*/

inline Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

inline void add_inplace(Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

inline Tensor scale(const Tensor& a, float s) {
    Tensor out = a;
    for (float& v : out.data) v *= s;
    return out;
}

/*=============================== reductions ===============================*/

// 64-bit accumulation throughout; these back the cache metric, the motion
// score and the comparison reports.

inline double mean_abs_diff(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mean_abs_diff");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        acc += std::fabs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
    }
    return acc / static_cast<double>(a.data.size());
}

inline double mean_sq_diff(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mean_sq_diff");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

// 1 for identical directions, 0 for orthogonal. Two zero tensors count as
// identical; a single zero tensor as maximally distant.
inline double cosine_similarity(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "cosine_similarity");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double x = a.data[i], y = b.data[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 1.0 : 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline float min_value(const Tensor& a) {
    return *std::min_element(a.data.begin(), a.data.end());
}

inline float max_value(const Tensor& a) {
    return *std::max_element(a.data.begin(), a.data.end());
}

/*================================= matmul =================================*/

// [m,k] x [k,n] -> [m,n], double accumulators per output row.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2) {
        throw std::invalid_argument("matmul: expects 2-d tensors");
    }
    if (a.shape[1] != b.shape[0]) {
        throw std::invalid_argument("matmul: inner dimension mismatch " +
                                    shape_str(a.shape) + " x " + shape_str(b.shape));
    }
    kernel_counters().matmul++;
    const int m = a.shape[0], k = a.shape[1], n = b.shape[1];
    Tensor out({m, n});
    std::vector<double> acc(static_cast<size_t>(n));
    for (int i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* arow = a.data.data() + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av    = arow[p];
            const float* brow  = b.data.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) acc[j] += av * brow[j];
        }
        float* orow = out.data.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) orow[j] = static_cast<float>(acc[j]);
    }
    return out;
}

/*================================= softmax ================================*/

// Max-subtraction keeps exp() in range for any finite input; row sums are
// accumulated in double.
inline Tensor softmax(const Tensor& x, int axis) {
    if (axis < 0 || axis >= x.ndim()) {
        throw std::invalid_argument("softmax: axis " + std::to_string(axis) +
                                    " invalid for shape " + shape_str(x.shape));
    }
    kernel_counters().softmax++;
    const int n = x.shape[axis];
    size_t inner = 1;
    for (int d = axis + 1; d < x.ndim(); ++d) inner *= x.shape[d];
    size_t outer = x.numel() / (inner * n);

    Tensor out = x;
    for (size_t o = 0; o < outer; ++o) {
        for (size_t in = 0; in < inner; ++in) {
            float* base = out.data.data() + o * n * inner + in;
            float mx = base[0];
            for (int i = 1; i < n; ++i) mx = std::max(mx, base[i * inner]);
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                float e = std::exp(base[i * inner] - mx);
                base[i * inner] = e;
                sum += e;
            }
            for (int i = 0; i < n; ++i) {
                base[i * inner] = static_cast<float>(base[i * inner] / sum);
            }
        }
    }
    return out;
}

/*=============================== layer norm ===============================*/

// Normalizes the last dimension: (x - mean) / sqrt(var + eps) * gain + bias.
// Mean and population variance accumulate in double.
inline Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps) {
    const int d = x.shape.empty() ? 0 : x.shape.back();
    if (gain.ndim() != 1 || bias.ndim() != 1 || gain.shape[0] != d || bias.shape[0] != d) {
        throw std::invalid_argument("layer_norm: gain/bias must match last dimension " +
                                    std::to_string(d));
    }
    if (!(eps > 0.0f)) {
        throw std::invalid_argument("layer_norm: eps must be positive");
    }
    kernel_counters().layer_norm++;
    Tensor out = x;
    const size_t rows = x.numel() / d;
    for (size_t r = 0; r < rows; ++r) {
        float* row = out.data.data() + r * d;
        double mean = 0.0;
        for (int i = 0; i < d; ++i) mean += row[i];
        mean /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) {
            double dv = row[i] - mean;
            var += dv * dv;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        for (int i = 0; i < d; ++i) {
            row[i] = static_cast<float>((row[i] - mean) * inv) * gain.data[i] + bias.data[i];
        }
    }
    return out;
}

/*=============================== attention ================================*/

// Multi-head scaled dot-product attention on [tokens, channels] inputs:
// per head, softmax(q k^T / sqrt(d_head)) v. Rows of the output are convex
// combinations of v rows within each head.
inline Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads) {
    if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2) {
        throw std::invalid_argument("attention: expects 2-d [tokens, channels] tensors");
    }
    const int d = q.shape[1];
    if (k.shape[1] != d || v.shape[1] != d) {
        throw std::invalid_argument("attention: channel dimension mismatch");
    }
    if (heads < 1 || d % heads != 0) {
        throw std::invalid_argument("attention: channels " + std::to_string(d) +
                                    " not divisible by heads " + std::to_string(heads));
    }
    if (k.shape[0] != v.shape[0]) {
        throw std::invalid_argument("attention: k/v token counts differ");
    }
    kernel_counters().attention++;
    const int tq = q.shape[0], tk = k.shape[0];
    const int dh = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor out({tq, d});
    std::vector<float> logits(static_cast<size_t>(tk));
    std::vector<double> acc(static_cast<size_t>(dh));
    for (int h = 0; h < heads; ++h) {
        const int off = h * dh;
        for (int i = 0; i < tq; ++i) {
            const float* qrow = q.data.data() + static_cast<size_t>(i) * d + off;
            float mx = -std::numeric_limits<float>::infinity();
            for (int j = 0; j < tk; ++j) {
                const float* krow = k.data.data() + static_cast<size_t>(j) * d + off;
                double dot = 0.0;
                for (int c = 0; c < dh; ++c) dot += static_cast<double>(qrow[c]) * krow[c];
                logits[j] = static_cast<float>(dot * inv_sqrt);
                mx = std::max(mx, logits[j]);
            }
            double sum = 0.0;
            for (int j = 0; j < tk; ++j) {
                logits[j] = std::exp(logits[j] - mx);
                sum += logits[j];
            }
            const double inv = 1.0 / sum;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int j = 0; j < tk; ++j) {
                const double w     = logits[j] * inv;
                const float* vrow  = v.data.data() + static_cast<size_t>(j) * d + off;
                for (int c = 0; c < dh; ++c) acc[c] += w * vrow[c];
            }
            float* orow = out.data.data() + static_cast<size_t>(i) * d + off;
            for (int c = 0; c < dh; ++c) orow[c] = static_cast<float>(acc[c]);
        }
    }
    return out;
}

inline Tensor gelu(const Tensor& x) {
    Tensor out = x;
    for (float& v : out.data) {
        double z = v;
        v = static_cast<float>(0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0))));
    }
    return out;
}

}  // namespace adacache
