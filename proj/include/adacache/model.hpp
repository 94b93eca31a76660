#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace adacache {

/*================================ config ==================================*/

struct ModelConfig {
    int layers           = 8;
    int channels         = 64;
    int heads            = 4;
    int frames           = 8;
    int tokens_per_frame = 16;
    int steps            = 30;
    int cond_tokens      = 4;
    uint64_t seed        = 0;
    // Strength of the per-step sinusoidal embedding added before layer 1.
    // Larger values make block inputs (and hence residuals) change faster
    // across steps.
    double t_embed_scale = 1.0;

    int tokens() const { return frames * tokens_per_frame; }

    void validate() const {
        if (layers < 1) throw std::invalid_argument("model.layers: must be >= 1");
        if (heads < 1) throw std::invalid_argument("model.heads: must be >= 1");
        if (channels < 1 || channels % heads != 0) {
            throw std::invalid_argument("model.channels: must be divisible by model.heads");
        }
        if (frames < 2) throw std::invalid_argument("model.frames: must be >= 2");
        if (tokens_per_frame < 1) throw std::invalid_argument("model.tokens_per_frame: must be >= 1");
        if (steps < 2) throw std::invalid_argument("model.steps: must be >= 2");
        if (cond_tokens < 1) throw std::invalid_argument("model.cond_tokens: must be >= 1");
    }

    bool operator==(const ModelConfig&) const = default;
};

/*================================= types ==================================*/

// The iteratively denoised tensor, shape [frames, tokens_per_frame, channels].
struct Latent {
    Tensor f;
    int step = 0;
};

// Residuals of one block at one step: p (spatio-temporal attention),
// q (cross-attention), r (MLP). These are the cached quantities.
struct BlockResiduals {
    Tensor p;
    Tensor q;
    Tensor r;
    int layer            = 0;
    int computed_at_step = 0;

    bool operator==(const BlockResiduals&) const = default;
};

struct AttentionWeights {
    Tensor wq, wk, wv, wo;  // [D, D] each
    Tensor norm_gain, norm_bias;
};

struct MlpWeights {
    Tensor w1, b1;  // [D, 4D], [4D]
    Tensor w2, b2;  // [4D, D], [D]
    Tensor norm_gain, norm_bias;
};

struct BlockWeights {
    AttentionWeights sta;
    AttentionWeights ca;
    MlpWeights mlp;
};

// Fully determined by (ModelConfig, seed); immutable after construction and
// shareable across concurrent runs.
struct Model {
    ModelConfig cfg;
    std::vector<BlockWeights> blocks;
    Tensor cond_embed;     // [cond_tokens, D]
    Tensor t_embed_table;  // [steps, D], sinusoidal
    Tensor head_gain, head_bias, head_w;  // final norm + output projection
};

/*=============================== init_model ===============================*/

namespace detail {

inline Tensor gaussian_tensor(gaussian_rng& rng, std::vector<int> shape, float std_dev) {
    Tensor t(std::move(shape));
    for (float& v : t.data) v = rng.next_gaussian() * std_dev;
    return t;
}

inline AttentionWeights init_attention(gaussian_rng& rng, int d) {
    const float s = 1.0f / std::sqrt(static_cast<float>(d));
    AttentionWeights w;
    w.wq        = gaussian_tensor(rng, {d, d}, s);
    w.wk        = gaussian_tensor(rng, {d, d}, s);
    w.wv        = gaussian_tensor(rng, {d, d}, s);
    w.wo        = gaussian_tensor(rng, {d, d}, s);
    w.norm_gain = Tensor({d}, 1.0f);
    w.norm_bias = Tensor({d}, 0.0f);
    return w;
}

inline MlpWeights init_mlp(gaussian_rng& rng, int d) {
    const float s = 1.0f / std::sqrt(static_cast<float>(d));
    MlpWeights w;
    w.w1        = gaussian_tensor(rng, {d, 4 * d}, s);
    w.b1        = Tensor({4 * d}, 0.0f);
    w.w2        = gaussian_tensor(rng, {4 * d, d}, s);
    w.b2        = Tensor({d}, 0.0f);
    w.norm_gain = Tensor({d}, 1.0f);
    w.norm_bias = Tensor({d}, 0.0f);
    return w;
}

inline Tensor sinusoidal_table(int steps, int d) {
    Tensor t({steps, d});
    for (int s = 0; s < steps; ++s) {
        float* row = t.data.data() + static_cast<size_t>(s) * d;
        for (int j = 0; j < d / 2; ++j) {
            const double freq = std::pow(10000.0, -2.0 * j / d);
            row[2 * j]     = static_cast<float>(std::sin(s * freq));
            row[2 * j + 1] = static_cast<float>(std::cos(s * freq));
        }
        if (d % 2 == 1) row[d - 1] = static_cast<float>(std::sin(s * std::pow(10000.0, -1.0)));
    }
    return t;
}

}  // namespace detail

inline Model init_model(const ModelConfig& cfg) {
    cfg.validate();
    const int d = cfg.channels;
    gaussian_rng rng(cfg.seed, /*stream=*/0);

    Model m;
    m.cfg = cfg;
    m.blocks.reserve(cfg.layers);
    for (int l = 0; l < cfg.layers; ++l) {
        BlockWeights bw;
        bw.sta = detail::init_attention(rng, d);
        bw.ca  = detail::init_attention(rng, d);
        bw.mlp = detail::init_mlp(rng, d);
        m.blocks.push_back(std::move(bw));
    }
    m.cond_embed    = detail::gaussian_tensor(rng, {cfg.cond_tokens, d}, 1.0f);
    m.t_embed_table = detail::sinusoidal_table(cfg.steps, d);
    m.head_gain     = Tensor({d}, 1.0f);
    m.head_bias     = Tensor({d}, 0.0f);
    m.head_w        = detail::gaussian_tensor(rng, {d, d}, 1.0f / std::sqrt(static_cast<float>(d)));
    return m;
}

/*============================== block forward =============================*/

namespace detail {

// Pre-norm attention element. cond == nullptr means self-attention over x.
inline Tensor attention_element(const AttentionWeights& w, const Tensor& x2d,
                                const Tensor* cond, int heads) {
    Tensor xn = layer_norm(x2d, w.norm_gain, w.norm_bias, 1e-5f);
    Tensor q  = matmul(xn, w.wq);
    const Tensor& kv_src = cond ? *cond : xn;
    Tensor k  = matmul(kv_src, w.wk);
    Tensor v  = matmul(kv_src, w.wv);
    Tensor a  = attention(q, k, v, heads);
    return matmul(a, w.wo);
}

inline Tensor mlp_element(const MlpWeights& w, const Tensor& x2d) {
    Tensor xn = layer_norm(x2d, w.norm_gain, w.norm_bias, 1e-5f);
    Tensor h  = matmul(xn, w.w1);
    for (int i = 0; i < h.shape[0]; ++i) {
        for (int j = 0; j < h.shape[1]; ++j) {
            h.data[static_cast<size_t>(i) * h.shape[1] + j] += w.b1.data[j];
        }
    }
    h = gelu(h);
    Tensor out = matmul(h, w.w2);
    for (int i = 0; i < out.shape[0]; ++i) {
        for (int j = 0; j < out.shape[1]; ++j) {
            out.data[static_cast<size_t>(i) * out.shape[1] + j] += w.b2.data[j];
        }
    }
    return out;
}

}  // namespace detail

// One transformer block. Fresh path computes
//   p = STA(f), f~ = f + p, q = CA(f~), f- = f~ + q, r = MLP(f-), out = f- + r
// and returns the residuals. Reuse path returns f + p + q + r from the given
// residuals without touching any compute kernel.
inline std::pair<Latent, BlockResiduals> block_forward(const Model& m, const Latent& f_in,
                                                       const Tensor& cond, int t, int l,
                                                       const BlockResiduals* reuse = nullptr) {
    if (l < 0 || l >= m.cfg.layers) {
        throw std::invalid_argument("block_forward: layer index out of range");
    }
    if (f_in.f.ndim() != 3) {
        throw std::invalid_argument("block_forward: latent must be [frames, tokens, channels]");
    }

    if (reuse) {
        if (!reuse->p.same_shape(f_in.f) || !reuse->q.same_shape(f_in.f) ||
            !reuse->r.same_shape(f_in.f)) {
            throw std::invalid_argument("block_forward: cached residual shape mismatch");
        }
        Latent out = f_in;
        add_inplace(out.f, reuse->p);
        add_inplace(out.f, reuse->q);
        add_inplace(out.f, reuse->r);
        BlockResiduals res = *reuse;
        return {std::move(out), std::move(res)};
    }

    const auto& bw = m.blocks[static_cast<size_t>(l)];
    const int d    = m.cfg.channels;
    const int n    = f_in.f.shape[0] * f_in.f.shape[1];
    if (f_in.f.shape[2] != d) {
        throw std::invalid_argument("block_forward: channel dimension mismatch");
    }
    if (cond.ndim() != 2 || cond.shape[1] != d) {
        throw std::invalid_argument("block_forward: cond must be [tokens, channels]");
    }

    const std::vector<int> shape3 = f_in.f.shape;
    Tensor x = f_in.f.reshaped({n, d});

    Tensor p = detail::attention_element(bw.sta, x, nullptr, m.cfg.heads);
    add_inplace(x, p);
    Tensor q = detail::attention_element(bw.ca, x, &cond, m.cfg.heads);
    add_inplace(x, q);
    Tensor r = detail::mlp_element(bw.mlp, x);
    add_inplace(x, r);

    Latent out;
    out.f    = x.reshaped(shape3);
    out.step = f_in.step;

    BlockResiduals res;
    res.p                = p.reshaped(shape3);
    res.q                = q.reshaped(shape3);
    res.r                = r.reshaped(shape3);
    res.layer            = l;
    res.computed_at_step = t;
    return {std::move(out), std::move(res)};
}

/*=============================== dit forward ==============================*/

// Per-layer reuse inputs: nullptr entries are computed fresh.
using ReuseDecisions = std::vector<const BlockResiduals*>;

inline ReuseDecisions all_compute_decisions(int layers) {
    return ReuseDecisions(static_cast<size_t>(layers), nullptr);
}

inline ReuseDecisions all_reuse_decisions(const std::vector<BlockResiduals>& cached) {
    ReuseDecisions d;
    d.reserve(cached.size());
    for (const auto& c : cached) d.push_back(&c);
    return d;
}

// Adds the timestep embedding, chains all blocks, applies the output head.
inline std::pair<Tensor, std::vector<BlockResiduals>> dit_forward(
    const Model& m, const Latent& f, const Tensor& cond, int t,
    const ReuseDecisions& decisions) {
    if (static_cast<int>(decisions.size()) != m.cfg.layers) {
        throw std::invalid_argument("dit_forward: decisions length must equal layer count");
    }
    if (t < 0 || t >= m.cfg.steps) {
        throw std::invalid_argument("dit_forward: step index out of range");
    }

    Latent cur = f;
    const int d   = m.cfg.channels;
    const float s = static_cast<float>(m.cfg.t_embed_scale);
    const float* emb = m.t_embed_table.data.data() + static_cast<size_t>(t) * d;
    for (size_t i = 0; i < cur.f.data.size(); ++i) {
        cur.f.data[i] += s * emb[i % d];
    }

    std::vector<BlockResiduals> residuals;
    residuals.reserve(decisions.size());
    for (int l = 0; l < m.cfg.layers; ++l) {
        auto [next, res] = block_forward(m, cur, cond, t, l, decisions[static_cast<size_t>(l)]);
        cur = std::move(next);
        residuals.push_back(std::move(res));
    }

    const int n = cur.f.shape[0] * cur.f.shape[1];
    Tensor x    = cur.f.reshaped({n, d});
    x           = layer_norm(x, m.head_gain, m.head_bias, 1e-5f);
    Tensor out  = matmul(x, m.head_w);
    return {out.reshaped(f.f.shape), std::move(residuals)};
}

/*================================= flops ==================================*/

// Multiply-accumulate counts of the dense matmuls only (projections, q k^T,
// attn x v, MLP); norms, softmax and the output head are excluded. Every
// layer of every step costs the same.
inline uint64_t flops_per_step(const ModelConfig& cfg, bool cached) {
    cfg.validate();
    const uint64_t ns = static_cast<uint64_t>(cfg.tokens());
    const uint64_t d  = static_cast<uint64_t>(cfg.channels);
    const uint64_t ct = static_cast<uint64_t>(cfg.cond_tokens);
    const uint64_t L  = static_cast<uint64_t>(cfg.layers);

    if (cached) {
        return L * 3 * ns * d;  // residual additions only
    }
    const uint64_t sta = 4 * ns * d * d + 2 * ns * ns * d;
    const uint64_t ca  = 2 * ns * d * d + 2 * ct * d * d + 2 * ns * ct * d;
    const uint64_t mlp = 8 * ns * d * d;
    return L * (sta + ca + mlp);
}

}  // namespace adacache
