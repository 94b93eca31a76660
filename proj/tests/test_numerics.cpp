#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <adacache/rng.hpp>
#include <adacache/tensor.hpp>

#include "oracles.hpp"

using namespace adacache;

namespace {

Tensor random_tensor(std::vector<int> shape, uint32_t seed, float scale = 1.0f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Tensor t(std::move(shape));
    for (float& v : t.data) v = dist(rng) * scale;
    return t;
}

}  // namespace

TEST_CASE("tensor construction validates shape against data") {
    REQUIRE_THROWS_AS(Tensor({2, 3}, std::vector<float>(5, 0.0f)), std::invalid_argument);
    REQUIRE_THROWS_AS(Tensor({2, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(Tensor({-1, 4}), std::invalid_argument);

    Tensor t({2, 3}, 1.5f);
    REQUIRE(t.numel() == 6);
    REQUIRE(t.ndim() == 2);
    for (float v : t.data) REQUIRE(v == 1.5f);
}

TEST_CASE("tensor reshape preserves data and checks element count") {
    Tensor t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
    Tensor r = t.reshaped({3, 2});
    REQUIRE(r.shape == std::vector<int>{3, 2});
    REQUIRE(r.data == t.data);
    REQUIRE_THROWS_AS(t.reshaped({4, 2}), std::invalid_argument);
}

TEST_CASE("elementwise helpers require matching shapes") {
    Tensor a({2, 2}, 1.0f), b({4}, 1.0f);
    REQUIRE_THROWS_AS(add(a, b), std::invalid_argument);
    REQUIRE_THROWS_AS(sub(a, b), std::invalid_argument);
    REQUIRE_THROWS_AS(mean_abs_diff(a, b), std::invalid_argument);

    Tensor c = add(a, scale(a, 2.0f));
    for (float v : c.data) REQUIRE(v == 3.0f);
}

TEST_CASE("softmax of constants is uniform") {
    Tensor x({4}, std::vector<float>{0, 0, 0, 0});
    Tensor y = softmax(x, 0);
    for (float v : y.data) REQUIRE(v == Catch::Approx(0.25).margin(1e-7));
}

TEST_CASE("softmax stays finite under large logit gaps") {
    Tensor x({2}, std::vector<float>{3.0f, 1003.0f});
    Tensor y = softmax(x, 0);
    REQUIRE(y.all_finite());
    REQUIRE(y.data[0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(y.data[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("softmax matches the direct formula on random vectors") {
    for (uint32_t s = 0; s < 100; ++s) {
        Tensor x = random_tensor({4}, 100 + s, 3.0f);
        Tensor y = softmax(x, 0);
        oracle::Vec ref = oracle::softmax(oracle::to_vec(x));
        for (int i = 0; i < 4; ++i) {
            REQUIRE(y.data[static_cast<size_t>(i)] ==
                    Catch::Approx(ref[static_cast<size_t>(i)]).margin(1e-6));
        }
    }
}

TEST_CASE("softmax sums to one along every axis") {
    Tensor x = random_tensor({2, 3, 4}, 7, 5.0f);
    for (int axis = 0; axis < 3; ++axis) {
        Tensor y = softmax(x, axis);
        REQUIRE(y.same_shape(x));
        const int n = x.shape[static_cast<size_t>(axis)];
        size_t inner = 1;
        for (int d = axis + 1; d < 3; ++d) inner *= static_cast<size_t>(x.shape[static_cast<size_t>(d)]);
        const size_t outer = x.numel() / (inner * static_cast<size_t>(n));
        for (size_t o = 0; o < outer; ++o) {
            for (size_t in = 0; in < inner; ++in) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) {
                    sum += y.data[o * static_cast<size_t>(n) * inner + static_cast<size_t>(i) * inner + in];
                }
                REQUIRE(sum == Catch::Approx(1.0).margin(1e-6));
            }
        }
    }
}

TEST_CASE("softmax rejects an invalid axis") {
    Tensor x({2, 2}, 0.0f);
    REQUIRE_THROWS_AS(softmax(x, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(softmax(x, -1), std::invalid_argument);
}

TEST_CASE("layer_norm collapses constant rows to the bias") {
    Tensor x({2, 4}, 3.7f);
    Tensor g({4}, 1.0f), b({4}, 0.0f);
    Tensor y = layer_norm(x, g, b, 1e-5f);
    for (float v : y.data) REQUIRE(v == Catch::Approx(0.0).margin(1e-6));

    Tensor b2({4}, std::vector<float>{1, 2, 3, 4});
    Tensor y2 = layer_norm(x, Tensor({4}, 0.0f), b2, 1e-5f);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) {
            REQUIRE(y2.data[static_cast<size_t>(r * 4 + c)] == b2.data[static_cast<size_t>(c)]);
        }
    }
}

TEST_CASE("layer_norm matches two-pass statistics on random rows") {
    Tensor x = random_tensor({3, 8}, 11, 4.0f);
    Tensor g = random_tensor({8}, 12);
    Tensor b = random_tensor({8}, 13);
    Tensor y = layer_norm(x, g, b, 1e-5f);
    for (int r = 0; r < 3; ++r) {
        oracle::Vec row(8), gg(8), bb(8);
        for (int c = 0; c < 8; ++c) {
            row[static_cast<size_t>(c)] = x.data[static_cast<size_t>(r * 8 + c)];
            gg[static_cast<size_t>(c)]  = g.data[static_cast<size_t>(c)];
            bb[static_cast<size_t>(c)]  = b.data[static_cast<size_t>(c)];
        }
        oracle::Vec ref = oracle::layer_norm(row, gg, bb, 1e-5);
        for (int c = 0; c < 8; ++c) {
            REQUIRE(y.data[static_cast<size_t>(r * 8 + c)] ==
                    Catch::Approx(ref[static_cast<size_t>(c)]).margin(1e-5));
        }
    }
}

TEST_CASE("layer_norm validates gain, bias and eps") {
    Tensor x({2, 4}, 0.0f);
    REQUIRE_THROWS_AS(layer_norm(x, Tensor({3}, 1.0f), Tensor({4}, 0.0f), 1e-5f),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(layer_norm(x, Tensor({4}, 1.0f), Tensor({4, 1}, 0.0f), 1e-5f),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(layer_norm(x, Tensor({4}, 1.0f), Tensor({4}, 0.0f), 0.0f),
                      std::invalid_argument);
}

TEST_CASE("matmul matches the naive triple loop") {
    Tensor a = random_tensor({3, 5}, 21);
    Tensor b = random_tensor({5, 4}, 22);
    Tensor c = matmul(a, b);
    oracle::Mat ref = oracle::matmul(oracle::to_mat(a), oracle::to_mat(b));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
            REQUIRE(c.data[static_cast<size_t>(i * 4 + j)] ==
                    Catch::Approx(ref[static_cast<size_t>(i)][static_cast<size_t>(j)]).margin(1e-6));
        }
    }
}

TEST_CASE("matmul rejects incompatible operands") {
    REQUIRE_THROWS_AS(matmul(Tensor({2, 3}, 0.0f), Tensor({4, 2}, 0.0f)), std::invalid_argument);
    REQUIRE_THROWS_AS(matmul(Tensor({2, 3, 1}, 0.0f), Tensor({3, 2}, 0.0f)), std::invalid_argument);
}

TEST_CASE("attention on a single token returns its value row") {
    Tensor q = random_tensor({1, 4}, 31);
    Tensor k = random_tensor({1, 4}, 32);
    Tensor v = random_tensor({1, 4}, 33);
    Tensor out = attention(q, k, v, 2);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(out.data[static_cast<size_t>(i)] ==
                Catch::Approx(v.data[static_cast<size_t>(i)]).margin(1e-6));
    }
}

TEST_CASE("attention with identical keys averages the values") {
    Tensor q = random_tensor({2, 4}, 41);
    Tensor k({3, 4});
    for (int j = 0; j < 3; ++j) {
        for (int c = 0; c < 4; ++c) k.data[static_cast<size_t>(j * 4 + c)] = 0.3f * (c + 1);
    }
    Tensor v = random_tensor({3, 4}, 42);
    Tensor out = attention(q, k, v, 1);
    for (int i = 0; i < 2; ++i) {
        for (int c = 0; c < 4; ++c) {
            double mean = 0.0;
            for (int j = 0; j < 3; ++j) mean += v.data[static_cast<size_t>(j * 4 + c)];
            mean /= 3.0;
            REQUIRE(out.data[static_cast<size_t>(i * 4 + c)] == Catch::Approx(mean).margin(1e-6));
        }
    }
}

TEST_CASE("attention matches the brute-force formula") {
    SECTION("two tokens, one head") {
        Tensor q = random_tensor({2, 3}, 51);
        Tensor k = random_tensor({2, 3}, 52);
        Tensor v = random_tensor({2, 3}, 53);
        Tensor out = attention(q, k, v, 1);
        oracle::Mat ref = oracle::attention(oracle::to_mat(q), oracle::to_mat(k), oracle::to_mat(v), 1);
        for (int i = 0; i < 2; ++i) {
            for (int c = 0; c < 3; ++c) {
                REQUIRE(out.data[static_cast<size_t>(i * 3 + c)] ==
                        Catch::Approx(ref[static_cast<size_t>(i)][static_cast<size_t>(c)]).margin(1e-5));
            }
        }
    }
    SECTION("multi-head with cross token counts") {
        Tensor q = random_tensor({5, 8}, 54);
        Tensor k = random_tensor({3, 8}, 55);
        Tensor v = random_tensor({3, 8}, 56);
        Tensor out = attention(q, k, v, 4);
        oracle::Mat ref = oracle::attention(oracle::to_mat(q), oracle::to_mat(k), oracle::to_mat(v), 4);
        for (int i = 0; i < 5; ++i) {
            for (int c = 0; c < 8; ++c) {
                REQUIRE(out.data[static_cast<size_t>(i * 8 + c)] ==
                        Catch::Approx(ref[static_cast<size_t>(i)][static_cast<size_t>(c)]).margin(1e-5));
            }
        }
    }
}

TEST_CASE("attention outputs stay in the convex hull of the values") {
    Tensor q = random_tensor({6, 8}, 61, 2.0f);
    Tensor k = random_tensor({4, 8}, 62, 2.0f);
    Tensor v = random_tensor({4, 8}, 63, 2.0f);
    const int heads = 2, dh = 4;
    Tensor out = attention(q, k, v, heads);
    for (int h = 0; h < heads; ++h) {
        for (int c = 0; c < dh; ++c) {
            float lo = v.data[static_cast<size_t>(h * dh + c)], hi = lo;
            for (int j = 0; j < 4; ++j) {
                const float val = v.data[static_cast<size_t>(j * 8 + h * dh + c)];
                lo = std::min(lo, val);
                hi = std::max(hi, val);
            }
            for (int i = 0; i < 6; ++i) {
                const float o = out.data[static_cast<size_t>(i * 8 + h * dh + c)];
                REQUIRE(o >= lo - 1e-5f);
                REQUIRE(o <= hi + 1e-5f);
            }
        }
    }
}

TEST_CASE("attention validates heads and token counts") {
    Tensor x({2, 6}, 0.0f);
    REQUIRE_THROWS_AS(attention(x, x, x, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(attention(x, x, x, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(attention(x, Tensor({3, 6}, 0.0f), Tensor({2, 6}, 0.0f), 2),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(attention(x, Tensor({2, 4}, 0.0f), Tensor({2, 4}, 0.0f), 2),
                      std::invalid_argument);
}

TEST_CASE("reductions match brute-force accumulation") {
    Tensor a = random_tensor({7, 9}, 71);
    Tensor b = random_tensor({7, 9}, 72);
    REQUIRE(mean_abs_diff(a, b) ==
            Catch::Approx(oracle::mean_abs_diff(oracle::to_vec(a), oracle::to_vec(b))).margin(1e-9));
    REQUIRE(mean_sq_diff(a, b) ==
            Catch::Approx(oracle::mean_sq_diff(oracle::to_vec(a), oracle::to_vec(b))).margin(1e-9));
    REQUIRE(cosine_similarity(a, b) ==
            Catch::Approx(oracle::cosine_similarity(oracle::to_vec(a), oracle::to_vec(b))).margin(1e-9));
}

TEST_CASE("cosine similarity handles zero tensors") {
    Tensor z({3}, 0.0f);
    Tensor x({3}, std::vector<float>{1, 2, 3});
    REQUIRE(cosine_similarity(z, z) == 1.0);
    REQUIRE(cosine_similarity(z, x) == 0.0);
    REQUIRE(cosine_similarity(x, x) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(cosine_similarity(x, scale(x, -1.0f)) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("min and max scan the whole tensor") {
    Tensor t({2, 3}, std::vector<float>{3, -7, 2, 9, 0, 1});
    REQUIRE(min_value(t) == -7.0f);
    REQUIRE(max_value(t) == 9.0f);
}

TEST_CASE("gelu matches known values") {
    Tensor x({3}, std::vector<float>{0.0f, 1.0f, -10.0f});
    Tensor y = gelu(x);
    REQUIRE(y.data[0] == Catch::Approx(0.0).margin(1e-7));
    REQUIRE(y.data[1] == Catch::Approx(0.8413447).margin(1e-6));
    REQUIRE(y.data[2] == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("kernel counters track invocations per thread") {
    reset_kernel_counters();
    Tensor a = random_tensor({2, 2}, 81);
    matmul(a, a);
    softmax(a, 1);
    layer_norm(a, Tensor({2}, 1.0f), Tensor({2}, 0.0f), 1e-5f);
    attention(a, a, a, 1);
    REQUIRE(kernel_counters().matmul == 1);
    REQUIRE(kernel_counters().softmax == 1);
    REQUIRE(kernel_counters().layer_norm == 1);
    REQUIRE(kernel_counters().attention == 1);
    reset_kernel_counters();
    REQUIRE(kernel_counters().matmul == 0);
}

TEST_CASE("seeded generator reproduces its stream") {
    gaussian_rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool same_stream_equal = true, cross_stream_differ = false, cross_seed_differ = false;
    for (int i = 0; i < 100; ++i) {
        const float va = a.next_gaussian();
        if (va != b.next_gaussian()) same_stream_equal = false;
        if (va != c.next_gaussian()) cross_stream_differ = true;
        if (va != d.next_gaussian()) cross_seed_differ = true;
    }
    REQUIRE(same_stream_equal);
    REQUIRE(cross_stream_differ);
    REQUIRE(cross_seed_differ);
}

TEST_CASE("gaussian samples have unit-normal statistics") {
    gaussian_rng rng(7, 0);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.next_gaussian();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var  = sumsq / n - mean * mean;
    // 3-sigma bands of the estimators for N(0,1)
    REQUIRE(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));

    gaussian_rng u(9, 2);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x <= 1.0);
    }
}
