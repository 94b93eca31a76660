#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adacache {

// Deterministic Gaussian source. mt19937_64 is fully specified by the standard
// and the Box-Muller transform below avoids std::normal_distribution, whose
// output sequence differs between standard library implementations. The same
// (seed, stream) pair therefore yields the same values on every platform.
class gaussian_rng {
public:
    explicit gaussian_rng(uint64_t seed, uint32_t stream = 0) {
        std::seed_seq seq{static_cast<uint32_t>(seed),
                          static_cast<uint32_t>(seed >> 32),
                          stream};
        engine_.seed(seq);
    }

    // uniform in (0, 1]
    double next_uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    float next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return static_cast<float>(spare_);
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        double r  = std::sqrt(-2.0 * std::log(u1));
        double a  = 2.0 * M_PI * u2;
        spare_     = r * std::sin(a);
        has_spare_ = true;
        return static_cast<float>(r * std::cos(a));
    }

private:
    std::mt19937_64 engine_;
    double spare_    = 0.0;
    bool has_spare_  = false;
};

}  // namespace adacache
