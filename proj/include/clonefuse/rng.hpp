#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace clonefuse {

// Deterministic random source. std::mt19937_64 output is fully specified by
// the standard; the distributions are not, so all draws are derived here by
// hand to keep results identical across compilers and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1), 53 bits of entropy.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is irrelevant at the sizes used
    // here (n << 2^64) and the modulo keeps the draw platform-stable.
    uint64_t below(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates shuffle driven by below(); std::shuffle is not
    // implementation-stable.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64 step; used to derive independent substream seeds from a base
// seed plus a stream index, e.g. per-epoch shuffles.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace clonefuse
