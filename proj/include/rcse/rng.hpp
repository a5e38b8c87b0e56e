#pragma once

// Deterministic randomness for every stochastic component.
//
// The generator is xoshiro256++ seeded through SplitMix64 (Blackman/Vigna,
// public domain). All draws (uniform ints, doubles, normal, gamma) are
// implemented here rather than via <random> distributions, whose output is
// implementation-defined; this keeps corpora, folds, negatives, and trained
// checkpoints bit-reproducible across standard libraries and platforms.
//
// Seed fan-out: every consumer derives its stream as
//   derive_seed(base_seed, "tag", a, b)
// where "tag" names the consumer (e.g. "shuffle", "negatives") and a/b are
// indices such as epoch or fold. Derivation is FNV-1a over the tag mixed with
// SplitMix64 finalization.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace rcse {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
    uint64_t state = base ^ fnv1a64(tag);
    uint64_t out = splitmix64(state);
    state ^= out + a;
    out = splitmix64(state);
    state ^= out + b;
    return splitmix64(state);
}

class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Masked rejection sampling: unbiased and
    // portable (no division-based tricks whose rounding could differ).
    uint64_t uniform_index(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t mask = ~uint64_t{0} >> countl_zero(n - 1);
        uint64_t x;
        do {
            x = next_u64() & mask;
        } while (x >= n);
        return x;
    }

    bool coin() { return (next_u64() & 1u) != 0; }

    // Standard normal via Box-Muller. The second value of each pair is
    // discarded so that one call consumes a fixed number of raw draws.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Gamma(alpha, 1) via Marsaglia-Tsang; alpha < 1 handled by boosting.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet draw; lower concentration gives sharper simplexes.
    std::vector<double> dirichlet(size_t k, double concentration) {
        std::vector<double> p(k);
        double sum = 0.0;
        for (auto& x : p) {
            x = gamma(concentration);
            if (x < 1e-300) x = 1e-300;
            sum += x;
        }
        for (auto& x : p) x /= sum;
        return p;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static int countl_zero(uint64_t x) {
        int n = 0;
        if (x == 0) return 64;
        while (!(x & 0x8000000000000000ULL)) {
            x <<= 1;
            ++n;
        }
        return n;
    }

    std::array<uint64_t, 4> s_{};
};

// Fisher-Yates with our own generator; std::shuffle's draw sequence is
// implementation-defined.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.uniform_index(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace rcse
