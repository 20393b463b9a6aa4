// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace chancomp {

// Deterministic random stream. All randomized routines in the library take an
// explicit seed and draw through this wrapper; the uniform/gaussian mappings
// are spelled out here (not delegated to std::*_distribution) so that a fixed
// seed yields the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Flat Dirichlet via normalized Exp(1) draws.
    std::vector<double> dirichlet(int k) {
        std::vector<double> p(k);
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            double u = uniform();
            if (u <= 0.0) u = 0x1.0p-53;
            p[i] = -std::log(u);
            s += p[i];
        }
        for (int i = 0; i < k; ++i) p[i] /= s;
        return p;
    }

    // Derive an independent deterministic substream (for per-sample seeding).
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t idx) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (idx + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace chancomp
