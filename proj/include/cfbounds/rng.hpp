#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cfbounds {

// Deterministic random source. Only the raw mt19937_64 stream comes from the
// standard library; every distribution on top of it is implemented here so
// that a seed produces the same byte-for-byte draws on every platform.
// (std::uniform_real_distribution and friends are implementation-defined.)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1): 53 high bits of the generator output.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), safe for logarithms.
    double uniform_pos() {
        double u = uniform();
        while (u == 0.0) u = uniform();
        return u;
    }

    // Standard normal via Box-Muller; one fresh pair of uniforms per draw.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gamma(alpha, 1) by the Marsaglia-Tsang squeeze; alpha below one is
    // boosted through Gamma(alpha + 1).
    double gamma(double alpha) {
        if (alpha <= 0.0) throw std::invalid_argument("Gamma shape must be positive");
        if (alpha < 1.0) {
            const double g = gamma(alpha + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double g1 = gamma(a);
        const double g2 = gamma(b);
        return g1 / (g1 + g2);
    }

    std::vector<double> dirichlet(double alpha, std::size_t k) {
        std::vector<double> out(k);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = gamma(alpha);
            sum += out[i];
        }
        for (double& x : out) x /= sum;
        return out;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace cfbounds
