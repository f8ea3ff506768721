#pragma once

// Generators shared by the property-style tests. Polynomials are built from
// chosen roots, so their roots are known without calling the library.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "fbcap/noise.hpp"

namespace fbcap::testing {

/// Roots of a real polynomial: conjugate pairs or single reals, modulus in [lo, hi].
inline std::vector<std::complex<double>> random_roots(std::mt19937_64& rng, std::size_t degree, double lo,
                                                      double hi) {
    std::uniform_real_distribution<double> mod(lo, hi), angle(0.05, std::numbers::pi - 0.05), coin(0.0, 1.0);
    std::vector<std::complex<double>> out;
    while (out.size() < degree) {
        if (degree - out.size() >= 2 && coin(rng) < 0.5) {
            const auto r = std::polar(mod(rng), angle(rng));
            out.push_back(r);
            out.push_back(std::conj(r));
        } else {
            out.emplace_back(coin(rng) < 0.5 ? -mod(rng) : mod(rng), 0.0);
        }
    }
    return out;
}

/// Coefficients of prod_i (1 - r_i x), x = z^{-1}: [1, c_1, ..., c_n].
inline std::vector<double> delay_coeffs_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k] += c[k];
            next[k + 1] -= r * c[k];
        }
        c = next;
    }
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k].real();
    return out;
}

/// Ascending-in-z coefficients of lead * prod_i (z - r_i).
inline std::vector<double> z_coeffs_from_roots(const std::vector<std::complex<double>>& roots, double lead) {
    std::vector<std::complex<double>> c{lead};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = next;
    }
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k].real();
    return out;
}

/// Valid ARMA(p, q) spec with every AR/MA root of modulus at most max_modulus.
inline ArmaSpec random_spec(std::mt19937_64& rng, std::size_t p, std::size_t q, double max_modulus,
                            double sigma_sq = 1.0) {
    ArmaSpec spec;
    const auto ar = delay_coeffs_from_roots(random_roots(rng, p, 0.05, max_modulus));
    const auto ma = delay_coeffs_from_roots(random_roots(rng, q, 0.05, max_modulus));
    for (std::size_t i = 1; i < ar.size(); ++i) spec.f.push_back(-ar[i]);
    for (std::size_t j = 1; j < ma.size(); ++j) spec.g.push_back(ma[j]);
    spec.sigma_hat_sq = sigma_sq;
    return spec;
}

inline double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

}  // namespace fbcap::testing
