#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fbcap/ratpoly.hpp"

namespace fbcap {

/**
 * ARMA(p, q) colored Gaussian noise
 *
 *   v_k = sum_i f_i v_{k-i} + vhat_k + sum_j g_j vhat_{k-j},
 *
 * driven by white Gaussian vhat with variance sigma_hat_sq.
 */
struct ArmaSpec {
    std::vector<double> f;  ///< AR coefficients f_1..f_p
    std::vector<double> g;  ///< MA coefficients g_1..g_q
    double sigma_hat_sq = 1.0;

    std::size_t p() const noexcept { return f.size(); }
    std::size_t q() const noexcept { return g.size(); }
    std::size_t order() const noexcept { return f.size() > g.size() ? f.size() : g.size(); }

    /// 1 - sum_i f_i z^{-i}
    Poly ar_poly() const;
    /// 1 + sum_j g_j z^{-j}
    Poly ma_poly() const;
};

struct Violation {
    std::string field;  ///< "f", "g" or "sigma_hat_sq"
    std::string message;
};

/// Empty when the spec is admissible.
std::vector<Violation> validate(const ArmaSpec& spec);

/// Throws InvalidSpec listing every violation.
void require_valid(const ArmaSpec& spec);

/// F(z) = (1 + sum g_j z^{-j}) / (1 - sum f_i z^{-i}).
RationalFilter shaping_filter(const ArmaSpec& spec);
/// F^{-1}(z); its impulse response is 1, -h_1, -h_2, ...
RationalFilter whitening_filter(const ArmaSpec& spec);
/// The h_1..h_n of F^{-1}(z) = 1 - sum_i h_i z^{-i}.
std::vector<double> whitening_taps(const ArmaSpec& spec, std::size_t n);

/// 10 (p + q + 1) ceil(1 / (1 - r_max)), r_max the largest AR/MA root modulus.
std::size_t default_burn_in(const ArmaSpec& spec);

/**
 * Seeded standard normal source: std::mt19937_64 feeding the Marsaglia polar
 * method, uniforms built from the top 53 bits of each draw. Output is a pure
 * function of the seed on a given build.
 */
class GaussianSource {
public:
    static constexpr const char* kAlgorithm = "mt19937_64+polar/v1";

    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    double uniform_signed();

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct NoiseTrace {
    std::vector<double> v;
    std::vector<double> v_hat;
    std::uint64_t seed = 0;
};

/// n samples of (v, vhat) after discarding burn_in from a zero-history start.
NoiseTrace generate(const ArmaSpec& spec, std::size_t n, std::size_t burn_in, std::uint64_t seed);

/// Applies F^{-1} with zero initial conditions.
std::vector<double> whiten_stream(const ArmaSpec& spec, std::span<const double> v);

/// Biased autocovariances (1/N) sum_k x_k x_{k+l} for l = 0..max_lag.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);

/// max_{1 <= l <= max_lag} |gamma(l) / gamma(0)|.
double max_abs_autocorrelation(std::span<const double> x, std::size_t max_lag);

}  // namespace fbcap
