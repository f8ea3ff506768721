#pragma once

#include <cstddef>
#include <vector>

#include "fbcap/noise.hpp"
#include "fbcap/ratpoly.hpp"

namespace fbcap {

/// Scalar plant x_{k+1} = a x_k, y_k = c x_k + v_k with |a| > 1 and c != 0.
struct PlantSpec {
    double a = 2.0;
    double c = 1.0;
};

/// Throws InvalidPlant unless |a| > 1 and c != 0 (both finite).
void require_valid(const PlantSpec& plant);

struct RiccatiTrace {
    std::vector<double> P;  ///< P_0..P_steps
    std::vector<double> K;  ///< K_0..K_steps
};

/// Time-varying Kalman recursion for the white-noise plant, starting from P0.
RiccatiTrace riccati_iterate(const PlantSpec& plant, double sigma_v_sq, double P0, std::size_t steps);

struct KalmanSteadyState {
    double c_hat = 0.0;       ///< output gain seen by the whitened observer
    double P = 0.0;           ///< steady-state estimation error variance
    double K_hat = 0.0;       ///< static observer gain
    double sigma_e_sq = 0.0;  ///< innovation variance
};

/// Nonzero fixed point of the scalar Riccati equation: P = (a^2-1) s / c^2, K = (a^2-1)/(a c).
KalmanSteadyState steady_state_white(const PlantSpec& plant, double sigma_v_sq);

/// c (1 - sum f_i a^{-i}) / (1 + sum g_j a^{-j}), the output gain after whitening the ARMA noise.
double transform_colored(const PlantSpec& plant, const ArmaSpec& spec);

KalmanSteadyState steady_state_colored(const PlantSpec& plant, const ArmaSpec& spec);

/// K(z) = K_hat (1 - sum f_i z^{-i}) / (1 + sum g_j z^{-j}).
RationalFilter dynamic_gain(const PlantSpec& plant, const ArmaSpec& spec);

/// Ratio of polynomials in positive powers of z.
struct ZRational {
    ZPoly num;
    ZPoly den;
};

/**
 * Loop transfer functions of the transformed coding loop, m = max(p, q):
 *
 *   L(z)  = c K(z) / (z - a)
 *   B(z)  = -L / (1 + L) = -c K_hat z^m A(z) / chi(z)
 *   chi(z) = z^m [ (z - a) G(z) + c K_hat A(z) ]
 *
 * with A(z) = 1 - sum f_i z^{-i} and G(z) = 1 + sum g_j z^{-j}. chi is monic
 * of degree m + 1; its roots are the closed-loop poles.
 */
struct LoopFilters {
    PlantSpec plant;
    KalmanSteadyState steady;
    RationalFilter K_dyn;
    ZRational L;
    RationalFilter B;
    ZPoly char_poly;
    std::vector<double> b_impulse;  ///< b_0..b_n of B; b_0 == 0
    /// z^m (z - a) G(z): numerator of the sensitivity 1 / (1 + L) = sensitivity_num / chi.
    ZPoly sensitivity_num;
};

inline constexpr std::size_t kDefaultImpulseLength = 64;

LoopFilters loop_filters(const PlantSpec& plant, const ArmaSpec& spec,
                         std::size_t impulse_length = kDefaultImpulseLength);

enum class Verdict { stable, marginal, unstable };

const char* to_string(Verdict v) noexcept;

struct StabilityVerdict {
    Verdict verdict = Verdict::stable;
    RootSet poles;
    double max_modulus = 0.0;
};

StabilityVerdict closed_loop_stable(const LoopFilters& lf);

}  // namespace fbcap
