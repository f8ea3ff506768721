#pragma once

#include <vector>

#include "fbcap/kalman.hpp"
#include "fbcap/noise.hpp"
#include "fbcap/ratpoly.hpp"

namespace fbcap {

struct CapacityQuery {
    ArmaSpec spec;
    double power = 1.0;  ///< power constraint on the channel input
    double c = 1.0;      ///< plant output gain; the bound does not depend on it

    /// power / sigma_hat_sq
    double snr() const noexcept { return power / spec.sigma_hat_sq; }
};

/// Throws InvalidSpec / InvalidInput unless the spec is valid and power > 0.
void require_valid(const CapacityQuery& query);

enum class RootVariant { plain, flipped };

const char* to_string(RootVariant v) noexcept;

struct CapacityBound {
    double a_bar = 0.0;          ///< real root of the bound polynomial with the largest magnitude
    double capacity_bits = 0.0;  ///< log2 |a_bar|
    /// plain when +|a_bar| solves the equation as written, flipped when it solves the a -> -a form.
    RootVariant variant = RootVariant::plain;
    std::vector<double> all_real_roots;
    double residual = 0.0;  ///< |Q(a_bar)| / max |coeff of Q|
    Verdict loop_verdict = Verdict::stable;

    /// Plant at which the coding loop is analyzed: a = |a_bar|, c from the query.
    PlantSpec operating_plant(double c) const noexcept { return {a_bar < 0 ? -a_bar : a_bar, c}; }
    /// Plant at the signed root, where c^2 P equals the power constraint.
    PlantSpec signed_plant(double c) const noexcept { return {a_bar, c}; }
};

/**
 * Q(a) = (a^2 - 1) [a^{m-q}(a^q + sum g_j a^{q-j})]^2 - snr [a^{m-p}(a^p - sum f_i a^{p-i})]^2,
 * m = max(p, q): the power-constraint equation with negative powers cleared.
 * Monic of degree 2m + 2 with Q(1) < 0.
 */
ZPoly bound_polynomial(const CapacityQuery& query);

/// Same polynomial with f_i -> (-1)^i f_i and g_j -> (-1)^j g_j, i.e. Q(-a) up to sign.
ZPoly flipped_bound_polynomial(const CapacityQuery& query);

/// Lower bound on the feedback capacity from the largest-magnitude real root of Q.
CapacityBound lower_bound(const CapacityQuery& query);

/**
 * Exact feedback capacity (bits) of a first-order ARMA noise channel: the
 * unique root a > 1 of the plain equation when f_1 + g_1 <= 0, of the flipped
 * one otherwise. Throws OutOfScope for p > 1 or q > 1.
 */
double kim_first_order(const CapacityQuery& query);

struct RateIntegral {
    double bits = 0.0;          ///< quadrature value of the sensitivity log-modulus integral
    double jensen_bits = 0.0;   ///< closed-form value of the same integral
    double log2_abs_a = 0.0;
    std::vector<Complex> unstable_poles;  ///< chi roots outside the unit circle
    bool matches_log2_a = false;          ///< |bits - log2|a|| <= kTolIntegral
};

/**
 * (1/2pi) * integral of log2 |1 / (1 + L(e^{jw}))|, the entropy-rate gain of
 * the coding loop. Equals log2|a| when chi is stable; otherwise smaller by the
 * log2-moduli of the unstable poles. Throws IllConditionedIntegral for
 * marginal chi and SolverFailure if quadrature and closed form disagree.
 */
RateIntegral rate_integral(const PlantSpec& plant, const ArmaSpec& spec, std::size_t grid = kDefaultGrid);

/// c^2 P of the steady-state observer.
double achieved_power(const PlantSpec& plant, const ArmaSpec& spec);

}  // namespace fbcap
