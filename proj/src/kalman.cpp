#include "fbcap/kalman.hpp"

#include <cmath>
#include <string>

#include "fbcap/errors.hpp"

namespace fbcap {

namespace {

// sum_k coeffs[k] a^{-k} for a delay polynomial, evaluated directly.
double delay_value(const Poly& p, double a) { return p.evaluate(1.0 / a); }

// z^m p(z^{-1}) for a delay polynomial of degree <= m.
ZPoly raise(const Poly& p, std::size_t m) {
    std::vector<double> c(m + 1, 0.0);
    for (std::size_t k = 0; k <= p.degree(); ++k) c[m - k] = p[k];
    return ZPoly(std::move(c));
}

}  // namespace

void require_valid(const PlantSpec& plant) {
    if (!std::isfinite(plant.a) || !(std::abs(plant.a) > 1.0)) {
        throw InvalidPlant("plant requires |a| > 1, got a = " + std::to_string(plant.a));
    }
    if (!std::isfinite(plant.c) || plant.c == 0.0) throw InvalidPlant("plant requires c != 0");
}

RiccatiTrace riccati_iterate(const PlantSpec& plant, double sigma_v_sq, double P0, std::size_t steps) {
    if (!(P0 > 0.0)) throw InvalidInput("Riccati iteration needs P0 > 0");
    if (!(sigma_v_sq > 0.0)) throw InvalidInput("Riccati iteration needs sigma_v_sq > 0");
    const double a = plant.a, c = plant.c;
    RiccatiTrace trace;
    trace.P.reserve(steps + 1);
    trace.K.reserve(steps + 1);
    double P = P0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double innov = c * c * P + sigma_v_sq;
        trace.P.push_back(P);
        trace.K.push_back(a * c * P / innov);
        P = a * a * P - a * a * c * c * P * P / innov;
    }
    return trace;
}

KalmanSteadyState steady_state_white(const PlantSpec& plant, double sigma_v_sq) {
    require_valid(plant);
    if (!(sigma_v_sq > 0.0)) throw InvalidInput("steady state needs sigma_v_sq > 0");
    const double a = plant.a, c = plant.c;
    const double gap = a * a - 1.0;
    return {c, gap * sigma_v_sq / (c * c), gap / (a * c), a * a * sigma_v_sq};
}

double transform_colored(const PlantSpec& plant, const ArmaSpec& spec) {
    require_valid(plant);
    require_valid(spec);
    return plant.c * delay_value(spec.ar_poly(), plant.a) / delay_value(spec.ma_poly(), plant.a);
}

KalmanSteadyState steady_state_colored(const PlantSpec& plant, const ArmaSpec& spec) {
    const double c_hat = transform_colored(plant, spec);
    KalmanSteadyState s = steady_state_white({plant.a, c_hat}, spec.sigma_hat_sq);
    s.c_hat = c_hat;
    return s;
}

RationalFilter dynamic_gain(const PlantSpec& plant, const ArmaSpec& spec) {
    const KalmanSteadyState s = steady_state_colored(plant, spec);
    return {s.K_hat * spec.ar_poly(), spec.ma_poly()};
}

LoopFilters loop_filters(const PlantSpec& plant, const ArmaSpec& spec, std::size_t impulse_length) {
    const KalmanSteadyState steady = steady_state_colored(plant, spec);
    const double gain = plant.c * steady.K_hat;
    const std::size_t m = spec.order();

    const ZPoly a_raised = raise(spec.ar_poly(), m);  // z^m A(z)
    const ZPoly g_raised = raise(spec.ma_poly(), m);  // z^m G(z)
    const ZPoly pole_factor({-plant.a, 1.0});        // z - a

    LoopFilters lf;
    lf.plant = plant;
    lf.steady = steady;
    lf.K_dyn = {steady.K_hat * spec.ar_poly(), spec.ma_poly()};
    lf.sensitivity_num = pole_factor * g_raised;
    lf.char_poly = lf.sensitivity_num + gain * a_raised;
    lf.L = {gain * a_raised, lf.sensitivity_num};

    // B in delay form: divide numerator and chi by z^{m+1}.
    std::vector<double> b_num(m + 2, 0.0);
    for (std::size_t k = 0; k <= m; ++k) b_num[m + 1 - k] = -gain * a_raised[k];
    lf.B = {Poly(std::move(b_num)), unlift(lf.char_poly)};
    lf.b_impulse = series_expand(lf.B, impulse_length);
    return lf;
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::marginal: return "marginal";
        case Verdict::unstable: return "unstable";
    }
    return "unknown";
}

StabilityVerdict closed_loop_stable(const LoopFilters& lf) {
    StabilityVerdict out;
    out.poles = roots(lf.char_poly);
    out.max_modulus = out.poles.max_modulus();
    switch (classify_modulus(out.max_modulus)) {
        case CircleRegion::inside: out.verdict = Verdict::stable; break;
        case CircleRegion::marginal: out.verdict = Verdict::marginal; break;
        case CircleRegion::outside: out.verdict = Verdict::unstable; break;
    }
    return out;
}

}  // namespace fbcap
