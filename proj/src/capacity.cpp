#include "fbcap/capacity.hpp"

#include <cmath>
#include <string>

#include "fbcap/errors.hpp"

namespace fbcap {

namespace {

constexpr double kRealRootTol = 1e-9;
constexpr int kPolishSteps = 5;
constexpr double kTieTol = 1e-9;

ZPoly raise(const Poly& p, std::size_t m) {
    std::vector<double> c(m + 1, 0.0);
    for (std::size_t k = 0; k <= p.degree(); ++k) c[m - k] = p[k];
    return ZPoly(std::move(c));
}

ZPoly assemble(const Poly& ar, const Poly& ma, std::size_t m, double snr) {
    const ZPoly ar_raised = raise(ar, m);
    const ZPoly ma_raised = raise(ma, m);
    const ZPoly gap({-1.0, 0.0, 1.0});  // a^2 - 1
    return gap * ma_raised * ma_raised - snr * (ar_raised * ar_raised);
}

double polish_real(const ZPoly& q, double x) {
    const ZPoly dq = q.derivative();
    double best = std::abs(q.evaluate(x));
    for (int i = 0; i < kPolishSteps && best > 0.0; ++i) {
        const double d = dq.evaluate(x);
        if (d == 0.0) break;
        const double next = x - q.evaluate(x) / d;
        const double res = std::abs(q.evaluate(next));
        if (!(res <= best)) break;
        x = next;
        best = res;
    }
    return x;
}

std::vector<double> alternate_signs(const std::vector<double>& xs) {
    std::vector<double> out(xs);
    for (std::size_t i = 0; i < out.size(); i += 2) out[i] = -out[i];  // index i holds coefficient i + 1
    return out;
}

}  // namespace

void require_valid(const CapacityQuery& query) {
    require_valid(query.spec);
    if (!(query.power > 0.0) || !std::isfinite(query.power)) throw InvalidInput("power constraint must be positive");
    if (query.c == 0.0 || !std::isfinite(query.c)) throw InvalidInput("output gain c must be nonzero");
}

const char* to_string(RootVariant v) noexcept { return v == RootVariant::plain ? "plain" : "flipped"; }

ZPoly bound_polynomial(const CapacityQuery& query) {
    require_valid(query);
    return assemble(query.spec.ar_poly(), query.spec.ma_poly(), query.spec.order(), query.snr());
}

ZPoly flipped_bound_polynomial(const CapacityQuery& query) {
    require_valid(query);
    ArmaSpec flipped = query.spec;
    flipped.f = alternate_signs(query.spec.f);
    flipped.g = alternate_signs(query.spec.g);
    return assemble(flipped.ar_poly(), flipped.ma_poly(), flipped.order(), query.snr());
}

CapacityBound lower_bound(const CapacityQuery& query) {
    const ZPoly q = bound_polynomial(query);
    CapacityBound out;
    for (double r : roots(q).real_roots(kRealRootTol)) out.all_real_roots.push_back(polish_real(q, r));

    bool found = false;
    for (double r : out.all_real_roots) {
        if (!(std::abs(r) > 1.0)) continue;
        if (!found) {
            out.a_bar = r;
            found = true;
            continue;
        }
        const double mag = std::abs(r), best = std::abs(out.a_bar);
        if (mag > best * (1.0 + kTieTol)) {
            out.a_bar = r;
        } else if (mag >= best * (1.0 - kTieTol) && r > 0.0 && out.a_bar < 0.0) {
            out.a_bar = r;
        }
    }
    if (!found) throw SolverFailure("bound polynomial has no real root with |a| > 1");

    out.capacity_bits = std::log2(std::abs(out.a_bar));
    out.variant = out.a_bar > 0.0 ? RootVariant::plain : RootVariant::flipped;
    out.residual = std::abs(q.evaluate(out.a_bar)) / q.max_abs_coeff();
    out.loop_verdict = closed_loop_stable(loop_filters(out.operating_plant(query.c), query.spec)).verdict;
    return out;
}

double kim_first_order(const CapacityQuery& query) {
    require_valid(query);
    const ArmaSpec& spec = query.spec;
    if (spec.p() > 1 || spec.q() > 1) {
        throw OutOfScope("first-order capacity formula needs p <= 1 and q <= 1 (got p = " + std::to_string(spec.p()) +
                         ", q = " + std::to_string(spec.q()) + ")");
    }
    const double f1 = spec.p() == 1 ? spec.f[0] : 0.0;
    const double g1 = spec.q() == 1 ? spec.g[0] : 0.0;
    const double snr = query.snr();
    // f1 + g1 <= 0 uses the equation as written, otherwise its a -> -a form.
    const double sign = f1 + g1 <= 0.0 ? 1.0 : -1.0;
    const auto h = [&](double a) {
        const double ma = 1.0 + sign * g1 / a;
        const double ar = 1.0 - sign * f1 / a;
        return (a * a - 1.0) * ma * ma - snr * ar * ar;
    };

    double lo = 1.0;
    double hi = 1.0 + std::sqrt(snr) + std::abs(f1) + std::abs(g1) + 2.0;
    if (!(h(lo) < 0.0) || !(h(hi) > 0.0)) throw SolverFailure("first-order capacity equation has no bracketed root");
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::log2(0.5 * (lo + hi));
}

RateIntegral rate_integral(const PlantSpec& plant, const ArmaSpec& spec, std::size_t grid) {
    const LoopFilters lf = loop_filters(plant, spec);
    const StabilityVerdict st = closed_loop_stable(lf);
    if (st.verdict == Verdict::marginal) {
        throw IllConditionedIntegral("closed-loop pole on the unit circle (|z| = " + std::to_string(st.max_modulus) +
                                     ")");
    }
    RateIntegral out;
    out.bits = mean_log2_modulus(lf.sensitivity_num, lf.char_poly, grid);
    out.jensen_bits = jensen_log2_modulus(lf.sensitivity_num, lf.char_poly);
    out.log2_abs_a = std::log2(std::abs(plant.a));
    for (const Complex& r : st.poles.all()) {
        if (classify_modulus(std::abs(r)) == CircleRegion::outside) out.unstable_poles.push_back(r);
    }
    // Coarser grids are allowed for convergence studies; agreement is only enforced at full resolution.
    if (grid >= kDefaultGrid && std::abs(out.bits - out.jensen_bits) > kTolIntegral) {
        throw SolverFailure("rate integral quadrature disagrees with the closed form");
    }
    out.matches_log2_a = std::abs(out.bits - out.log2_abs_a) <= kTolIntegral;
    return out;
}

double achieved_power(const PlantSpec& plant, const ArmaSpec& spec) {
    const KalmanSteadyState s = steady_state_colored(plant, spec);
    return plant.c * plant.c * s.P;
}

}  // namespace fbcap
