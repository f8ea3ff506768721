#include "fbcap/coder.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fbcap/errors.hpp"

namespace fbcap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_variance(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(x.size());
}

void require_config(const SimConfig& cfg) {
    if (cfg.n_samples == 0) throw InvalidInput("simulation needs n_samples >= 1");
    if (!(cfg.divergence_threshold > 0.0)) throw InvalidInput("divergence threshold must be positive");
}

NoiseTrace drive(const ArmaSpec& spec, const SimConfig& cfg) {
    return generate(spec, cfg.burn_in + cfg.n_samples, default_burn_in(spec), cfg.seed);
}

SimReport diverged_report(SimMode mode, std::size_t step) {
    SimReport r;
    r.mode = mode;
    r.input_power = kNaN;
    r.innovation_variance = kNaN;
    r.whiteness_max_corr = kNaN;
    r.predicted_input_power = kNaN;
    r.diverged = true;
    r.diverged_at = step;
    return r;
}

void summarize(SimReport& r, std::span<const double> input, std::span<const double> innovation) {
    r.samples_used = input.size();
    r.input_power = sample_variance(input);
    r.innovation_variance = sample_variance(innovation);
    r.whiteness_max_corr =
        innovation.size() > kWhitenessLags ? max_abs_autocorrelation(innovation, kWhitenessLags) : kNaN;
}

}  // namespace

const char* to_string(SimMode m) noexcept { return m == SimMode::whitened ? "whitened" : "colored"; }

SimReport simulate_whitened(const PlantSpec& plant, const ArmaSpec& spec, const SimConfig& cfg,
                            const TraceSink& sink) {
    require_config(cfg);
    const KalmanSteadyState s = steady_state_colored(plant, spec);
    const NoiseTrace noise = drive(spec, cfg);
    const std::size_t total = noise.v_hat.size();

    std::vector<double> y(total), e(total);
    double x = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        y[k] = s.c_hat * x;
        e[k] = -y[k] + noise.v_hat[k];
        const double u = s.K_hat * e[k];
        if (sink && k >= cfg.burn_in) sink({k, x, y[k], e[k], u, noise.v_hat[k]});
        x = plant.a * x + u;
        if (!(std::abs(x) <= cfg.divergence_threshold)) return diverged_report(SimMode::whitened, k + 1);
    }

    SimReport r;
    r.mode = SimMode::whitened;
    const auto tail = [&](const std::vector<double>& xs) { return std::span<const double>(xs).subspan(cfg.burn_in); };
    summarize(r, tail(y), tail(e));
    r.predicted_input_power = (plant.a * plant.a - 1.0) * spec.sigma_hat_sq;
    r.prediction_available = true;
    return r;
}

SimReport simulate_colored(const PlantSpec& plant, const ArmaSpec& spec, const SimConfig& cfg,
                           const TraceSink& sink) {
    require_config(cfg);
    const KalmanSteadyState s = steady_state_colored(plant, spec);
    const NoiseTrace noise = drive(spec, cfg);
    const std::size_t total = noise.v.size();
    const std::size_t p = spec.p(), q = spec.q();

    std::vector<double> y(total), e(total), u(total);
    double x = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        y[k] = plant.c * x;
        e[k] = -y[k] + noise.v[k];
        double acc = e[k];
        for (std::size_t i = 1; i <= p && i <= k; ++i) acc -= spec.f[i - 1] * e[k - i];
        double uk = s.K_hat * acc;
        for (std::size_t j = 1; j <= q && j <= k; ++j) uk -= spec.g[j - 1] * u[k - j];
        u[k] = uk;
        if (sink && k >= cfg.burn_in) sink({k, x, y[k], e[k], uk, noise.v[k]});
        x = plant.a * x + uk;
        if (!(std::abs(x) <= cfg.divergence_threshold)) return diverged_report(SimMode::colored, k + 1);
    }

    SimReport r;
    r.mode = SimMode::colored;
    const std::vector<double> whitened = whiten_stream(spec, e);
    const auto tail = [&](const std::vector<double>& xs) { return std::span<const double>(xs).subspan(cfg.burn_in); };
    summarize(r, tail(y), tail(whitened));

    // y' = -B v = -B F vhat, so its variance is sigma^2 * mean |B F|^2 over the circle.
    const LoopFilters lf = loop_filters(plant, spec);
    if (closed_loop_stable(lf).verdict == Verdict::stable) {
        r.predicted_input_power = spec.sigma_hat_sq * mean_square_modulus(lf.B * shaping_filter(spec));
        r.prediction_available = true;
    } else {
        r.predicted_input_power = kNaN;
    }
    return r;
}

StabilityReport stability_report(const PlantSpec& plant, const ArmaSpec& spec) {
    const StabilityVerdict st = closed_loop_stable(loop_filters(plant, spec));
    StabilityReport r;
    r.verdict = st.verdict;
    r.poles = st.poles;
    r.max_modulus = st.max_modulus;
    r.whitened_pole = 1.0 / plant.a;
    r.matches_whitened_stability = st.verdict == Verdict::stable;
    return r;
}

}  // namespace fbcap
