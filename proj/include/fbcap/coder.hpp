#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "fbcap/kalman.hpp"
#include "fbcap/noise.hpp"

namespace fbcap {

struct SimConfig {
    std::size_t n_samples = 1'000'000;
    std::size_t burn_in = 1'000;
    std::uint64_t seed = 1;
    double divergence_threshold = 1e12;
};

enum class SimMode { whitened, colored };

const char* to_string(SimMode m) noexcept;

/// One loop step. In whitened mode y_prime/e_prime/v carry y~, e and vhat.
struct TraceRecord {
    std::size_t k = 0;
    double x_tilde = 0.0;
    double y_prime = 0.0;
    double e_prime = 0.0;
    double u = 0.0;
    double v = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/**
 * Moments of a closed-loop run over the samples after burn-in. When the loop
 * diverges the moment fields are NaN and diverged_at holds the offending step.
 */
struct SimReport {
    SimMode mode = SimMode::whitened;
    double input_power = 0.0;          ///< sample variance of the channel input
    double innovation_variance = 0.0;  ///< e (whitened) or F^{-1} e' (colored)
    double whiteness_max_corr = 0.0;   ///< max |normalized autocorrelation|, lags 1..kWhitenessLags
    bool diverged = false;
    std::optional<std::size_t> diverged_at;
    double predicted_input_power = 0.0;  ///< NaN when no frequency-domain prediction exists
    bool prediction_available = false;
    std::size_t samples_used = 0;
};

inline constexpr std::size_t kWhitenessLags = 20;

/// Steady-state loop on whitened observations: x~' = a x~ + u, y~ = c_hat x~, e = vhat - y~, u = K_hat e.
SimReport simulate_whitened(const PlantSpec& plant, const ArmaSpec& spec, const SimConfig& cfg,
                            const TraceSink& sink = {});

/**
 * Transformed coding loop driven by the colored noise:
 *   y' = c x~, e' = v - y', u = K_hat (e' - sum f_i e'_{k-i}) - sum g_j u_{k-j}, x~' = a x~ + u.
 */
SimReport simulate_colored(const PlantSpec& plant, const ArmaSpec& spec, const SimConfig& cfg,
                           const TraceSink& sink = {});

struct StabilityReport {
    Verdict verdict = Verdict::stable;
    RootSet poles;       ///< roots of chi
    double max_modulus = 0.0;
    double whitened_pole = 0.0;  ///< 1 / a, the pole of the whitened loop
    bool matches_whitened_stability = false;  ///< transformed loop is stable, as the whitened one is
};

StabilityReport stability_report(const PlantSpec& plant, const ArmaSpec& spec);

}  // namespace fbcap
