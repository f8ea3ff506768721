#include "fbcap/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fbcap/errors.hpp"

namespace fbcap {

namespace {

std::string format_root(const Complex& r) {
    std::ostringstream os;
    os.precision(6);
    os << r.real();
    if (r.imag() != 0.0) os << (r.imag() < 0 ? "-" : "+") << std::abs(r.imag()) << "j";
    return os.str();
}

void check_min_phase(const Poly& p, const char* field, const char* label, std::vector<Violation>& out) {
    if (p.degree() == 0) return;
    for (const Complex& r : z_roots(p).all()) {
        if (classify_modulus(std::abs(r)) != CircleRegion::inside) {
            out.push_back({field, std::string(label) + " root " + format_root(r) + " outside unit disk (|z| = " +
                                      std::to_string(std::abs(r)) + ")"});
        }
    }
}

}  // namespace

Poly ArmaSpec::ar_poly() const {
    std::vector<double> c{1.0};
    for (double fi : f) c.push_back(-fi);
    return Poly(std::move(c));
}

Poly ArmaSpec::ma_poly() const {
    std::vector<double> c{1.0};
    c.insert(c.end(), g.begin(), g.end());
    return Poly(std::move(c));
}

std::vector<Violation> validate(const ArmaSpec& spec) {
    std::vector<Violation> out;
    const auto finite = [](const std::vector<double>& xs) {
        return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(spec.f)) out.push_back({"f", "AR coefficients must be finite"});
    if (!finite(spec.g)) out.push_back({"g", "MA coefficients must be finite"});
    if (out.empty()) {
        check_min_phase(spec.ar_poly(), "f", "AR", out);
        check_min_phase(spec.ma_poly(), "g", "MA", out);
    }
    if (!(spec.sigma_hat_sq > 0.0) || !std::isfinite(spec.sigma_hat_sq)) {
        out.push_back({"sigma_hat_sq", "sigma_hat_sq must be positive"});
    }
    return out;
}

void require_valid(const ArmaSpec& spec) {
    const auto violations = validate(spec);
    if (violations.empty()) return;
    std::string msg = "invalid ARMA spec:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    msg.pop_back();
    throw InvalidSpec(msg);
}

RationalFilter shaping_filter(const ArmaSpec& spec) {
    require_valid(spec);
    return {spec.ma_poly(), spec.ar_poly()};
}

RationalFilter whitening_filter(const ArmaSpec& spec) {
    require_valid(spec);
    return {spec.ar_poly(), spec.ma_poly()};
}

std::vector<double> whitening_taps(const ArmaSpec& spec, std::size_t n) {
    const auto impulse = series_expand(whitening_filter(spec), n);
    std::vector<double> h(n);
    for (std::size_t i = 1; i <= n; ++i) h[i - 1] = -impulse[i];
    return h;
}

std::size_t default_burn_in(const ArmaSpec& spec) {
    double r_max = 0.0;
    if (spec.p() > 0) r_max = std::max(r_max, z_roots(spec.ar_poly()).max_modulus());
    if (spec.q() > 0) r_max = std::max(r_max, z_roots(spec.ma_poly()).max_modulus());
    // Slack keeps exact reciprocals such as 1 / (1 - 0.9) from rounding up a step.
    const double span = std::ceil(1.0 / (1.0 - std::min(r_max, 1.0 - 1e-12)) - 1e-9);
    return 10 * (spec.p() + spec.q() + 1) * static_cast<std::size_t>(span);
}

double GaussianSource::uniform_signed() {
    // 53-bit uniform in [0, 1), mapped to [-1, 1)
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

double GaussianSource::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double x, y, s;
    do {
        x = uniform_signed();
        y = uniform_signed();
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * factor;
    has_spare_ = true;
    return x * factor;
}

NoiseTrace generate(const ArmaSpec& spec, std::size_t n, std::size_t burn_in, std::uint64_t seed) {
    require_valid(spec);
    if (n == 0) throw InvalidInput("generate needs at least one sample");

    GaussianSource source(seed);
    const double sigma = std::sqrt(spec.sigma_hat_sq);
    const std::size_t total = n + burn_in;
    std::vector<double> v(total), v_hat(total);
    for (std::size_t k = 0; k < total; ++k) {
        v_hat[k] = sigma * source.next();
        double acc = v_hat[k];
        for (std::size_t i = 1; i <= spec.p() && i <= k; ++i) acc += spec.f[i - 1] * v[k - i];
        for (std::size_t j = 1; j <= spec.q() && j <= k; ++j) acc += spec.g[j - 1] * v_hat[k - j];
        v[k] = acc;
    }
    v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(burn_in));
    v_hat.erase(v_hat.begin(), v_hat.begin() + static_cast<std::ptrdiff_t>(burn_in));
    return {std::move(v), std::move(v_hat), seed};
}

std::vector<double> whiten_stream(const ArmaSpec& spec, std::span<const double> v) {
    require_valid(spec);
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        double acc = v[k];
        for (std::size_t i = 1; i <= spec.p() && i <= k; ++i) acc -= spec.f[i - 1] * v[k - i];
        for (std::size_t j = 1; j <= spec.q() && j <= k; ++j) acc -= spec.g[j - 1] * out[k - j];
        out[k] = acc;
    }
    return out;
}

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
    if (x.empty()) throw InvalidInput("autocovariance of an empty sequence");
    if (x.size() <= max_lag) throw InvalidInput("autocovariance lag exceeds sequence length");
    const auto n = static_cast<double>(x.size());
    std::vector<double> gamma(max_lag + 1, 0.0);
    for (std::size_t l = 0; l <= max_lag; ++l) {
        double acc = 0.0;
        for (std::size_t k = 0; k + l < x.size(); ++k) acc += x[k] * x[k + l];
        gamma[l] = acc / n;
    }
    return gamma;
}

double max_abs_autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const auto gamma = autocovariance(x, max_lag);
    if (gamma[0] == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t l = 1; l <= max_lag; ++l) worst = std::max(worst, std::abs(gamma[l] / gamma[0]));
    return worst;
}

}  // namespace fbcap
