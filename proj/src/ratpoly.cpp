#include "fbcap/ratpoly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fbcap/errors.hpp"

namespace fbcap {

namespace {

void trim(std::vector<double>& c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    if (c.empty()) c.push_back(0.0);
}

bool root_order(const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
}

// Newton refinement on p; keeps the iterate only while the residual shrinks.
Complex polish(const ZPoly& p, const ZPoly& dp, Complex r, int steps) {
    double best = std::abs(p.evaluate(r));
    for (int i = 0; i < steps && best > 0.0; ++i) {
        const Complex d = dp.evaluate(r);
        if (d == Complex{}) break;
        const Complex next = r - p.evaluate(r) / d;
        const double res = std::abs(p.evaluate(next));
        if (!(res < best)) break;
        r = next;
        best = res;
    }
    return r;
}

// Replaces each complex root and its nearest conjugate partner by their mean.
void symmetrize_conjugates(std::vector<Complex>& roots) {
    std::vector<bool> done(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (done[i]) continue;
        const double scale = 1.0 + std::abs(roots[i]);
        if (std::abs(roots[i].imag()) <= 1e-14 * scale) {
            roots[i] = {roots[i].real(), 0.0};
            done[i] = true;
            continue;
        }
        std::size_t partner = roots.size();
        double best = 0.0;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (j == i || done[j]) continue;
            const double d = std::abs(roots[j] - std::conj(roots[i]));
            if (partner == roots.size() || d < best) {
                partner = j;
                best = d;
            }
        }
        done[i] = true;
        if (partner == roots.size()) continue;
        const Complex upper = roots[i].imag() > 0 ? roots[i] : std::conj(roots[i]);
        const Complex other = roots[partner].imag() > 0 ? roots[partner] : std::conj(roots[partner]);
        const Complex mean = 0.5 * (upper + other);
        roots[i] = mean;
        roots[partner] = std::conj(mean);
        done[partner] = true;
    }
}

void require_no_circle_roots(const ZPoly& p, const char* which) {
    if (p.degree() == 0) return;
    for (const Complex& r : roots(p).all()) {
        if (std::abs(std::abs(r) - 1.0) < kEpsCircle) {
            throw IllConditionedIntegral(std::string(which) + " polynomial has a root on the unit circle (|z| = " +
                                         std::to_string(std::abs(r)) + ")");
        }
    }
}

double log2_outside_product(const ZPoly& p) {
    double acc = std::log2(std::abs(p.leading()));
    if (p.degree() == 0) return acc;
    for (const Complex& r : roots(p).all()) acc += std::log2(std::max(std::abs(r), 1.0));
    return acc;
}

}  // namespace

template <class V>
BasicPoly<V>::BasicPoly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) throw InvalidInput("polynomial coefficient is not finite");
    }
    trim(coeffs_);
}

template <class V>
BasicPoly<V> BasicPoly<V>::monomial(std::size_t k) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = 1.0;
    return BasicPoly(std::move(c));
}

template <class V>
double BasicPoly<V>::max_abs_coeff() const noexcept {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

template <class V>
Complex BasicPoly<V>::evaluate(Complex x) const noexcept {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

template <class V>
double BasicPoly<V>::evaluate(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

template <class V>
BasicPoly<V> BasicPoly<V>::derivative() const {
    if (coeffs_.size() == 1) return BasicPoly();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return BasicPoly(std::move(d));
}

template <class V>
BasicPoly<V> BasicPoly<V>::shifted(std::size_t k) const {
    if (is_zero()) return *this;
    std::vector<double> c(k, 0.0);
    c.insert(c.end(), coeffs_.begin(), coeffs_.end());
    return BasicPoly(std::move(c));
}

template <class V>
BasicPoly<V> BasicPoly<V>::combine(const BasicPoly& a, const BasicPoly& b, double sign) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + sign * b[k];
    return BasicPoly(std::move(c));
}

template <class V>
BasicPoly<V> BasicPoly<V>::multiply(const BasicPoly& a, const BasicPoly& b) {
    return BasicPoly<V>(convolve(a.coeffs(), b.coeffs()));
}

template <class V>
BasicPoly<V> BasicPoly<V>::scale(double s, const BasicPoly& a) {
    std::vector<double> c = a.coeffs();
    for (double& x : c) x *= s;
    return BasicPoly<V>(std::move(c));
}

template class BasicPoly<detail::DelayVariable>;
template class BasicPoly<detail::ForwardVariable>;

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

ZPoly lift(const Poly& p) {
    std::vector<double> c(p.coeffs().rbegin(), p.coeffs().rend());
    return ZPoly(std::move(c));
}

Poly unlift(const ZPoly& p) {
    std::vector<double> c(p.coeffs().rbegin(), p.coeffs().rend());
    return Poly(std::move(c));
}

Complex eval_at(const Poly& p, Complex z) {
    if (z == Complex{}) {
        if (p.degree() == 0) return p[0];
        throw EvaluationAtPole("delay polynomial evaluated at z = 0");
    }
    return p.evaluate(1.0 / z);
}

RootSet::RootSet(std::vector<Complex> roots) : roots_(std::move(roots)) {
    std::sort(roots_.begin(), roots_.end(), root_order);
}

double RootSet::max_modulus() const noexcept {
    double m = 0.0;
    for (const Complex& r : roots_) m = std::max(m, std::abs(r));
    return m;
}

std::vector<Root> RootSet::distinct() const {
    std::vector<Root> out;
    for (const Complex& r : roots_) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Root& d) {
            return std::abs(d.value - r) <= kRootDedupTol * std::max(1.0, std::abs(r));
        });
        if (it == out.end()) {
            out.push_back({r, 1});
        } else {
            ++it->multiplicity;
        }
    }
    return out;
}

std::vector<double> RootSet::real_roots(double tol) const {
    std::vector<double> out;
    for (const Complex& r : roots_) {
        if (std::abs(r.imag()) < tol * (1.0 + std::abs(r.real()))) out.push_back(r.real());
    }
    return out;
}

RootSet roots(const ZPoly& p) {
    if (p.is_zero()) throw InvalidInput("roots of the zero polynomial are undefined");
    const auto& c = p.coeffs();
    std::size_t zeros = 0;
    while (c[zeros] == 0.0) ++zeros;

    std::vector<Complex> out(zeros, Complex{});
    const ZPoly reduced(std::vector<double>(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end()));
    const auto n = static_cast<Eigen::Index>(reduced.degree());
    if (n > 0) {
        // Companion matrix of the monic polynomial; its eigenvalues are the roots.
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            companion(i, n - 1) = -reduced[static_cast<std::size_t>(i)] / reduced.leading();
        }
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        if (solver.info() != Eigen::Success) throw SolverFailure("companion eigenvalue iteration did not converge");
        const ZPoly dp = reduced.derivative();
        std::vector<Complex> found;
        found.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) found.push_back(polish(reduced, dp, solver.eigenvalues()[i], 3));
        symmetrize_conjugates(found);
        out.insert(out.end(), found.begin(), found.end());
    }
    return RootSet(std::move(out));
}

RootSet z_roots(const Poly& p) {
    if (p.is_zero()) throw InvalidInput("z_roots of the zero polynomial are undefined");
    return roots(lift(p));
}

CircleRegion classify_modulus(double modulus) noexcept {
    if (modulus < 1.0 - kEpsCircle) return CircleRegion::inside;
    if (modulus > 1.0 + kEpsCircle) return CircleRegion::outside;
    return CircleRegion::marginal;
}

bool is_minimum_phase(const Poly& p) {
    if (p[0] == 0.0) throw InvalidInput("minimum-phase test needs a nonzero constant term");
    return classify_modulus(z_roots(p).max_modulus()) == CircleRegion::inside;
}

RationalFilter::RationalFilter(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_[0] == 0.0) throw InvalidInput("denominator must have a nonzero constant term");
}

RationalFilter RationalFilter::reciprocal() const {
    if (num_[0] == 0.0) throw InvalidInput("inverse of a strictly causal filter is not causal");
    return {den_, num_};
}

RationalFilter RationalFilter::reduced() const {
    if (num_.is_zero() || num_.degree() == 0 || den_.degree() == 0) return *this;
    std::vector<Complex> zeros = z_roots(num_).all();
    std::vector<Complex> poles = z_roots(den_).all();
    bool cancelled = false;
    for (auto zi = zeros.begin(); zi != zeros.end();) {
        auto pi = std::find_if(poles.begin(), poles.end(), [&](const Complex& p) {
            return std::abs(p - *zi) <= kRootDedupTol * std::max(1.0, std::abs(p));
        });
        if (pi == poles.end()) {
            ++zi;
            continue;
        }
        poles.erase(pi);
        zi = zeros.erase(zi);
        cancelled = true;
    }
    if (!cancelled) return *this;

    // Rebuild 1 - sum r z^{-1} factors; constant terms keep the filter's gain at z -> infinity.
    auto rebuild = [](const std::vector<Complex>& rs, double gain) {
        std::vector<Complex> c{1.0};
        for (const Complex& r : rs) {
            std::vector<Complex> next(c.size() + 1, 0.0);
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k] += c[k];
                next[k + 1] -= r * c[k];
            }
            c = std::move(next);
        }
        std::vector<double> re(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) re[k] = gain * c[k].real();
        return Poly(std::move(re));
    };
    // A delay polynomial with leading zeros has roots at infinity that lift() drops; keep them as a pure delay.
    std::size_t num_delay = 0;
    while (num_[num_delay] == 0.0) ++num_delay;
    const Poly num = rebuild(zeros, num_[num_delay]).shifted(num_delay);
    const Poly den = rebuild(poles, den_[0]);
    return {num, den};
}

std::vector<double> series_expand(const RationalFilter& r, std::size_t n) {
    const Poly& num = r.num();
    const Poly& den = r.den();
    std::vector<double> h(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        double acc = num[k];
        const std::size_t top = std::min(k, den.degree());
        for (std::size_t i = 1; i <= top; ++i) acc -= den[i] * h[k - i];
        h[k] = acc / den[0];
    }
    return h;
}

Complex eval_at(const RationalFilter& r, Complex z) {
    if (z == Complex{}) {
        // Limit at z = 0 in lifted form: z^{dd - dn} N(z) / D(z), D(0) = leading delay coefficient.
        const ZPoly n = lift(r.num());
        const ZPoly d = lift(r.den());
        if (r.num().is_zero()) return 0.0;
        if (r.num().degree() > r.den().degree()) throw EvaluationAtPole("pole at z = 0");
        if (r.num().degree() < r.den().degree()) return 0.0;
        return n[0] / d[0];
    }
    const Complex w = 1.0 / z;
    const Complex den = r.den().evaluate(w);
    double scale = 0.0;
    double wk = 1.0;
    for (double c : r.den().coeffs()) {
        scale += std::abs(c) * wk;
        wk *= std::abs(w);
    }
    if (std::abs(den) <= 1e-13 * scale) throw EvaluationAtPole("denominator vanishes at the evaluation point");
    return r.num().evaluate(w) / den;
}

double mean_log2_modulus(const ZPoly& num, const ZPoly& den, std::size_t grid) {
    if (num.is_zero() || den.is_zero()) throw InvalidInput("log-modulus of a zero polynomial");
    if (grid == 0) throw InvalidInput("quadrature grid must have at least one node");
    require_no_circle_roots(num, "numerator");
    require_no_circle_roots(den, "denominator");

    const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);
    double sum = 0.0, carry = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
        const double w = -std::numbers::pi + (static_cast<double>(k) + 0.5) * step;
        const Complex z = std::polar(1.0, w);
        const double term = std::log2(std::abs(num.evaluate(z))) - std::log2(std::abs(den.evaluate(z)));
        // Kahan summation
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(grid);
}

double jensen_log2_modulus(const ZPoly& num, const ZPoly& den) {
    if (num.is_zero() || den.is_zero()) throw InvalidInput("log-modulus of a zero polynomial");
    return log2_outside_product(num) - log2_outside_product(den);
}

double mean_square_modulus(const RationalFilter& r, std::size_t grid) {
    if (grid == 0) throw InvalidInput("quadrature grid must have at least one node");
    if (r.den().degree() > 0 && classify_modulus(z_roots(r.den()).max_modulus()) != CircleRegion::inside) {
        throw IllConditionedIntegral("mean-square gain of a filter that is not stable");
    }
    const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);
    double sum = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
        const double w = -std::numbers::pi + (static_cast<double>(k) + 0.5) * step;
        const Complex zinv = std::polar(1.0, -w);
        sum += std::norm(r.num().evaluate(zinv) / r.den().evaluate(zinv));
    }
    return sum / static_cast<double>(grid);
}

}  // namespace fbcap
