#pragma once

// Real-coefficient polynomials and rational transfer functions in the unit
// delay operator z^{-1}, plus the z-domain machinery (roots, unit-circle
// classification, log-modulus integrals) the rest of the library builds on.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace fbcap {

using Complex = std::complex<double>;

/// Distance from the unit circle below which a root counts as "on" it.
inline constexpr double kEpsCircle = 1e-9;
/// Relative tolerance used to merge nearly coincident roots.
inline constexpr double kRootDedupTol = 1e-8;
/// Default number of midpoint-rule nodes on the unit circle.
inline constexpr std::size_t kDefaultGrid = std::size_t{1} << 15;
/// Agreement required between quadrature and closed-form log-modulus values.
inline constexpr double kTolIntegral = 1e-6;

namespace detail {
struct DelayVariable {};
struct ForwardVariable {};
}  // namespace detail

/**
 * Dense real polynomial, coeffs[k] multiplying x^k, where the variable x is
 * fixed by the tag: z^{-1} for Poly, z for ZPoly.
 *
 * Trailing zeros are trimmed on construction; the zero polynomial is stored as
 * the single coefficient 0. Non-finite coefficients are rejected.
 */
template <class Variable>
class BasicPoly {
public:
    BasicPoly() : coeffs_{0.0} {}
    explicit BasicPoly(std::vector<double> coeffs);
    BasicPoly(std::initializer_list<double> coeffs)
        : BasicPoly(std::vector<double>(coeffs)) {}

    static BasicPoly constant(double value) { return BasicPoly({value}); }
    /// The monomial x^k.
    static BasicPoly monomial(std::size_t k);

    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    double leading() const noexcept { return coeffs_.back(); }
    /// Coefficient of x^k, zero beyond the degree.
    double operator[](std::size_t k) const noexcept {
        return k < coeffs_.size() ? coeffs_[k] : 0.0;
    }
    double max_abs_coeff() const noexcept;

    /// Horner evaluation of sum_k coeffs[k] x^k.
    Complex evaluate(Complex x) const noexcept;
    double evaluate(double x) const noexcept;

    BasicPoly derivative() const;
    /// Multiply by x^k.
    BasicPoly shifted(std::size_t k) const;

    friend BasicPoly operator+(const BasicPoly& a, const BasicPoly& b) { return combine(a, b, 1.0); }
    friend BasicPoly operator-(const BasicPoly& a, const BasicPoly& b) { return combine(a, b, -1.0); }
    friend BasicPoly operator*(const BasicPoly& a, const BasicPoly& b) { return multiply(a, b); }
    friend BasicPoly operator*(double s, const BasicPoly& a) { return scale(s, a); }
    friend bool operator==(const BasicPoly&, const BasicPoly&) = default;

private:
    static BasicPoly combine(const BasicPoly& a, const BasicPoly& b, double sign);
    static BasicPoly multiply(const BasicPoly& a, const BasicPoly& b);
    static BasicPoly scale(double s, const BasicPoly& a);
    std::vector<double> coeffs_;
};

/// Polynomial in the unit delay: coeffs[k] multiplies z^{-k}.
using Poly = BasicPoly<detail::DelayVariable>;
/// Polynomial in positive powers of z: coeffs[k] multiplies z^k.
using ZPoly = BasicPoly<detail::ForwardVariable>;

extern template class BasicPoly<detail::DelayVariable>;
extern template class BasicPoly<detail::ForwardVariable>;

/// z^d p(z^{-1}) for d = degree(p): the same coefficients read in descending powers of z.
ZPoly lift(const Poly& p);
/// Inverse of lift for a polynomial of degree d: z^{-d} p(z).
Poly unlift(const ZPoly& p);

/// Value of a delay polynomial at a point z of the z-plane (z != 0).
Complex eval_at(const Poly& p, Complex z);
inline Complex eval_at(const ZPoly& p, Complex z) { return p.evaluate(z); }

struct Root {
    Complex value;
    int multiplicity = 1;
};

/**
 * Roots of a polynomial in z, one entry per root counted with multiplicity,
 * sorted by (modulus, argument). Complex roots come in exact conjugate pairs.
 */
class RootSet {
public:
    RootSet() = default;
    explicit RootSet(std::vector<Complex> roots);

    const std::vector<Complex>& all() const& noexcept { return roots_; }
    std::vector<Complex> all() && noexcept { return std::move(roots_); }
    std::size_t size() const noexcept { return roots_.size(); }
    bool empty() const noexcept { return roots_.empty(); }
    double max_modulus() const noexcept;
    /// Roots merged within kRootDedupTol (relative), with multiplicities.
    std::vector<Root> distinct() const;
    /// Roots whose imaginary part is below tol * (1 + |real|), as reals.
    std::vector<double> real_roots(double tol) const;

private:
    std::vector<Complex> roots_;
};

/// Roots in z of z^d p(z^{-1}). Throws InvalidInput for the zero polynomial.
RootSet z_roots(const Poly& p);
/// Roots of a polynomial in z. Throws InvalidInput for the zero polynomial.
RootSet roots(const ZPoly& p);

enum class CircleRegion { inside, marginal, outside };

CircleRegion classify_modulus(double modulus) noexcept;

/// True iff every z-root lies strictly inside the unit circle (by kEpsCircle).
bool is_minimum_phase(const Poly& p);

/**
 * Causal rational filter num(z^{-1}) / den(z^{-1}) with den(0) != 0.
 */
class RationalFilter {
public:
    RationalFilter() : num_(Poly::constant(1.0)), den_(Poly::constant(1.0)) {}
    RationalFilter(Poly num, Poly den);

    const Poly& num() const noexcept { return num_; }
    const Poly& den() const noexcept { return den_; }

    /// num/den swapped. Throws InvalidInput if num(0) == 0 (inverse not causal).
    RationalFilter reciprocal() const;
    /// Cancels root pairs shared by num and den (within kRootDedupTol).
    RationalFilter reduced() const;

    friend RationalFilter operator*(const RationalFilter& a, const RationalFilter& b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend RationalFilter operator*(double s, const RationalFilter& a) { return {s * a.num_, a.den_}; }

private:
    Poly num_;
    Poly den_;
};

/// First n+1 impulse-response coefficients by power-series long division.
std::vector<double> series_expand(const RationalFilter& r, std::size_t n);

/// num(z^{-1}) / den(z^{-1}); throws EvaluationAtPole when den vanishes at z.
Complex eval_at(const RationalFilter& r, Complex z);

/**
 * (1/2pi) * integral over the unit circle of log2 |num(e^{jw}) / den(e^{jw})|
 * by the composite midpoint rule on `grid` nodes.
 *
 * Throws IllConditionedIntegral if either polynomial has a root within
 * kEpsCircle of the unit circle.
 */
double mean_log2_modulus(const ZPoly& num, const ZPoly& den, std::size_t grid = kDefaultGrid);

/// Closed form of the same integral: log2|lead ratio| + sum of log2 max(|root|, 1) differences.
double jensen_log2_modulus(const ZPoly& num, const ZPoly& den);

/// (1/2pi) * integral of |r(e^{jw})|^2 by the midpoint rule; the filter must be stable.
double mean_square_modulus(const RationalFilter& r, std::size_t grid = kDefaultGrid);

/// Linear convolution of two sequences.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace fbcap
