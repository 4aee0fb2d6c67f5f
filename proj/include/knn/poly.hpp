#pragma once

#include <cstddef>
#include <vector>

/// Truncated formal power series in one variable. A `Coeffs` vector holds
/// the coefficients of x^0, x^1, ... ; every operation truncates at `order`.
namespace knn::poly {

using Coeffs = std::vector<double>;

Coeffs multiply(const Coeffs& a, const Coeffs& b, std::size_t order);

/// p(x)^alpha for real alpha via Miller's recurrence. Requires p[0] != 0
/// (p[0] must be positive when alpha is not an integer).
Coeffs power(const Coeffs& p, double alpha, std::size_t order);

/// Series reversion. Given s = x * q(x) with q[0] != 0, returns r such that
/// x = s * r(s), using Lagrange inversion: [s^(m+1)] x = [x^m] q^-(m+1) / (m+1).
Coeffs revert(const Coeffs& q, std::size_t order);

/// Composition a(b(x)) where b has zero constant term.
Coeffs compose(const Coeffs& a, const Coeffs& b, std::size_t order);

double evaluate(const Coeffs& p, double x);

}  // namespace knn::poly
