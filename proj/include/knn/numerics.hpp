#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace knn {

/// Raised when an adaptive quadrature cannot reach its requested tolerance.
/// Carries the best estimate obtained so the caller can still report it.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best, double residual)
        : std::runtime_error(what), best_estimate(best), residual(residual) {}
    double best_estimate;
    double residual;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    void merge(const CompensatedSum& other) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }
    [[nodiscard]] double raw_sum() const noexcept { return sum_; }
    [[nodiscard]] double compensation() const noexcept { return comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(Gamma(a) / Gamma(b)) for a, b > 0, accurate when a and b are large and close.
double log_gamma_ratio(double a, double b);

/// Gamma(a) / Gamma(b); falls back to log space when the direct ratio leaves double range.
double gamma_ratio(double a, double b);

/// log[Gamma(N+1) / (Gamma(N-k+1) Gamma(k))], the log of the order-statistic normaliser.
double log_order_stat_norm(long long k, long long N);

/// Regularised upper incomplete Beta function, 1 - I_x(a, b).
double incomplete_beta_upper(double a, double b, double x);

struct Integral {
    double value = 0.0;
    double error = 0.0;  // includes a round-off floor proportional to the L1 norm
    double l1 = 0.0;
};

/// Globally adaptive 21-point Gauss-Kronrod on [a, b] with at most 2^max_depth panels.
/// Never throws on tolerance; callers compare `error` against their own requirement.
Integral integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, unsigned max_depth = 14);

/// Two-dimensional adaptive integral over a rectangle by nested Gauss-Kronrod.
Integral integrate_rectangle(const std::function<double(double, double)>& f, double u0,
                             double u1, double v0, double v1, double rel_tol);

}  // namespace knn
