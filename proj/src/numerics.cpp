#include "knn/numerics.hpp"

#include <boost/math/policies/policy.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <queue>

namespace knn {

namespace {

using QuietPolicy = boost::math::policies::policy<
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::domain_error<boost::math::policies::errno_on_error>,
    boost::math::policies::pole_error<boost::math::policies::errno_on_error>,
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>>;

constexpr double kRoundoffFloor = 32.0 * std::numeric_limits<double>::epsilon();

bool usable(double r) { return std::isfinite(r) && r > std::numeric_limits<double>::min(); }

}  // namespace

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    comp_ += other.comp_;
}

double log_gamma_ratio(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("log_gamma_ratio: arguments must be positive");
    if (a == b)
        return 0.0;
    const double r = boost::math::tgamma_ratio(a, b, QuietPolicy());
    if (usable(r))
        return std::log(r);
    return std::lgamma(a) - std::lgamma(b);
}

double gamma_ratio(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("gamma_ratio: arguments must be positive");
    if (a == b)
        return 1.0;
    const double r = boost::math::tgamma_ratio(a, b, QuietPolicy());
    if (usable(r))
        return r;
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

double log_order_stat_norm(long long k, long long N) {
    if (k < 1 || N < k)
        throw std::domain_error("log_order_stat_norm: need 1 <= k <= N");
    // Gamma(N+1)/Gamma(N-k+1) as a product of k logs keeps the absolute error at O(k ulp),
    // where a difference of two lgamma values near 1e6 would lose ten digits.
    if (k <= 4096) {
        CompensatedSum s;
        for (long long i = 0; i < k; ++i)
            s.add(std::log(static_cast<double>(N - i)));
        return s.value() - std::lgamma(static_cast<double>(k));
    }
    return std::lgamma(static_cast<double>(N) + 1.0) -
           std::lgamma(static_cast<double>(N - k) + 1.0) - std::lgamma(static_cast<double>(k));
}

double incomplete_beta_upper(double a, double b, double x) {
    if (x <= 0.0)
        return 1.0;
    if (x >= 1.0)
        return 0.0;
    return boost::math::ibetac(a, b, x);
}

Integral integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, unsigned max_depth) {
    Integral out;
    if (a == b)
        return out;
    // Global bisection on a fixed 21-point Kronrod rule: always split the panel with the
    // largest error. Stops at rel_tol * |I| or at the round-off floor, so integrals that
    // vanish by cancellation still terminate.
    struct Panel {
        double a, b, value, error, l1;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto rule = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0, 0.0};
        p.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 0, 0.0,
                                                                              &p.error, &p.l1);
        // Boost (1.74) scales L1 to [lo, hi] but leaves the error estimate on [-1, 1].
        p.error *= 0.5 * (hi - lo);
        return p;
    };
    std::priority_queue<Panel> heap;
    heap.push(rule(a, b));
    double value = heap.top().value, error = heap.top().error, l1 = heap.top().l1;
    const std::size_t max_panels = std::size_t{1} << std::min(max_depth, 16u);
    while (heap.size() < max_panels &&
           error > std::max(rel_tol * std::abs(value), kRoundoffFloor * l1)) {
        const Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            break;
        heap.pop();
        const Panel left = rule(worst.a, mid);
        const Panel right = rule(mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    CompensatedSum v, e, n;
    for (; !heap.empty(); heap.pop()) {
        v.add(heap.top().value);
        e.add(heap.top().error);
        n.add(heap.top().l1);
    }
    out.value = v.value();
    out.l1 = n.value();
    out.error = std::max(e.value(), kRoundoffFloor * out.l1);
    return out;
}

Integral integrate_rectangle(const std::function<double(double, double)>& f, double u0,
                             double u1, double v0, double v1, double rel_tol) {
    // Outer integral runs over v so that surfaces of revolution (f independent of u)
    // reduce to a single well-conditioned 1-D outer integral.
    double inner_err_total = 0.0;
    auto outer = [&](double v) {
        Integral in = integrate_adaptive([&](double u) { return f(u, v); }, u0, u1, rel_tol, 12);
        inner_err_total = std::max(inner_err_total, in.error);
        return in.value;
    };
    Integral out = integrate_adaptive(outer, v0, v1, rel_tol, 12);
    out.error += inner_err_total * std::abs(v1 - v0);
    return out;
}

}  // namespace knn
