#pragma once

#include <boost/rational.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace knn {

using Rational = boost::rational<long long>;

/// Inverse disc-area function written as A^-1(w) = w^gamma * sum_j c_j w^(j*step).
/// On surfaces step is 1; the d-dimensional curvature expansion runs in w^(2/d).
struct PowerSeries {
    double gamma = 0.5;
    std::vector<double> coeffs;
    double step = 1.0;

    [[nodiscard]] int truncation_order() const { return static_cast<int>(coeffs.size()) - 1; }
    [[nodiscard]] double evaluate(double w) const;
    void validate() const;
};

/// Neighbour rank k, site count N and moment order alpha of <D_k^alpha(N)>.
struct MomentSpec {
    long long k = 1;
    long long N = 1;
    double alpha = 1.0;

    void validate() const;
};

struct DimensionSpec {
    int d = 2;
};

struct TopologyInfo {
    int chi = 2;
    int genus = 0;

    static TopologyInfo from_genus(int genus);
    static TopologyInfo from_chi(int chi);
};

/// 1/N expansion of the reduced mean <D~_k(N)>; coeffs[0] is always 1.
struct ReducedScalingSeries {
    long long k = 1;
    double gamma = 0.5;
    std::vector<double> one_over_N_coeffs;
    /// Exact coefficients, present when gamma was given as a rational.
    std::optional<std::vector<Rational>> exact_coeffs;

    [[nodiscard]] double evaluate(double N) const;
};

struct SeriesMean {
    double value = 0.0;
    double last_term = 0.0;
    bool truncation_warning = false;  // |terms| were not decreasing at the cut
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double partial, double residual)
        : std::runtime_error(what), partial_sum(partial), residual(residual) {}
    double partial_sum;
    double residual;
};

struct SphereSum {
    double value = 0.0;
    long long terms = 0;
    double tail_estimate = 0.0;
};

/// Beta-moment series sum_j c_j Gamma(k+j+g)/Gamma(k) Gamma(N+1)/Gamma(N+j+g+1).
/// Only alpha == 1; other moments go through quadrature.
SeriesMean mean_from_series(const PowerSeries& s, const MomentSpec& ms);

/// Leading constant [(d/2)!]^(1/d)/sqrt(pi) of the flat inverse A^-1(w) = c0 w^(1/d).
double flat_leading_coefficient(int d);

/// Exact flat-space mean: c0 Gamma(k+1/d)/Gamma(k) Gamma(N+1)/Gamma(N+1+1/d).
double flat_mean(DimensionSpec dim, const MomentSpec& ms);

/// Convergent arcsine series for the geodesic sphere of unit area (no sqrt(N) factor).
/// Terms are generated by their hypergeometric ratio; the algebraic tail beyond the
/// cut is added from the terms' power-law decay.
SphereSum sphere_mean_exact(const MomentSpec& ms, long long max_terms = 50'000'000);

/// Coefficients of arcsin(sqrt(w))/sqrt(pi) = sqrt(w/pi) sum_j w^j (2j)!/(4^j (j!)^2 (2j+1)).
PowerSeries sphere_inverse_series(int order);

/// A^-1(w) = c0 w^(1/d) for a flat d-dimensional space.
PowerSeries flat_inverse_series(int d);

/// Leading curved correction in d dimensions (conjectural for d > 2):
/// c0 w^(1/d) [1 + (d-1)/(d+2) K/6 c0^2 w^(2/d)] with c0 = [(d/2)!/pi^(d/2)]^(1/d).
PowerSeries curved_leading_inverse(int d, double K);

/// Expansion of N^gamma Gamma(N+1)/Gamma(N+gamma+1) in 1/N, exact in rationals.
ReducedScalingSeries reduced_series(Rational gamma, long long k, int order);
ReducedScalingSeries reduced_series(double gamma, long long k, int order);
/// Expansion of the full reduced mean for an inverse-area series with step 1.
ReducedScalingSeries reduced_series(const PowerSeries& s, long long k, int order);

/// O(1/N) coefficient of the surface-averaged reduced mean: (chi (2k+1) - 9) / 24.
double subleading_coeff(long long k, TopologyInfo topo);

/// Leading large-N asymptote c0 Gamma(k+gamma)/Gamma(k) N^-gamma used to form <D~_k(N)>.
double leading_asymptote(double c0, double gamma, long long k, long long N);

}  // namespace knn
