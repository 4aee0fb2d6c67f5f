#pragma once

#include "knn/manifold.hpp"
#include "knn/numerics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace knn {

struct SampleConfig {
    long long N = 1;
    int k_max = 1;
    double alpha = 1.0;
    long long trials = 1;
    std::uint64_t seed = 0;
    int streams = 1;  // worker threads; results do not depend on it
    /// When set, every trial uses this query point instead of a fresh uniform one.
    std::optional<SurfacePoint> fixed_query;

    void validate() const;
};

/// Per-k compensated sums of D_k^alpha and its square over trials.
class Accumulator {
public:
    explicit Accumulator(int k_max = 0) : sum_(k_max), sumsq_(k_max) {}

    void add_trial(const std::vector<double>& values);
    void merge(const Accumulator& other);

    [[nodiscard]] int k_max() const { return static_cast<int>(sum_.size()); }
    [[nodiscard]] long long count() const { return count_; }
    /// k is 1-based.
    [[nodiscard]] double mean(int k) const;
    [[nodiscard]] double stderr_of_mean(int k) const;
    [[nodiscard]] const CompensatedSum& sum(int k) const { return sum_.at(k - 1); }
    [[nodiscard]] const CompensatedSum& sum_sq(int k) const { return sumsq_.at(k - 1); }

private:
    std::vector<CompensatedSum> sum_;
    std::vector<CompensatedSum> sumsq_;
    long long count_ = 0;
};

/// The k_max smallest distances from x to the sites, ascending. Ties are ordered by site
/// index. On the flat 2-D torus a bucket grid is used for large site counts; it returns
/// exactly what the brute-force scan returns.
std::vector<double> knn_distances(const Manifold& m, const SurfacePoint& x,
                                  const std::vector<SurfacePoint>& sites, int k_max);
std::vector<double> knn_distances_brute(const Manifold& m, const SurfacePoint& x,
                                        const std::vector<SurfacePoint>& sites, int k_max);
std::vector<double> knn_distances_grid(const SurfacePoint& x,
                                       const std::vector<SurfacePoint>& sites, int k_max);

/// Trial t draws its query point and then its N sites from RandomStream(seed, t). Trials are
/// grouped into fixed chunks merged in order, so the result is identical for any number of
/// streams.
Accumulator estimate_moments(const Manifold& m, const SampleConfig& cfg);

constexpr long long kTrialChunk = 1024;

struct ScalingPoint {
    long long N = 0;
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    double reduced = 0.0;  // mean over the leading asymptote
    double reduced_stderr = 0.0;
};

struct SubleadingFit {
    double c1 = 0.0;
    double c1_stderr = 0.0;
    std::optional<double> c2;
    std::optional<double> c2_stderr;
    bool weighted = true;
};

struct ScalingEstimate {
    long long k = 1;
    double gamma = 0.5;
    double c0 = 0.0;
    std::vector<ScalingPoint> points;
    std::optional<SubleadingFit> fit;

    /// Adds a point, forming the reduced value with c0 Gamma(k+gamma)/Gamma(k) N^-gamma.
    void add(long long N, double mean, double stderr_of_mean);
};

/// Least squares of reduced - 1 on 1/N (and 1/N^2 when `nuisance`), weighted by 1/stderr^2.
/// With all stderrs zero the fit is unweighted and its error comes from the residuals.
/// Throws std::invalid_argument unless the N grid spans at least a decade.
SubleadingFit fit_subleading(const ScalingEstimate& se, bool nuisance = false);

}  // namespace knn
