#include "knn/mc.hpp"

#include "knn/series.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace knn {

namespace {

// Keeps the k smallest (key, index) pairs in ascending lexicographic order.
class BestK {
public:
    explicit BestK(int k) : k_(k) {
        keys_.reserve(k);
        idx_.reserve(k);
    }

    [[nodiscard]] bool full() const { return static_cast<int>(keys_.size()) == k_; }
    [[nodiscard]] double worst() const { return keys_.back(); }

    void offer(double key, std::size_t index) {
        if (full() && !(key < keys_.back() || (key == keys_.back() && index < idx_.back())))
            return;
        if (full()) {
            keys_.pop_back();
            idx_.pop_back();
        }
        std::size_t pos = keys_.size();
        while (pos > 0 && (key < keys_[pos - 1] || (key == keys_[pos - 1] && index < idx_[pos - 1])))
            --pos;
        keys_.insert(keys_.begin() + static_cast<std::ptrdiff_t>(pos), key);
        idx_.insert(idx_.begin() + static_cast<std::ptrdiff_t>(pos), index);
    }

    [[nodiscard]] const std::vector<double>& keys() const { return keys_; }

private:
    int k_;
    std::vector<double> keys_;
    std::vector<std::size_t> idx_;
};

void check_request(const std::vector<SurfacePoint>& sites, int k_max) {
    if (k_max < 1)
        throw std::invalid_argument("knn_distances: k_max must be >= 1");
    if (static_cast<long long>(sites.size()) < k_max)
        throw std::invalid_argument("knn_distances: fewer sites than k_max");
}

constexpr std::size_t kGridThreshold = 64;

}  // namespace

void SampleConfig::validate() const {
    if (k_max < 1)
        throw std::invalid_argument("SampleConfig: k_max must be >= 1");
    if (N < k_max)
        throw std::invalid_argument("SampleConfig: k_max must not exceed N");
    if (trials < 1)
        throw std::invalid_argument("SampleConfig: trials must be >= 1");
    if (!(alpha > 0.0))
        throw std::invalid_argument("SampleConfig: alpha must be positive");
    if (streams < 1)
        throw std::invalid_argument("SampleConfig: streams must be >= 1");
}

void Accumulator::add_trial(const std::vector<double>& values) {
    if (values.size() != sum_.size())
        throw std::invalid_argument("Accumulator: value count differs from k_max");
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum_[i].add(values[i]);
        sumsq_[i].add(values[i] * values[i]);
    }
    ++count_;
}

void Accumulator::merge(const Accumulator& other) {
    if (other.sum_.size() != sum_.size())
        throw std::invalid_argument("Accumulator: cannot merge different k_max");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i].merge(other.sum_[i]);
        sumsq_[i].merge(other.sumsq_[i]);
    }
    count_ += other.count_;
}

double Accumulator::mean(int k) const {
    if (count_ == 0)
        throw std::logic_error("Accumulator: no trials");
    return sum(k).value() / static_cast<double>(count_);
}

double Accumulator::stderr_of_mean(int k) const {
    if (count_ < 2)
        return 0.0;
    const double n = static_cast<double>(count_);
    const double m = mean(k);
    const double var = std::max(0.0, (sum_sq(k).value() - n * m * m) / (n - 1.0));
    return std::sqrt(var / n);
}

std::vector<double> knn_distances_brute(const Manifold& m, const SurfacePoint& x,
                                        const std::vector<SurfacePoint>& sites, int k_max) {
    check_request(sites, k_max);
    BestK best(k_max);
    for (std::size_t i = 0; i < sites.size(); ++i)
        best.offer(m.distance_key(x, sites[i]), i);
    std::vector<double> out;
    out.reserve(k_max);
    for (double key : best.keys())
        out.push_back(m.key_to_distance(key));
    return out;
}

std::vector<double> knn_distances_grid(const SurfacePoint& x,
                                       const std::vector<SurfacePoint>& sites, int k_max) {
    check_request(sites, k_max);
    const std::size_t n = sites.size();
    const int G = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n) / 2.0)));
    const double h = 1.0 / G;
    auto cell_of = [G](double c) { return std::min(G - 1, static_cast<int>(c * G)); };

    // Counting sort of site indices by cell; indices stay ascending within a cell.
    std::vector<int> start(static_cast<std::size_t>(G) * G + 1, 0);
    std::vector<int> cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        cell[i] = cell_of(sites[i].coords[0]) * G + cell_of(sites[i].coords[1]);
        ++start[cell[i] + 1];
    }
    for (std::size_t c = 1; c < start.size(); ++c)
        start[c] += start[c - 1];
    std::vector<int> order(n);
    {
        std::vector<int> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i)
            order[fill[cell[i]]++] = static_cast<int>(i);
    }

    const double qx = x.coords[0], qy = x.coords[1];
    const int ci = cell_of(qx), cj = cell_of(qy);
    BestK best(k_max);
    auto scan = [&](int a, int b) {
        const int ca = ((a % G) + G) % G, cb = ((b % G) + G) % G;
        const int c = ca * G + cb;
        for (int p = start[c]; p < start[c + 1]; ++p) {
            const auto& s = sites[order[p]];
            best.offer(torus_distance(qx, qy, s.coords[0], s.coords[1]),
                       static_cast<std::size_t>(order[p]));
        }
    };
    for (int r = 0;; ++r) {
        // Rings must not wrap onto cells already scanned.
        if (2 * r + 1 > G) {
            BestK all(k_max);
            for (std::size_t i = 0; i < n; ++i)
                all.offer(torus_distance(qx, qy, sites[i].coords[0], sites[i].coords[1]), i);
            return all.keys();
        }
        if (r == 0) {
            scan(ci, cj);
        } else {
            for (int d = -r; d <= r; ++d) {
                scan(ci - r, cj + d);
                scan(ci + r, cj + d);
            }
            for (int d = -r + 1; d <= r - 1; ++d) {
                scan(ci + d, cj - r);
                scan(ci + d, cj + r);
            }
        }
        // Every unscanned site is at least r h away.
        if (best.full() && best.worst() < r * h)
            return best.keys();
    }
}

std::vector<double> knn_distances(const Manifold& m, const SurfacePoint& x,
                                  const std::vector<SurfacePoint>& sites, int k_max) {
    if (m.kind() == ManifoldKind::FlatTorus2D && sites.size() >= kGridThreshold)
        return knn_distances_grid(x, sites, k_max);
    return knn_distances_brute(m, x, sites, k_max);
}

Accumulator estimate_moments(const Manifold& m, const SampleConfig& cfg) {
    cfg.validate();
    const long long chunks = (cfg.trials + kTrialChunk - 1) / kTrialChunk;
    std::vector<Accumulator> partial(static_cast<std::size_t>(chunks), Accumulator(cfg.k_max));
    std::atomic<long long> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        try {
            std::vector<SurfacePoint> sites(static_cast<std::size_t>(cfg.N));
            std::vector<double> values(static_cast<std::size_t>(cfg.k_max));
            for (long long c = next++; c < chunks && !failed; c = next++) {
                Accumulator& acc = partial[static_cast<std::size_t>(c)];
                const long long t_end = std::min(cfg.trials, (c + 1) * kTrialChunk);
                for (long long t = c * kTrialChunk; t < t_end; ++t) {
                    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(t));
                    const SurfacePoint x = cfg.fixed_query ? *cfg.fixed_query : m.sample(rng);
                    for (auto& s : sites)
                        s = m.sample(rng);
                    const auto d = knn_distances(m, x, sites, cfg.k_max);
                    for (int k = 0; k < cfg.k_max; ++k)
                        values[k] = cfg.alpha == 1.0 ? d[k] : std::pow(d[k], cfg.alpha);
                    acc.add_trial(values);
                }
            }
        } catch (...) {
            if (!failed.exchange(true))
                failure = std::current_exception();
        }
    };

    const int workers = static_cast<int>(std::min<long long>(cfg.streams, chunks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    Accumulator total(cfg.k_max);
    for (const auto& p : partial)
        total.merge(p);
    return total;
}

void ScalingEstimate::add(long long N, double mean, double stderr_of_mean) {
    const double lead = leading_asymptote(c0, gamma, k, N);
    points.push_back({N, mean, stderr_of_mean, mean / lead, stderr_of_mean / lead});
}

SubleadingFit fit_subleading(const ScalingEstimate& se, bool nuisance) {
    const std::size_t need = nuisance ? 3 : 2;
    if (se.points.size() < need)
        throw std::invalid_argument("fit_subleading: too few N values for the fit");
    long long nmin = se.points.front().N, nmax = nmin;
    bool any_zero = false, all_zero = true;
    for (const auto& p : se.points) {
        nmin = std::min(nmin, p.N);
        nmax = std::max(nmax, p.N);
        if (p.reduced_stderr > 0.0)
            all_zero = false;
        else
            any_zero = true;
    }
    if (static_cast<double>(nmax) < 10.0 * static_cast<double>(nmin))
        throw std::invalid_argument("fit_subleading: N grid must span at least a decade");
    if (any_zero && !all_zero)
        throw std::invalid_argument("fit_subleading: some points lack a standard error");

    // Normal equations for y = c1 x (+ c2 x^2), x = 1/N, y = reduced - 1.
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (const auto& p : se.points) {
        const double x = 1.0 / static_cast<double>(p.N);
        const double y = p.reduced - 1.0;
        const double w = all_zero ? 1.0 : 1.0 / (p.reduced_stderr * p.reduced_stderr);
        s11 += w * x * x;
        s12 += w * x * x * x;
        s22 += w * x * x * x * x;
        b1 += w * x * y;
        b2 += w * x * x * y;
    }
    SubleadingFit fit;
    fit.weighted = !all_zero;
    double cov11 = 0.0, cov22 = 0.0;
    if (nuisance) {
        const double det = s11 * s22 - s12 * s12;
        if (!(std::abs(det) > 1e-14 * s11 * s22))
            throw std::invalid_argument("fit_subleading: ill-conditioned design");
        fit.c1 = (s22 * b1 - s12 * b2) / det;
        fit.c2 = (s11 * b2 - s12 * b1) / det;
        cov11 = s22 / det;
        cov22 = s11 / det;
    } else {
        fit.c1 = b1 / s11;
        cov11 = 1.0 / s11;
    }
    double scale = 1.0;
    if (all_zero) {
        // Unweighted: scale the covariance by the residual variance.
        double rss = 0.0;
        for (const auto& p : se.points) {
            const double x = 1.0 / static_cast<double>(p.N);
            double model = fit.c1 * x;
            if (fit.c2)
                model += *fit.c2 * x * x;
            const double r = p.reduced - 1.0 - model;
            rss += r * r;
        }
        const double dof = static_cast<double>(se.points.size() - need + 1);
        scale = dof > 0.0 ? rss / dof : 0.0;
    }
    fit.c1_stderr = std::sqrt(cov11 * scale);
    if (nuisance)
        fit.c2_stderr = std::sqrt(cov22 * scale);
    return fit;
}

}  // namespace knn
