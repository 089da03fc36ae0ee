#pragma once

#include "ctmcbps/random.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <vector>

namespace ctmcbps {

/// A fully observed CTMC path on [start_time, end_time].
struct FullPath {
    double start_time = 0.0;
    double end_time = 0.0;
    std::vector<int> states;
    std::vector<double> jump_times;

    int state_at(double t) const;
    int num_jumps() const { return static_cast<int>(jump_times.size()); }
};

/// States observed at strictly increasing times.
struct ObservedSeries {
    std::vector<double> times;
    std::vector<int> states;

    std::size_t size() const { return times.size(); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

/// Sufficient statistics of fully observed paths: initial counts n,
/// sojourn times h, transition counts c (ordered pairs).
struct SuffStats {
    Eigen::VectorXd n;
    Eigen::VectorXd h;
    Eigen::MatrixXd c;

    explicit SuffStats(int num_states = 0);
    int num_states() const { return static_cast<int>(n.size()); }
    SuffStats& operator+=(const SuffStats& other);
    double total_time() const { return h.sum(); }
};

/// Exact (Gillespie) simulation on [0, T] starting from a draw of `initial`.
FullPath simulate_path(const RateMatrix& rates, const Eigen::VectorXd& initial, double T, Rng& rng);
/// Same, from a fixed starting state.
FullPath simulate_path_from(const RateMatrix& rates, int start, double start_time, double end_time, Rng& rng);

/// State at 0, mesh, 2*mesh, ... plus the end time when it is not a mesh point.
ObservedSeries observe(const FullPath& path, double mesh);

SuffStats sufficient_stats(const std::vector<FullPath>& paths, int num_states);
void accumulate(SuffStats& z, const FullPath& path, bool count_initial = true);

/// log density of fully observed paths given initial distribution and Q.
double log_density_full(const SuffStats& z, const RateMatrix& rates, const Eigen::VectorXd& initial);
/// log density of one partially observed series (matrix exponentials between observations).
double log_density_partial(const ObservedSeries& series, const RateMatrix& rates, const Eigen::VectorXd& initial);

/// Uniformization data for one generator: dominating rate Omega, the
/// subordinated kernel B = I + Q/Omega and its cached powers.
class Uniformizer {
public:
    explicit Uniformizer(const RateMatrix& rates);

    double omega() const { return omega_; }
    const Eigen::MatrixXd& kernel() const { return B_; }
    /// B^n; grows the cache on demand (not thread-safe).
    const Eigen::MatrixXd& power(int n);
    /// Ensure powers up to n exist so concurrent readers never grow the cache.
    void reserve(int n);
    int cached() const { return static_cast<int>(powers_.size()) - 1; }
    const Eigen::MatrixXd& cached_power(int n) const { return powers_.at(static_cast<std::size_t>(n)); }

private:
    double omega_;
    Eigen::MatrixXd B_;
    std::vector<Eigen::MatrixXd> powers_;
};

/// Per-interval-length quantities shared by all segments of that length.
struct SegmentPlan {
    double delta = 0.0;
    Eigen::MatrixXd transition;   // exp(Q delta)
    std::vector<double> poisson;  // Poisson(n; Omega delta), n = 0..max_jumps
    int max_jumps = 0;
    double min_prob = 1.0;        // endpoint probability the truncation was sized for
};

/// Endpoint-conditioned sampler for a fixed generator. Build once per rate
/// matrix; `plan` is called serially for every distinct delta before any
/// concurrent `sample` calls.
class EndpointSampler {
public:
    explicit EndpointSampler(const RateMatrix& rates);

    /// Precompute exp(Q delta) and the truncated Poisson weights for delta.
    /// `min_prob` is the smallest endpoint probability that will be conditioned on.
    const SegmentPlan& plan(double delta, double min_prob = 0.0);
    const SegmentPlan& plan_for(double delta) const;

    /// Draw the uniformized jump count N (virtual jumps included).
    int sample_jump_count(const SegmentPlan& plan, int a, int b, Rng& rng) const;
    /// Exact draw of a path on [t0, t0 + delta] with X(t0) = a, X(t0 + delta) = b.
    FullPath sample(int a, int b, double t0, double delta, Rng& rng) const;
    /// Conditional law of N (normalized), for testing.
    std::vector<double> jump_count_distribution(double delta, int a, int b);

    const RateMatrix& rates() const { return rates_; }

private:
    RateMatrix rates_;
    Uniformizer unif_;
    bool reversible_;
    std::map<double, SegmentPlan> plans_;
};

/// One-shot convenience wrapper around EndpointSampler.
FullPath endpoint_sample(const RateMatrix& rates, int a, int b, double delta, Rng& rng);

/// Endpoint-sample every inter-observation segment and aggregate statistics.
/// Segment s of the flattened dataset draws from stream (seed, s).
SuffStats augment_dataset(const std::vector<ObservedSeries>& data, const RateMatrix& rates, std::uint64_t seed);
/// Serial reference implementation; produces bit-identical output.
SuffStats augment_dataset_serial(const std::vector<ObservedSeries>& data, const RateMatrix& rates,
                                 std::uint64_t seed);

/// Initial-count statistics only (first observation of each series).
SuffStats initial_counts(const std::vector<ObservedSeries>& data, int num_states);

} // namespace ctmcbps
