#pragma once

#include "ctmcbps/inference.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ctmcbps {

struct EssEstimate {
    double ess = 0.0;
    bool degenerate = false;  // constant input; ess reported as n
};

/// Batch-means ESS with floor(sqrt(n)) nonoverlapping batches; needs n >= 16.
EssEstimate ess_batch_means(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// |x - y| / max(x, y) for positive x, y.
double ard(double x, double y);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

struct Summary {
    double min = 0, q1 = 0, mean = 0, median = 0, q3 = 0, max = 0;
};
Summary summarize(std::vector<double> values);
/// Linear-interpolation quantile, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct EssReport {
    std::vector<double> ess;
    std::vector<double> ess_per_second;
    Summary ess_summary;
    Summary per_second_summary;
    double seconds = 0.0;
    int samples_used = 0;
};

/// ESS of each column of `samples` and ESS / `seconds`.
EssReport ess_report(const Eigen::MatrixXd& samples, double seconds);

/// Per-exchangeable-parameter ESS/second over post-burn-in samples of each
/// chain, pooled across chains. Seconds are the chain walltime scaled by
/// `walltime_fraction` (the post-burn-in share of the run).
EssReport ess_per_second_report(const std::vector<ChainOutput>& chains, const FeatureSet& features,
                                double burn_in = 0.3, double walltime_fraction = 0.7);

/// Exchangeable parameters theta (by pair id) for every row of a weight sample matrix.
Eigen::MatrixXd theta_columns(const Eigen::MatrixXd& samples, const FeatureSet& features);

/// Model for invariance tests: weights from the prior, data simulated from
/// Q(w) with initial distribution pi(w) and observed on a regular mesh.
struct EitModel {
    FeatureSet features;
    double kappa = 1.0;
    int num_series = 4;
    double horizon = 1.0;
    double mesh = 0.5;
};

enum class EitKernel {
    lbps_hmc,
    hmc_only,
    /// Independent redraw of w from the prior; exact by construction.
    prior_redraw,
    /// Local BPS with every bounce intensity doubled; not invariant.
    broken
};

const char* to_string(EitKernel k);
EitKernel parse_eit_kernel(const std::string& name);

struct EitOptions {
    int n_marginal = 300;
    int n_successive = 300;
    int thinning = 50;
    /// Sampler tuning for the kernel transitions (iterations and seed ignored).
    RunConfig sampler;
};

struct EitRow {
    std::string block;  // "wu" or "wb"
    int index = 0;      // within the block
    double statistic = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;
    bool pass = true;
};

struct EitResult {
    std::vector<EitRow> rows;
    Eigen::MatrixXd marginal;
    Eigen::MatrixXd successive;
    bool all_pass() const;
};

std::vector<ObservedSeries> simulate_dataset(const WeightVector& w, const FeatureSet& features, int num_series,
                                             double horizon, double mesh, Rng& rng);

/// Marginal-conditional versus successive-conditional comparison. Each
/// weight coordinate is KS-tested; thresholds are 0.05 / (block size).
EitResult geweke_eit(const EitModel& model, EitKernel kernel, const EitOptions& options, std::uint64_t seed);

} // namespace ctmcbps
