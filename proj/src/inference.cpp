#include "ctmcbps/inference.hpp"
#include "ctmcbps/errors.hpp"
#include "ctmcbps/factorgraph.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ctmcbps {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SuffStats augment_timed(const WeightVector& w, const std::vector<ObservedSeries>& data, const FeatureSet& features,
                        Rng& rng, IterationStats* stats) {
    const auto t0 = Clock::now();
    const RateMatrix rates = build_rate_matrix(w, features);
    SuffStats z = augment_dataset(data, rates, rng());
    if (stats) {
        stats->times.augmentation += seconds_since(t0);
    }
    return z;
}

} // namespace

const char* to_string(SamplerScheme s) {
    return s == SamplerScheme::lbps_hmc ? "lbps_hmc" : "hmc_only";
}

SamplerScheme parse_scheme(const std::string& name) {
    if (name == "lbps_hmc" || name == "lbps") {
        return SamplerScheme::lbps_hmc;
    }
    if (name == "hmc_only" || name == "hmc") {
        return SamplerScheme::hmc_only;
    }
    throw std::invalid_argument("unknown sampler scheme '" + name + "'");
}

void RunConfig::validate() const {
    if (iterations < 1) {
        throw std::invalid_argument("iterations must be >= 1");
    }
    if (!(burn_in >= 0.0 && burn_in < 1.0)) {
        throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
    }
    if (scheme == SamplerScheme::lbps_hmc && !(trajectory_length > 0.0)) {
        throw std::invalid_argument("trajectory length must be positive");
    }
    if (refresh_rate < 0.0) {
        throw std::invalid_argument("refresh rate must be nonnegative");
    }
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("prior precision must be positive");
    }
    hmc.validate();
}

WeightVector lbps_hmc_iteration(const WeightVector& w_prev, const std::vector<ObservedSeries>& data,
                                const FeatureSet& features, const RunConfig& config, Rng& rng,
                                IterationStats* stats) {
    const auto start = Clock::now();
    const SuffStats z = augment_timed(w_prev, data, features, rng, stats);

    auto t0 = Clock::now();
    const Eigen::VectorXd theta = exchangeable_params(w_prev.wb, features);
    const double kappa = config.kappa;
    const HmcStep step = hmc_step(
        [&](const Eigen::VectorXd& wu) { return potential_wu(z, wu, theta, features, kappa); },
        [&](const Eigen::VectorXd& wu) { return grad_wu(z, wu, theta, features, kappa); }, w_prev.wu, config.hmc, rng);
    WeightVector next{step.q, w_prev.wb, kappa};
    if (stats) {
        stats->times.hmc += seconds_since(t0);
        stats->hmc_accepted = step.accepted;
    }

    t0 = Clock::now();
    const Eigen::VectorXd pi = stationary_dist(next.wu, features);
    const FactorGraph graph = build_posterior_graph(z, features, pi, kappa, Scheme::combined);
    LbpsOptions opts;
    opts.refresh_rate = config.refresh_rate;
    opts.intensity_scale = config.lbps_intensity_scale;
    opts.record_trajectory = false;
    const BpsResult res = lbps_run(graph, w_prev.wb, config.trajectory_length, opts, rng);
    next.wb = res.trajectory.final_position();
    if (stats) {
        stats->times.lbps += seconds_since(t0);
        stats->counters += res.counters;
        stats->times.total += seconds_since(start);
    }
    return next;
}

WeightVector hmc_only_iteration(const WeightVector& w_prev, const std::vector<ObservedSeries>& data,
                                const FeatureSet& features, const RunConfig& config, Rng& rng,
                                IterationStats* stats) {
    const auto start = Clock::now();
    const SuffStats z = augment_timed(w_prev, data, features, rng, stats);

    const auto t0 = Clock::now();
    const double kappa = config.kappa;
    const HmcStep step = hmc_step([&](const Eigen::VectorXd& w) { return potential_full(z, w, features, kappa); },
                                  [&](const Eigen::VectorXd& w) { return grad_full(z, w, features, kappa); },
                                  w_prev.joined(), config.hmc, rng);
    if (stats) {
        stats->times.hmc += seconds_since(t0);
        stats->hmc_accepted = step.accepted;
        stats->times.total += seconds_since(start);
    }
    return WeightVector::split(step.q, features.p1(), kappa);
}

int ChainOutput::burn_in_rows(double fraction) const {
    return static_cast<int>(std::floor(fraction * num_samples()));
}

WeightVector draw_prior(const FeatureSet& features, double kappa, Rng& rng) {
    const double sd = 1.0 / std::sqrt(kappa);
    WeightVector w{Eigen::VectorXd(features.p1()), Eigen::VectorXd(features.p2()), kappa};
    for (Eigen::Index i = 0; i < w.wu.size(); ++i) {
        w.wu[i] = sd * standard_normal(rng);
    }
    for (Eigen::Index i = 0; i < w.wb.size(); ++i) {
        w.wb[i] = sd * standard_normal(rng);
    }
    return w;
}

ChainOutput run_chain(const std::vector<ObservedSeries>& data, const FeatureSet& features, const RunConfig& config) {
    config.validate();
    Rng rng = make_stream(config.seed, {0x636861696eULL});
    // Initial weights are standard normal regardless of kappa.
    WeightVector w = draw_prior(features, 1.0, rng);
    w.kappa = config.kappa;

    ChainOutput out;
    out.scheme = config.scheme;
    out.p1 = features.p1();
    out.p2 = features.p2();
    out.samples.resize(config.iterations, features.p1() + features.p2());

    for (int i = 0; i < config.iterations; ++i) {
        IterationStats stats;
        w = config.scheme == SamplerScheme::lbps_hmc ? lbps_hmc_iteration(w, data, features, config, rng, &stats)
                                                     : hmc_only_iteration(w, data, features, config, rng, &stats);
        if (!w.finite()) {
            std::ostringstream msg;
            msg << "non-finite weights at iteration " << i << ": " << w.joined().transpose();
            throw NumericalError(msg.str());
        }
        out.samples.row(i) = w.joined().transpose();
        out.times.augmentation += stats.times.augmentation;
        out.times.hmc += stats.times.hmc;
        out.times.lbps += stats.times.lbps;
        out.times.total += stats.times.total;
        out.counters += stats.counters;
        out.hmc_accepted += stats.hmc_accepted ? 1 : 0;
    }
    return out;
}

} // namespace ctmcbps
