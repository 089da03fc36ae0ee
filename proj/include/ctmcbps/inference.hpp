#pragma once

#include "ctmcbps/bps.hpp"
#include "ctmcbps/hmc.hpp"
#include "ctmcbps/paths.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ctmcbps {

enum class SamplerScheme { lbps_hmc, hmc_only };

const char* to_string(SamplerScheme s);
SamplerScheme parse_scheme(const std::string& name);

struct RunConfig {
    SamplerScheme scheme = SamplerScheme::lbps_hmc;
    int iterations = 1000;
    double trajectory_length = 0.2;
    double refresh_rate = 1.0;
    HmcConfig hmc;
    double kappa = 1.0;
    double burn_in = 0.3;
    std::uint64_t seed = 1;
    /// Bounce intensity multiplier passed to LBPS; 1 for the correct sampler.
    double lbps_intensity_scale = 1.0;

    void validate() const;
};

struct PhaseTimes {
    double augmentation = 0.0;
    double hmc = 0.0;
    double lbps = 0.0;
    double total = 0.0;
};

struct IterationStats {
    PhaseTimes times;
    EventCounters counters;
    bool hmc_accepted = false;
};

/// One sweep of the combined sampler: augment paths under Q(w_prev), update
/// wu by one HMC trajectory with theta(wb_prev) fixed, then run local BPS on
/// wb and keep its endpoint.
WeightVector lbps_hmc_iteration(const WeightVector& w_prev, const std::vector<ObservedSeries>& data,
                                const FeatureSet& features, const RunConfig& config, Rng& rng,
                                IterationStats* stats = nullptr);

/// One sweep of the benchmark sampler: augment, then one HMC trajectory on
/// the full weight vector.
WeightVector hmc_only_iteration(const WeightVector& w_prev, const std::vector<ObservedSeries>& data,
                                const FeatureSet& features, const RunConfig& config, Rng& rng,
                                IterationStats* stats = nullptr);

struct ChainOutput {
    SamplerScheme scheme = SamplerScheme::lbps_hmc;
    int p1 = 0;
    int p2 = 0;
    /// Row i is the weight vector (wu, wb) after iteration i.
    Eigen::MatrixXd samples;
    PhaseTimes times;
    EventCounters counters;
    long hmc_accepted = 0;

    int num_samples() const { return static_cast<int>(samples.rows()); }
    /// First row kept after discarding the burn-in fraction.
    int burn_in_rows(double fraction) const;
};

ChainOutput run_chain(const std::vector<ObservedSeries>& data, const FeatureSet& features, const RunConfig& config);

/// Draws one sample of w from its N(0, 1/kappa) prior.
WeightVector draw_prior(const FeatureSet& features, double kappa, Rng& rng);

} // namespace ctmcbps
