#pragma once

#include "ctmcbps/paths.hpp"
#include "ctmcbps/random.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <Eigen/Dense>

#include <functional>

namespace ctmcbps {

struct HmcConfig {
    int L = 40;
    double eps = 0.001;

    void validate() const;
};

using PotentialFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Potential of the augmented posterior restricted to wu, with the
/// exchangeables theta (by pair id) held fixed. Includes kappa |wu|^2 / 2.
double potential_wu(const SuffStats& z, const Eigen::VectorXd& wu, const Eigen::VectorXd& theta,
                    const FeatureSet& features, double kappa);
Eigen::VectorXd grad_wu(const SuffStats& z, const Eigen::VectorXd& wu, const Eigen::VectorXd& theta,
                        const FeatureSet& features, double kappa);

/// Potential and gradient over the full weight vector w = (wu, wb).
double potential_full(const SuffStats& z, const Eigen::VectorXd& w, const FeatureSet& features, double kappa);
Eigen::VectorXd grad_full(const SuffStats& z, const Eigen::VectorXd& w, const FeatureSet& features, double kappa);

struct PhasePoint {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
};

/// L leapfrog steps of size eps with identity mass.
PhasePoint leapfrog(const GradientFn& grad, const Eigen::VectorXd& q0, const Eigen::VectorXd& p0, int L, double eps);

struct HmcStep {
    Eigen::VectorXd q;
    bool accepted = false;
    /// H(proposal) - H(current); NaN/inf when the proposal was non-finite.
    double delta_h = 0.0;
};

HmcStep hmc_step(const PotentialFn& potential, const GradientFn& grad, const Eigen::VectorXd& q0,
                 const HmcConfig& config, Rng& rng);

} // namespace ctmcbps
