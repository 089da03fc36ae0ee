#pragma once

#include "ctmcbps/paths.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ctmcbps {

enum class FactorKind { normal_prior, sojourn, transition_count, initial_count, generic };

const char* to_string(FactorKind kind);

/// One factor of the potential. `vars` is N_f (sorted, unique) and `coef`
/// holds the feature value of each neighbour variable (phi entries for
/// sojourn/transition factors, 1 for priors).
struct Factor {
    FactorKind kind = FactorKind::generic;
    std::vector<int> vars;
    std::vector<double> coef;

    double kappa = 0.0;       // normal_prior
    int coordinate = -1;      // normal_prior
    double sojourn = 0.0;     // sojourn: h_x
    double pi_target = 0.0;   // sojourn/transition: pi_{x'}
    double count = 0.0;       // transition_count: c_{x,x'}; initial_count: n_x
    int from = -1;
    int to = -1;
};

enum class Scheme { combined, naive };

class FactorGraph {
public:
    FactorGraph() = default;
    FactorGraph(int num_vars, std::vector<Factor> factors, bool analysis_only = false);

    /// Structure-only graph (generic factors) from explicit neighbour lists.
    static FactorGraph from_neighbours(int num_vars, const std::vector<std::vector<int>>& neighbours);

    int num_vars() const { return num_vars_; }
    int num_factors() const { return static_cast<int>(factors_.size()); }
    bool analysis_only() const { return analysis_only_; }

    const Factor& factor(int f) const;
    /// N_f
    const std::vector<int>& neighbour_vars(int f) const;
    /// S_k
    const std::vector<int>& neighbour_factors(int k) const;
    /// S-bar_f: factors sharing at least one variable with f (f included).
    const std::vector<int>& extended_neighbour_factors(int f) const;
    /// N-bar_f: union of N_f' over f' in S-bar_f.
    std::vector<int> extended_neighbour_vars(int f) const;

private:
    int num_vars_ = 0;
    std::vector<Factor> factors_;
    std::vector<std::vector<int>> var_to_factors_;
    std::vector<std::vector<int>> extended_factors_;
    bool analysis_only_ = false;
};

/// Factor graph of the augmented potential.
///
/// combined: variables are wb; one sojourn factor per ordered pair, one
/// transition factor per ordered pair with c > 0, one normal prior per wb
/// coordinate. naive: variables are (wu, wb) and every sojourn, transition
/// and initial-count factor also touches every wu coordinate; built for
/// structural analysis only.
FactorGraph build_posterior_graph(const SuffStats& z, const FeatureSet& features, const Eigen::VectorXd& pi,
                                  double kappa, Scheme scheme = Scheme::combined);

struct SparsityProfile {
    int max_neighbour_vars = 0;        // max |N_f|
    int max_extended_vars = 0;         // max |N-bar_f|
    int max_extended_factors = 0;      // max |S-bar_f|
    int max_extended_model_factors = 0;  // over non-prior f, counting non-prior members only
    int num_factors = 0;
    int num_vars = 0;
};

SparsityProfile sparsity_profile(const FactorGraph& graph);

/// Energy of factor f at the given positions (indexed by variable).
double factor_energy(const Factor& f, const Eigen::VectorXd& position);
/// Gradient of factor f, aligned with f.vars.
std::vector<double> factor_gradient(const Factor& f, const Eigen::VectorXd& position);

/// Sum of factor energies / gradients over the whole graph.
double total_energy(const FactorGraph& graph, const Eigen::VectorXd& position);
Eigen::VectorXd total_gradient(const FactorGraph& graph, const Eigen::VectorXd& position);

} // namespace ctmcbps
