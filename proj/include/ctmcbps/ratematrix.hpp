#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace ctmcbps {

/// Ordered, unique state labels. Indices 0..size()-1 are stable.
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels);

    /// Labels "0", "1", ... for synthetic models.
    static StateSpace numbered(int n);

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int i) const { return labels_.at(static_cast<std::size_t>(i)); }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Throws std::invalid_argument for unknown labels.
    int index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
};

/// Number of unordered distinct pairs of an n-state space.
constexpr int num_pairs(int n) { return n * (n - 1) / 2; }

/// Canonical (lexicographic) id of the unordered pair {a, b}, a != b.
int pair_id(int num_states, int a, int b);

/// Inverse of pair_id; returns (a, b) with a < b.
std::pair<int, int> pair_states(int num_states, int id);

/// A bijection from unordered pairs onto 1..num_pairs. `eta[pair_id]` holds the
/// 1-based position of that pair in the ordering.
class PairOrdering {
public:
    /// Validates bijectivity; throws std::invalid_argument otherwise.
    PairOrdering(int num_states, std::vector<int> eta);

    /// Lexicographic ordering over state indices.
    static PairOrdering lexicographic(int num_states);

    int num_states() const { return num_states_; }
    int eta(int a, int b) const { return eta_[static_cast<std::size_t>(pair_id(num_states_, a, b))]; }
    int eta_of_pair(int id) const { return eta_[static_cast<std::size_t>(id)]; }
    /// Canonical pair id holding position `position` (1-based).
    int pair_at(int position) const { return by_position_[static_cast<std::size_t>(position - 1)]; }

private:
    int num_states_;
    std::vector<int> eta_;
    std::vector<int> by_position_;
};

/// One sparse feature vector: parallel index/value arrays.
struct SparseVector {
    std::vector<int> index;
    std::vector<double> value;

    double dot(const Eigen::VectorXd& w) const;
    std::size_t nnz() const { return index.size(); }
};

enum class FeatureKind { gtr, chain, custom };

/// Univariate features psi (dense |S| x p1) and bivariate features phi
/// (sparse, one vector per canonical unordered pair).
class FeatureSet {
public:
    FeatureSet(int num_states, Eigen::MatrixXd psi, std::vector<SparseVector> phi, int p2,
               FeatureKind kind = FeatureKind::custom);

    int num_states() const { return num_states_; }
    int p1() const { return static_cast<int>(psi_.cols()); }
    int p2() const { return p2_; }
    FeatureKind kind() const { return kind_; }

    const Eigen::MatrixXd& psi() const { return psi_; }
    const SparseVector& phi(int a, int b) const { return phi_[static_cast<std::size_t>(pair_id(num_states_, a, b))]; }
    const SparseVector& phi_of_pair(int id) const { return phi_[static_cast<std::size_t>(id)]; }

private:
    int num_states_;
    Eigen::MatrixXd psi_;
    std::vector<SparseVector> phi_;
    int p2_;
    FeatureKind kind_;
};

/// One-hot psi; phi_i({x,x'}) = 1 iff eta({x,x'}) = i.
FeatureSet gtr_features(const StateSpace& states, const PairOrdering& eta);
/// One-hot psi; phi_i({x,x'}) = 1 iff eta({x,x'}) in {i, i+1}.
FeatureSet chain_features(const StateSpace& states, const PairOrdering& eta);

struct WeightVector {
    Eigen::VectorXd wu;
    Eigen::VectorXd wb;
    double kappa = 1.0;

    int size() const { return static_cast<int>(wu.size() + wb.size()); }
    /// Concatenation (wu, wb).
    Eigen::VectorXd joined() const;
    static WeightVector split(const Eigen::VectorXd& w, int p1, double kappa);
    bool finite() const { return wu.allFinite() && wb.allFinite(); }
};

struct RateMatrix {
    Eigen::MatrixXd Q;
    Eigen::VectorXd pi;
    /// Exchangeable parameters indexed by canonical pair id; empty when the
    /// matrix was not built from GLM weights.
    Eigen::VectorXd theta;

    int size() const { return static_cast<int>(Q.rows()); }
};

Eigen::VectorXd stationary_dist(const Eigen::VectorXd& wu, const FeatureSet& features);
Eigen::VectorXd exchangeable_params(const Eigen::VectorXd& wb, const FeatureSet& features);
RateMatrix build_rate_matrix(const WeightVector& w, const FeatureSet& features);
/// Rate matrix from a stationary distribution and fixed exchangeables.
RateMatrix build_rate_matrix(const Eigen::VectorXd& pi, const Eigen::VectorXd& theta);

/// Conversion from GTR weights to chain-GTR weights that
/// reproduce the same rate matrix: wu kept, wb* = B wb with
/// B_ij = (-1)^(i+j) for j <= i.
WeightVector gtr_to_chain_weights(const WeightVector& w);

/// exp(delta * Q). Reversible input (pi supplied and detailed balance holding)
/// goes through a symmetric eigendecomposition; otherwise scaling and squaring
/// with a truncated Taylor series.
Eigen::MatrixXd matrix_exponential(const RateMatrix& rates, double delta);
Eigen::MatrixXd matrix_exponential_series(const Eigen::MatrixXd& Q, double delta);

/// Precomputed spectral form of a reversible generator, reused for many deltas.
class ReversibleExpm {
public:
    explicit ReversibleExpm(const RateMatrix& rates);
    Eigen::MatrixXd operator()(double delta) const;

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd left_;   // D^{-1/2} U
    Eigen::MatrixXd right_;  // U^T D^{1/2}
};

/// True when pi_x q_xy = pi_y q_yx within tol for all pairs.
bool is_reversible(const RateMatrix& rates, double tol = 1e-10);

} // namespace ctmcbps
