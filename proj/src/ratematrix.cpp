#include "ctmcbps/ratematrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ctmcbps {

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 1) {
        throw std::invalid_argument("state space must contain at least one state");
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second) {
            throw std::invalid_argument("duplicate state label: " + l);
        }
    }
}

StateSpace StateSpace::numbered(int n) {
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
        labels.push_back(std::to_string(i));
    }
    return StateSpace(std::move(labels));
}

int StateSpace::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw std::invalid_argument("unknown state label: " + label);
    }
    return static_cast<int>(it - labels_.begin());
}

int pair_id(int num_states, int a, int b) {
    if (a == b || a < 0 || b < 0 || a >= num_states || b >= num_states) {
        throw std::invalid_argument("pair_id: need two distinct valid states");
    }
    if (a > b) {
        std::swap(a, b);
    }
    // Row-major upper triangle without the diagonal.
    return a * num_states - a * (a + 1) / 2 + (b - a - 1);
}

std::pair<int, int> pair_states(int num_states, int id) {
    int a = 0;
    int row_len = num_states - 1;
    while (id >= row_len) {
        id -= row_len;
        ++a;
        --row_len;
    }
    return {a, a + 1 + id};
}

PairOrdering::PairOrdering(int num_states, std::vector<int> eta)
    : num_states_(num_states), eta_(std::move(eta)) {
    const int P = num_pairs(num_states);
    if (static_cast<int>(eta_.size()) != P) {
        throw std::invalid_argument("pair ordering has wrong length");
    }
    by_position_.assign(static_cast<std::size_t>(P), -1);
    for (int id = 0; id < P; ++id) {
        const int e = eta_[static_cast<std::size_t>(id)];
        if (e < 1 || e > P || by_position_[static_cast<std::size_t>(e - 1)] != -1) {
            throw std::invalid_argument("pair ordering is not a bijection onto 1..P");
        }
        by_position_[static_cast<std::size_t>(e - 1)] = id;
    }
}

PairOrdering PairOrdering::lexicographic(int num_states) {
    std::vector<int> eta(static_cast<std::size_t>(num_pairs(num_states)));
    for (std::size_t i = 0; i < eta.size(); ++i) {
        eta[i] = static_cast<int>(i) + 1;
    }
    return PairOrdering(num_states, std::move(eta));
}

double SparseVector::dot(const Eigen::VectorXd& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        s += value[i] * w[index[i]];
    }
    return s;
}

FeatureSet::FeatureSet(int num_states, Eigen::MatrixXd psi, std::vector<SparseVector> phi, int p2,
                       FeatureKind kind)
    : num_states_(num_states), psi_(std::move(psi)), phi_(std::move(phi)), p2_(p2), kind_(kind) {
    if (psi_.rows() != num_states_) {
        throw std::invalid_argument("psi must have one row per state");
    }
    if (static_cast<int>(phi_.size()) != num_pairs(num_states_)) {
        throw std::invalid_argument("phi must have one entry per unordered pair");
    }
    for (const auto& f : phi_) {
        if (f.index.size() != f.value.size()) {
            throw std::invalid_argument("malformed sparse feature");
        }
        for (int k : f.index) {
            if (k < 0 || k >= p2_) {
                throw std::invalid_argument("bivariate feature index out of range");
            }
        }
    }
}

namespace {

void check_ordering(const StateSpace& states, const PairOrdering& eta) {
    if (eta.num_states() != states.size()) {
        throw std::invalid_argument("pair ordering built for a different state space");
    }
}

} // namespace

FeatureSet gtr_features(const StateSpace& states, const PairOrdering& eta) {
    check_ordering(states, eta);
    const int n = states.size();
    const int P = num_pairs(n);
    std::vector<SparseVector> phi(static_cast<std::size_t>(P));
    for (int id = 0; id < P; ++id) {
        phi[static_cast<std::size_t>(id)] = SparseVector{{eta.eta_of_pair(id) - 1}, {1.0}};
    }
    return FeatureSet(n, Eigen::MatrixXd::Identity(n, n), std::move(phi), P, FeatureKind::gtr);
}

FeatureSet chain_features(const StateSpace& states, const PairOrdering& eta) {
    check_ordering(states, eta);
    const int n = states.size();
    const int P = num_pairs(n);
    std::vector<SparseVector> phi(static_cast<std::size_t>(P));
    for (int id = 0; id < P; ++id) {
        const int e = eta.eta_of_pair(id);  // 1-based
        SparseVector f;
        // phi_i = 1 iff eta in {i, i+1}, i.e. i = eta - 1 or i = eta (1-based).
        if (e >= 2) {
            f.index.push_back(e - 2);
            f.value.push_back(1.0);
        }
        f.index.push_back(e - 1);
        f.value.push_back(1.0);
        phi[static_cast<std::size_t>(id)] = std::move(f);
    }
    return FeatureSet(n, Eigen::MatrixXd::Identity(n, n), std::move(phi), P, FeatureKind::chain);
}

Eigen::VectorXd WeightVector::joined() const {
    Eigen::VectorXd w(wu.size() + wb.size());
    w << wu, wb;
    return w;
}

WeightVector WeightVector::split(const Eigen::VectorXd& w, int p1, double kappa) {
    WeightVector out;
    out.wu = w.head(p1);
    out.wb = w.tail(w.size() - p1);
    out.kappa = kappa;
    return out;
}

Eigen::VectorXd stationary_dist(const Eigen::VectorXd& wu, const FeatureSet& features) {
    if (wu.size() != features.p1()) {
        throw std::invalid_argument("stationary_dist: wu length does not match p1");
    }
    Eigen::VectorXd logits = features.psi() * wu;
    const double m = logits.maxCoeff();
    Eigen::VectorXd pi = (logits.array() - m).exp();
    return pi / pi.sum();
}

Eigen::VectorXd exchangeable_params(const Eigen::VectorXd& wb, const FeatureSet& features) {
    if (wb.size() != features.p2()) {
        throw std::invalid_argument("exchangeable_params: wb length does not match p2");
    }
    const int P = num_pairs(features.num_states());
    Eigen::VectorXd theta(P);
    for (int id = 0; id < P; ++id) {
        theta[id] = std::exp(features.phi_of_pair(id).dot(wb));
    }
    return theta;
}

RateMatrix build_rate_matrix(const Eigen::VectorXd& pi, const Eigen::VectorXd& theta) {
    const int n = static_cast<int>(pi.size());
    if (theta.size() != num_pairs(n)) {
        throw std::invalid_argument("build_rate_matrix: theta length does not match state space");
    }
    RateMatrix r;
    r.pi = pi;
    r.theta = theta;
    r.Q = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
        double row = 0.0;
        for (int y = 0; y < n; ++y) {
            if (y == x) {
                continue;
            }
            const double q = theta[pair_id(n, x, y)] * pi[y];
            r.Q(x, y) = q;
            row += q;
        }
        r.Q(x, x) = -row;
    }
    return r;
}

RateMatrix build_rate_matrix(const WeightVector& w, const FeatureSet& features) {
    return build_rate_matrix(stationary_dist(w.wu, features), exchangeable_params(w.wb, features));
}

WeightVector gtr_to_chain_weights(const WeightVector& w) {
    WeightVector out = w;
    // Forward substitution of w*_1 = w_1, w*_{i-1} + w*_i = w_i; identical to B w.
    for (Eigen::Index i = 0; i < w.wb.size(); ++i) {
        out.wb[i] = (i == 0) ? w.wb[0] : w.wb[i] - out.wb[i - 1];
    }
    return out;
}

bool is_reversible(const RateMatrix& rates, double tol) {
    const int n = rates.size();
    if (rates.pi.size() != n) {
        return false;
    }
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            const double lhs = rates.pi[x] * rates.Q(x, y);
            const double rhs = rates.pi[y] * rates.Q(y, x);
            if (std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(lhs))) {
                return false;
            }
        }
    }
    return true;
}

ReversibleExpm::ReversibleExpm(const RateMatrix& rates) {
    const Eigen::ArrayXd sq = rates.pi.array().sqrt();
    // S = D^{1/2} Q D^{-1/2} is symmetric under detailed balance.
    Eigen::MatrixXd S = sq.matrix().asDiagonal() * rates.Q * (1.0 / sq).matrix().asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    eigenvalues_ = eig.eigenvalues();
    left_ = (1.0 / sq).matrix().asDiagonal() * eig.eigenvectors();
    right_ = eig.eigenvectors().transpose() * sq.matrix().asDiagonal();
}

Eigen::MatrixXd ReversibleExpm::operator()(double delta) const {
    const Eigen::VectorXd e = (eigenvalues_.array() * delta).exp();
    Eigen::MatrixXd P = left_ * e.asDiagonal() * right_;
    // Clip round-off negatives; entries are probabilities.
    return P.cwiseMax(0.0);
}

Eigen::MatrixXd matrix_exponential_series(const Eigen::MatrixXd& Q, double delta) {
    if (delta < 0.0) {
        throw std::invalid_argument("matrix_exponential: delta must be nonnegative");
    }
    const int n = static_cast<int>(Q.rows());
    Eigen::MatrixXd A = Q * delta;
    const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    A /= std::ldexp(1.0, squarings);
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 30; ++k) {
        term = term * A / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) {
            break;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    return result;
}

Eigen::MatrixXd matrix_exponential(const RateMatrix& rates, double delta) {
    if (delta < 0.0) {
        throw std::invalid_argument("matrix_exponential: delta must be nonnegative");
    }
    const int n = rates.size();
    if (delta == 0.0) {
        return Eigen::MatrixXd::Identity(n, n);
    }
    if (rates.pi.size() == n && (rates.pi.array() > 0.0).all() && is_reversible(rates)) {
        return ReversibleExpm(rates)(delta);
    }
    return matrix_exponential_series(rates.Q, delta);
}

} // namespace ctmcbps
