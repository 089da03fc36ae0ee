#include "ctmcbps/hmc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctmcbps {

void HmcConfig::validate() const {
    if (L < 1) {
        throw std::invalid_argument("HMC: number of leapfrog steps must be >= 1");
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument("HMC: step size must be positive");
    }
}

namespace {

void check_dims(const SuffStats& z, const FeatureSet& features) {
    if (z.num_states() != features.num_states()) {
        throw std::invalid_argument("sufficient statistics do not match the feature state space");
    }
}

// Shared pieces of the likelihood in wu: sum over x != x' of h_x q_xx' and
// of c_xx', and the log pi terms.
double likelihood_terms(const SuffStats& z, const Eigen::VectorXd& pi, const Eigen::VectorXd& theta, int n) {
    double u = 0.0;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y) {
                continue;
            }
            const double t = theta[pair_id(n, x, y)];
            u += z.h[x] * t * pi[y];
            if (z.c(x, y) > 0.0) {
                u -= z.c(x, y) * (std::log(pi[y]) + std::log(t));
            }
        }
        if (z.n[x] > 0.0) {
            u -= z.n[x] * std::log(pi[x]);
        }
    }
    return u;
}

// Gradient over wu of the likelihood part, using d pi_y = pi_y (psi(y) - psi_bar).
Eigen::VectorXd likelihood_grad_wu(const SuffStats& z, const Eigen::VectorXd& pi, const Eigen::VectorXd& theta,
                                   const FeatureSet& features) {
    const int n = features.num_states();
    const Eigen::MatrixXd& psi = features.psi();
    const Eigen::VectorXd psi_bar = psi.transpose() * pi;
    // Weight per target state y of (psi(y) - psi_bar).
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y) {
                continue;
            }
            weight[y] += z.h[x] * theta[pair_id(n, x, y)] * pi[y] - z.c(x, y);
        }
        weight[x] -= z.n[x];
    }
    return psi.transpose() * weight - weight.sum() * psi_bar;
}

} // namespace

double potential_wu(const SuffStats& z, const Eigen::VectorXd& wu, const Eigen::VectorXd& theta,
                    const FeatureSet& features, double kappa) {
    check_dims(z, features);
    const Eigen::VectorXd pi = stationary_dist(wu, features);
    return 0.5 * kappa * wu.squaredNorm() + likelihood_terms(z, pi, theta, features.num_states());
}

Eigen::VectorXd grad_wu(const SuffStats& z, const Eigen::VectorXd& wu, const Eigen::VectorXd& theta,
                        const FeatureSet& features, double kappa) {
    check_dims(z, features);
    const Eigen::VectorXd pi = stationary_dist(wu, features);
    return kappa * wu + likelihood_grad_wu(z, pi, theta, features);
}

double potential_full(const SuffStats& z, const Eigen::VectorXd& w, const FeatureSet& features, double kappa) {
    check_dims(z, features);
    const WeightVector parts = WeightVector::split(w, features.p1(), kappa);
    const Eigen::VectorXd pi = stationary_dist(parts.wu, features);
    const Eigen::VectorXd theta = exchangeable_params(parts.wb, features);
    return 0.5 * kappa * w.squaredNorm() + likelihood_terms(z, pi, theta, features.num_states());
}

Eigen::VectorXd grad_full(const SuffStats& z, const Eigen::VectorXd& w, const FeatureSet& features, double kappa) {
    check_dims(z, features);
    const int n = features.num_states();
    const int p1 = features.p1();
    const WeightVector parts = WeightVector::split(w, p1, kappa);
    const Eigen::VectorXd pi = stationary_dist(parts.wu, features);
    const Eigen::VectorXd theta = exchangeable_params(parts.wb, features);

    Eigen::VectorXd g = kappa * w;
    g.head(p1) += likelihood_grad_wu(z, pi, theta, features);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y) {
                continue;
            }
            const double coef = z.h[x] * theta[pair_id(n, x, y)] * pi[y] - z.c(x, y);
            const SparseVector& phi = features.phi(x, y);
            for (std::size_t i = 0; i < phi.nnz(); ++i) {
                g[p1 + phi.index[i]] += coef * phi.value[i];
            }
        }
    }
    return g;
}

PhasePoint leapfrog(const GradientFn& grad, const Eigen::VectorXd& q0, const Eigen::VectorXd& p0, int L, double eps) {
    HmcConfig{L, eps}.validate();
    if (q0.size() != p0.size()) {
        throw std::invalid_argument("leapfrog: position and momentum sizes differ");
    }
    PhasePoint s{q0, p0};
    s.p -= 0.5 * eps * grad(s.q);
    for (int i = 0; i < L; ++i) {
        s.q += eps * s.p;
        if (i + 1 < L) {
            s.p -= eps * grad(s.q);
        }
    }
    s.p -= 0.5 * eps * grad(s.q);
    return s;
}

HmcStep hmc_step(const PotentialFn& potential, const GradientFn& grad, const Eigen::VectorXd& q0,
                 const HmcConfig& config, Rng& rng) {
    config.validate();
    Eigen::VectorXd p0(q0.size());
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
        p0[i] = standard_normal(rng);
    }
    const double h0 = potential(q0) + 0.5 * p0.squaredNorm();
    const PhasePoint end = leapfrog(grad, q0, p0, config.L, config.eps);
    double h1 = std::numeric_limits<double>::infinity();
    if (end.q.allFinite() && end.p.allFinite()) {
        h1 = potential(end.q) + 0.5 * end.p.squaredNorm();
    }
    HmcStep out;
    out.delta_h = h1 - h0;
    const double log_u = std::log(uniform_open(rng));
    if (std::isfinite(h1) && std::isfinite(h0) && log_u < h0 - h1) {
        out.q = end.q;
        out.accepted = true;
    } else {
        out.q = q0;
    }
    return out;
}

} // namespace ctmcbps
