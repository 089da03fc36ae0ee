#pragma once

#include "ctmcbps/diagnostics.hpp"
#include "ctmcbps/ratematrix.hpp"
#include "ctmcbps/random.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testing_support {

using namespace ctmcbps;

inline Eigen::VectorXd normal_vector(int n, Rng& rng, double sd = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = sd * standard_normal(rng);
    }
    return v;
}

inline WeightVector random_weights(const FeatureSet& f, Rng& rng, double sd = 1.0) {
    return {normal_vector(f.p1(), rng, sd), normal_vector(f.p2(), rng, sd), 1.0};
}

inline FeatureSet chain_model(int n) {
    return chain_features(StateSpace::numbered(n), PairOrdering::lexicographic(n));
}

inline FeatureSet gtr_model(int n) {
    return gtr_features(StateSpace::numbered(n), PairOrdering::lexicographic(n));
}

// Central differences with step h.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

// Relative error with an absolute floor so near-zero entries compare sensibly.
inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// Two-state generator [[-alpha, alpha], [beta, -beta]].
inline Eigen::Matrix2d two_state_q(double alpha, double beta) {
    Eigen::Matrix2d q;
    q << -alpha, alpha, beta, -beta;
    return q;
}

// Closed-form exp(Q t) for a two-state generator.
inline Eigen::Matrix2d two_state_expm(double alpha, double beta, double t) {
    const double s = alpha + beta;
    const double e = std::exp(-s * t);
    Eigen::Matrix2d p;
    p << beta + alpha * e, alpha - alpha * e, beta - beta * e, alpha + beta * e;
    return p / s;
}

// E[time in state 0 on [0, d] | X0 = a, Xd = b] by composite Simpson on the
// closed-form transition function.
inline double two_state_expected_sojourn(double alpha, double beta, int a, int b, double d, int intervals = 2000) {
    auto f = [&](double s) { return two_state_expm(alpha, beta, s)(a, 0) * two_state_expm(alpha, beta, d - s)(0, b); };
    const double h = d / intervals;
    double sum = f(0.0) + f(d);
    for (int i = 1; i < intervals; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
    }
    return sum * h / 3.0 / two_state_expm(alpha, beta, d)(a, b);
}

// P(N = k real jumps, X(d) = b | X(0) = a) for k = 0..kmax, by RK4 on
// dP_k/dt = P_k D + P_{k-1} Q_off with D the diagonal part of Q.
inline std::vector<double> jump_count_oracle(const Eigen::MatrixXd& Q, int a, int b, double d, int kmax,
                                             int steps = 4000) {
    const int n = static_cast<int>(Q.rows());
    const Eigen::MatrixXd D = Q.diagonal().asDiagonal();
    const Eigen::MatrixXd Off = Q - D;
    std::vector<Eigen::RowVectorXd> p(static_cast<std::size_t>(kmax + 1), Eigen::RowVectorXd::Zero(n));
    p[0][a] = 1.0;
    auto deriv = [&](const std::vector<Eigen::RowVectorXd>& x) {
        std::vector<Eigen::RowVectorXd> dx(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            dx[k] = x[k] * D;
            if (k > 0) {
                dx[k] += x[k - 1] * Off;
            }
        }
        return dx;
    };
    auto axpy = [](const std::vector<Eigen::RowVectorXd>& x, const std::vector<Eigen::RowVectorXd>& y, double s) {
        std::vector<Eigen::RowVectorXd> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            out[k] = x[k] + s * y[k];
        }
        return out;
    };
    const double h = d / steps;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = deriv(p);
        const auto k2 = deriv(axpy(p, k1, h / 2));
        const auto k3 = deriv(axpy(p, k2, h / 2));
        const auto k4 = deriv(axpy(p, k3, h));
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }
    std::vector<double> out;
    for (const auto& row : p) {
        out.push_back(row[b]);
    }
    return out;
}

inline RateMatrix from_q(const Eigen::MatrixXd& q) {
    RateMatrix r;
    r.Q = q;
    return r;
}

// One-sample KS p-value of draws against a CDF.
inline double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double en = std::sqrt(n);
    return kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
}

// Composite Simpson on [0, t] with m (even) intervals.
inline double integrate(const std::function<double(double)>& f, double t, int m = 400) {
    if (t <= 0.0) {
        return 0.0;
    }
    const double h = t / m;
    double s = f(0.0) + f(t);
    for (int i = 1; i < m; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    }
    return s * h / 3.0;
}

// Pearson chi-square p-value of observed counts against expected
// probabilities; bins expected below 5 are pooled into one tail bin.
inline double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) {
    double total = 0.0, norm = 0.0;
    for (double c : counts) total += c;
    for (double q : probs) norm += q;
    double stat = 0.0, exp_tail = 0.0, obs_tail = 0.0;
    int bins = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = total * probs[k] / norm;
        if (e >= 5.0) {
            stat += (counts[k] - e) * (counts[k] - e) / e;
            ++bins;
        } else {
            exp_tail += e;
            obs_tail += counts[k];
        }
    }
    if (exp_tail > 0.0) {
        stat += (obs_tail - exp_tail) * (obs_tail - exp_tail) / exp_tail;
        ++bins;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), stat));
}

} // namespace testing_support
