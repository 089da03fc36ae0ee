#include "ctmcbps/factorgraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctmcbps {

const char* to_string(FactorKind kind) {
    switch (kind) {
    case FactorKind::normal_prior: return "normal_prior";
    case FactorKind::sojourn: return "sojourn";
    case FactorKind::transition_count: return "transition_count";
    case FactorKind::initial_count: return "initial_count";
    case FactorKind::generic: return "generic";
    }
    return "unknown";
}

FactorGraph::FactorGraph(int num_vars, std::vector<Factor> factors, bool analysis_only)
    : num_vars_(num_vars), factors_(std::move(factors)), analysis_only_(analysis_only) {
    var_to_factors_.assign(static_cast<std::size_t>(num_vars_), {});
    for (std::size_t f = 0; f < factors_.size(); ++f) {
        auto& fac = factors_[f];
        if (fac.vars.empty()) {
            throw std::invalid_argument("factor " + std::to_string(f) + " has no neighbour variables");
        }
        if (fac.coef.size() != fac.vars.size()) {
            fac.coef.assign(fac.vars.size(), 1.0);
        }
        for (int k : fac.vars) {
            if (k < 0 || k >= num_vars_) {
                throw std::invalid_argument("factor " + std::to_string(f) + " references unknown variable");
            }
            var_to_factors_[static_cast<std::size_t>(k)].push_back(static_cast<int>(f));
        }
    }

    extended_factors_.resize(factors_.size());
    std::vector<int> mark(factors_.size(), -1);
    for (std::size_t f = 0; f < factors_.size(); ++f) {
        auto& ext = extended_factors_[f];
        for (int k : factors_[f].vars) {
            for (int g : var_to_factors_[static_cast<std::size_t>(k)]) {
                if (mark[static_cast<std::size_t>(g)] != static_cast<int>(f)) {
                    mark[static_cast<std::size_t>(g)] = static_cast<int>(f);
                    ext.push_back(g);
                }
            }
        }
        std::sort(ext.begin(), ext.end());
    }
}

FactorGraph FactorGraph::from_neighbours(int num_vars, const std::vector<std::vector<int>>& neighbours) {
    std::vector<Factor> factors;
    for (const auto& n : neighbours) {
        Factor f;
        f.vars = n;
        std::sort(f.vars.begin(), f.vars.end());
        f.vars.erase(std::unique(f.vars.begin(), f.vars.end()), f.vars.end());
        factors.push_back(std::move(f));
    }
    return FactorGraph(num_vars, std::move(factors), true);
}

const Factor& FactorGraph::factor(int f) const {
    if (f < 0 || f >= num_factors()) {
        throw std::invalid_argument("unknown factor id " + std::to_string(f));
    }
    return factors_[static_cast<std::size_t>(f)];
}

const std::vector<int>& FactorGraph::neighbour_vars(int f) const { return factor(f).vars; }

const std::vector<int>& FactorGraph::neighbour_factors(int k) const {
    if (k < 0 || k >= num_vars_) {
        throw std::invalid_argument("unknown variable id " + std::to_string(k));
    }
    return var_to_factors_[static_cast<std::size_t>(k)];
}

const std::vector<int>& FactorGraph::extended_neighbour_factors(int f) const {
    factor(f);
    return extended_factors_[static_cast<std::size_t>(f)];
}

std::vector<int> FactorGraph::extended_neighbour_vars(int f) const {
    std::vector<int> out;
    for (int g : extended_neighbour_factors(f)) {
        const auto& v = factors_[static_cast<std::size_t>(g)].vars;
        out.insert(out.end(), v.begin(), v.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

FactorGraph build_posterior_graph(const SuffStats& z, const FeatureSet& features, const Eigen::VectorXd& pi,
                                  double kappa, Scheme scheme) {
    const int n = features.num_states();
    if (z.num_states() != n || pi.size() != n) {
        throw std::invalid_argument("build_posterior_graph: statistics do not match the feature state space");
    }
    const int p1 = features.p1();
    const int p2 = features.p2();
    const int offset = scheme == Scheme::naive ? p1 : 0;

    auto with_features = [&](Factor f, int a, int b) {
        const SparseVector& phi = features.phi(a, b);
        if (scheme == Scheme::naive) {
            for (int k = 0; k < p1; ++k) {
                f.vars.push_back(k);
                f.coef.push_back(0.0);
            }
        }
        for (std::size_t i = 0; i < phi.nnz(); ++i) {
            f.vars.push_back(phi.index[i] + offset);
            f.coef.push_back(phi.value[i]);
        }
        return f;
    };

    std::vector<Factor> factors;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y) {
                continue;
            }
            Factor f;
            f.kind = FactorKind::sojourn;
            f.from = x;
            f.to = y;
            f.sojourn = z.h[x];
            f.pi_target = pi[y];
            factors.push_back(with_features(std::move(f), x, y));
        }
    }
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y || z.c(x, y) <= 0.0) {
                continue;
            }
            Factor f;
            f.kind = FactorKind::transition_count;
            f.from = x;
            f.to = y;
            f.count = z.c(x, y);
            f.pi_target = pi[y];
            factors.push_back(with_features(std::move(f), x, y));
        }
    }
    if (scheme == Scheme::naive) {
        for (int x = 0; x < n; ++x) {
            if (z.n[x] <= 0.0) {
                continue;
            }
            Factor f;
            f.kind = FactorKind::initial_count;
            f.from = x;
            f.count = z.n[x];
            for (int k = 0; k < p1; ++k) {
                f.vars.push_back(k);
                f.coef.push_back(features.psi()(x, k));
            }
            factors.push_back(std::move(f));
        }
    }
    const int num_vars = offset + p2;
    for (int k = 0; k < num_vars; ++k) {
        Factor f;
        f.kind = FactorKind::normal_prior;
        f.kappa = kappa;
        f.coordinate = k;
        f.vars = {k};
        f.coef = {1.0};
        factors.push_back(std::move(f));
    }
    return FactorGraph(num_vars, std::move(factors), scheme == Scheme::naive);
}

SparsityProfile sparsity_profile(const FactorGraph& graph) {
    SparsityProfile p;
    p.num_factors = graph.num_factors();
    p.num_vars = graph.num_vars();
    for (int f = 0; f < graph.num_factors(); ++f) {
        p.max_neighbour_vars = std::max(p.max_neighbour_vars, static_cast<int>(graph.neighbour_vars(f).size()));
        p.max_extended_vars = std::max(p.max_extended_vars, static_cast<int>(graph.extended_neighbour_vars(f).size()));
        const auto& ext = graph.extended_neighbour_factors(f);
        p.max_extended_factors = std::max(p.max_extended_factors, static_cast<int>(ext.size()));
        if (graph.factor(f).kind != FactorKind::normal_prior) {
            const auto model = std::count_if(ext.begin(), ext.end(), [&](int g) {
                return graph.factor(g).kind != FactorKind::normal_prior;
            });
            p.max_extended_model_factors = std::max(p.max_extended_model_factors, static_cast<int>(model));
        }
    }
    return p;
}

namespace {

double feature_dot(const Factor& f, const Eigen::VectorXd& position) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        s += f.coef[i] * position[f.vars[i]];
    }
    return s;
}

} // namespace

double factor_energy(const Factor& f, const Eigen::VectorXd& position) {
    switch (f.kind) {
    case FactorKind::normal_prior: {
        const double w = position[f.coordinate];
        return 0.5 * f.kappa * w * w;
    }
    case FactorKind::sojourn:
        return f.sojourn * f.pi_target * std::exp(feature_dot(f, position));
    case FactorKind::transition_count:
        return -f.count * (std::log(f.pi_target) + feature_dot(f, position));
    default:
        throw std::invalid_argument(std::string("factor_energy: unsupported factor kind ") + to_string(f.kind));
    }
}

std::vector<double> factor_gradient(const Factor& f, const Eigen::VectorXd& position) {
    std::vector<double> g(f.vars.size());
    switch (f.kind) {
    case FactorKind::normal_prior:
        g[0] = f.kappa * position[f.coordinate];
        break;
    case FactorKind::sojourn: {
        const double u = factor_energy(f, position);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = u * f.coef[i];
        }
        break;
    }
    case FactorKind::transition_count:
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = -f.count * f.coef[i];
        }
        break;
    default:
        throw std::invalid_argument(std::string("factor_gradient: unsupported factor kind ") + to_string(f.kind));
    }
    return g;
}

double total_energy(const FactorGraph& graph, const Eigen::VectorXd& position) {
    double u = 0.0;
    for (int f = 0; f < graph.num_factors(); ++f) {
        u += factor_energy(graph.factor(f), position);
    }
    return u;
}

Eigen::VectorXd total_gradient(const FactorGraph& graph, const Eigen::VectorXd& position) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(graph.num_vars());
    for (int f = 0; f < graph.num_factors(); ++f) {
        const Factor& fac = graph.factor(f);
        const auto gf = factor_gradient(fac, position);
        for (std::size_t i = 0; i < gf.size(); ++i) {
            g[fac.vars[i]] += gf[i];
        }
    }
    return g;
}

} // namespace ctmcbps
