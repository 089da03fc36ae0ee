#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctmcbps/factorgraph.hpp"
#include "ctmcbps/hmc.hpp"
#include "support.hpp"

#include <algorithm>
#include <set>

using namespace ctmcbps;
using namespace testing_support;

namespace {

// gamma1(w1) gamma2(w1,w2) gamma3(w2) gamma4(w2,w3) gamma5(w3,w4), zero-based.
FactorGraph figure_graph() {
    return FactorGraph::from_neighbours(4, {{0}, {0, 1}, {1}, {1, 2}, {2, 3}});
}

SuffStats random_stats(int n, Rng& rng) {
    SuffStats z(n);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::uniform_int_distribution<int> c(0, 4);
    for (int x = 0; x < n; ++x) {
        z.n[x] = c(rng);
        z.h[x] = u(rng);
        for (int y = 0; y < n; ++y) {
            if (x != y) {
                z.c(x, y) = c(rng);
            }
        }
    }
    return z;
}

} // namespace

TEST_CASE("neighbourhoods of the five-factor example") {
    const FactorGraph g = figure_graph();
    CHECK(g.neighbour_vars(1) == std::vector<int>{0, 1});
    CHECK(g.extended_neighbour_vars(1) == std::vector<int>{0, 1, 2});
    CHECK(g.extended_neighbour_factors(1) == std::vector<int>{0, 1, 2, 3});
    CHECK(g.neighbour_factors(1) == std::vector<int>{1, 2, 3});
    CHECK(g.extended_neighbour_vars(3) == std::vector<int>{0, 1, 2, 3});

    const SparsityProfile p = sparsity_profile(g);
    CHECK(p.max_neighbour_vars == 2);
    CHECK(p.num_factors == 5);
    CHECK_THROWS_AS(g.neighbour_vars(5), std::invalid_argument);
    CHECK_THROWS_AS(g.neighbour_factors(-1), std::invalid_argument);

    const FactorGraph single = FactorGraph::from_neighbours(2, {{0, 1}});
    CHECK(single.extended_neighbour_factors(0) == std::vector<int>{0});
    const FactorGraph disjoint = FactorGraph::from_neighbours(4, {{0, 1}, {2, 3}});
    CHECK(disjoint.extended_neighbour_factors(1) == std::vector<int>{1});
    CHECK(disjoint.extended_neighbour_vars(1) == disjoint.neighbour_vars(1));

    const SparsityProfile empty = sparsity_profile(FactorGraph::from_neighbours(0, {}));
    CHECK(empty.max_extended_vars == 0);
    CHECK(empty.max_extended_factors == 0);
}

TEST_CASE("neighbourhood dualities") {
    Rng rng(3);
    const FeatureSet f = chain_model(6);
    const SuffStats z = random_stats(6, rng);
    const FactorGraph g = build_posterior_graph(z, f, Eigen::VectorXd::Constant(6, 1.0 / 6), 1.0);
    for (int a = 0; a < g.num_factors(); ++a) {
        const auto& sa = g.extended_neighbour_factors(a);
        const auto na = g.extended_neighbour_vars(a);
        for (int k : g.neighbour_vars(a)) {
            CHECK(std::binary_search(na.begin(), na.end(), k));
            const auto& sk = g.neighbour_factors(k);
            CHECK(std::find(sk.begin(), sk.end(), a) != sk.end());
        }
        for (int b : sa) {
            const auto& sb = g.extended_neighbour_factors(b);
            CHECK(std::binary_search(sb.begin(), sb.end(), a));
        }
    }
}

TEST_CASE("posterior graph construction") {
    const int n = 4;
    SuffStats z(n);
    z.h.setConstant(1.0);
    const FeatureSet f = chain_model(n);
    const Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 0.25);
    const FactorGraph g = build_posterior_graph(z, f, pi, 1.0);
    int transitions = 0, sojourns = 0, priors = 0;
    for (int i = 0; i < g.num_factors(); ++i) {
        switch (g.factor(i).kind) {
        case FactorKind::transition_count: ++transitions; break;
        case FactorKind::sojourn: ++sojourns; break;
        case FactorKind::normal_prior: ++priors; break;
        default: FAIL("unexpected factor kind");
        }
    }
    CHECK(transitions == 0);
    CHECK(sojourns == n * (n - 1));
    CHECK(priors == f.p2());
    CHECK(g.num_vars() == f.p2());
}

TEST_CASE("strong sparsity of the chain graph") {
    Rng rng(8);
    for (int n : {10, 20, 30}) {
        const FeatureSet f = chain_model(n);
        SuffStats z = random_stats(n, rng);
        z.c.array() += 1.0;
        z.c.diagonal().setZero();
        const FactorGraph g = build_posterior_graph(z, f, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
        const SparsityProfile p = sparsity_profile(g);
        CHECK(p.max_extended_model_factors == 12);
        // Two priors sit on the two neighbour variables of an interior factor.
        CHECK(p.max_extended_factors == 14);
        // Enumerated per position in the ordering: eta = 1 and the last
        // position have fewer neighbours than interior pairs.
        const PairOrdering eta = PairOrdering::lexicographic(n);
        const int last = num_pairs(n);
        for (int i = 0; i < g.num_factors(); ++i) {
            const Factor& fac = g.factor(i);
            if (fac.kind == FactorKind::normal_prior) {
                continue;
            }
            const int e = eta.eta(fac.from, fac.to);
            const auto size = g.extended_neighbour_vars(i).size();
            if (e == 1) {
                CHECK(size == 2);
            } else if (e == 2 || e == last) {
                CHECK(size == 3);
            } else {
                CHECK(size == 4);
            }
        }
        CHECK(p.max_extended_vars == 4);
    }

    const FeatureSet gtr = gtr_model(4);
    SuffStats z = random_stats(4, rng);
    z.c.array() += 1.0;
    z.c.diagonal().setZero();
    const FactorGraph naive = build_posterior_graph(z, gtr, Eigen::VectorXd::Constant(4, 0.25), 1.0, Scheme::naive);
    CHECK(naive.analysis_only());
    std::set<int> model;
    for (int i = 0; i < naive.num_factors(); ++i) {
        if (naive.factor(i).kind != FactorKind::normal_prior) {
            model.insert(i);
        }
    }
    for (int i : model) {
        const auto& ext = naive.extended_neighbour_factors(i);
        for (int j : model) {
            CHECK(std::binary_search(ext.begin(), ext.end(), j));
        }
    }
}

TEST_CASE("factor energies and gradients") {
    Factor soj;
    soj.kind = FactorKind::sojourn;
    soj.vars = {0};
    soj.coef = {1.0};
    soj.sojourn = 2.0;
    soj.pi_target = 0.5;
    CHECK(factor_energy(soj, Eigen::VectorXd::Zero(1)) == doctest::Approx(1.0));

    Factor tr;
    tr.kind = FactorKind::transition_count;
    tr.vars = {0, 1};
    tr.coef = {1.0, 1.0};
    tr.count = 3.0;
    tr.pi_target = 0.2;
    CHECK(factor_gradient(tr, Eigen::Vector2d(0.1, 0.2)) == factor_gradient(tr, Eigen::Vector2d(-4.0, 7.0)));

    Factor generic;
    generic.vars = {0};
    CHECK_THROWS_AS(factor_energy(generic, Eigen::VectorXd::Zero(1)), std::invalid_argument);

    // Energy decomposition against the full potential, and gradient
    // consistency with the wb block of the full gradient.
    Rng rng(21);
    const int n = 5;
    const FeatureSet f = chain_model(n);
    const SuffStats z = random_stats(n, rng);
    const Eigen::VectorXd wu = normal_vector(f.p1(), rng);
    const Eigen::VectorXd pi = stationary_dist(wu, f);
    const FactorGraph g = build_posterior_graph(z, f, pi, 1.0);
    auto full = [&](const Eigen::VectorXd& wb) {
        WeightVector w{wu, wb, 1.0};
        return potential_full(z, w.joined(), f, 1.0);
    };
    const Eigen::VectorXd a = normal_vector(f.p2(), rng);
    const Eigen::VectorXd b = normal_vector(f.p2(), rng);
    CHECK((total_energy(g, a) - total_energy(g, b)) == doctest::Approx(full(a) - full(b)).epsilon(1e-10));
    WeightVector w{wu, a, 1.0};
    const Eigen::VectorXd gfull = grad_full(z, w.joined(), f, 1.0);
    CHECK((total_gradient(g, a) - gfull.tail(f.p2())).cwiseAbs().maxCoeff() < 1e-10);
}
