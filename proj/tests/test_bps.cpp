#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctmcbps/bps.hpp"
#include "ctmcbps/diagnostics.hpp"
#include "ctmcbps/errors.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace ctmcbps;
using namespace testing_support;

namespace {

Factor prior(int k, double kappa) {
    Factor f;
    f.kind = FactorKind::normal_prior;
    f.vars = {k};
    f.coef = {1.0};
    f.kappa = kappa;
    f.coordinate = k;
    return f;
}

FactorGraph gaussian_graph(const std::vector<double>& kappas) {
    std::vector<Factor> fs;
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        fs.push_back(prior(static_cast<int>(k), kappas[k]));
    }
    return FactorGraph(static_cast<int>(kappas.size()), fs);
}

} // namespace

TEST_CASE("bounce time solvers: worked values") {
    CHECK(solve_bounce_sojourn(1.0, 1.0, -1.0, 1.0) == kInfinity);
    CHECK(solve_bounce_sojourn(1.0, 1.0, 1.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(solve_bounce_sojourn(0.0, 1.0, 1.0, 1.0) == kInfinity);
    CHECK(solve_bounce_sojourn(1.0, 1.0, 1.0, 1e-300) < 1e-290);
    CHECK_THROWS_AS(solve_bounce_sojourn(1.0, 1.0, 1.0, 0.0), std::invalid_argument);

    CHECK(solve_bounce_transition(2.0, 1.0, 1.0) == kInfinity);
    CHECK(solve_bounce_transition(2.0, 0.0, 1.0) == kInfinity);
    CHECK(solve_bounce_transition(2.0, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(solve_bounce_transition(2.0, -1.0, 1e-300) < 1e-290);
    CHECK_THROWS_AS(solve_bounce_transition(2.0, -1.0, -1.0), std::invalid_argument);

    CHECK(solve_bounce_normal(1.0, 0.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(solve_bounce_normal(1.0, -1.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(solve_bounce_normal(1.0, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("bounce time solvers: energy-gap identity") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> pos(0.05, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const double h = pos(rng), q0 = pos(rng), dot = std::abs(u(rng)) + 1e-3, c = energy_gap(rng);
        const double d = solve_bounce_sojourn(h, q0, dot, c);
        const double rise = h * q0 * (std::exp(dot * d) - 1.0);  // U(w0 + v d) - U(w0)
        CHECK(std::abs(rise - c) <= 1e-8 * c);

        const double count = std::floor(pos(rng) * 5) + 1, tdot = -(std::abs(u(rng)) + 1e-3);
        const double dt = solve_bounce_transition(count, tdot, c);
        CHECK(std::abs(-count * tdot * dt - c) <= 1e-8 * c);

        const double a = u(rng), b = pos(rng);
        const double dn = solve_bounce_normal(1.0, a, b, c);
        // Exact integral of max(0, a + b t) over [0, dn].
        const double t0 = std::max(0.0, -a / b);
        const double integral = dn <= t0 ? 0.0 : a * (dn - t0) + 0.5 * b * (dn * dn - t0 * t0);
        CHECK(std::abs(integral - c) <= 1e-10 * std::max(1.0, c));
    }
}

TEST_CASE("bounce time solvers: first-arrival distribution") {
    Rng rng(6);
    const int draws = 10000;
    SUBCASE("sojourn") {
        const double h = 1.3, w = 0.2, pi_t = 0.4, v = 0.8;
        Factor f;
        f.kind = FactorKind::sojourn;
        f.vars = {0};
        f.coef = {1.0};
        f.sojourn = h;
        f.pi_target = pi_t;
        std::vector<double> x;
        for (int i = 0; i < draws; ++i) {
            x.push_back(factor_bounce_time(f, Eigen::VectorXd::Constant(1, w), Eigen::VectorXd::Constant(1, v),
                                           energy_gap(rng)));
        }
        auto rate = [&](double t) { return h * pi_t * std::exp(w + v * t) * v; };
        CHECK(ks_one_sample(x, [&](double t) { return 1.0 - std::exp(-integrate(rate, t)); }) > 0.01);
    }
    SUBCASE("transition count") {
        Factor f;
        f.kind = FactorKind::transition_count;
        f.vars = {0};
        f.coef = {1.0};
        f.count = 3.0;
        f.pi_target = 0.3;
        std::vector<double> x;
        for (int i = 0; i < draws; ++i) {
            x.push_back(factor_bounce_time(f, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -0.7),
                                           energy_gap(rng)));
        }
        auto rate = [&](double) { return 3.0 * 0.7; };
        CHECK(ks_one_sample(x, [&](double t) { return 1.0 - std::exp(-integrate(rate, t)); }) > 0.01);
    }
    SUBCASE("normal") {
        const Factor f = prior(0, 2.0);
        std::vector<double> x;
        for (int i = 0; i < draws; ++i) {
            x.push_back(factor_bounce_time(f, Eigen::VectorXd::Constant(1, 0.9), Eigen::VectorXd::Constant(1, -1.1),
                                           energy_gap(rng)));
        }
        auto rate = [&](double t) { return std::max(0.0, 2.0 * (0.9 - 1.1 * t) * -1.1); };
        CHECK(ks_one_sample(x, [&](double t) { return 1.0 - std::exp(-integrate(rate, t, 2000)); }) > 0.01);
    }
}

TEST_CASE("reflection") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const int d = 1 + i % 5;
        const Eigen::VectorXd v = normal_vector(d, rng);
        const Eigen::VectorXd g = normal_vector(d, rng);
        const Eigen::VectorXd r = reflect(v, g);
        CHECK((reflect(r, g) - v).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(r.norm() - v.norm()) < 1e-12);
    }
    const Eigen::Vector2d v(1, 2);
    CHECK(reflect(v, Eigen::Vector2d(1, 0)).isApprox(Eigen::Vector2d(-1, 2)));
    CHECK(reflect(v, 3.0 * v).isApprox(-v));
    CHECK(reflect(v, Eigen::Vector2d(-2, 1)).isApprox(v));
    CHECK_THROWS_AS(reflect(v, Eigen::Vector2d::Zero()), PreconditionError);
}

TEST_CASE("global BPS") {
    Rng rng(8);
    SUBCASE("zero potential moves in straight lines between refreshments") {
        const FactorGraph empty(2, {});
        const BpsResult r = bps_run_global(empty, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1), 20.0, 1.0, rng);
        CHECK(r.counters.collisions == 0);
        CHECK(r.counters.refreshments > 0);
        const auto& l = r.trajectory.list(0);
        for (std::size_t i = 1; i < l.size(); ++i) {
            CHECK(l[i].position == doctest::Approx(l[i - 1].position + l[i - 1].velocity * (l[i].time - l[i - 1].time)));
        }
    }
    SUBCASE("horizon before the first event") {
        const FactorGraph g = gaussian_graph({1.0});
        const BpsResult r = bps_run_global(g, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0),
                                           1e-12, 1e-6, rng);
        CHECK(r.trajectory.list(0).size() == 2);
        CHECK(r.counters.collisions == 0);
    }
    SUBCASE("isotropic Gaussian") {
        const FactorGraph g = gaussian_graph({1.0, 1.0});
        const BpsResult r =
            bps_run_global(g, Eigen::Vector2d(0.5, -0.5), Eigen::Vector2d(1, 0.3), 100000.0, 1.0, rng);
        const Eigen::MatrixXd x = trajectory_discretize(r.trajectory, 100000);
        const Eigen::RowVectorXd mean = x.colwise().mean();
        const Eigen::MatrixXd centered = x.rowwise() - mean;
        const Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
        CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
        CHECK((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 0.1);
    }
}

TEST_CASE("local BPS on independent Gaussian factors") {
    Rng rng(9);
    const std::vector<double> kappas = {0.5, 1.0, 4.0};
    const FactorGraph g = gaussian_graph(kappas);
    LbpsOptions opts;
    const BpsResult r = lbps_run(g, Eigen::Vector3d(0.1, 0.2, -0.3), 100000.0, opts, rng);
    const Eigen::MatrixXd x = trajectory_discretize(r.trajectory, 100000);
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd col = x.col(k);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / (col.size() - 1.0);
        INFO("k=" << k << " mean=" << mean << " var=" << var);
        CHECK(std::abs(mean) < 0.05 / std::sqrt(kappas[k]));
        CHECK(std::abs(var * kappas[k] - 1.0) < 0.1);
    }
    CHECK(r.counters.collisions > 0);
    CHECK(r.counters.refreshments > 0);
}

TEST_CASE("local BPS bookkeeping") {
    Rng rng(10);
    const int n = 6;
    const FeatureSet f = chain_model(n);
    SuffStats z(n);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int x = 0; x < n; ++x) {
        z.h[x] = u(rng);
        for (int y = 0; y < n; ++y) {
            z.c(x, y) = x == y ? 0.0 : std::floor(u(rng) * 2);
        }
    }
    const FactorGraph g = build_posterior_graph(z, f, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
    int max_ext = 0;
    for (int i = 0; i < g.num_factors(); ++i) {
        max_ext = std::max(max_ext, static_cast<int>(g.extended_neighbour_factors(i).size()));
    }

    LbpsOptions opts;
    LocalBps engine(g, normal_vector(f.p2(), rng), normal_vector(f.p2(), rng), 50.0, opts, rng);
    std::vector<double> before(static_cast<std::size_t>(g.num_factors()));
    long collisions = 0;
    for (;;) {
        for (int i = 0; i < g.num_factors(); ++i) {
            before[static_cast<std::size_t>(i)] = engine.scheduled_time(i);
        }
        if (!engine.step()) {
            break;
        }
        const LbpsEvent& ev = engine.last_event();
        CHECK(ev.recomputations <= max_ext);
        const auto& ext = g.extended_neighbour_factors(ev.factor);
        for (int i = 0; i < g.num_factors(); ++i) {
            if (!std::binary_search(ext.begin(), ext.end(), i)) {
                CHECK(engine.scheduled_time(i) == before[static_cast<std::size_t>(i)]);
            }
        }
        collisions += ev.type == LbpsEvent::Type::collision;
    }
    CHECK(collisions > 0);
    CHECK(engine.counters().collisions == collisions);
    CHECK(engine.counters().max_recomputations_per_event <= max_ext);

    // Trajectory replay: positions follow the recorded triplets.
    const Trajectory& traj = engine.trajectory();
    CHECK(traj.end_time() == 50.0);
    for (int k = 0; k < traj.num_vars(); ++k) {
        const auto& l = traj.list(k);
        CHECK(l.front().time == 0.0);
        for (std::size_t i = 0; i + 1 < l.size(); ++i) {
            CHECK(l[i].time <= l[i + 1].time);
            CHECK(traj.position_at(k, l[i + 1].time) == doctest::Approx(l[i + 1].position));
        }
    }
    CHECK((traj.final_position() - engine.position_now()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("disconnected components do not interact") {
    Rng rng(11);
    std::vector<Factor> fs = {prior(0, 1.0), prior(1, 1.0)};
    const FactorGraph g(2, fs);
    LbpsOptions opts;
    opts.refresh_rate = 0.5;
    LocalBps engine(g, Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1.0, -1.0), 30.0, opts, rng);
    while (true) {
        const double other0 = engine.scheduled_time(0), other1 = engine.scheduled_time(1);
        if (!engine.step()) {
            break;
        }
        const int f = engine.last_event().factor;
        CHECK(engine.scheduled_time(1 - f) == (f == 0 ? other1 : other0));
    }
}

TEST_CASE("trajectory interpolation and discretization") {
    Trajectory t(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(1.0, -2.0));
    t.append(0, {1.0, -1.0, 1.0});
    t.append(1, {-1.0, 0.5, 1.0});
    t.set_end_time(3.0);
    CHECK(position_at(t, 0, 1.0) == 1.0);
    CHECK(position_at(t, 0, 0.5) == doctest::Approx(0.5));
    CHECK(position_at(t, 0, 3.0) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(position_at(t, 0, 3.5), std::invalid_argument);
    CHECK_THROWS_AS(position_at(t, 0, -0.1), std::invalid_argument);

    const Eigen::MatrixXd one = trajectory_discretize(t, 1);
    CHECK(one(0, 0) == 0.0);
    CHECK(one(0, 1) == 1.0);

    Trajectory line(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 0.5));
    line.set_end_time(4.0);
    const Eigen::MatrixXd aff = trajectory_discretize(line, 5);
    for (int j = 0; j < 5; ++j) {
        CHECK(aff(j, 0) == doctest::Approx(2.0 + 0.5 * j));
    }

    // Dense-mesh average against the exact integral of the piecewise-linear path.
    // Variable 0: 0 -> 1 on [0, 1], then 1 -> -1 on [1, 3]; integral 0.5 + 0 = 0.5.
    const Eigen::MatrixXd dense = trajectory_discretize(t, 2000001);
    CHECK(std::abs(dense.col(0).mean() - 0.5 / 3.0) < 1e-6);
}

TEST_CASE("local BPS input validation") {
    Rng rng(1);
    const FactorGraph g = gaussian_graph({1.0});
    LbpsOptions opts;
    CHECK_THROWS_AS(LocalBps(g, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 1.0, opts, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(LocalBps(g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0, opts, rng),
                    std::invalid_argument);
    const FactorGraph naive = FactorGraph::from_neighbours(1, {{0}});
    CHECK_THROWS_AS(LocalBps(naive, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, opts, rng),
                    std::invalid_argument);
}
