#include "ctmcbps/bps.hpp"
#include "ctmcbps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctmcbps {

double solve_bounce_sojourn(double h, double q0, double dot, double c) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("solve_bounce_sojourn: energy gap must be positive");
    }
    if (!(h > 0.0) || !(q0 > 0.0) || !(dot > 0.0)) {
        return kInfinity;
    }
    return std::log1p(c / (h * q0)) / dot;
}

double solve_bounce_transition(double count, double dot, double c) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("solve_bounce_transition: energy gap must be positive");
    }
    // dot == 0 gives zero intensity along the whole ray.
    if (!(count > 0.0) || !(dot < 0.0)) {
        return kInfinity;
    }
    return -c / (count * dot);
}

double solve_bounce_normal(double kappa, double a, double b, double c) {
    (void)kappa;  // folded into a and b by the caller
    if (!(b > 0.0)) {
        throw std::invalid_argument("solve_bounce_normal: b must be positive");
    }
    if (!(c > 0.0)) {
        throw std::invalid_argument("solve_bounce_normal: energy gap must be positive");
    }
    if (a >= 0.0) {
        // Stable root of b/2 t^2 + a t - c = 0.
        return 2.0 * c / (a + std::sqrt(a * a + 2.0 * b * c));
    }
    return -a / b + std::sqrt(2.0 * c / b);
}

Eigen::VectorXd reflect(const Eigen::VectorXd& v, const Eigen::VectorXd& grad) {
    if (v.size() != grad.size()) {
        throw std::invalid_argument("reflect: dimension mismatch");
    }
    const double norm2 = grad.squaredNorm();
    if (!(norm2 > 0.0)) {
        throw PreconditionError("reflect: zero gradient");
    }
    return v - (2.0 * grad.dot(v) / norm2) * grad;
}

Trajectory::Trajectory(const Eigen::VectorXd& position, const Eigen::VectorXd& velocity, double start_time)
    : lists_(static_cast<std::size_t>(position.size())), end_time_(start_time) {
    for (Eigen::Index k = 0; k < position.size(); ++k) {
        lists_[static_cast<std::size_t>(k)].push_back({position[k], velocity[k], start_time});
    }
}

void Trajectory::append(int k, const Triplet& t) {
    auto& l = lists_.at(static_cast<std::size_t>(k));
    if (!l.empty() && t.time < l.back().time) {
        throw InternalError("trajectory times must be nondecreasing");
    }
    l.push_back(t);
    end_time_ = std::max(end_time_, t.time);
}

double Trajectory::position_at(int k, double t) const {
    const auto& l = list(k);
    if (t < l.front().time || t > end_time_) {
        throw std::invalid_argument("position_at: time outside trajectory");
    }
    // Last triplet with time <= t.
    auto it = std::upper_bound(l.begin(), l.end(), t, [](double x, const Triplet& tr) { return x < tr.time; });
    const Triplet& seg = *(it - 1);
    return seg.position + seg.velocity * (t - seg.time);
}

Eigen::VectorXd Trajectory::positions_at(double t) const {
    Eigen::VectorXd out(num_vars());
    for (int k = 0; k < num_vars(); ++k) {
        out[k] = position_at(k, t);
    }
    return out;
}

std::size_t Trajectory::total_triplets() const {
    std::size_t n = 0;
    for (const auto& l : lists_) {
        n += l.size();
    }
    return n;
}

double position_at(const Trajectory& traj, int k, double t) { return traj.position_at(k, t); }

Eigen::MatrixXd trajectory_discretize(const Trajectory& traj, int mesh_count) {
    if (mesh_count < 1) {
        throw std::invalid_argument("trajectory_discretize: mesh_count must be >= 1");
    }
    const double start = traj.num_vars() > 0 ? traj.list(0).front().time : 0.0;
    const double span = traj.end_time() - start;
    Eigen::MatrixXd out(mesh_count, traj.num_vars());
    for (int k = 0; k < traj.num_vars(); ++k) {
        const auto& l = traj.list(k);
        std::size_t seg = 0;
        for (int j = 0; j < mesh_count; ++j) {
            const double t = mesh_count == 1 ? start : start + span * j / (mesh_count - 1);
            while (seg + 1 < l.size() && l[seg + 1].time <= t) {
                ++seg;
            }
            out(j, k) = l[seg].position + l[seg].velocity * (t - l[seg].time);
        }
    }
    return out;
}

EventCounters& EventCounters::operator+=(const EventCounters& o) {
    collisions += o.collisions;
    refreshments += o.refreshments;
    recomputations += o.recomputations;
    queue_pushes += o.queue_pushes;
    queue_pops += o.queue_pops;
    stale_pops += o.stale_pops;
    rejections += o.rejections;
    max_recomputations_per_event = std::max(max_recomputations_per_event, o.max_recomputations_per_event);
    return *this;
}

double factor_bounce_time(const Factor& f, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
                          double gap, double scale) {
    const double c = gap / scale;
    double dot = 0.0;
    double wdot = 0.0;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
        dot += f.coef[i] * velocity[f.vars[i]];
        wdot += f.coef[i] * position[f.vars[i]];
    }
    switch (f.kind) {
    case FactorKind::sojourn:
        return solve_bounce_sojourn(f.sojourn, f.pi_target * std::exp(wdot), dot, c);
    case FactorKind::transition_count:
        return solve_bounce_transition(f.count, dot, c);
    case FactorKind::normal_prior: {
        const double v = velocity[f.coordinate];
        const double b = f.kappa * v * v;
        if (!(b > 0.0)) {
            return kInfinity;
        }
        return solve_bounce_normal(f.kappa, f.kappa * position[f.coordinate] * v, b, c);
    }
    default:
        throw std::invalid_argument(std::string("no analytical bounce time for factor kind ") + to_string(f.kind));
    }
}

namespace {

double exponential(Rng& rng, double rate) {
    if (!(rate > 0.0)) {
        return kInfinity;
    }
    return energy_gap(rng) / rate;
}

} // namespace

BpsResult bps_run_global(const FactorGraph& graph, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
                         double T, double refresh_rate, Rng& rng) {
    if (!(T > 0.0)) {
        throw std::invalid_argument("bps_run_global: T must be positive");
    }
    if (refresh_rate < 0.0) {
        throw std::invalid_argument("bps_run_global: refresh rate must be nonnegative");
    }
    const int p = graph.num_vars();
    Eigen::VectorXd w = position;
    Eigen::VectorXd v = velocity;
    BpsResult out{Trajectory(w, v), {}};
    double t = 0.0;

    auto record_all = [&] {
        for (int k = 0; k < p; ++k) {
            out.trajectory.append(k, {w[k], v[k], t});
        }
    };

    for (;;) {
        double tau_bounce = kInfinity;
        for (int f = 0; f < graph.num_factors(); ++f) {
            tau_bounce = std::min(tau_bounce, factor_bounce_time(graph.factor(f), w, v, energy_gap(rng)));
            ++out.counters.recomputations;
        }
        const double tau_ref = exponential(rng, refresh_rate);
        const double tau = std::min(tau_bounce, tau_ref);
        if (t + tau >= T) {
            w += v * (T - t);
            t = T;
            record_all();
            break;
        }
        w += v * tau;
        t += tau;
        if (tau_ref <= tau_bounce) {
            for (int k = 0; k < p; ++k) {
                v[k] = standard_normal(rng);
            }
            ++out.counters.refreshments;
            record_all();
            continue;
        }
        // Thinning: the superposed per-factor intensity dominates the true one.
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
        double bound = 0.0;
        for (int f = 0; f < graph.num_factors(); ++f) {
            const Factor& fac = graph.factor(f);
            const auto g = factor_gradient(fac, w);
            double ip = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                grad[fac.vars[i]] += g[i];
                ip += g[i] * v[fac.vars[i]];
            }
            bound += std::max(0.0, ip);
        }
        const double rate = std::max(0.0, grad.dot(v));
        if (bound > 0.0 && uniform_open(rng) * bound <= rate) {
            v = reflect(v, grad);
            ++out.counters.collisions;
            record_all();
        } else {
            ++out.counters.rejections;
        }
    }
    out.trajectory.set_end_time(T);
    return out;
}

LocalBps::LocalBps(const FactorGraph& graph, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
                   double horizon, const LbpsOptions& options, Rng& rng)
    : graph_(graph), options_(options), rng_(rng), horizon_(horizon), position_(position), velocity_(velocity),
      stamp_(Eigen::VectorXd::Zero(position.size())),
      candidate_(static_cast<std::size_t>(graph.num_factors()), kInfinity),
      version_(static_cast<std::size_t>(graph.num_factors()), 0),
      scratch_(Eigen::VectorXd::Zero(position.size())) {
    if (graph.analysis_only()) {
        throw std::invalid_argument("LocalBps: graph was built for structural analysis only");
    }
    if (position.size() != graph.num_vars() || velocity.size() != graph.num_vars()) {
        throw std::invalid_argument("LocalBps: state dimension does not match the factor graph");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("LocalBps: trajectory length must be positive");
    }
    if (options_.record_trajectory) {
        trajectory_ = Trajectory(position_, velocity_);
    }
    for (int f = 0; f < graph_.num_factors(); ++f) {
        recompute(f);
    }
    next_refresh_ = exponential(rng_, options_.refresh_rate);
}

void LocalBps::advance(int k, double t) {
    position_[k] = position_of(k, t);
    stamp_[k] = t;
}

void LocalBps::record(int k) {
    if (options_.record_trajectory) {
        trajectory_.append(k, {position_[k], velocity_[k], stamp_[k]});
    }
}

void LocalBps::recompute(int f) {
    const Factor& fac = graph_.factor(f);
    for (int k : fac.vars) {
        scratch_[k] = position_of(k, now_);
    }
    const double dt = factor_bounce_time(fac, scratch_, velocity_, energy_gap(rng_), options_.intensity_scale);
    auto& ver = version_[static_cast<std::size_t>(f)];
    ++ver;
    ++counters_.recomputations;
    ++last_.recomputations;
    candidate_[static_cast<std::size_t>(f)] = now_ + dt;
    if (std::isfinite(dt)) {
        queue_.push({now_ + dt, f, ver});
        ++counters_.queue_pushes;
    }
}

void LocalBps::recompute_neighbourhood(int f) {
    for (int g : graph_.extended_neighbour_factors(f)) {
        recompute(g);
    }
}

void LocalBps::finish() {
    now_ = horizon_;
    for (int k = 0; k < graph_.num_vars(); ++k) {
        advance(k, horizon_);
        record(k);
    }
    if (options_.record_trajectory) {
        trajectory_.set_end_time(horizon_);
    }
    last_ = {LbpsEvent::Type::end, horizon_, -1, 0};
    done_ = true;
}

bool LocalBps::step() {
    if (done_) {
        return false;
    }
    // Drop stale entries left behind by recomputations.
    while (!queue_.empty()) {
        const Entry& top = queue_.top();
        if (top.version == version_[static_cast<std::size_t>(top.factor)]) {
            break;
        }
        queue_.pop();
        ++counters_.queue_pops;
        ++counters_.stale_pops;
    }
    const double next_bounce = queue_.empty() ? kInfinity : queue_.top().time;
    const double next = std::min(next_bounce, next_refresh_);
    if (next >= horizon_) {
        finish();
        return false;
    }

    last_ = {};
    if (next_refresh_ <= next_bounce) {
        now_ = next_refresh_;
        const int f = std::uniform_int_distribution<int>(0, graph_.num_factors() - 1)(rng_);
        for (int k : graph_.neighbour_vars(f)) {
            advance(k, now_);
            velocity_[k] = standard_normal(rng_);
            record(k);
        }
        last_.type = LbpsEvent::Type::refreshment;
        last_.factor = f;
        last_.time = now_;
        ++counters_.refreshments;
        recompute_neighbourhood(f);
        next_refresh_ = now_ + exponential(rng_, options_.refresh_rate);
    } else {
        const Entry ev = queue_.top();
        queue_.pop();
        ++counters_.queue_pops;
        now_ = ev.time;
        const Factor& fac = graph_.factor(ev.factor);
        const std::vector<int> extended = graph_.extended_neighbour_vars(ev.factor);
        for (int k : extended) {
            advance(k, now_);
        }
        const auto grad = factor_gradient(fac, position_);
        Eigen::VectorXd g(static_cast<Eigen::Index>(grad.size()));
        Eigen::VectorXd v(static_cast<Eigen::Index>(grad.size()));
        for (std::size_t i = 0; i < grad.size(); ++i) {
            g[static_cast<Eigen::Index>(i)] = grad[i];
            v[static_cast<Eigen::Index>(i)] = velocity_[fac.vars[i]];
        }
        if (!(g.dot(v) > 0.0)) {
            throw InternalError("local BPS: collision of factor " + std::to_string(ev.factor) +
                                " fired with non-positive intensity");
        }
        const Eigen::VectorXd reflected = reflect(v, g);
        for (std::size_t i = 0; i < fac.vars.size(); ++i) {
            velocity_[fac.vars[i]] = reflected[static_cast<Eigen::Index>(i)];
        }
        for (int k : extended) {
            record(k);
        }
        last_.type = LbpsEvent::Type::collision;
        last_.factor = ev.factor;
        last_.time = now_;
        ++counters_.collisions;
        recompute_neighbourhood(ev.factor);
    }
    counters_.max_recomputations_per_event = std::max(counters_.max_recomputations_per_event, last_.recomputations);
    return true;
}

void LocalBps::run() {
    while (step()) {
    }
}

Eigen::VectorXd LocalBps::position_now() const {
    Eigen::VectorXd out(position_.size());
    for (Eigen::Index k = 0; k < position_.size(); ++k) {
        out[k] = position_of(static_cast<int>(k), now_);
    }
    return out;
}

BpsResult lbps_run(const FactorGraph& graph, const Eigen::VectorXd& position, double T, const LbpsOptions& options,
                   Rng& rng) {
    Eigen::VectorXd velocity(position.size());
    for (Eigen::Index k = 0; k < velocity.size(); ++k) {
        velocity[k] = standard_normal(rng);
    }
    LocalBps engine(graph, position, velocity, T, options, rng);
    engine.run();
    BpsResult out;
    out.counters = engine.counters();
    out.trajectory = engine.take_trajectory();
    if (!options.record_trajectory) {
        // Keep the endpoint available even without a recorded path.
        out.trajectory = Trajectory(engine.position_now(), engine.velocity(), 0.0);
        out.trajectory.set_end_time(0.0);
    }
    return out;
}

} // namespace ctmcbps
