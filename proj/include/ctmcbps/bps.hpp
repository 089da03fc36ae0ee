#pragma once

#include "ctmcbps/factorgraph.hpp"
#include "ctmcbps/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace ctmcbps {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Analytical first-arrival times. Each returns the time Delta at which the
// potential along the ray w0 + v t has risen by the energy gap c, or
// +infinity when the intensity stays zero.

/// Sojourn factor h * q(w): Delta = log(c / (h q0) + 1) / dot for dot > 0.
double solve_bounce_sojourn(double h, double q0, double dot, double c);
/// Transition-count factor -count * log q(w): Delta = -c / (count * dot) for dot < 0.
double solve_bounce_transition(double count, double dot, double c);
/// Intensity max(0, a + b t): inverts the integrated intensity.
double solve_bounce_normal(double kappa, double a, double b, double c);

/// Reflect v against grad (both over the same coordinates).
Eigen::VectorXd reflect(const Eigen::VectorXd& v, const Eigen::VectorXd& grad);

struct Triplet {
    double position;
    double velocity;
    double time;
};

/// Piecewise-linear path: per-variable lists of (position, velocity, time).
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(const Eigen::VectorXd& position, const Eigen::VectorXd& velocity, double start_time = 0.0);

    int num_vars() const { return static_cast<int>(lists_.size()); }
    double end_time() const { return end_time_; }
    const std::vector<Triplet>& list(int k) const { return lists_.at(static_cast<std::size_t>(k)); }

    void append(int k, const Triplet& t);
    void set_end_time(double t) { end_time_ = t; }

    double position_at(int k, double t) const;
    Eigen::VectorXd positions_at(double t) const;
    Eigen::VectorXd final_position() const { return positions_at(end_time_); }
    std::size_t total_triplets() const;

private:
    std::vector<std::vector<Triplet>> lists_;
    double end_time_ = 0.0;
};

double position_at(const Trajectory& traj, int k, double t);

/// Positions at mesh_count equally spaced times over [0, T] (both ends
/// included when mesh_count >= 2; the initial state when mesh_count == 1).
/// Rows are mesh points.
Eigen::MatrixXd trajectory_discretize(const Trajectory& traj, int mesh_count);

struct EventCounters {
    long collisions = 0;       // L1
    long refreshments = 0;     // L2
    long recomputations = 0;   // bounce-time evaluations
    long queue_pushes = 0;
    long queue_pops = 0;
    long stale_pops = 0;
    long rejections = 0;       // thinning rejections (global BPS only)
    long max_recomputations_per_event = 0;

    EventCounters& operator+=(const EventCounters& o);
};

/// Bounce time of one factor from the current position/velocity along its
/// neighbour variables. `scale` multiplies the intensity.
double factor_bounce_time(const Factor& f, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
                          double gap, double scale = 1.0);

struct BpsResult {
    Trajectory trajectory;
    EventCounters counters;
};

/// Global BPS over the potential sum_f U_f. Bounce candidates come from
/// superposition of per-factor analytical solvers followed by a thinning
/// step against the full gradient; refreshment resamples the full velocity.
BpsResult bps_run_global(const FactorGraph& graph, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
                         double T, double refresh_rate, Rng& rng);

struct LbpsOptions {
    double refresh_rate = 1.0;
    /// Multiplies every bounce intensity; 1 is the correct sampler. Other
    /// values exist to check that invariance tests detect a broken kernel.
    double intensity_scale = 1.0;
    bool record_trajectory = true;
};

struct LbpsEvent {
    enum class Type { none, collision, refreshment, end } type = Type::none;
    double time = 0.0;
    int factor = -1;
    long recomputations = 0;
};

/// Local BPS with a lazily-deleted priority queue of per-factor candidate
/// times. Positions are stored as (w_k, v_k, t_k) and only advanced when a
/// variable is touched.
class LocalBps {
public:
    LocalBps(const FactorGraph& graph, const Eigen::VectorXd& position, const Eigen::VectorXd& velocity,
             double horizon, const LbpsOptions& options, Rng& rng);

    /// Process the next event. Returns false once the horizon is reached
    /// (the final flush happens on that call).
    bool step();
    void run();

    double time() const { return now_; }
    /// Current valid candidate time of factor f (+inf when none is scheduled).
    double scheduled_time(int f) const { return candidate_[static_cast<std::size_t>(f)]; }
    const LbpsEvent& last_event() const { return last_; }
    const EventCounters& counters() const { return counters_; }
    const Trajectory& trajectory() const { return trajectory_; }
    Trajectory take_trajectory() { return std::move(trajectory_); }
    Eigen::VectorXd position_now() const;
    const Eigen::VectorXd& velocity() const { return velocity_; }

private:
    struct Entry {
        double time;
        int factor;
        std::uint64_t version;
        bool operator>(const Entry& o) const { return time > o.time || (time == o.time && factor > o.factor); }
    };

    double position_of(int k, double t) const { return position_[k] + velocity_[k] * (t - stamp_[k]); }
    void advance(int k, double t);
    void record(int k);
    void recompute(int f);
    void recompute_neighbourhood(int f);
    void finish();

    const FactorGraph& graph_;
    LbpsOptions options_;
    Rng& rng_;
    double horizon_;
    double now_ = 0.0;
    double next_refresh_ = kInfinity;
    bool done_ = false;

    Eigen::VectorXd position_;
    Eigen::VectorXd velocity_;
    Eigen::VectorXd stamp_;
    std::vector<double> candidate_;
    std::vector<std::uint64_t> version_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue_;
    Eigen::VectorXd scratch_;
    Trajectory trajectory_;
    EventCounters counters_;
    LbpsEvent last_;
};

/// Run local BPS for length T from `position` with fresh standard-normal velocities.
BpsResult lbps_run(const FactorGraph& graph, const Eigen::VectorXd& position, double T, const LbpsOptions& options,
                   Rng& rng);

} // namespace ctmcbps
