#include "ctmcbps/paths.hpp"
#include "ctmcbps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

#ifdef CTMCBPS_HAVE_OPENMP
#include <omp.h>
#endif

namespace ctmcbps {

int FullPath::state_at(double t) const {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin())];
}

SuffStats::SuffStats(int num_states)
    : n(Eigen::VectorXd::Zero(num_states)),
      h(Eigen::VectorXd::Zero(num_states)),
      c(Eigen::MatrixXd::Zero(num_states, num_states)) {}

SuffStats& SuffStats::operator+=(const SuffStats& other) {
    n += other.n;
    h += other.h;
    c += other.c;
    return *this;
}

namespace {

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& weights, double total, Rng& rng) {
    const double u = uniform_open(rng) * total;
    double cum = 0.0;
    const int n = static_cast<int>(weights.size());
    int last_positive = -1;
    for (int i = 0; i < n; ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        last_positive = i;
        cum += weights[i];
        if (u <= cum) {
            return i;
        }
    }
    return last_positive;
}

} // namespace

FullPath simulate_path_from(const RateMatrix& rates, int start, double start_time, double end_time, Rng& rng) {
    if (!(end_time > start_time)) {
        throw std::invalid_argument("simulate_path: end time must exceed start time");
    }
    FullPath path;
    path.start_time = start_time;
    path.end_time = end_time;
    path.states.push_back(start);
    const int n = rates.size();
    int x = start;
    double t = start_time;
    for (;;) {
        const double rate = -rates.Q(x, x);
        if (rate <= 0.0) {
            break;  // absorbing
        }
        std::exponential_distribution<double> hold(rate);
        t += hold(rng);
        if (t >= end_time) {
            break;
        }
        Eigen::VectorXd w = rates.Q.row(x).transpose();
        w[x] = 0.0;
        const int y = sample_categorical(w, rate, rng);
        if (y < 0 || y >= n) {
            break;
        }
        path.jump_times.push_back(t);
        path.states.push_back(y);
        x = y;
    }
    return path;
}

FullPath simulate_path(const RateMatrix& rates, const Eigen::VectorXd& initial, double T, Rng& rng) {
    if (!(T > 0.0)) {
        throw std::invalid_argument("simulate_path: T must be positive");
    }
    const int start = sample_categorical(initial, initial.sum(), rng);
    return simulate_path_from(rates, start, 0.0, T, rng);
}

ObservedSeries observe(const FullPath& path, double mesh) {
    if (!(mesh > 0.0)) {
        throw std::invalid_argument("observe: mesh must be positive");
    }
    ObservedSeries s;
    const double T = path.end_time - path.start_time;
    const double tol = 1e-12 * std::max(1.0, T);
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * mesh;
        if (t > T + tol) {
            break;
        }
        const double tt = (std::abs(t - T) <= tol) ? T : t;
        s.times.push_back(path.start_time + tt);
        s.states.push_back(path.state_at(path.start_time + tt));
        if (tt == T) {
            break;
        }
    }
    if (s.times.back() < path.end_time) {
        s.times.push_back(path.end_time);
        s.states.push_back(path.state_at(path.end_time));
    }
    return s;
}

void accumulate(SuffStats& z, const FullPath& path, bool count_initial) {
    if (count_initial) {
        z.n[path.states.front()] += 1.0;
    }
    double t = path.start_time;
    for (std::size_t i = 0; i < path.jump_times.size(); ++i) {
        z.h[path.states[i]] += path.jump_times[i] - t;
        z.c(path.states[i], path.states[i + 1]) += 1.0;
        t = path.jump_times[i];
    }
    z.h[path.states.back()] += path.end_time - t;
}

SuffStats sufficient_stats(const std::vector<FullPath>& paths, int num_states) {
    SuffStats z(num_states);
    for (const auto& p : paths) {
        accumulate(z, p);
    }
    return z;
}

double log_density_full(const SuffStats& z, const RateMatrix& rates, const Eigen::VectorXd& initial) {
    const int n = rates.size();
    double ll = 0.0;
    for (int x = 0; x < n; ++x) {
        if (z.n[x] > 0.0) {
            ll += z.n[x] * std::log(initial[x]);
        }
        ll += z.h[x] * rates.Q(x, x);
        for (int y = 0; y < n; ++y) {
            if (y != x && z.c(x, y) > 0.0) {
                if (rates.Q(x, y) <= 0.0) {
                    return -std::numeric_limits<double>::infinity();
                }
                ll += z.c(x, y) * std::log(rates.Q(x, y));
            }
        }
    }
    return ll;
}

double log_density_partial(const ObservedSeries& series, const RateMatrix& rates, const Eigen::VectorXd& initial) {
    if (series.times.empty()) {
        return 0.0;
    }
    double ll = std::log(initial[series.states[0]]);
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double delta = series.times[k] - series.times[k - 1];
        const Eigen::MatrixXd P = matrix_exponential(rates, delta);
        const double p = P(series.states[k - 1], series.states[k]);
        if (p <= 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        ll += std::log(p);
    }
    return ll;
}

Uniformizer::Uniformizer(const RateMatrix& rates) {
    const int n = rates.size();
    omega_ = 0.0;
    for (int x = 0; x < n; ++x) {
        omega_ = std::max(omega_, -rates.Q(x, x));
    }
    B_ = Eigen::MatrixXd::Identity(n, n);
    if (omega_ > 0.0) {
        B_ += rates.Q / omega_;
        // Diagonal of the dominating state is exactly zero; clip round-off.
        B_ = B_.cwiseMax(0.0);
    }
    powers_.push_back(Eigen::MatrixXd::Identity(n, n));
}

void Uniformizer::reserve(int n) {
    while (cached() < n) {
        powers_.push_back(powers_.back() * B_);
    }
}

const Eigen::MatrixXd& Uniformizer::power(int n) {
    reserve(n);
    return powers_[static_cast<std::size_t>(n)];
}

EndpointSampler::EndpointSampler(const RateMatrix& rates)
    : rates_(rates), unif_(rates), reversible_(rates.pi.size() == rates.size() && is_reversible(rates)) {}

const SegmentPlan& EndpointSampler::plan(double delta, double min_prob) {
    if (delta < 0.0) {
        throw std::invalid_argument("endpoint sampler: negative interval");
    }
    auto found = plans_.find(delta);
    if (found != plans_.end() && (min_prob <= 0.0 || min_prob >= found->second.min_prob)) {
        return found->second;
    }
    SegmentPlan p;
    p.delta = delta;
    p.transition = reversible_ ? ReversibleExpm(rates_)(delta) : matrix_exponential_series(rates_.Q, delta);
    if (min_prob <= 0.0) {
        min_prob = 1.0;
        for (Eigen::Index i = 0; i < p.transition.size(); ++i) {
            const double v = p.transition.data()[i];
            if (v > 0.0) {
                min_prob = std::min(min_prob, v);
            }
        }
    }
    p.min_prob = min_prob;
    const double mu = unif_.omega() * delta;
    // Truncate once the remaining Poisson mass cannot exceed 1e-10 of the
    // smallest conditioned-on endpoint probability: sum_{n>K} Pois(n) (B^n)_ab
    // <= Pois tail(K).
    const double tail_tol = 1e-10 * min_prob;
    if (mu == 0.0) {
        p.poisson = {1.0};
        p.max_jumps = 0;
    } else {
        double log_p = -mu;
        for (int k = 0;; ++k) {
            p.poisson.push_back(std::exp(log_p));
            const double next = std::exp(log_p + std::log(mu) - std::log(k + 1.0));
            const double ratio = mu / (k + 2.0);
            if (static_cast<double>(k) > mu && ratio < 1.0 && next / (1.0 - ratio) < tail_tol) {
                break;
            }
            log_p += std::log(mu) - std::log(k + 1.0);
        }
        p.max_jumps = static_cast<int>(p.poisson.size()) - 1;
    }
    unif_.reserve(p.max_jumps);
    auto [it, inserted] = plans_.insert_or_assign(delta, std::move(p));
    (void)inserted;
    return it->second;
}

const SegmentPlan& EndpointSampler::plan_for(double delta) const {
    auto it = plans_.find(delta);
    if (it == plans_.end()) {
        throw InternalError("endpoint sampler: no plan for interval length");
    }
    return it->second;
}

int EndpointSampler::sample_jump_count(const SegmentPlan& plan, int a, int b, Rng& rng) const {
    double total = 0.0;
    for (int k = 0; k <= plan.max_jumps; ++k) {
        total += plan.poisson[static_cast<std::size_t>(k)] * unif_.cached_power(k)(a, b);
    }
    if (!(total > 0.0)) {
        throw PreconditionError("endpoint sampler: end state unreachable from start state");
    }
    const double u = uniform_open(rng) * total;
    double cum = 0.0;
    int last = 0;
    for (int k = 0; k <= plan.max_jumps; ++k) {
        const double w = plan.poisson[static_cast<std::size_t>(k)] * unif_.cached_power(k)(a, b);
        if (w <= 0.0) {
            continue;
        }
        last = k;
        cum += w;
        if (u <= cum) {
            return k;
        }
    }
    return last;
}

FullPath EndpointSampler::sample(int a, int b, double t0, double delta, Rng& rng) const {
    FullPath path;
    path.start_time = t0;
    path.end_time = t0 + delta;
    path.states.push_back(a);
    if (delta == 0.0 || unif_.omega() == 0.0) {
        if (a != b) {
            throw PreconditionError("endpoint sampler: end state unreachable from start state");
        }
        return path;
    }
    const SegmentPlan& p = plan_for(delta);
    const int N = sample_jump_count(p, a, b, rng);
    if (N == 0) {
        if (a != b) {
            throw InternalError("endpoint sampler: zero jumps between distinct states");
        }
        return path;
    }
    std::vector<double> times(static_cast<std::size_t>(N));
    for (auto& t : times) {
        t = t0 + delta * uniform_open(rng);
    }
    std::sort(times.begin(), times.end());

    const Eigen::MatrixXd& B = unif_.kernel();
    const int n = rates_.size();
    Eigen::VectorXd w(n);
    int x = a;
    for (int i = 1; i <= N; ++i) {
        int y = b;
        if (i < N) {
            const Eigen::MatrixXd& rest = unif_.cached_power(N - i);
            for (int s = 0; s < n; ++s) {
                w[s] = B(x, s) * rest(s, b);
            }
            const double total = w.sum();
            if (!(total > 0.0)) {
                throw InternalError("endpoint sampler: bridge lost its endpoint");
            }
            y = sample_categorical(w, total, rng);
        }
        if (y != x) {
            path.jump_times.push_back(times[static_cast<std::size_t>(i - 1)]);
            path.states.push_back(y);
        }
        x = y;
    }
    return path;
}

std::vector<double> EndpointSampler::jump_count_distribution(double delta, int a, int b) {
    const SegmentPlan& p = plan(delta);
    std::vector<double> out(static_cast<std::size_t>(p.max_jumps + 1));
    double total = 0.0;
    for (int k = 0; k <= p.max_jumps; ++k) {
        out[static_cast<std::size_t>(k)] = p.poisson[static_cast<std::size_t>(k)] * unif_.cached_power(k)(a, b);
        total += out[static_cast<std::size_t>(k)];
    }
    for (auto& v : out) {
        v /= total;
    }
    return out;
}

FullPath endpoint_sample(const RateMatrix& rates, int a, int b, double delta, Rng& rng) {
    if (delta < 0.0) {
        throw std::invalid_argument("endpoint_sample: negative interval");
    }
    EndpointSampler sampler(rates);
    if (delta > 0.0) {
        const SegmentPlan& p = sampler.plan(delta);
        if (!(p.transition(a, b) > 0.0)) {
            throw PreconditionError("endpoint_sample: end state unreachable from start state");
        }
        sampler.plan(delta, p.transition(a, b));
    }
    return sampler.sample(a, b, 0.0, delta, rng);
}

SuffStats initial_counts(const std::vector<ObservedSeries>& data, int num_states) {
    SuffStats z(num_states);
    for (const auto& s : data) {
        if (!s.states.empty()) {
            z.n[s.states.front()] += 1.0;
        }
    }
    return z;
}

namespace {

struct Segment {
    int series;
    int index;  // segment k spans observations k and k+1
};

struct SegmentStats {
    std::vector<std::pair<int, double>> sojourn;  // (state, time) pieces
    std::vector<std::pair<int, int>> jumps;
};

SuffStats augment_impl(const std::vector<ObservedSeries>& data, const RateMatrix& rates, std::uint64_t seed,
                       bool parallel) {
    const int n = rates.size();
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t k = 0; k + 1 < data[i].size(); ++k) {
            segments.push_back({static_cast<int>(i), static_cast<int>(k)});
        }
    }

    EndpointSampler sampler(rates);
    // Plan every distinct interval length serially; workers only read.
    std::map<double, double> min_prob;
    for (const auto& s : segments) {
        const auto& series = data[static_cast<std::size_t>(s.series)];
        const double delta = series.times[static_cast<std::size_t>(s.index + 1)] -
                             series.times[static_cast<std::size_t>(s.index)];
        if (!(delta > 0.0)) {
            throw DataError("series " + std::to_string(s.series) + ", segment " + std::to_string(s.index) +
                            ": observation times must be strictly increasing");
        }
        const SegmentPlan& p = sampler.plan(delta);
        const double prob = p.transition(series.states[static_cast<std::size_t>(s.index)],
                                         series.states[static_cast<std::size_t>(s.index + 1)]);
        if (!(prob > 0.0)) {
            throw PreconditionError("series " + std::to_string(s.series) + ", segment " + std::to_string(s.index) +
                                    ": end state unreachable under current rates");
        }
        auto it = min_prob.find(delta);
        if (it == min_prob.end() || prob < it->second) {
            min_prob[delta] = prob;
        }
    }
    for (const auto& [delta, prob] : min_prob) {
        sampler.plan(delta, prob);
    }

    std::vector<SegmentStats> pieces(segments.size());
    std::exception_ptr failure;
    const long count = static_cast<long>(segments.size());

    auto work = [&](long s) {
        const Segment& seg = segments[static_cast<std::size_t>(s)];
        const auto& series = data[static_cast<std::size_t>(seg.series)];
        const auto k = static_cast<std::size_t>(seg.index);
        Rng rng = make_stream(seed, {static_cast<std::uint64_t>(s)});
        const FullPath path = sampler.sample(series.states[k], series.states[k + 1], series.times[k],
                                             series.times[k + 1] - series.times[k], rng);
        SegmentStats& out = pieces[static_cast<std::size_t>(s)];
        double t = path.start_time;
        for (std::size_t j = 0; j < path.jump_times.size(); ++j) {
            out.sojourn.emplace_back(path.states[j], path.jump_times[j] - t);
            out.jumps.emplace_back(path.states[j], path.states[j + 1]);
            t = path.jump_times[j];
        }
        out.sojourn.emplace_back(path.states.back(), path.end_time - t);
    };

    if (parallel) {
#ifdef CTMCBPS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
        for (long s = 0; s < count; ++s) {
            try {
                work(s);
            } catch (...) {
#ifdef CTMCBPS_HAVE_OPENMP
#pragma omp critical(ctmcbps_augment_failure)
#endif
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    } else {
        for (long s = 0; s < count; ++s) {
            work(s);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    // Fixed-order reduction keeps results independent of the thread count.
    SuffStats z = initial_counts(data, n);
    for (const auto& piece : pieces) {
        for (const auto& [state, dt] : piece.sojourn) {
            z.h[state] += dt;
        }
        for (const auto& [from, to] : piece.jumps) {
            z.c(from, to) += 1.0;
        }
    }
    return z;
}

} // namespace

SuffStats augment_dataset(const std::vector<ObservedSeries>& data, const RateMatrix& rates, std::uint64_t seed) {
    return augment_impl(data, rates, seed, true);
}

SuffStats augment_dataset_serial(const std::vector<ObservedSeries>& data, const RateMatrix& rates,
                                 std::uint64_t seed) {
    return augment_impl(data, rates, seed, false);
}

} // namespace ctmcbps
