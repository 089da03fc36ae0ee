#include "ctmcbps/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ctmcbps {

EssEstimate ess_batch_means(const Eigen::Ref<const Eigen::VectorXd>& samples) {
    const Eigen::Index n = samples.size();
    if (n < 16) {
        throw std::invalid_argument("ess_batch_means: need at least 16 samples");
    }
    const double mean = samples.mean();
    const double s2 = (samples.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (!(s2 > 0.0)) {
        return {static_cast<double>(n), true};
    }
    const Eigen::Index b = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n))));
    const Eigen::Index a = n / b;
    const double used_mean = samples.head(a * b).mean();
    double ss = 0.0;
    for (Eigen::Index j = 0; j < a; ++j) {
        const double d = samples.segment(j * b, b).mean() - used_mean;
        ss += d * d;
    }
    const double sigma2 = static_cast<double>(b) * ss / static_cast<double>(a - 1);
    double ess = sigma2 > 0.0 ? static_cast<double>(n) * s2 / sigma2 : static_cast<double>(n);
    ess = std::min(ess, static_cast<double>(n));
    return {ess, false};
}

double ard(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) {
        throw std::invalid_argument("ard: arguments must be positive");
    }
    return std::abs(x - y) / std::max(x, y);
}

double kolmogorov_survival(double lambda) {
    if (lambda < 0.2) {
        return 1.0;
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: samples must be nonempty");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    return {d, d == 0.0 ? 1.0 : kolmogorov_survival((en + 0.12 + 0.11 / en) * d)};
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

Summary summarize(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("summarize: no values");
    }
    std::sort(values.begin(), values.end());
    Summary s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    return s;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty() || !(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile: need values and p in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, p);
}

EssReport ess_report(const Eigen::MatrixXd& samples, double seconds) {
    if (!(seconds > 0.0)) {
        throw std::invalid_argument("ess_report: seconds must be positive");
    }
    EssReport r;
    r.seconds = seconds;
    r.samples_used = static_cast<int>(samples.rows());
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
        const double e = ess_batch_means(samples.col(k)).ess;
        r.ess.push_back(e);
        r.ess_per_second.push_back(e / seconds);
    }
    r.ess_summary = summarize(r.ess);
    r.per_second_summary = summarize(r.ess_per_second);
    return r;
}

Eigen::MatrixXd theta_columns(const Eigen::MatrixXd& samples, const FeatureSet& features) {
    const int p1 = features.p1();
    Eigen::MatrixXd out(samples.rows(), num_pairs(features.num_states()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        const Eigen::VectorXd wb = samples.row(i).tail(samples.cols() - p1).transpose();
        out.row(i) = exchangeable_params(wb, features).transpose();
    }
    return out;
}

EssReport ess_per_second_report(const std::vector<ChainOutput>& chains, const FeatureSet& features, double burn_in,
                                double walltime_fraction) {
    if (chains.empty()) {
        throw std::invalid_argument("ess_per_second_report: no chains");
    }
    EssReport total;
    for (const auto& chain : chains) {
        const int skip = chain.burn_in_rows(burn_in);
        const Eigen::MatrixXd kept = chain.samples.bottomRows(chain.num_samples() - skip);
        const Eigen::MatrixXd theta = theta_columns(kept, features);
        const double seconds = chain.times.total * walltime_fraction;
        const EssReport r = ess_report(theta, seconds > 0.0 ? seconds : 1e-9);
        if (total.ess.empty()) {
            total.ess.assign(r.ess.size(), 0.0);
        }
        for (std::size_t k = 0; k < r.ess.size(); ++k) {
            total.ess[k] += r.ess[k];
        }
        total.seconds += r.seconds;
        total.samples_used += r.samples_used;
    }
    for (double e : total.ess) {
        total.ess_per_second.push_back(e / total.seconds);
    }
    total.ess_summary = summarize(total.ess);
    total.per_second_summary = summarize(total.ess_per_second);
    return total;
}

const char* to_string(EitKernel k) {
    switch (k) {
    case EitKernel::lbps_hmc: return "lbps_hmc";
    case EitKernel::hmc_only: return "hmc_only";
    case EitKernel::prior_redraw: return "prior_redraw";
    case EitKernel::broken: return "broken";
    }
    return "unknown";
}

EitKernel parse_eit_kernel(const std::string& name) {
    for (EitKernel k : {EitKernel::lbps_hmc, EitKernel::hmc_only, EitKernel::prior_redraw, EitKernel::broken}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    if (name == "lbps") {
        return EitKernel::lbps_hmc;
    }
    if (name == "hmc") {
        return EitKernel::hmc_only;
    }
    throw std::invalid_argument("unknown EIT kernel '" + name + "'");
}

bool EitResult::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const EitRow& r) { return r.pass; });
}

std::vector<ObservedSeries> simulate_dataset(const WeightVector& w, const FeatureSet& features, int num_series,
                                             double horizon, double mesh, Rng& rng) {
    const RateMatrix rates = build_rate_matrix(w, features);
    std::vector<ObservedSeries> data;
    data.reserve(static_cast<std::size_t>(num_series));
    for (int i = 0; i < num_series; ++i) {
        data.push_back(observe(simulate_path(rates, rates.pi, horizon, rng), mesh));
    }
    return data;
}

EitResult geweke_eit(const EitModel& model, EitKernel kernel, const EitOptions& options, std::uint64_t seed) {
    if (options.n_marginal < 1 || options.n_successive < 1 || options.thinning < 1) {
        throw std::invalid_argument("geweke_eit: sample counts and thinning must be >= 1");
    }
    const FeatureSet& features = model.features;
    const int p1 = features.p1();
    const int p = p1 + features.p2();
    EitResult out;
    out.marginal.resize(options.n_marginal, p);
    out.successive.resize(options.n_successive, p);

    Rng marginal_rng = make_stream(seed, {1});
    for (int i = 0; i < options.n_marginal; ++i) {
        // Data are drawn too so both streams share the same simulator.
        const WeightVector w = draw_prior(features, model.kappa, marginal_rng);
        (void)simulate_dataset(w, features, model.num_series, model.horizon, model.mesh, marginal_rng);
        out.marginal.row(i) = w.joined().transpose();
    }

    RunConfig config = options.sampler;
    config.kappa = model.kappa;
    if (kernel == EitKernel::broken) {
        config.lbps_intensity_scale = 2.0;
    }
    Rng rng = make_stream(seed, {2});
    WeightVector w = draw_prior(features, model.kappa, rng);
    auto data = simulate_dataset(w, features, model.num_series, model.horizon, model.mesh, rng);
    for (int i = 0; i < options.n_successive; ++i) {
        for (int t = 0; t < options.thinning; ++t) {
            switch (kernel) {
            case EitKernel::lbps_hmc:
            case EitKernel::broken:
                w = lbps_hmc_iteration(w, data, features, config, rng);
                break;
            case EitKernel::hmc_only:
                w = hmc_only_iteration(w, data, features, config, rng);
                break;
            case EitKernel::prior_redraw:
                w = draw_prior(features, model.kappa, rng);
                break;
            }
            data = simulate_dataset(w, features, model.num_series, model.horizon, model.mesh, rng);
        }
        out.successive.row(i) = w.joined().transpose();
    }

    for (int k = 0; k < p; ++k) {
        const Eigen::VectorXd a = out.marginal.col(k);
        const Eigen::VectorXd b = out.successive.col(k);
        const KsResult ks = ks_two_sample({a.data(), a.data() + a.size()}, {b.data(), b.data() + b.size()});
        EitRow row;
        row.block = k < p1 ? "wu" : "wb";
        row.index = k < p1 ? k : k - p1;
        row.statistic = ks.statistic;
        row.p_value = ks.p_value;
        row.threshold = 0.05 / (k < p1 ? p1 : features.p2());
        row.pass = ks.p_value > row.threshold;
        out.rows.push_back(row);
    }
    return out;
}

} // namespace ctmcbps
