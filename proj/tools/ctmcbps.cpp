#include "ctmcbps/aa.hpp"
#include "ctmcbps/diagnostics.hpp"
#include "ctmcbps/errors.hpp"
#include "ctmcbps/factorgraph.hpp"
#include "ctmcbps/inference.hpp"
#include "ctmcbps/io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace ctmcbps;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw DataError("cannot open '" + path + "'");
    }
    return is;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file_atomic(path, text);
    }
}

// Values from a key=value file fill any option not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) {
        return;
    }
    auto is = open_input(path);
    for (const auto& [key, value] : read_key_value(is)) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt || key == "config") {
            throw UsageError("config '" + path + "': unknown key '" + key + "' for " + sub->get_name());
        }
        if (opt->count() == 0) {
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

struct ModelFlags {
    std::string states = "5";
    std::string features = "chain";
    std::string ordering = "auto";

    void add(CLI::App* sub) {
        sub->add_option("--states", states, "Number of states, 'aa' for amino acids, or 'auto' (fit only)");
        sub->add_option("--features", features, "chain or gtr")->check(CLI::IsMember({"chain", "gtr"}));
        sub->add_option("--ordering", ordering, "Pair ordering: auto, lexicographic or nnpaao")
            ->check(CLI::IsMember({"auto", "lexicographic", "nnpaao"}));
    }
};

struct Model {
    StateSpace states;
    FeatureSet features;
};

bool is_integer(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

StateSpace resolve_states(const std::string& flag, const std::vector<std::string>& seen) {
    if (flag == "aa") {
        return amino_acid_states();
    }
    if (is_integer(flag)) {
        const int n = std::stoi(flag);
        if (n < 2) {
            throw UsageError("--states must be at least 2");
        }
        return StateSpace::numbered(n);
    }
    if (flag != "auto") {
        throw UsageError("--states must be an integer, 'aa' or 'auto'");
    }
    if (seen.empty()) {
        throw DataError("cannot infer states from an empty series file");
    }
    if (std::all_of(seen.begin(), seen.end(), is_integer)) {
        int top = 0;
        for (const auto& s : seen) {
            top = std::max(top, std::stoi(s));
        }
        return StateSpace::numbered(std::max(top + 1, 2));
    }
    const bool amino = std::all_of(seen.begin(), seen.end(), [](const std::string& s) {
        return s.size() == 1 && std::find(kAminoAcids.begin(), kAminoAcids.end(), s[0]) != kAminoAcids.end();
    });
    if (amino) {
        return amino_acid_states();
    }
    std::vector<std::string> labels = seen;
    std::sort(labels.begin(), labels.end());
    return StateSpace(labels);
}

Model make_model(const ModelFlags& flags, const std::vector<std::string>& seen = {}) {
    StateSpace states = resolve_states(flags.states, seen);
    const bool amino = states.labels() == amino_acid_states().labels();
    std::string ordering = flags.ordering;
    if (ordering == "auto") {
        ordering = amino ? "nnpaao" : "lexicographic";
    }
    if (ordering == "nnpaao" && !amino) {
        throw UsageError("--ordering nnpaao needs the amino-acid state space");
    }
    const PairOrdering eta = ordering == "nnpaao" ? eta_from_rank(nnpaao_ordering(grantham_table()))
                                                  : PairOrdering::lexicographic(states.size());
    FeatureSet f = flags.features == "gtr" ? gtr_features(states, eta) : chain_features(states, eta);
    return {std::move(states), std::move(f)};
}

std::string format_summary_rows(const std::string& label, const Summary& s) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << label << ",min," << s.min << "\n"
       << label << ",q1," << s.q1 << "\n"
       << label << ",mean," << s.mean << "\n"
       << label << ",median," << s.median << "\n"
       << label << ",q3," << s.q3 << "\n"
       << label << ",max," << s.max << "\n";
    return os.str();
}

// simulate ----------------------------------------------------------------

struct SimulateFlags {
    ModelFlags model;
    int series = 500;
    double horizon = 3.0;
    double mesh = 0.5;
    std::uint64_t seed = 1;
    std::string out;
    std::string truth;
    std::string config;
};

int cmd_simulate(const SimulateFlags& f) {
    const Model m = make_model(f.model);
    Rng weight_rng = make_stream(f.seed, {0x7472757468ULL});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    WeightVector w{Eigen::VectorXd(m.features.p1()), Eigen::VectorXd(m.features.p2()), 1.0};
    for (Eigen::Index i = 0; i < w.wu.size(); ++i) {
        w.wu[i] = unif(weight_rng);
    }
    for (Eigen::Index i = 0; i < w.wb.size(); ++i) {
        w.wb[i] = unif(weight_rng);
    }
    Rng data_rng = make_stream(f.seed, {0x64617461ULL});
    const auto data = simulate_dataset(w, m.features, f.series, f.horizon, f.mesh, data_rng);

    std::ostringstream series;
    write_series_csv(series, data, m.states);
    emit(f.out, series.str());

    const Eigen::VectorXd theta = exchangeable_params(w.wb, m.features);
    const Eigen::VectorXd pi = stationary_dist(w.wu, m.features);
    std::ostringstream truth;
    truth << "parameter,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < w.wu.size(); ++i) {
        truth << "wu_" << i << "," << w.wu[i] << "\n";
    }
    for (Eigen::Index i = 0; i < w.wb.size(); ++i) {
        truth << "wb_" << i << "," << w.wb[i] << "\n";
    }
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        truth << "theta_" << i << "," << theta[i] << "\n";
    }
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        truth << "pi_" << i << "," << pi[i] << "\n";
    }
    emit(f.truth.empty() ? f.out + ".truth.csv" : f.truth, truth.str());
    std::cerr << "simulated " << data.size() << " series over " << m.states.size() << " states\n";
    return 0;
}

// fit ---------------------------------------------------------------------

struct FitFlags {
    ModelFlags model{"auto"};
    std::string data;
    std::string scheme = "lbps_hmc";
    RunConfig run;
    int chains = 1;
    std::string out;
    std::string config;
};

std::string fit_summary(const ChainOutput& c, const RunConfig& run, const FeatureSet& features) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "scheme," << to_string(c.scheme) << "\n"
       << "iterations," << c.num_samples() << "\n"
       << "seed," << run.seed << "\n"
       << "trajectory_length," << run.trajectory_length << "\n"
       << "refresh_rate," << run.refresh_rate << "\n"
       << "hmc_steps," << run.hmc.L << "\n"
       << "hmc_eps," << run.hmc.eps << "\n"
       << "kappa," << run.kappa << "\n"
       << "burn_in," << run.burn_in << "\n"
       << "seconds_total," << c.times.total << "\n"
       << "seconds_augmentation," << c.times.augmentation << "\n"
       << "seconds_hmc," << c.times.hmc << "\n"
       << "seconds_lbps," << c.times.lbps << "\n"
       << "hmc_acceptance," << static_cast<double>(c.hmc_accepted) / c.num_samples() << "\n"
       << "collisions," << c.counters.collisions << "\n"
       << "refreshments," << c.counters.refreshments << "\n"
       << "recomputations," << c.counters.recomputations << "\n"
       << "queue_pushes," << c.counters.queue_pushes << "\n"
       << "queue_pops," << c.counters.queue_pops << "\n"
       << "stale_pops," << c.counters.stale_pops << "\n"
       << "max_recomputations_per_event," << c.counters.max_recomputations_per_event << "\n";
    if (c.num_samples() - c.burn_in_rows(run.burn_in) >= 16) {
        const EssReport r = ess_per_second_report({c}, features, run.burn_in);
        os << format_summary_rows("theta_ess", r.ess_summary) << format_summary_rows("theta_ess_per_second",
                                                                                         r.per_second_summary);
    }
    return os.str();
}

int cmd_fit(FitFlags f) {
    auto in = open_input(f.data);
    std::vector<std::string> labels;
    if (f.model.states == "auto") {
        labels = scan_series_labels(in);
        in = open_input(f.data);
    }
    const Model m = make_model(f.model, labels);
    const auto data = read_series_csv(in, m.states);
    f.run.scheme = parse_scheme(f.scheme);
    f.run.validate();
    if (f.chains < 1) {
        throw UsageError("--chains must be at least 1");
    }

    std::vector<std::future<ChainOutput>> jobs;
    std::vector<RunConfig> configs;
    for (int c = 0; c < f.chains; ++c) {
        RunConfig rc = f.run;
        rc.seed = f.run.seed + static_cast<std::uint64_t>(c);
        configs.push_back(rc);
    }
    for (const auto& rc : configs) {
        jobs.push_back(std::async(std::launch::async, [&, rc] { return run_chain(data, m.features, rc); }));
    }
    for (int c = 0; c < f.chains; ++c) {
        const ChainOutput out = jobs[static_cast<std::size_t>(c)].get();
        const std::string prefix = f.chains == 1 ? f.out : f.out + ".chain" + std::to_string(c);
        std::ostringstream samples;
        write_samples_csv(samples, out, m.features);
        write_file_atomic(prefix + ".samples.csv", samples.str());
        write_file_atomic(prefix + ".summary.csv", fit_summary(out, configs[static_cast<std::size_t>(c)], m.features));
        std::cerr << "chain " << c << ": " << out.num_samples() << " iterations in " << out.times.total << " s\n";
    }
    return 0;
}

// eit ---------------------------------------------------------------------

struct EitFlags {
    ModelFlags model;
    std::string kernel = "lbps_hmc";
    int series = 4;
    double horizon = 1.0;
    double mesh = 0.5;
    double kappa = 1.0;
    int n_marginal = 300;
    int n_successive = 300;
    int thinning = 50;
    double trajectory_length = 1.0;
    double refresh_rate = 1.0;
    int hmc_steps = 20;
    double hmc_eps = 0.05;
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
};

int cmd_eit(const EitFlags& f) {
    const Model m = make_model(f.model);
    EitModel model{m.features, f.kappa, f.series, f.horizon, f.mesh};
    EitOptions opts;
    opts.n_marginal = f.n_marginal;
    opts.n_successive = f.n_successive;
    opts.thinning = f.thinning;
    opts.sampler.kappa = f.kappa;
    opts.sampler.trajectory_length = f.trajectory_length;
    opts.sampler.refresh_rate = f.refresh_rate;
    opts.sampler.hmc = HmcConfig{f.hmc_steps, f.hmc_eps};
    opts.sampler.validate();
    const EitResult r = geweke_eit(model, parse_eit_kernel(f.kernel), opts, f.seed);

    std::ostringstream table;
    table << std::fixed << std::setprecision(3);
    for (const std::string block : {"wu", "wb"}) {
        std::vector<const EitRow*> rows;
        for (const auto& row : r.rows) {
            if (row.block == block) {
                rows.push_back(&row);
            }
        }
        if (rows.empty()) {
            continue;
        }
        table << block << " (threshold " << std::setprecision(4) << rows.front()->threshold << std::setprecision(3)
              << ")\n";
        table << "Parameter index";
        for (const auto* row : rows) table << "," << row->index + 1;
        table << "\nPvalue";
        for (const auto* row : rows) table << "," << row->p_value;
        table << "\nTest statistics";
        for (const auto* row : rows) table << "," << row->statistic;
        table << "\nTest";
        for (std::size_t i = 0; i < rows.size(); ++i) table << ",KS";
        table << "\n\n";
    }
    table << "kernel " << f.kernel << ": " << (r.all_pass() ? "PASS" : "FAIL") << "\n";
    std::cout << table.str();

    if (!f.out.empty()) {
        std::ostringstream csv;
        csv << "block,index,test,statistic,p_value,threshold,pass\n" << std::setprecision(10);
        for (const auto& row : r.rows) {
            csv << row.block << "," << row.index << ",KS," << row.statistic << "," << row.p_value << ","
                << row.threshold << "," << (row.pass ? 1 : 0) << "\n";
        }
        write_file_atomic(f.out, csv.str());
    }
    return 0;
}

// ingest-pair -------------------------------------------------------------

struct IngestFlags {
    std::string fasta;
    std::string out;
    std::string config;
};

int cmd_ingest_pair(const IngestFlags& f) {
    auto in = open_input(f.fasta);
    const SequencePair pair = read_fasta_pair(in);
    const StateSpace states = amino_acid_states();
    const PairIngest res = ingest_pair(pair, states);
    std::ostringstream os;
    write_series_csv(os, res.series, states);
    emit(f.out, os.str());
    std::cerr << "sites " << pair.seq_a.size() << ", series " << res.series.size() << ", skipped "
              << res.skipped_gaps << "\n";
    if (res.series.empty()) {
        std::cerr << "warning: no usable sites; output has no series\n";
    }
    return 0;
}

// diagnose ----------------------------------------------------------------

struct DiagnoseFlags {
    std::string samples;
    std::string compare;
    double burn_in = 0.3;
    double seconds = 0.0;
    int sparsity_states = 0;
    std::string out;
    std::string config;
};

std::vector<int> parameter_columns(const SampleTable& t) {
    std::vector<int> theta, weights;
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        const std::string& c = t.columns[k];
        if (c.rfind("theta_", 0) == 0) {
            theta.push_back(static_cast<int>(k));
        } else if (c != "iteration") {
            weights.push_back(static_cast<int>(k));
        }
    }
    return theta.empty() ? weights : theta;
}

Eigen::MatrixXd kept_rows(const SampleTable& t, const std::vector<int>& cols, double burn_in) {
    const auto n = t.values.rows();
    const auto skip = static_cast<Eigen::Index>(std::floor(burn_in * static_cast<double>(n)));
    Eigen::MatrixXd out(n - skip, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = t.values.col(cols[k]).tail(n - skip);
    }
    return out;
}

int cmd_diagnose(const DiagnoseFlags& f) {
    if (!(f.burn_in >= 0.0 && f.burn_in < 1.0)) {
        throw UsageError("--burn-in must lie in [0, 1)");
    }
    auto in = open_input(f.samples);
    const SampleTable a = read_samples_csv(in);
    const std::vector<int> cols = parameter_columns(a);
    if (cols.empty()) {
        throw DataError("'" + f.samples + "' has no parameter columns");
    }
    const Eigen::MatrixXd ka = kept_rows(a, cols, f.burn_in);
    if (ka.rows() < 16) {
        throw DataError("need at least 16 post-burn-in samples, have " + std::to_string(ka.rows()));
    }

    std::ostringstream os;
    os << std::setprecision(6);
    const EssReport r = ess_report(ka, f.seconds > 0.0 ? f.seconds : 1.0);
    os << "parameter,ess" << (f.seconds > 0.0 ? ",ess_per_second" : "") << "\n";
    for (std::size_t k = 0; k < cols.size(); ++k) {
        os << a.columns[static_cast<std::size_t>(cols[k])] << "," << r.ess[k];
        if (f.seconds > 0.0) {
            os << "," << r.ess_per_second[k];
        }
        os << "\n";
    }
    os << "\nstatistic,quantity,value\n" << format_summary_rows("ess", r.ess_summary);
    if (f.seconds > 0.0) {
        os << format_summary_rows("ess_per_second", r.per_second_summary);
    }

    if (!f.compare.empty()) {
        auto in_b = open_input(f.compare);
        const SampleTable b = read_samples_csv(in_b);
        if (b.columns != a.columns) {
            throw DataError("column mismatch between '" + f.samples + "' and '" + f.compare + "'");
        }
        const Eigen::MatrixXd kb = kept_rows(b, cols, f.burn_in);
        if (kb.rows() < 1) {
            throw DataError("'" + f.compare + "' has no post-burn-in samples");
        }
        std::vector<double> ards;
        os << "\nparameter,mean_a,mean_b,ard\n";
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double ma = ka.col(static_cast<Eigen::Index>(k)).mean();
            const double mb = kb.col(static_cast<Eigen::Index>(k)).mean();
            // Weights can be negative; the relative difference is taken on magnitudes.
            const double d = ma == mb ? 0.0 : ard(std::abs(ma), std::abs(mb));
            ards.push_back(d);
            os << a.columns[static_cast<std::size_t>(cols[k])] << "," << ma << "," << mb << "," << d << "\n";
        }
        os << "\nstatistic,quantity,value\n"
           << "ard,q10," << quantile(ards, 0.1) << "\n"
           << "ard,q90," << quantile(ards, 0.9) << "\n"
           << format_summary_rows("ard", summarize(ards));
    }

    if (f.sparsity_states > 0) {
        if (f.sparsity_states < 3) {
            throw UsageError("--sparsity-states must be at least 3");
        }
        const int n = f.sparsity_states;
        const StateSpace states = StateSpace::numbered(n);
        const FeatureSet feats = chain_features(states, PairOrdering::lexicographic(n));
        SuffStats z(n);
        z.c.setOnes();
        z.c.diagonal().setZero();
        z.h.setOnes();
        const FactorGraph g = build_posterior_graph(z, feats, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
        const SparsityProfile p = sparsity_profile(g);
        os << "\nsparsity,quantity,value\n"
           << "sparsity,states," << n << "\n"
           << "sparsity,factors," << p.num_factors << "\n"
           << "sparsity,variables," << p.num_vars << "\n"
           << "sparsity,max_neighbour_vars," << p.max_neighbour_vars << "\n"
           << "sparsity,max_extended_vars," << p.max_extended_vars << "\n"
           << "sparsity,max_extended_model_factors," << p.max_extended_model_factors << "\n"
           << "sparsity,max_extended_factors," << p.max_extended_factors << "\n";
    }
    emit(f.out, os.str());
    return 0;
}

// order-aa ----------------------------------------------------------------

int cmd_order_aa(const std::string& out) {
    const auto order = ranked_pairs(grantham_table());
    std::ostringstream os;
    os << "rank,pair,first,second,distance\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const char a = kAminoAcids[static_cast<std::size_t>(order[r].first)];
        const char b = kAminoAcids[static_cast<std::size_t>(order[r].second)];
        os << r << "," << a << b << "," << a << "," << b << "," << grantham_distance(a, b) << "\n";
    }
    emit(out, os.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian CTMC rate-matrix inference with local bouncy particle sampling"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate observed series from random true weights");
    sim.model.add(simulate);
    simulate->add_option("--series", sim.series, "Number of series")->check(CLI::PositiveNumber);
    simulate->add_option("--horizon", sim.horizon, "Observation window length")->check(CLI::PositiveNumber);
    simulate->add_option("--mesh", sim.mesh, "Observation spacing")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--out", sim.out, "Series CSV")->required();
    simulate->add_option("--truth", sim.truth, "Ground-truth CSV (default <out>.truth.csv)");
    simulate->add_option("--config", sim.config, "key=value defaults");

    FitFlags fit;
    auto* fit_cmd = app.add_subcommand("fit", "Run the posterior sampler on a series file");
    fit.model.add(fit_cmd);
    fit_cmd->add_option("--data", fit.data, "Series CSV")->required();
    fit_cmd->add_option("--scheme", fit.scheme, "lbps_hmc or hmc_only");
    fit_cmd->add_option("--iterations", fit.run.iterations);
    fit_cmd->add_option("--trajectory-length", fit.run.trajectory_length);
    fit_cmd->add_option("--refresh-rate", fit.run.refresh_rate);
    fit_cmd->add_option("--hmc-steps", fit.run.hmc.L);
    fit_cmd->add_option("--hmc-eps", fit.run.hmc.eps);
    fit_cmd->add_option("--kappa", fit.run.kappa);
    fit_cmd->add_option("--burn-in", fit.run.burn_in);
    fit_cmd->add_option("--seed", fit.run.seed);
    fit_cmd->add_option("--chains", fit.chains, "Independent chains run concurrently");
    fit_cmd->add_option("--out", fit.out, "Output prefix")->required();
    fit_cmd->add_option("--config", fit.config, "key=value defaults");

    EitFlags eit;
    auto* eit_cmd = app.add_subcommand("eit", "Marginal versus successive-conditional invariance test");
    eit.model.add(eit_cmd);
    eit_cmd->add_option("--kernel", eit.kernel, "lbps_hmc, hmc_only, prior_redraw or broken");
    eit_cmd->add_option("--series", eit.series)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--horizon", eit.horizon)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--mesh", eit.mesh)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--kappa", eit.kappa)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--n-marginal", eit.n_marginal)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--n-successive", eit.n_successive)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--thinning", eit.thinning)->check(CLI::PositiveNumber);
    eit_cmd->add_option("--trajectory-length", eit.trajectory_length);
    eit_cmd->add_option("--refresh-rate", eit.refresh_rate);
    eit_cmd->add_option("--hmc-steps", eit.hmc_steps);
    eit_cmd->add_option("--hmc-eps", eit.hmc_eps);
    eit_cmd->add_option("--seed", eit.seed);
    eit_cmd->add_option("--out", eit.out, "Long-format CSV of every test");
    eit_cmd->add_option("--config", eit.config, "key=value defaults");

    IngestFlags ing;
    auto* ingest = app.add_subcommand("ingest-pair", "Turn an aligned amino-acid sequence pair into series");
    ingest->add_option("--fasta", ing.fasta, "Two-record FASTA file")->required();
    ingest->add_option("--out", ing.out, "Series CSV")->required();
    ingest->add_option("--config", ing.config, "key=value defaults");

    DiagnoseFlags diag;
    auto* diagnose = app.add_subcommand("diagnose", "ESS, ARD and sparsity reports");
    diagnose->add_option("--samples", diag.samples, "Samples CSV")->required();
    diagnose->add_option("--compare", diag.compare, "Second samples CSV for ARD");
    diagnose->add_option("--burn-in", diag.burn_in);
    diagnose->add_option("--seconds", diag.seconds, "Walltime for ESS per second");
    diagnose->add_option("--sparsity-states", diag.sparsity_states, "Report chain-GTR graph sparsity");
    diagnose->add_option("--out", diag.out, "Report path (default stdout)");
    diagnose->add_option("--config", diag.config, "key=value defaults");

    std::string order_out;
    auto* order = app.add_subcommand("order-aa", "Export the nearest-neighbour amino-acid pair ranking");
    order->add_option("--out", order_out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            apply_config(simulate, sim.config);
            return cmd_simulate(sim);
        }
        if (fit_cmd->parsed()) {
            apply_config(fit_cmd, fit.config);
            return cmd_fit(fit);
        }
        if (eit_cmd->parsed()) {
            apply_config(eit_cmd, eit.config);
            return cmd_eit(eit);
        }
        if (ingest->parsed()) {
            apply_config(ingest, ing.config);
            return cmd_ingest_pair(ing);
        }
        if (diagnose->parsed()) {
            apply_config(diagnose, diag.config);
            return cmd_diagnose(diag);
        }
        return cmd_order_aa(order_out);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
