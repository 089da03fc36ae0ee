#include "ctmcbps/io.hpp"
#include "ctmcbps/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ctmcbps {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    }
}

struct SeriesRow {
    std::string id;
    double time;
    std::string state;
    std::size_t line;
};

template <typename F>
void for_each_series_row(std::istream& is, F&& f) {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (!header) {
            if (t != "series_id,time,state") {
                throw DataError("line " + std::to_string(lineno) + ": expected header 'series_id,time,state'");
            }
            header = true;
            continue;
        }
        const auto fields = split_csv(t);
        if (fields.size() != 3) {
            throw DataError("line " + std::to_string(lineno) + ": expected 3 fields");
        }
        f(SeriesRow{fields[0], parse_double(fields[1], lineno), fields[2], lineno});
    }
    if (!header) {
        throw DataError("series file is empty (missing header)");
    }
}

} // namespace

void write_series_csv(std::ostream& os, const std::vector<ObservedSeries>& data, const StateSpace& states) {
    os << "series_id,time,state\n";
    os << std::setprecision(12);
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (std::size_t i = 0; i < data[s].size(); ++i) {
            os << s << ',' << data[s].times[i] << ',' << states.label(data[s].states[i]) << '\n';
        }
    }
}

std::vector<ObservedSeries> read_series_csv(std::istream& is, const StateSpace& states) {
    std::vector<ObservedSeries> out;
    std::unordered_set<std::string> seen;
    std::string current;
    for_each_series_row(is, [&](const SeriesRow& row) {
        if (out.empty() || row.id != current) {
            if (!seen.insert(row.id).second) {
                throw DataError("line " + std::to_string(row.line) + ": rows of series '" + row.id +
                                "' are not contiguous");
            }
            current = row.id;
            out.emplace_back();
        }
        auto& s = out.back();
        if (!std::isfinite(row.time)) {
            throw DataError("line " + std::to_string(row.line) + ": non-finite time");
        }
        if (!s.times.empty() && !(row.time > s.times.back())) {
            throw DataError("line " + std::to_string(row.line) + ": times must increase within a series");
        }
        int state = 0;
        try {
            state = states.index_of(row.state);
        } catch (const std::invalid_argument&) {
            throw DataError("line " + std::to_string(row.line) + ": unknown state '" + row.state + "'");
        }
        s.times.push_back(row.time);
        s.states.push_back(state);
    });
    return out;
}

std::vector<std::string> scan_series_labels(std::istream& is) {
    std::vector<std::string> labels;
    std::unordered_set<std::string> seen;
    for_each_series_row(is, [&](const SeriesRow& row) {
        if (seen.insert(row.state).second) {
            labels.push_back(row.state);
        }
    });
    return labels;
}

void write_samples_csv(std::ostream& os, const ChainOutput& chain, const FeatureSet& features) {
    const int p1 = features.p1();
    const int p2 = features.p2();
    const int n = features.num_states();
    os << "iteration";
    for (int k = 0; k < p1; ++k) {
        os << ",wu_" << k;
    }
    for (int k = 0; k < p2; ++k) {
        os << ",wb_" << k;
    }
    for (int k = 0; k < num_pairs(n); ++k) {
        os << ",theta_" << k;
    }
    for (int k = 0; k < n; ++k) {
        os << ",pi_" << k;
    }
    os << '\n' << std::setprecision(17);
    for (int i = 0; i < chain.num_samples(); ++i) {
        const Eigen::VectorXd w = chain.samples.row(i).transpose();
        const Eigen::VectorXd theta = exchangeable_params(w.tail(p2), features);
        const Eigen::VectorXd pi = stationary_dist(w.head(p1), features);
        os << i;
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            os << ',' << w[k];
        }
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
            os << ',' << theta[k];
        }
        for (Eigen::Index k = 0; k < pi.size(); ++k) {
            os << ',' << pi[k];
        }
        os << '\n';
    }
}

int SampleTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

SampleTable read_samples_csv(std::istream& is) {
    SampleTable t;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) {
            continue;
        }
        const auto fields = split_csv(s);
        if (t.columns.empty()) {
            t.columns = fields;
            continue;
        }
        if (fields.size() != t.columns.size()) {
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                            " fields");
        }
        std::vector<double> row;
        for (const auto& f : fields) {
            row.push_back(parse_double(f, lineno));
        }
        rows.push_back(std::move(row));
    }
    if (t.columns.empty()) {
        throw DataError("samples file is empty");
    }
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return t;
}

SequencePair read_fasta_pair(std::istream& is) {
    std::vector<std::pair<std::string, std::string>> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) {
            continue;
        }
        if (s[0] == '>') {
            records.emplace_back(trim(s.substr(1)), "");
        } else {
            if (records.empty()) {
                throw DataError("line " + std::to_string(lineno) + ": sequence data before the first '>' header");
            }
            for (char c : s) {
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    records.back().second += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                }
            }
        }
    }
    if (records.size() != 2) {
        throw DataError("expected exactly two sequences, found " + std::to_string(records.size()));
    }
    SequencePair p{records[0].first, records[1].first, records[0].second, records[1].second};
    if (p.seq_a.size() != p.seq_b.size()) {
        throw DataError("aligned sequences differ in length (" + std::to_string(p.seq_a.size()) + " vs " +
                        std::to_string(p.seq_b.size()) + ")");
    }
    return p;
}

PairIngest ingest_pair(const SequencePair& pair, const StateSpace& states) {
    if (pair.seq_a.size() != pair.seq_b.size()) {
        throw DataError("aligned sequences differ in length");
    }
    std::unordered_set<std::string> known(states.labels().begin(), states.labels().end());
    PairIngest out;
    for (std::size_t i = 0; i < pair.seq_a.size(); ++i) {
        const std::string a(1, pair.seq_a[i]);
        const std::string b(1, pair.seq_b[i]);
        if (!known.count(a) || !known.count(b)) {
            ++out.skipped_gaps;
            continue;
        }
        ObservedSeries s;
        s.times = {0.0, 1.0};
        s.states = {states.index_of(a), states.index_of(b)};
        out.series.push_back(std::move(s));
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw IoError("cannot open '" + tmp + "' for writing");
        }
        os << content;
        os.flush();
        if (!os) {
            throw IoError("write to '" + tmp + "' failed");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        const std::string err = std::strerror(errno);
        std::remove(tmp.c_str());
        throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + err);
    }
}

std::map<std::string, std::string> read_key_value(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string s = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (s.empty()) {
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        out[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    return out;
}

} // namespace ctmcbps
