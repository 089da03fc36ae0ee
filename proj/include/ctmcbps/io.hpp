#pragma once

#include "ctmcbps/inference.hpp"
#include "ctmcbps/paths.hpp"
#include "ctmcbps/ratematrix.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace ctmcbps {

/// Series CSV: header "series_id,time,state", one row per observation,
/// times written with 12 significant digits. States are labels of `states`.
void write_series_csv(std::ostream& os, const std::vector<ObservedSeries>& data, const StateSpace& states);
/// Rows of one series must be contiguous with increasing times. Throws
/// DataError with the offending line number.
std::vector<ObservedSeries> read_series_csv(std::istream& is, const StateSpace& states);

/// Distinct state labels in a series file, in order of first appearance.
std::vector<std::string> scan_series_labels(std::istream& is);

/// Samples CSV: iteration, wu_*, wb_*, theta_*, pi_* columns.
void write_samples_csv(std::ostream& os, const ChainOutput& chain, const FeatureSet& features);

struct SampleTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    int column(const std::string& name) const;  // -1 when absent
};
SampleTable read_samples_csv(std::istream& is);

struct SequencePair {
    std::string name_a, name_b;
    std::string seq_a, seq_b;
};

/// Two records of the form ">name" followed by sequence lines.
SequencePair read_fasta_pair(std::istream& is);

struct PairIngest {
    std::vector<ObservedSeries> series;
    int skipped_gaps = 0;
};

/// Each aligned site without gaps ('-', '.', or symbols outside `states`)
/// becomes a two-point series at times 0 and 1.
PairIngest ingest_pair(const SequencePair& pair, const StateSpace& states);

/// Write `content` to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_key_value(std::istream& is);

} // namespace ctmcbps
