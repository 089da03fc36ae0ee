#include "ctmcbps/aa.hpp"
#include "ctmcbps/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ctmcbps {

namespace {

constexpr int kN = 20;

const DistanceTable kGrantham = {{
    {0, 83, 99, 77, 92, 143, 85, 160, 122, 147, 22, 36, 112, 144, 110, 33, 36, 55, 194, 37},
    {83, 0, 24, 29, 47, 68, 32, 81, 40, 98, 100, 99, 86, 89, 77, 94, 87, 84, 174, 115},
    {99, 24, 0, 43, 42, 46, 53, 61, 29, 87, 116, 113, 91, 68, 76, 109, 101, 96, 154, 130},
    {77, 29, 43, 0, 71, 86, 26, 96, 54, 125, 97, 102, 112, 110, 103, 97, 91, 96, 180, 102},
    {92, 47, 42, 71, 0, 65, 78, 85, 65, 59, 103, 92, 58, 58, 38, 89, 81, 69, 149, 128},
    {143, 68, 46, 86, 65, 0, 94, 23, 42, 80, 158, 153, 111, 46, 91, 149, 142, 133, 139, 174},
    {85, 32, 53, 26, 78, 94, 0, 101, 56, 127, 102, 107, 106, 121, 103, 102, 95, 97, 202, 110},
    {160, 81, 61, 96, 85, 23, 101, 0, 45, 94, 177, 172, 126, 65, 108, 168, 160, 152, 154, 181},
    {122, 40, 29, 54, 65, 42, 56, 45, 0, 98, 140, 138, 107, 80, 93, 134, 126, 121, 170, 152},
    {147, 98, 87, 125, 59, 80, 127, 94, 98, 0, 153, 138, 60, 56, 42, 135, 127, 109, 159, 184},
    {22, 100, 116, 97, 103, 158, 102, 177, 140, 153, 0, 22, 113, 155, 114, 21, 28, 50, 205, 40},
    {36, 99, 113, 102, 92, 153, 107, 172, 138, 138, 22, 0, 96, 145, 98, 5, 15, 32, 198, 61},
    {112, 86, 91, 112, 58, 111, 106, 126, 107, 60, 113, 96, 0, 99, 27, 94, 84, 64, 195, 148},
    {144, 89, 68, 110, 58, 46, 121, 65, 80, 56, 155, 145, 99, 0, 74, 142, 135, 124, 112, 177},
    {110, 77, 76, 103, 38, 91, 103, 108, 93, 42, 114, 98, 27, 74, 0, 95, 87, 68, 169, 147},
    {33, 94, 109, 97, 89, 149, 102, 168, 134, 135, 21, 5, 94, 142, 95, 0, 10, 29, 198, 61},
    {36, 87, 101, 91, 81, 142, 95, 160, 126, 127, 28, 15, 84, 135, 87, 10, 0, 21, 196, 67},
    {55, 84, 96, 96, 69, 133, 97, 152, 121, 109, 50, 32, 64, 124, 68, 29, 21, 0, 192, 88},
    {194, 174, 154, 180, 149, 139, 202, 154, 170, 159, 205, 198, 195, 112, 169, 198, 196, 192, 0, 215},
    {37, 115, 130, 102, 128, 174, 110, 181, 152, 184, 40, 61, 148, 177, 147, 61, 67, 88, 215, 0},
}};

// Nearest partner of `from` among `support` (kept in alphabet order, so the
// first minimum wins ties).
int nearest(const std::vector<double>& dist, int from, const std::vector<int>& support) {
    int best = support.front();
    for (int j : support) {
        if (dist[static_cast<std::size_t>(from * kN + j)] < dist[static_cast<std::size_t>(from * kN + best)]) {
            best = j;
        }
    }
    return best;
}

void erase_value(std::vector<int>& v, int x) {
    v.erase(std::remove(v.begin(), v.end(), x), v.end());
}

} // namespace

const DistanceTable& grantham_table() { return kGrantham; }

int amino_acid_index(char aa) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(aa)));
    const auto it = std::find(kAminoAcids.begin(), kAminoAcids.end(), upper);
    if (it == kAminoAcids.end()) {
        throw std::invalid_argument(std::string("unknown amino acid '") + aa + "'");
    }
    return static_cast<int>(it - kAminoAcids.begin());
}

StateSpace amino_acid_states() {
    std::vector<std::string> labels;
    for (char c : kAminoAcids) {
        labels.emplace_back(1, c);
    }
    return StateSpace(labels);
}

int grantham_distance(char a, char b) {
    return kGrantham[static_cast<std::size_t>(amino_acid_index(a))][static_cast<std::size_t>(amino_acid_index(b))];
}

std::vector<std::pair<int, int>> ranked_pairs(const DistanceTable& table) {
    std::vector<double> dist(kN * kN);
    for (int i = 0; i < kN; ++i) {
        for (int j = 0; j < kN; ++j) {
            dist[static_cast<std::size_t>(i * kN + j)] = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    std::vector<std::vector<int>> support(kN);
    for (int i = 0; i < kN; ++i) {
        for (int j = 0; j < kN; ++j) {
            if (j != i) {
                support[static_cast<std::size_t>(i)].push_back(j);
            }
        }
    }
    std::vector<bool> ranked(static_cast<std::size_t>(num_pairs(kN)), false);
    int remaining = num_pairs(kN);
    std::vector<std::pair<int, int>> order;
    int i0 = -1;
    int i1 = -1;

    while (remaining > 0) {
        const std::vector<int> none;
        const auto& alpha = i0 >= 0 ? support[static_cast<std::size_t>(i0)] : none;
        const auto& beta = i1 >= 0 ? support[static_cast<std::size_t>(i1)] : none;
        if (!alpha.empty() && !beta.empty()) {
            const int row_min = nearest(dist, i0, alpha);
            const int col_min = nearest(dist, i1, beta);
            if (dist[static_cast<std::size_t>(i0 * kN + row_min)] <= dist[static_cast<std::size_t>(col_min * kN + i1)]) {
                i1 = row_min;
            } else {
                i0 = col_min;
            }
        } else if (alpha.empty() && !beta.empty()) {
            i0 = nearest(dist, i1, beta);
        } else if (!alpha.empty() && beta.empty()) {
            i1 = nearest(dist, i0, alpha);
        } else {
            // Restart from the closest unranked pair, lower alphabet index first.
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < kN; ++a) {
                for (int b = a + 1; b < kN; ++b) {
                    const double d = dist[static_cast<std::size_t>(a * kN + b)];
                    if (!ranked[static_cast<std::size_t>(pair_id(kN, a, b))] && d > 0.0 && d < best) {
                        best = d;
                        i0 = a;
                        i1 = b;
                    }
                }
            }
            if (!std::isfinite(best)) {
                throw InternalError("nnpaao: no unranked pair left to restart from");
            }
        }
        const auto id = static_cast<std::size_t>(pair_id(kN, i0, i1));
        if (ranked[id]) {
            throw InternalError("nnpaao: pair ranked twice");
        }
        ranked[id] = true;
        --remaining;
        order.emplace_back(i0, i1);
        dist[static_cast<std::size_t>(i0 * kN + i1)] = std::numeric_limits<double>::infinity();
        dist[static_cast<std::size_t>(i1 * kN + i0)] = std::numeric_limits<double>::infinity();
        erase_value(support[static_cast<std::size_t>(i0)], i1);
        erase_value(support[static_cast<std::size_t>(i1)], i0);
    }
    return order;
}

PairRank nnpaao_ordering(const DistanceTable& table) {
    const auto order = ranked_pairs(table);
    PairRank rank(order.size(), -1);
    for (std::size_t r = 0; r < order.size(); ++r) {
        rank[static_cast<std::size_t>(pair_id(kN, order[r].first, order[r].second))] = static_cast<int>(r);
    }
    return rank;
}

PairOrdering eta_from_rank(const PairRank& ranks) {
    if (static_cast<int>(ranks.size()) != num_pairs(kN)) {
        throw std::invalid_argument("eta_from_rank: expected 190 pair ranks");
    }
    std::vector<int> eta(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] < 0) {
            throw std::invalid_argument("eta_from_rank: incomplete ranking");
        }
        eta[i] = ranks[i] + 1;
    }
    return PairOrdering(kN, eta);
}

} // namespace ctmcbps
