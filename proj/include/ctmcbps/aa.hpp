#pragma once

#include "ctmcbps/ratematrix.hpp"

#include <array>
#include <string>
#include <vector>

namespace ctmcbps {

/// Amino-acid alphabet in the row order of the Grantham distance table.
inline constexpr std::array<char, 20> kAminoAcids = {'Y', 'H', 'Q', 'R', 'T', 'N', 'K', 'D', 'E', 'G',
                                                     'F', 'L', 'A', 'S', 'P', 'I', 'M', 'V', 'C', 'W'};

using DistanceTable = std::array<std::array<int, 20>, 20>;

const DistanceTable& grantham_table();
int amino_acid_index(char aa);
StateSpace amino_acid_states();

int grantham_distance(char a, char b);

/// rank[pair_id] for the 190 unordered pairs (pair ids over the alphabet order).
using PairRank = std::vector<int>;

/// Nearest-neighbour pairwise ordering: starting from the closest pair,
/// repeatedly extend from the current pair's endpoints to the nearest
/// unranked partner. Argmin ties go to the earlier amino acid.
PairRank nnpaao_ordering(const DistanceTable& table);

/// Pairs listed by rank: result[r] = (i, j) with i, j alphabet indices in
/// the orientation the ordering produced them.
std::vector<std::pair<int, int>> ranked_pairs(const DistanceTable& table);

/// eta = rank + 1.
PairOrdering eta_from_rank(const PairRank& ranks);

} // namespace ctmcbps
