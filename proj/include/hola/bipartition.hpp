#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hola {

/// A pair (P, Q) of partitions of the index set {0, ..., 2m-1}.
/// P has v blocks of size >= 3 (one derivative factor each), Q is a perfect
/// matching into m pairs (one inverse-Hessian factor each).  The level
/// l = m - v fixes the asymptotic size of the term the pair contributes.
struct Bipartition {
    std::vector<std::vector<int>> p_blocks;
    std::vector<std::array<int, 2>> q_pairs;

    int num_pairs() const { return static_cast<int>(q_pairs.size()); }   // m
    int num_blocks() const { return static_cast<int>(p_blocks.size()); } // v
    int level() const { return num_pairs() - num_blocks(); }
    int ground_size() const { return 2 * num_pairs(); }

    /// Throws std::invalid_argument if the block-size or cover constraints
    /// are violated.
    void validate() const;
};

/// An isomorphism class of bipartitions under relabeling of the ground set.
/// multiplicity counts all labeled (P, Q) pairs in the class.
struct BipartitionClass {
    Bipartition representative;
    std::int64_t multiplicity = 0;
    std::string signature;
};

/// True iff the graph on {0, ..., 2m-1} with an edge inside every P-block
/// and every Q-pair is connected.
bool is_connected(const Bipartition& b);

/// Canonical key, equal for two bipartitions iff one is a relabeling of the
/// other.  Encodes the block-quotient multigraph (vertices = P-blocks with
/// size labels, edges = Q-pairs, self-loops allowed) in a canonical vertex
/// order.
std::string canonical_signature(const Bipartition& b);

/// All isomorphism classes of connected level-l bipartitions, with exact
/// multiplicities.  For level l the block counts satisfy v <= 2l and
/// m = v + l <= 3l, so max_m >= 3l covers the whole level; max_m = -1 uses
/// exactly 3l.  A smaller cap throws instead of silently truncating.
std::vector<BipartitionClass> enumerate_connected_level(int level, int max_m = -1);

/// Cached per-level catalog (levels are built on first use).
const std::vector<BipartitionClass>& level_catalog(int level);

/// Every connected bipartition of the level individually, found by raw
/// enumeration of all partitions and matchings.  Only supported while the
/// ground set stays small (2m <= 8); used as the oracle for the class-based
/// enumeration.
std::vector<Bipartition> enumerate_connected_exhaustive(int level, int max_ground = 8);

/// Class catalog as CSV: level,v,m,multiplicity,p_blocks,q_blocks with
/// 1-based elements, blocks separated by '|'.
std::string catalog_csv(int max_level);

}  // namespace hola
