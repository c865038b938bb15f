#pragma once

#include "samd/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace samd {

// Undirected connected communication graph. Self-loops are implicit in the
// mixing weights and never stored as edges.
struct FamilySpec {
    enum class Family { complete, k_regular, erdos_renyi };
    Family family = Family::complete;
    int k = 0;        // k_regular
    double p = 0.0;   // erdos_renyi

    static FamilySpec complete() { return {}; }
    static FamilySpec k_regular(int k) { return {Family::k_regular, k, 0.0}; }
    static FamilySpec erdos_renyi(double p) { return {Family::erdos_renyi, 0, p}; }
};

struct Topology {
    FamilySpec family;
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;       // i < j
    std::vector<std::vector<int>> neighbors;      // without self

    std::vector<int> degrees() const;
    bool is_complete() const;
};

// Connected graph of the requested family. Random families resample until
// connected (and, for k_regular, simple); at most 1000 retries.
Topology generate_topology(const FamilySpec& spec, int m, std::uint64_t rng_seed);

bool is_connected(const Topology& t);

// One "i j" pair per line.
void write_edge_list(const Topology& t, std::ostream& out);

// Symmetric doubly-stochastic weights consistent with the graph, positive
// diagonal, second-largest eigenvalue magnitude strictly below one.
struct MixingMatrix {
    Matrix weights;
    double lambda2 = 0.0;
    double spectral_gap = 1.0;

    int size() const { return static_cast<int>(weights.rows()); }
};

enum class MixingRule { mean_for_complete, metropolis };

MixingMatrix build_mixing_matrix(const Topology& topology, MixingRule rule);

// W * values: every node's row becomes the weighted average of its
// neighborhood. OpenMP over rows when the product is large enough; the
// arithmetic per row is identical to consensus_round_serial.
Matrix consensus_round(const MixingMatrix& w, const Matrix& values);
Matrix consensus_round_serial(const MixingMatrix& w, const Matrix& values);

// Frobenius deviation from the (invariant) row-mean after 0..rounds
// applications of W; entry q satisfies dev(q) <= lambda2^q * dev(0).
std::vector<double> consensus_error_decay(const MixingMatrix& w,
                                          const Matrix& values, int rounds);

}  // namespace samd
