#include "samd/network.hpp"

#include "samd/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

namespace samd {

namespace {

std::vector<std::vector<int>> adjacency_from_edges(
    int m, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(m);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

// One pairing-model attempt; empty result on self/multi edge collisions.
std::vector<std::pair<int, int>> pair_stubs(int m, int k, rng::Stream& rs) {
    std::vector<int> stubs(static_cast<std::size_t>(m) * k);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < k; ++c) stubs[static_cast<std::size_t>(i) * k + c] = i;
    // Fisher-Yates
    for (std::size_t i = stubs.size() - 1; i > 0; --i) {
        const std::size_t j = rs.uniform_index(i + 1);
        std::swap(stubs[i], stubs[j]);
    }
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> edges;
    edges.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
        int a = stubs[i], b = stubs[i + 1];
        if (a == b) return {};
        if (a > b) std::swap(a, b);
        if (!seen.insert({a, b}).second) return {};
        edges.push_back({a, b});
    }
    return edges;
}

}  // namespace

std::vector<int> Topology::degrees() const {
    std::vector<int> d(node_count, 0);
    for (auto [i, j] : edges) {
        ++d[i];
        ++d[j];
    }
    return d;
}

bool Topology::is_complete() const {
    return static_cast<long>(edges.size()) ==
           static_cast<long>(node_count) * (node_count - 1) / 2;
}

bool is_connected(const Topology& t) {
    if (t.node_count == 0) return false;
    std::vector<char> seen(t.node_count, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : t.neighbors[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == t.node_count;
}

Topology generate_topology(const FamilySpec& spec, int m, std::uint64_t rng_seed) {
    if (m < 2) throw std::invalid_argument("topology needs at least 2 nodes");
    constexpr int max_retries = 1000;
    Topology t;
    t.family = spec;
    t.node_count = m;

    switch (spec.family) {
        case FamilySpec::Family::complete: {
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) t.edges.push_back({i, j});
            break;
        }
        case FamilySpec::Family::k_regular: {
            const int k = spec.k;
            if (k < 1 || k >= m)
                throw std::invalid_argument("k_regular requires 1 <= k < m");
            if ((static_cast<long>(k) * m) % 2 != 0)
                throw std::invalid_argument("k_regular requires k*m even");
            rng::Stream rs(rng::derive_seed(rng_seed, {0x6b72, static_cast<std::uint64_t>(m),
                                                       static_cast<std::uint64_t>(k)}));
            bool done = false;
            for (int attempt = 0; attempt < max_retries && !done; ++attempt) {
                auto edges = pair_stubs(m, k, rs);
                if (edges.empty()) continue;
                t.edges = std::move(edges);
                t.neighbors = adjacency_from_edges(m, t.edges);
                done = is_connected(t);
            }
            if (!done)
                throw std::runtime_error(
                    "k_regular generation failed to produce a connected simple graph");
            break;
        }
        case FamilySpec::Family::erdos_renyi: {
            const double p = spec.p;
            if (!(p > 0.0 && p <= 1.0))
                throw std::invalid_argument("erdos_renyi requires p in (0, 1]");
            rng::Stream rs(rng::derive_seed(rng_seed, {0x6572, static_cast<std::uint64_t>(m)}));
            bool done = false;
            for (int attempt = 0; attempt < max_retries && !done; ++attempt) {
                t.edges.clear();
                for (int i = 0; i < m; ++i)
                    for (int j = i + 1; j < m; ++j)
                        if (rs.uniform() < p) t.edges.push_back({i, j});
                t.neighbors = adjacency_from_edges(m, t.edges);
                done = is_connected(t);
            }
            if (!done)
                throw std::runtime_error(
                    "erdos_renyi generation failed to produce a connected graph in 1000 tries");
            break;
        }
    }
    t.neighbors = adjacency_from_edges(m, t.edges);
    if (!is_connected(t)) throw std::runtime_error("generated topology is not connected");
    return t;
}

void write_edge_list(const Topology& t, std::ostream& out) {
    for (auto [i, j] : t.edges) out << i << ' ' << j << '\n';
}

MixingMatrix build_mixing_matrix(const Topology& topology, MixingRule rule) {
    const int m = topology.node_count;
    MixingMatrix mix;
    mix.weights = Matrix::Zero(m, m);

    if (rule == MixingRule::mean_for_complete) {
        if (!topology.is_complete())
            throw std::invalid_argument("mean_for_complete requires a complete graph");
        mix.weights.setConstant(1.0 / m);
    } else {
        const auto deg = topology.degrees();
        for (auto [i, j] : topology.edges) {
            const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
            mix.weights(i, j) = w;
            mix.weights(j, i) = w;
        }
        for (int i = 0; i < m; ++i)
            mix.weights(i, i) = 1.0 - mix.weights.row(i).sum();
    }

    if (m == 1) {
        mix.lambda2 = 0.0;
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(mix.weights, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();  // ascending; top is the Perron value 1
        mix.lambda2 = std::max(std::abs(ev[0]), std::abs(ev[m - 2]));
    }
    mix.spectral_gap = 1.0 - mix.lambda2;
    return mix;
}

namespace {

inline void mix_row(const Matrix& w, const Matrix& values, Matrix& out, int i) {
    out.row(i).setZero();
    for (int j = 0; j < values.rows(); ++j) {
        const double wij = w(i, j);
        if (wij != 0.0) out.row(i) += wij * values.row(j);
    }
}

}  // namespace

Matrix consensus_round_serial(const MixingMatrix& w, const Matrix& values) {
    if (values.rows() != w.size())
        throw std::invalid_argument("consensus_round: values row count must equal node count");
    Matrix out(values.rows(), values.cols());
    for (int i = 0; i < out.rows(); ++i) mix_row(w.weights, values, out, i);
    return out;
}

Matrix consensus_round(const MixingMatrix& w, const Matrix& values) {
    if (values.rows() != w.size())
        throw std::invalid_argument("consensus_round: values row count must equal node count");
    Matrix out(values.rows(), values.cols());
    const long work = static_cast<long>(values.rows()) * values.rows() * values.cols();
#pragma omp parallel for schedule(static) if (work > 65536)
    for (int i = 0; i < out.rows(); ++i) mix_row(w.weights, values, out, i);
    return out;
}

std::vector<double> consensus_error_decay(const MixingMatrix& w,
                                          const Matrix& values, int rounds) {
    if (rounds < 0) throw std::invalid_argument("rounds must be nonnegative");
    if (values.rows() != w.size())
        throw std::invalid_argument("consensus_error_decay: shape mismatch");
    const Eigen::RowVectorXd mean = values.colwise().mean();
    std::vector<double> devs;
    devs.reserve(rounds + 1);
    Matrix current = values;
    devs.push_back((current.rowwise() - mean).norm());
    for (int q = 1; q <= rounds; ++q) {
        current = consensus_round(w, current);
        devs.push_back((current.rowwise() - mean).norm());
    }
    return devs;
}

}  // namespace samd
