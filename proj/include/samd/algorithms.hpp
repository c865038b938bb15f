#pragma once

#include "samd/geometry.hpp"
#include "samd/network.hpp"
#include "samd/oracle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace samd {

// Links the communications ratio rho, mini-batch size b, consensus rounds r
// and horizon T. Invariants: r <= floor(b*rho), S = floor(T/b), b >= 1.
struct RateSchedule {
    double rho = 1.0;
    long T = 1;
    int b = 1;
    int r = 0;
    long S = 1;

    static RateSchedule explicit_b(double rho, long T, int b);
    // b = max(1, ceil(c_mult * log(mT) / (rho * log(1/lambda2)))); for
    // lambda2 = 0 the rule gives b = max(1, ceil(1/rho)) so one consensus
    // round fits.
    static RateSchedule corollary(double rho, long T, double c_mult, double lambda2,
                                  int m);
    void validate() const;
};

struct TraceRow {
    long round = 0;
    int node = 0;  // -1 means "mean over nodes"
    double gap = 0.0;
};

struct ConvergenceTrace {
    std::string algorithm;
    std::uint64_t seed = 0;
    int m = 1;
    long T = 0;
    int b = 1;
    long S = 0;
    int consensus_rounds_per_step = 0;
    bool gamma_warning = false;  // gamma exceeded alpha / (2 L_est)
    std::vector<TraceRow> rows;
    double final_mean_gap = 0.0;
    // per recorded round, the post-update search points (m x n); AD variants
    // also record the aggregate sequence. Only filled on request.
    std::vector<Matrix> iterates;
    std::vector<Matrix> aggregates;
};

struct RunOptions {
    double gamma = 1.0;
    std::uint64_t seed = 0;      // stream seed shared by all algorithms of a run
    long record_every = 1;       // 0: final round only (final always recorded)
    bool per_node_gaps = true;   // also emit one row per node
    bool record_iterates = false;
    double l_est = 0.0;          // smoothness estimate; warn when gamma > alpha/(2L)
    int node_count = 0;          // stream count for baselines run without a mixing matrix
};

// Algorithm 1: consensus-averaged mini-batch subgradients + constant-step
// prox updates + running iterate average. `truth` may be null when only
// iterates are wanted.
ConvergenceTrace run_dsamd(const LogisticTask& task, const GroundTruth* truth,
                           const MirrorGeometry& geometry, const MixingMatrix& mixing,
                           const RateSchedule& schedule, const RunOptions& opts);

// Algorithm 2: accelerated variant with beta_s = (s+1)/2 and
// gamma_s = gamma * (s+1)/2; gaps reported for the aggregate sequence.
ConvergenceTrace run_adsamd(const LogisticTask& task, const GroundTruth* truth,
                            const MirrorGeometry& geometry, const MixingMatrix& mixing,
                            const RateSchedule& schedule, const RunOptions& opts);

enum class Baseline {
    central_md,
    central_amd,
    local_md,
    local_amd,
    dgd_naive,
    dgd_minibatch,
};

// How the centralized baselines consume the m per-node streams: one step per
// data-acquisition round (batch m), or one step per mini-batch round over the
// pooled streams (batch m*b).
enum class CentralBatching { per_data_round, pooled };

ConvergenceTrace run_baseline(Baseline kind, const LogisticTask& task,
                              const GroundTruth* truth, const MirrorGeometry& geometry,
                              const MixingMatrix* mixing, const RateSchedule& schedule,
                              const RunOptions& opts,
                              CentralBatching central_mode = CentralBatching::per_data_round);

const char* baseline_name(Baseline kind);

// Network data-acquisition samples spanned by `round` completed rounds of the
// given algorithm (the mT axis of the scaling plots).
long samples_consumed(const std::string& algorithm, int m, double rho, int b, long round);

}  // namespace samd
