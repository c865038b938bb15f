#include "samd/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samd {

namespace {

bool should_record(long s, long S, long record_every) {
    if (s == S) return true;
    return record_every > 0 && s % record_every == 0;
}

// Gap rows for one recorded round: one per node when requested, plus the
// node-mean row. Returns the node-mean gap.
double record_gaps(ConvergenceTrace& trace, const GroundTruth* truth, long round,
                   const Matrix& points, bool per_node) {
    if (truth == nullptr) return 0.0;
    const std::vector<double> gaps = truth->evaluate_gaps(points);
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    if (per_node) {
        for (int i = 0; i < static_cast<int>(gaps.size()); ++i)
            trace.rows.push_back({round, i, gaps[i]});
    }
    trace.rows.push_back({round, -1, mean});
    return mean;
}

void maybe_warn_gamma(ConvergenceTrace& trace, const RunOptions& opts, double alpha) {
    if (opts.l_est > 0.0 && opts.gamma > alpha / (2.0 * opts.l_est))
        trace.gamma_warning = true;
}

}  // namespace

// ---------------------------------------------------------------- RateSchedule

RateSchedule RateSchedule::explicit_b(double rho, long T, int b) {
    if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (T < 1) throw std::invalid_argument("T must be positive");
    if (b < 1) throw std::invalid_argument("b must be positive");
    if (b > T)
        throw std::invalid_argument("schedule error: b = " + std::to_string(b) +
                                    " exceeds T = " + std::to_string(T) +
                                    " (no complete mini-batch round)");
    RateSchedule s;
    s.rho = rho;
    s.T = T;
    s.b = b;
    s.r = static_cast<int>(std::floor(static_cast<double>(b) * rho));
    s.S = T / b;
    s.validate();
    return s;
}

RateSchedule RateSchedule::corollary(double rho, long T, double c_mult, double lambda2,
                                     int m) {
    if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (T < 1) throw std::invalid_argument("T must be positive");
    if (!(lambda2 >= 0.0 && lambda2 < 1.0))
        throw std::invalid_argument("corollary rule needs 0 <= lambda2 < 1");
    if (m < 1) throw std::invalid_argument("m must be positive");
    int b = 0;
    if (lambda2 == 0.0) {
        b = std::max(1, static_cast<int>(std::ceil(1.0 / rho)));
    } else {
        const double raw = c_mult * std::log(static_cast<double>(m) * T) /
                           (rho * std::log(1.0 / lambda2));
        b = std::max(1, static_cast<int>(std::ceil(raw)));
    }
    return explicit_b(rho, T, b);
}

void RateSchedule::validate() const {
    if (b < 1 || r < 0 || S < 1) throw std::invalid_argument("invalid schedule");
    if (r > static_cast<int>(std::floor(static_cast<double>(b) * rho)))
        throw std::invalid_argument("schedule violates r <= floor(b*rho)");
    if (S != T / b) throw std::invalid_argument("schedule violates S = floor(T/b)");
}

// --------------------------------------------------------------------- D-SAMD

ConvergenceTrace run_dsamd(const LogisticTask& task, const GroundTruth* truth,
                           const MirrorGeometry& geometry, const MixingMatrix& mixing,
                           const RateSchedule& schedule, const RunOptions& opts) {
    schedule.validate();
    const int m = mixing.size();
    const int n = geometry.domain().dimension();
    if (n != task.dimension + 1)
        throw std::invalid_argument("config error: geometry dimension must be d+1");

    ConvergenceTrace trace;
    trace.algorithm = "dsamd";
    trace.seed = opts.seed;
    trace.m = m;
    trace.T = schedule.T;
    trace.b = schedule.b;
    trace.S = schedule.S;
    trace.consensus_rounds_per_step = schedule.r;
    maybe_warn_gamma(trace, opts, geometry.alpha());

    const Vector x_init = geometry.omega_argmin();
    Matrix x(m, n);
    for (int i = 0; i < m; ++i) x.row(i) = x_init.transpose();
    Matrix av_sum = Matrix::Zero(m, n);

    for (long s = 1; s <= schedule.S; ++s) {
        Matrix theta(m, n);
        for (int i = 0; i < m; ++i)
            theta.row(i) =
                mini_batch(task, i, s, schedule.b, x.row(i).transpose()).g.transpose();
        for (int q = 0; q < schedule.r; ++q) theta = consensus_round(mixing, theta);
        for (int i = 0; i < m; ++i)
            x.row(i) = geometry
                           .prox_map(x.row(i).transpose(),
                                     opts.gamma * theta.row(i).transpose())
                           .transpose();
        av_sum += x;
        if (should_record(s, schedule.S, opts.record_every)) {
            const Matrix av = av_sum / static_cast<double>(s);
            const double mean = record_gaps(trace, truth, s, av, opts.per_node_gaps);
            if (s == schedule.S) trace.final_mean_gap = mean;
            if (opts.record_iterates) trace.iterates.push_back(x);
        }
    }
    return trace;
}

// -------------------------------------------------------------------- AD-SAMD

ConvergenceTrace run_adsamd(const LogisticTask& task, const GroundTruth* truth,
                            const MirrorGeometry& geometry, const MixingMatrix& mixing,
                            const RateSchedule& schedule, const RunOptions& opts) {
    schedule.validate();
    const int m = mixing.size();
    const int n = geometry.domain().dimension();
    if (n != task.dimension + 1)
        throw std::invalid_argument("config error: geometry dimension must be d+1");

    ConvergenceTrace trace;
    trace.algorithm = "adsamd";
    trace.seed = opts.seed;
    trace.m = m;
    trace.T = schedule.T;
    trace.b = schedule.b;
    trace.S = schedule.S;
    trace.consensus_rounds_per_step = schedule.r;
    maybe_warn_gamma(trace, opts, geometry.alpha());

    const Vector x_init = geometry.omega_argmin();
    Matrix x(m, n), x_ag(m, n);
    for (int i = 0; i < m; ++i) {
        x.row(i) = x_init.transpose();
        x_ag.row(i) = x_init.transpose();
    }

    for (long s = 1; s <= schedule.S; ++s) {
        const double beta = (s + 1.0) / 2.0;
        const double gamma_s = opts.gamma * (s + 1.0) / 2.0;
        const Matrix x_md = x / beta + (1.0 - 1.0 / beta) * x_ag;
        Matrix theta(m, n);
        for (int i = 0; i < m; ++i)
            theta.row(i) =
                mini_batch(task, i, s, schedule.b, x_md.row(i).transpose()).g.transpose();
        for (int q = 0; q < schedule.r; ++q) theta = consensus_round(mixing, theta);
        for (int i = 0; i < m; ++i)
            x.row(i) = geometry
                           .prox_map(x.row(i).transpose(), gamma_s * theta.row(i).transpose())
                           .transpose();
        x_ag = x / beta + (1.0 - 1.0 / beta) * x_ag;
        if (should_record(s, schedule.S, opts.record_every)) {
            const double mean = record_gaps(trace, truth, s, x_ag, opts.per_node_gaps);
            if (s == schedule.S) trace.final_mean_gap = mean;
            if (opts.record_iterates) {
                trace.iterates.push_back(x);
                trace.aggregates.push_back(x_ag);
            }
        }
    }
    return trace;
}

// ------------------------------------------------------------------ baselines

namespace {

// Centralized (accelerated) mirror descent over the pooled node streams.
ConvergenceTrace run_central(Baseline kind, const LogisticTask& task,
                             const GroundTruth* truth, const MirrorGeometry& geometry,
                             int m, const RateSchedule& schedule, const RunOptions& opts,
                             CentralBatching mode) {
    const bool accelerated = kind == Baseline::central_amd;
    const int n = geometry.domain().dimension();
    const long steps = mode == CentralBatching::per_data_round ? schedule.T : schedule.S;
    const int b = mode == CentralBatching::per_data_round ? 1 : schedule.b;

    ConvergenceTrace trace;
    trace.algorithm = baseline_name(kind);
    trace.seed = opts.seed;
    trace.m = m;
    trace.T = schedule.T;
    trace.b = b;
    trace.S = steps;
    maybe_warn_gamma(trace, opts, geometry.alpha());

    Vector x = geometry.omega_argmin();
    Vector x_ag = x;
    Vector av_sum = Vector::Zero(n);

    for (long s = 1; s <= steps; ++s) {
        const double beta = (s + 1.0) / 2.0;
        const double gamma_s = accelerated ? opts.gamma * (s + 1.0) / 2.0 : opts.gamma;
        const Vector eval_point = accelerated ? Vector(x / beta + (1.0 - 1.0 / beta) * x_ag) : x;
        Vector theta = Vector::Zero(n);
        for (int i = 0; i < m; ++i) theta += mini_batch(task, i, s, b, eval_point).g;
        theta /= static_cast<double>(m);
        x = geometry.prox_map(x, gamma_s * theta);
        Vector report;
        if (accelerated) {
            x_ag = x / beta + (1.0 - 1.0 / beta) * x_ag;
            report = x_ag;
        } else {
            av_sum += x;
            report = av_sum / static_cast<double>(s);
        }
        if (should_record(s, steps, opts.record_every)) {
            const double mean = record_gaps(trace, truth, s, report.transpose(), false);
            if (s == steps) trace.final_mean_gap = mean;
            if (opts.record_iterates) {
                trace.iterates.push_back(x.transpose());
                if (accelerated) trace.aggregates.push_back(x_ag.transpose());
            }
        }
    }
    return trace;
}

// Per-node (accelerated) mirror descent on the node's own stream, b = 1,
// no collaboration.
ConvergenceTrace run_local(Baseline kind, const LogisticTask& task,
                           const GroundTruth* truth, const MirrorGeometry& geometry,
                           int m, const RateSchedule& schedule, const RunOptions& opts) {
    const bool accelerated = kind == Baseline::local_amd;
    const int n = geometry.domain().dimension();
    const long steps = schedule.T;

    ConvergenceTrace trace;
    trace.algorithm = baseline_name(kind);
    trace.seed = opts.seed;
    trace.m = m;
    trace.T = schedule.T;
    trace.b = 1;
    trace.S = steps;
    maybe_warn_gamma(trace, opts, geometry.alpha());

    const Vector x_init = geometry.omega_argmin();
    Matrix x(m, n), x_ag(m, n);
    for (int i = 0; i < m; ++i) {
        x.row(i) = x_init.transpose();
        x_ag.row(i) = x_init.transpose();
    }
    Matrix av_sum = Matrix::Zero(m, n);

    for (long s = 1; s <= steps; ++s) {
        const double beta = (s + 1.0) / 2.0;
        const double gamma_s = accelerated ? opts.gamma * (s + 1.0) / 2.0 : opts.gamma;
        for (int i = 0; i < m; ++i) {
            Vector xi = x.row(i).transpose();
            const Vector eval_point =
                accelerated ? Vector(xi / beta + (1.0 - 1.0 / beta) * x_ag.row(i).transpose())
                            : xi;
            const Vector theta = mini_batch(task, i, s, 1, eval_point).g;
            xi = geometry.prox_map(xi, gamma_s * theta);
            x.row(i) = xi.transpose();
            if (accelerated)
                x_ag.row(i) = (xi / beta + (1.0 - 1.0 / beta) * x_ag.row(i).transpose())
                                  .transpose();
        }
        if (!accelerated) av_sum += x;
        if (should_record(s, steps, opts.record_every)) {
            const Matrix report = accelerated ? x_ag : Matrix(av_sum / static_cast<double>(s));
            const double mean = record_gaps(trace, truth, s, report, opts.per_node_gaps);
            if (s == steps) trace.final_mean_gap = mean;
            if (opts.record_iterates) {
                trace.iterates.push_back(x);
                if (accelerated) trace.aggregates.push_back(x_ag);
            }
        }
    }
    return trace;
}

// Rate-limited DGD adaptations: local (projected) subgradient step, then one
// consensus round on the search points. `naive` keeps the newest sample per
// communications round and discards the rest; `minibatch` averages local
// batches of size ceil(1/rho).
ConvergenceTrace run_dgd(Baseline kind, const LogisticTask& task, const GroundTruth* truth,
                         const MirrorGeometry& geometry, const MixingMatrix& mixing,
                         const RateSchedule& schedule, const RunOptions& opts) {
    const bool naive = kind == Baseline::dgd_naive;
    const int m = mixing.size();
    const int n = geometry.domain().dimension();
    const double rho = std::min(schedule.rho, 1.0);  // rho > 1 clamps to classic DGD
    const int b_loc = naive ? 1 : static_cast<int>(std::ceil(1.0 / rho));
    const long steps = naive ? static_cast<long>(std::floor(schedule.T * rho))
                             : schedule.T / b_loc;
    if (steps < 1)
        throw std::invalid_argument("schedule error: DGD has no complete step within T");

    ConvergenceTrace trace;
    trace.algorithm = baseline_name(kind);
    trace.seed = opts.seed;
    trace.m = m;
    trace.T = schedule.T;
    trace.b = b_loc;
    trace.S = steps;
    trace.consensus_rounds_per_step = 1;
    maybe_warn_gamma(trace, opts, geometry.alpha());

    const Vector x_init = geometry.omega_argmin();
    Matrix x(m, n);
    for (int i = 0; i < m; ++i) x.row(i) = x_init.transpose();
    Matrix av_sum = Matrix::Zero(m, n);

    for (long k = 1; k <= steps; ++k) {
        for (int i = 0; i < m; ++i) {
            Vector theta;
            if (naive) {
                const long t = static_cast<long>(std::floor(k / rho));  // newest arrival
                theta = stochastic_subgradient(task, x.row(i).transpose(),
                                               sample_stream(task, i, t));
            } else {
                theta = mini_batch(task, i, k, b_loc, x.row(i).transpose()).g;
            }
            x.row(i) = geometry.domain()
                           .project(x.row(i).transpose() - opts.gamma * theta)
                           .transpose();
        }
        x = consensus_round(mixing, x);
        av_sum += x;
        if (should_record(k, steps, opts.record_every)) {
            const Matrix av = av_sum / static_cast<double>(k);
            const double mean = record_gaps(trace, truth, k, av, opts.per_node_gaps);
            if (k == steps) trace.final_mean_gap = mean;
            if (opts.record_iterates) trace.iterates.push_back(x);
        }
    }
    return trace;
}

}  // namespace

ConvergenceTrace run_baseline(Baseline kind, const LogisticTask& task,
                              const GroundTruth* truth, const MirrorGeometry& geometry,
                              const MixingMatrix* mixing, const RateSchedule& schedule,
                              const RunOptions& opts, CentralBatching central_mode) {
    schedule.validate();
    const int m = mixing != nullptr ? mixing->size() : opts.node_count;
    switch (kind) {
        case Baseline::central_md:
        case Baseline::central_amd:
            if (m < 1)
                throw std::invalid_argument(
                    "config error: centralized baselines need node_count or a mixing matrix");
            return run_central(kind, task, truth, geometry, m, schedule, opts, central_mode);
        case Baseline::local_md:
        case Baseline::local_amd:
            if (m < 1)
                throw std::invalid_argument(
                    "config error: local baselines need node_count or a mixing matrix");
            return run_local(kind, task, truth, geometry, m, schedule, opts);
        case Baseline::dgd_naive:
        case Baseline::dgd_minibatch:
            if (mixing == nullptr)
                throw std::invalid_argument("config error: DGD variants need a mixing matrix");
            return run_dgd(kind, task, truth, geometry, *mixing, schedule, opts);
    }
    throw std::logic_error("unknown baseline");
}

const char* baseline_name(Baseline kind) {
    switch (kind) {
        case Baseline::central_md: return "central_md";
        case Baseline::central_amd: return "central_amd";
        case Baseline::local_md: return "local_md";
        case Baseline::local_amd: return "local_amd";
        case Baseline::dgd_naive: return "dgd_naive";
        case Baseline::dgd_minibatch: return "dgd_minibatch";
    }
    return "unknown";
}

long samples_consumed(const std::string& algorithm, int m, double rho, int b, long round) {
    if (algorithm == "dsamd" || algorithm == "adsamd")
        return static_cast<long>(m) * round * b;
    if (algorithm == "central_md" || algorithm == "central_amd")
        return static_cast<long>(m) * round * b;
    if (algorithm == "local_md" || algorithm == "local_amd")
        return static_cast<long>(m) * round;
    if (algorithm == "dgd_minibatch") return static_cast<long>(m) * round * b;
    if (algorithm == "dgd_naive")
        return static_cast<long>(m) *
               static_cast<long>(std::floor(round / std::min(rho, 1.0)));
    throw std::invalid_argument("unknown algorithm: " + algorithm);
}

}  // namespace samd
