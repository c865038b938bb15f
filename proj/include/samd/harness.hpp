#pragma once

#include "samd/algorithms.hpp"
#include "samd/bounds.hpp"
#include "samd/network.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace samd {

struct AlgorithmSpec {
    std::string name;  // central_md, central_amd, local_md, local_amd,
                       // dsamd, adsamd, dgd_naive, dgd_minibatch
    double gamma = 1.0;
};

struct BRule {
    enum class Kind { explicit_b, corollary };
    Kind kind = Kind::explicit_b;
    int b = 2;
    double c_mult = 0.1;
};

enum class Regime { T_eq_m, T_eq_sqrt_m, T_explicit };

struct ExperimentConfig {
    FamilySpec graph;
    MixingRule mixing_rule = MixingRule::mean_for_complete;
    Regime regime = Regime::T_eq_m;
    long T_explicit = 0;
    std::vector<int> m_list{4, 8, 16, 32, 64};
    double rho = 0.5;
    std::vector<AlgorithmSpec> algorithms;
    BRule b_rule;
    int instance_count = 200;
    std::uint64_t master_seed = 1;
    int task_d = 20;
    double task_sigma_r2 = 2.0;
    double label_prior = 0.5;
    long n_eval = 100000;
    std::string geometry_name = "euclidean";
    double domain_radius = 100.0;  // <= 0: unbounded domain
    long record_every = 0;         // 0: final round only
    bool per_node_gaps = true;
    std::string central_batching = "per_data_round";  // or "pooled"

    static ExperimentConfig defaults();
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static ExperimentConfig load(const std::filesystem::path& path);

    long horizon_for(int m) const;
};

// Paper step sizes: MD 0.5, A-MD 2, DGD 5, D-SAMD 5, AD-SAMD 20 on complete
// graphs; on the expander/random families D-SAMD drops to 2.5 for T=sqrt(m)
// and AD-SAMD uses 28 (T=m) / 8 (T=sqrt(m)).
double default_gamma(const std::string& algorithm, FamilySpec::Family family,
                     Regime regime);
std::vector<AlgorithmSpec> default_algorithms(FamilySpec::Family family, Regime regime,
                                              bool include_dgd);

struct SweepRow {
    std::string algorithm;
    int m = 0;
    long T = 0;
    int b = 1;
    long S = 0;
    int instance = 0;
    std::uint64_t instance_seed = 0;
    long round = 0;
    long samples = 0;
    int node = -1;  // -1: mean over nodes
    double gap = 0.0;
};

struct PointStat {
    std::string algorithm;
    int m = 0;
    long T = 0;
    double mean_final_gap = 0.0;
    double stderr_final_gap = 0.0;
    std::vector<double> final_gaps;  // per instance, node-mean at the horizon
};

struct BoundOverlay {
    std::string algorithm;
    int m = 0;
    long S = 0;
    double total = 0.0;
    double deterministic_term = 0.0;
    double stochastic_term = 0.0;
    double bias_term = 0.0;
    double gamma_star = 0.0;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepRow> rows;
    std::vector<PointStat> stats;                       // keyed (algorithm, m)
    std::map<int, std::vector<double>> lambda2_by_m;    // per instance
    std::map<int, int> b_by_m;
    std::map<int, int> r_by_m;
    std::map<int, long> S_by_m;
    std::map<int, double> sigma2_by_m;                  // first-instance estimate
    std::map<int, double> l_est_by_m;
    std::map<std::string, double> slopes;               // log gap vs log mT
    std::vector<BoundOverlay> overlays;
    int gamma_warnings = 0;

    const PointStat* find_stat(const std::string& algorithm, int m) const;
};

// Monte-Carlo sweep over (m, instance); OpenMP over instances. Results are
// bitwise independent of the thread count.
SweepResult run_sweep(const ExperimentConfig& config);
// Plain-loop reference with identical semantics.
SweepResult run_sweep_serial(const ExperimentConfig& config);

// Least-squares slope of log(gap) vs log(mT). Needs >= 3 positive points.
double fit_slope(const std::vector<std::pair<double, double>>& mt_gap_points);

// Writes one CSV per algorithm, summary.json, and a gnuplot columns file.
void emit(const SweepResult& result, const std::filesystem::path& out_dir);

// Reads rows back from an emitted per-algorithm CSV.
std::vector<SweepRow> read_trace_csv(const std::filesystem::path& path);

// Slope of the mean final gap vs mT computed from emitted CSV rows.
double slope_from_rows(const std::vector<SweepRow>& rows);

}  // namespace samd
