#include "samd/harness.hpp"

#include "samd/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace samd {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTagInstance = 0x696e;
constexpr std::uint64_t kTagGraph = 0x6772;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Baseline baseline_from_name(const std::string& name) {
    if (name == "central_md") return Baseline::central_md;
    if (name == "central_amd") return Baseline::central_amd;
    if (name == "local_md") return Baseline::local_md;
    if (name == "local_amd") return Baseline::local_amd;
    if (name == "dgd_naive") return Baseline::dgd_naive;
    if (name == "dgd_minibatch") return Baseline::dgd_minibatch;
    throw std::invalid_argument("unknown algorithm name: " + name);
}

bool is_baseline(const std::string& name) {
    return name != "dsamd" && name != "adsamd";
}

}  // namespace

// -------------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig cfg;
    cfg.algorithms = default_algorithms(FamilySpec::Family::complete, Regime::T_eq_m,
                                        /*include_dgd=*/false);
    return cfg;
}

long ExperimentConfig::horizon_for(int m) const {
    switch (regime) {
        case Regime::T_eq_m:
            return m;
        case Regime::T_eq_sqrt_m:
            return std::max<long>(1, std::lround(std::sqrt(static_cast<double>(m))));
        case Regime::T_explicit:
            if (T_explicit < 1) throw std::invalid_argument("explicit regime needs T >= 1");
            return T_explicit;
    }
    throw std::logic_error("bad regime");
}

double default_gamma(const std::string& algorithm, FamilySpec::Family family,
                     Regime regime) {
    const bool complete = family == FamilySpec::Family::complete;
    if (algorithm == "central_md" || algorithm == "local_md") return 0.5;
    if (algorithm == "central_amd" || algorithm == "local_amd") return 2.0;
    if (algorithm == "dgd_naive" || algorithm == "dgd_minibatch") return 5.0;
    if (algorithm == "dsamd") {
        if (!complete && regime == Regime::T_eq_sqrt_m) return 2.5;
        return 5.0;
    }
    if (algorithm == "adsamd") {
        if (!complete) return regime == Regime::T_eq_sqrt_m ? 8.0 : 28.0;
        return 20.0;
    }
    throw std::invalid_argument("unknown algorithm name: " + algorithm);
}

std::vector<AlgorithmSpec> default_algorithms(FamilySpec::Family family, Regime regime,
                                              bool include_dgd) {
    std::vector<std::string> names{"central_md", "central_amd", "local_md",
                                   "local_amd", "dsamd", "adsamd"};
    if (include_dgd) {
        names.push_back("dgd_naive");
        names.push_back("dgd_minibatch");
    }
    std::vector<AlgorithmSpec> specs;
    specs.reserve(names.size());
    for (const auto& n : names) specs.push_back({n, default_gamma(n, family, regime)});
    return specs;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg = defaults();
    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        const std::string family = g.value("family", "complete");
        if (family == "complete") {
            cfg.graph = FamilySpec::complete();
            cfg.mixing_rule = MixingRule::mean_for_complete;
        } else if (family == "k_regular") {
            cfg.graph = FamilySpec::k_regular(g.value("k", 6));
            cfg.mixing_rule = MixingRule::metropolis;
        } else if (family == "erdos_renyi") {
            cfg.graph = FamilySpec::erdos_renyi(g.value("p", 0.1));
            cfg.mixing_rule = MixingRule::metropolis;
        } else {
            throw std::invalid_argument("unknown graph family: " + family);
        }
    }
    if (j.contains("mixing_rule")) {
        const std::string rule = j.at("mixing_rule");
        if (rule == "mean_for_complete")
            cfg.mixing_rule = MixingRule::mean_for_complete;
        else if (rule == "metropolis")
            cfg.mixing_rule = MixingRule::metropolis;
        else
            throw std::invalid_argument("unknown mixing rule: " + rule);
    }
    if (j.contains("regime")) {
        const auto& r = j.at("regime");
        if (r.is_number()) {
            cfg.regime = Regime::T_explicit;
            cfg.T_explicit = r.get<long>();
        } else {
            const std::string s = r.get<std::string>();
            if (s == "T=m")
                cfg.regime = Regime::T_eq_m;
            else if (s == "T=sqrt(m)")
                cfg.regime = Regime::T_eq_sqrt_m;
            else
                throw std::invalid_argument("unknown regime: " + s);
        }
    }
    cfg.m_list = j.value("m_list", cfg.m_list);
    cfg.rho = j.value("rho", cfg.rho);
    if (j.contains("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& a : j.at("algorithms")) {
            AlgorithmSpec spec;
            if (a.is_string()) {
                spec.name = a.get<std::string>();
                spec.gamma = default_gamma(spec.name, cfg.graph.family, cfg.regime);
            } else {
                spec.name = a.at("name");
                spec.gamma = a.contains("gamma")
                                 ? a.at("gamma").get<double>()
                                 : default_gamma(spec.name, cfg.graph.family, cfg.regime);
            }
            cfg.algorithms.push_back(spec);
        }
    }
    if (j.contains("b_rule")) {
        const auto& b = j.at("b_rule");
        const std::string kind = b.value("kind", "explicit");
        if (kind == "explicit") {
            cfg.b_rule.kind = BRule::Kind::explicit_b;
            cfg.b_rule.b = b.value("b", 2);
        } else if (kind == "corollary") {
            cfg.b_rule.kind = BRule::Kind::corollary;
            cfg.b_rule.c_mult = b.value("c_mult", 0.1);
        } else {
            throw std::invalid_argument("unknown b_rule kind: " + kind);
        }
    }
    cfg.instance_count = j.value("instances", cfg.instance_count);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("task")) {
        const auto& t = j.at("task");
        cfg.task_d = t.value("d", cfg.task_d);
        cfg.task_sigma_r2 = t.value("sigma_r2", cfg.task_sigma_r2);
        cfg.label_prior = t.value("label_prior", cfg.label_prior);
    }
    cfg.n_eval = j.value("n_eval", cfg.n_eval);
    cfg.geometry_name = j.value("geometry", cfg.geometry_name);
    cfg.domain_radius = j.value("domain_radius", cfg.domain_radius);
    cfg.record_every = j.value("record_every", cfg.record_every);
    cfg.per_node_gaps = j.value("per_node_gaps", cfg.per_node_gaps);
    cfg.central_batching = j.value("central_batching", cfg.central_batching);
    if (cfg.central_batching != "per_data_round" && cfg.central_batching != "pooled")
        throw std::invalid_argument("central_batching must be per_data_round or pooled");
    if (cfg.instance_count < 1) throw std::invalid_argument("instances must be >= 1");
    if (cfg.m_list.empty()) throw std::invalid_argument("m_list must be nonempty");
    return cfg;
}

json ExperimentConfig::to_json() const {
    json g;
    switch (graph.family) {
        case FamilySpec::Family::complete:
            g = {{"family", "complete"}};
            break;
        case FamilySpec::Family::k_regular:
            g = {{"family", "k_regular"}, {"k", graph.k}};
            break;
        case FamilySpec::Family::erdos_renyi:
            g = {{"family", "erdos_renyi"}, {"p", graph.p}};
            break;
    }
    json algos = json::array();
    for (const auto& a : algorithms) algos.push_back({{"name", a.name}, {"gamma", a.gamma}});
    json brule =
        b_rule.kind == BRule::Kind::explicit_b
            ? json{{"kind", "explicit"}, {"b", b_rule.b}}
            : json{{"kind", "corollary"}, {"c_mult", b_rule.c_mult}};
    json regime_j;
    switch (regime) {
        case Regime::T_eq_m: regime_j = "T=m"; break;
        case Regime::T_eq_sqrt_m: regime_j = "T=sqrt(m)"; break;
        case Regime::T_explicit: regime_j = T_explicit; break;
    }
    return json{
        {"graph", g},
        {"mixing_rule",
         mixing_rule == MixingRule::mean_for_complete ? "mean_for_complete" : "metropolis"},
        {"regime", regime_j},
        {"m_list", m_list},
        {"rho", rho},
        {"algorithms", algos},
        {"b_rule", brule},
        {"instances", instance_count},
        {"master_seed", master_seed},
        {"task", {{"d", task_d}, {"sigma_r2", task_sigma_r2}, {"label_prior", label_prior}}},
        {"n_eval", n_eval},
        {"geometry", geometry_name},
        {"domain_radius", domain_radius},
        {"record_every", record_every},
        {"per_node_gaps", per_node_gaps},
        {"central_batching", central_batching},
    };
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    json j;
    in >> j;
    return from_json(j);
}

// --------------------------------------------------------------------- sweep

namespace {

struct InstanceOutcome {
    std::vector<SweepRow> rows;
    double lambda2 = 0.0;
    int b = 1, r = 0;
    long S = 0;
    std::vector<std::pair<std::string, double>> final_gaps;
    int warnings = 0;
    double sigma2_est = 0.0;  // instance 0 only
    double l_est = 0.0;
    std::string error;
};

InstanceOutcome run_instance(const ExperimentConfig& cfg, int m, long T, int instance) {
    InstanceOutcome out;
    const std::uint64_t instance_seed = rng::derive_seed(
        cfg.master_seed, {kTagInstance, static_cast<std::uint64_t>(m),
                          static_cast<std::uint64_t>(instance)});

    const Topology topology = generate_topology(
        cfg.graph, m, rng::derive_seed(instance_seed, {kTagGraph}));
    const MixingMatrix mixing = build_mixing_matrix(topology, cfg.mixing_rule);
    out.lambda2 = mixing.lambda2;

    const RateSchedule schedule =
        cfg.b_rule.kind == BRule::Kind::explicit_b
            ? RateSchedule::explicit_b(cfg.rho, T, cfg.b_rule.b)
            : RateSchedule::corollary(cfg.rho, T, cfg.b_rule.c_mult, mixing.lambda2, m);
    out.b = schedule.b;
    out.r = schedule.r;
    out.S = schedule.S;

    const LogisticTask task =
        LogisticTask::make(cfg.task_d, cfg.task_sigma_r2, cfg.label_prior, instance_seed);
    const GroundTruth truth = GroundTruth::prepare(task, cfg.n_eval);
    const double l_est = 0.25 * truth.mean_feature_sq_norm();
    out.l_est = l_est;
    if (instance == 0) out.sigma2_est = estimate_sigma2(task, truth, Vector::Zero(cfg.task_d + 1), 2000);

    const FeasibleSet domain =
        cfg.domain_radius > 0.0
            ? FeasibleSet::ball(Vector::Zero(cfg.task_d + 1), cfg.domain_radius)
            : FeasibleSet::unbounded(cfg.task_d + 1);
    const MirrorGeometry geometry = MirrorGeometry::from_name(cfg.geometry_name, domain);
    const CentralBatching central_mode = cfg.central_batching == "pooled"
                                             ? CentralBatching::pooled
                                             : CentralBatching::per_data_round;

    for (const auto& algo : cfg.algorithms) {
        RunOptions opts;
        opts.gamma = algo.gamma;
        opts.seed = instance_seed;
        opts.record_every = cfg.record_every;
        opts.per_node_gaps = cfg.per_node_gaps;
        opts.l_est = l_est;
        opts.node_count = m;
        ConvergenceTrace trace;
        if (algo.name == "dsamd")
            trace = run_dsamd(task, &truth, geometry, mixing, schedule, opts);
        else if (algo.name == "adsamd")
            trace = run_adsamd(task, &truth, geometry, mixing, schedule, opts);
        else
            trace = run_baseline(baseline_from_name(algo.name), task, &truth, geometry,
                                 &mixing, schedule, opts, central_mode);
        if (trace.gamma_warning) ++out.warnings;
        out.final_gaps.push_back({algo.name, trace.final_mean_gap});
        for (const auto& row : trace.rows) {
            out.rows.push_back({algo.name, m, T, trace.b, trace.S, instance, instance_seed,
                                row.round,
                                samples_consumed(algo.name, m, cfg.rho, trace.b, row.round),
                                row.node, row.gap});
        }
    }
    return out;
}

SweepResult assemble(const ExperimentConfig& cfg, std::vector<InstanceOutcome>&& outcomes,
                     const std::vector<std::pair<int, long>>& points) {
    SweepResult result;
    result.config = cfg;

    for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
        auto& oc = outcomes[idx];
        if (!oc.error.empty()) throw std::runtime_error(oc.error);
        const int m = points[idx / cfg.instance_count].first;
        result.lambda2_by_m[m].push_back(oc.lambda2);
        result.b_by_m[m] = oc.b;
        result.r_by_m[m] = oc.r;
        result.S_by_m[m] = oc.S;
        if (idx % cfg.instance_count == 0) {
            result.sigma2_by_m[m] = oc.sigma2_est;
            result.l_est_by_m[m] = oc.l_est;
        }
        result.gamma_warnings += oc.warnings;
        for (auto& row : oc.rows) result.rows.push_back(std::move(row));
    }

    // per-(algorithm, m) aggregates over instances
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto [m, T] = points[p];
        for (const auto& algo : cfg.algorithms) {
            PointStat stat;
            stat.algorithm = algo.name;
            stat.m = m;
            stat.T = T;
            for (int inst = 0; inst < cfg.instance_count; ++inst) {
                const auto& oc = outcomes[p * cfg.instance_count + inst];
                for (const auto& [name, gap] : oc.final_gaps)
                    if (name == algo.name) stat.final_gaps.push_back(gap);
            }
            const double n = static_cast<double>(stat.final_gaps.size());
            double mean = 0.0;
            for (double g : stat.final_gaps) mean += g;
            mean /= n;
            double var = 0.0;
            for (double g : stat.final_gaps) var += (g - mean) * (g - mean);
            var = n > 1 ? var / (n - 1.0) : 0.0;
            stat.mean_final_gap = mean;
            stat.stderr_final_gap = std::sqrt(var / n);
            result.stats.push_back(std::move(stat));
        }
    }

    // fitted slopes per algorithm
    for (const auto& algo : cfg.algorithms) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& stat : result.stats)
            if (stat.algorithm == algo.name && stat.mean_final_gap > 0.0)
                pts.push_back({static_cast<double>(stat.m) * stat.T, stat.mean_final_gap});
        if (pts.size() >= 3) result.slopes[algo.name] = fit_slope(pts);
    }

    // theorem-bound overlays (compact domains only)
    if (cfg.domain_radius > 0.0) {
        const FeasibleSet domain =
            FeasibleSet::ball(Vector::Zero(cfg.task_d + 1), cfg.domain_radius);
        const MirrorGeometry geometry = MirrorGeometry::from_name(cfg.geometry_name, domain);
        for (const auto& algo : cfg.algorithms) {
            if (algo.name != "dsamd" && algo.name != "adsamd") continue;
            for (const auto& [m, T] : points) {
                bounds::ProblemConstants pc;
                pc.L = result.l_est_by_m[m];
                pc.M = 0.0;
                pc.sigma2 = result.sigma2_by_m[m];
                pc.alpha = geometry.alpha();
                pc.c_star = geometry.norms().c_star;
                pc.d_omega = geometry.d_omega();
                pc.omega_radius = geometry.omega_radius();
                const auto& lams = result.lambda2_by_m[m];
                double lam = 0.0;
                for (double v : lams) lam += v;
                lam /= static_cast<double>(lams.size());
                bounds::BoundInputs bi;
                bi.m = m;
                bi.lambda2 = lam;
                bi.r = result.r_by_m[m];
                bi.b = result.b_by_m[m];
                bi.S = result.S_by_m[m];
                bi.gamma = algo.gamma;
                const bounds::GapBound gb = algo.name == "dsamd"
                                                ? bounds::gap_bound_dsamd(pc, bi)
                                                : bounds::gap_bound_adsamd(pc, bi);
                result.overlays.push_back({algo.name, m, bi.S, gb.total,
                                           gb.deterministic_term, gb.stochastic_term,
                                           gb.bias_term, gb.gamma_star});
            }
        }
    }
    return result;
}

std::vector<std::pair<int, long>> sweep_points(const ExperimentConfig& cfg) {
    std::vector<std::pair<int, long>> points;
    points.reserve(cfg.m_list.size());
    for (int m : cfg.m_list) points.push_back({m, cfg.horizon_for(m)});
    return points;
}

InstanceOutcome run_instance_guarded(const ExperimentConfig& cfg, int m, long T,
                                     int instance) {
    try {
        return run_instance(cfg, m, T, instance);
    } catch (const std::exception& e) {
        InstanceOutcome oc;
        oc.error = "sweep point m=" + std::to_string(m) + ", instance=" +
                   std::to_string(instance) + ": " + e.what();
        return oc;
    }
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
    const auto points = sweep_points(cfg);
    const long total = static_cast<long>(points.size()) * cfg.instance_count;
    std::vector<InstanceOutcome> outcomes(total);
#pragma omp parallel for schedule(dynamic)
    for (long task_idx = 0; task_idx < total; ++task_idx) {
        const auto [m, T] = points[task_idx / cfg.instance_count];
        const int instance = static_cast<int>(task_idx % cfg.instance_count);
        outcomes[task_idx] = run_instance_guarded(cfg, m, T, instance);
    }
    return assemble(cfg, std::move(outcomes), points);
}

SweepResult run_sweep_serial(const ExperimentConfig& cfg) {
    const auto points = sweep_points(cfg);
    const long total = static_cast<long>(points.size()) * cfg.instance_count;
    std::vector<InstanceOutcome> outcomes(total);
    for (long task_idx = 0; task_idx < total; ++task_idx) {
        const auto [m, T] = points[task_idx / cfg.instance_count];
        const int instance = static_cast<int>(task_idx % cfg.instance_count);
        outcomes[task_idx] = run_instance_guarded(cfg, m, T, instance);
    }
    return assemble(cfg, std::move(outcomes), points);
}

const PointStat* SweepResult::find_stat(const std::string& algorithm, int m) const {
    for (const auto& s : stats)
        if (s.algorithm == algorithm && s.m == m) return &s;
    return nullptr;
}

// --------------------------------------------------------------------- slope

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 3) throw std::invalid_argument("fit_slope needs at least 3 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [mt, gap] : pts) {
        if (!(mt > 0.0) || !(gap > 0.0))
            throw std::invalid_argument("fit_slope needs positive coordinates");
        const double x = std::log(mt), y = std::log(gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------- emit

void emit(const SweepResult& result, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() +
                                     ": " + ec.message());

    const auto& cfg = result.config;
    const bool empty_result = result.rows.empty() && result.stats.empty();
    for (const auto& algo : cfg.algorithms) {
        if (empty_result) break;  // zero runs: summary only, no CSVs
        const fs::path path = out_dir / (algo.name + ".csv");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "algorithm,m,T,b,S,instance,instance_seed,round,samples_consumed,node,gap\n";
        for (const auto& row : result.rows) {
            if (row.algorithm != algo.name) continue;
            out << row.algorithm << ',' << row.m << ',' << row.T << ',' << row.b << ','
                << row.S << ',' << row.instance << ',' << row.instance_seed << ','
                << row.round << ',' << row.samples << ',';
            if (row.node < 0)
                out << "mean";
            else
                out << row.node;
            out << ',' << format_double(row.gap) << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

    json summary;
    summary["config"] = cfg.to_json();
    summary["runs"] =
        empty_result ? 0 : static_cast<long>(cfg.m_list.size()) * cfg.instance_count;
    json stats = json::array();
    for (const auto& s : result.stats) {
        stats.push_back({{"algorithm", s.algorithm},
                         {"m", s.m},
                         {"T", s.T},
                         {"mT", static_cast<long>(s.m) * s.T},
                         {"mean_final_gap", s.mean_final_gap},
                         {"stderr_final_gap", s.stderr_final_gap},
                         {"instances", s.final_gaps.size()}});
    }
    summary["sweep_points"] = stats;
    json lam;
    for (const auto& [m, v] : result.lambda2_by_m) lam[std::to_string(m)] = v;
    summary["lambda2_by_m"] = lam;
    json sched;
    for (const auto& [m, b] : result.b_by_m)
        sched[std::to_string(m)] = {{"b", b},
                                    {"r", result.r_by_m.at(m)},
                                    {"S", result.S_by_m.at(m)}};
    summary["schedule_by_m"] = sched;
    json noise;
    for (const auto& [m, s2] : result.sigma2_by_m)
        noise[std::to_string(m)] = {{"sigma2", s2}, {"l_est", result.l_est_by_m.at(m)}};
    summary["noise_by_m"] = noise;
    summary["slopes"] = result.slopes;
    json overlays = json::array();
    for (const auto& o : result.overlays)
        overlays.push_back({{"algorithm", o.algorithm},
                            {"m", o.m},
                            {"S", o.S},
                            {"bound_total", o.total},
                            {"deterministic_term", o.deterministic_term},
                            {"stochastic_term", o.stochastic_term},
                            {"bias_term", o.bias_term},
                            {"gamma_star", o.gamma_star}});
    summary["bound_overlays"] = overlays;
    summary["gamma_warnings"] = result.gamma_warnings;
    summary["reference_slope"] = -0.5;
    {
        const fs::path path = out_dir / "summary.json";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << summary.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

    // gnuplot columns: mT then mean/stderr per algorithm, then bound overlays
    {
        const fs::path path = out_dir / "plot.dat";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "# mT";
        for (const auto& algo : cfg.algorithms)
            out << ' ' << algo.name << ' ' << algo.name << "_stderr";
        bool has_dsamd_bound = false, has_adsamd_bound = false;
        for (const auto& o : result.overlays) {
            has_dsamd_bound |= o.algorithm == "dsamd";
            has_adsamd_bound |= o.algorithm == "adsamd";
        }
        if (has_dsamd_bound) out << " dsamd_bound";
        if (has_adsamd_bound) out << " adsamd_bound";
        out << " ref_inv_sqrt\n";
        double ref_scale = 0.0;
        for (int m : cfg.m_list) {
            const long T = cfg.horizon_for(m);
            const double mt = static_cast<double>(m) * T;
            out << format_double(mt);
            for (const auto& algo : cfg.algorithms) {
                const PointStat* s = result.find_stat(algo.name, m);
                out << ' ' << format_double(s ? s->mean_final_gap : 0.0) << ' '
                    << format_double(s ? s->stderr_final_gap : 0.0);
                if (ref_scale == 0.0 && s && s->mean_final_gap > 0.0)
                    ref_scale = s->mean_final_gap * std::sqrt(mt);
            }
            for (const std::string name : {"dsamd", "adsamd"}) {
                if ((name == "dsamd" && !has_dsamd_bound) ||
                    (name == "adsamd" && !has_adsamd_bound))
                    continue;
                double val = 0.0;
                for (const auto& o : result.overlays)
                    if (o.algorithm == name && o.m == m) val = o.total;
                out << ' ' << format_double(val);
            }
            out << ' ' << format_double(ref_scale / std::sqrt(mt)) << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<SweepRow> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace CSV: " + path.string());
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        SweepRow row;
        std::getline(ss, row.algorithm, ',');
        std::getline(ss, field, ',');
        row.m = std::stoi(field);
        std::getline(ss, field, ',');
        row.T = std::stol(field);
        std::getline(ss, field, ',');
        row.b = std::stoi(field);
        std::getline(ss, field, ',');
        row.S = std::stol(field);
        std::getline(ss, field, ',');
        row.instance = std::stoi(field);
        std::getline(ss, field, ',');
        row.instance_seed = std::stoull(field);
        std::getline(ss, field, ',');
        row.round = std::stol(field);
        std::getline(ss, field, ',');
        row.samples = std::stol(field);
        std::getline(ss, field, ',');
        row.node = field == "mean" ? -1 : std::stoi(field);
        std::getline(ss, field, ',');
        row.gap = std::stod(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

double slope_from_rows(const std::vector<SweepRow>& rows) {
    // mean final node-mean gap per (m, T)
    std::map<std::pair<int, long>, std::pair<double, long>> acc;
    for (const auto& row : rows) {
        if (row.node != -1 || row.round != row.S) continue;
        auto& [sum, count] = acc[{row.m, row.T}];
        sum += row.gap;
        ++count;
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [key, val] : acc)
        pts.push_back({static_cast<double>(key.first) * key.second,
                       val.first / static_cast<double>(val.second)});
    return fit_slope(pts);
}

}  // namespace samd
