#include "samd/harness.hpp"
#include "samd/rng.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, long seed,
            int jobs) {
    samd::ExperimentConfig cfg = samd::ExperimentConfig::load(config_path);
    if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
    if (jobs > 0) omp_set_num_threads(jobs);

    const auto t0 = std::chrono::steady_clock::now();
    const samd::SweepResult result =
        jobs == 1 ? samd::run_sweep_serial(cfg) : samd::run_sweep(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    samd::emit(result, out_dir);

    std::printf("sweep finished in %.1f s; %zu trace rows -> %s\n", secs,
                result.rows.size(), out_dir.c_str());
    for (const auto& stat : result.stats)
        std::printf("  %-14s m=%-3d T=%-5ld mean final gap %.6g (stderr %.3g)\n",
                    stat.algorithm.c_str(), stat.m, stat.T, stat.mean_final_gap,
                    stat.stderr_final_gap);
    for (const auto& [name, slope] : result.slopes)
        std::printf("  slope[%s] = %.4f (reference -0.5)\n", name.c_str(), slope);
    if (result.gamma_warnings > 0)
        std::printf("  note: %d runs used gamma above alpha/(2 L_est)\n",
                    result.gamma_warnings);
    return 0;
}

int cmd_slope(const std::string& csv_path) {
    const auto rows = samd::read_trace_csv(csv_path);
    std::printf("%.10f\n", samd::slope_from_rows(rows));
    return 0;
}

int cmd_bounds(const std::string& config_path) {
    const samd::ExperimentConfig cfg = samd::ExperimentConfig::load(config_path);
    const samd::LogisticTask task = samd::LogisticTask::make(
        cfg.task_d, cfg.task_sigma_r2, cfg.label_prior, cfg.master_seed);
    const samd::GroundTruth truth =
        samd::GroundTruth::prepare(task, std::min<long>(cfg.n_eval, 20000));
    samd::bounds::ProblemConstants pc;
    pc.L = 0.25 * truth.mean_feature_sq_norm();
    pc.M = 0.0;
    pc.sigma2 = samd::estimate_sigma2(task, truth,
                                      samd::Vector::Zero(cfg.task_d + 1), 2000);
    pc.alpha = 1.0;
    pc.c_star = 1.0;
    pc.d_omega = cfg.domain_radius > 0.0
                     ? samd::MirrorGeometry::from_name(
                           cfg.geometry_name,
                           samd::FeasibleSet::ball(samd::Vector::Zero(cfg.task_d + 1),
                                                   cfg.domain_radius))
                           .d_omega()
                     : 0.0;
    std::printf("constants: L=%.4g sigma2=%.4g d_omega=%.4g\n", pc.L, pc.sigma2,
                pc.d_omega);
    for (int m : cfg.m_list) {
        const long T = cfg.horizon_for(m);
        const samd::Topology topo = samd::generate_topology(
            cfg.graph, m, samd::rng::derive_seed(cfg.master_seed, {0x6772, 0}));
        const samd::MixingMatrix w = samd::build_mixing_matrix(topo, cfg.mixing_rule);
        for (auto variant : {samd::bounds::Variant::dsamd, samd::bounds::Variant::adsamd}) {
            const auto rep = samd::bounds::corollary_conditions(
                pc, m, T, cfg.rho, w.lambda2, variant,
                cfg.b_rule.kind == samd::BRule::Kind::corollary ? cfg.b_rule.c_mult : 1.0);
            std::printf(
                "m=%-3d T=%-5ld lambda2=%.3f %-7s b in [%.3g, %.3g]%s rho_min=%.3g%s "
                "T_min=%.3g%s M_max=%.3g%s\n",
                m, T, w.lambda2,
                variant == samd::bounds::Variant::dsamd ? "dsamd" : "adsamd", rep.b_min,
                rep.b_max, rep.b_window_ok ? "" : " (!)", rep.rho_min,
                rep.rho_ok ? "" : " (!)", rep.T_min, rep.T_ok ? "" : " (!)", rep.M_max,
                rep.M_ok ? "" : " (!)");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed stochastic mirror descent simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", csv_path;
    long seed = -1;
    int jobs = 0;

    auto* run = app.add_subcommand("run", "run a Monte-Carlo scaling sweep");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override master seed");
    run->add_option("--jobs", jobs, "worker threads (0 = hardware, 1 = serial)");

    auto* slope = app.add_subcommand("slope", "fit the log-log slope of an emitted CSV");
    slope->add_option("--in", csv_path, "trace CSV path")->required();

    auto* bnds = app.add_subcommand("bounds", "print the order-wise sizing reports");
    bnds->add_option("--config", config_path, "experiment config JSON")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, jobs);
        if (slope->parsed()) return cmd_slope(csv_path);
        if (bnds->parsed()) return cmd_bounds(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
