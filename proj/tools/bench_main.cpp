// Timings for the OpenMP kernels against their serial references, plus a
// small end-to-end sweep in both modes.

#include "samd/harness.hpp"
#include "samd/network.hpp"
#include "samd/oracle.hpp"
#include "samd/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

double time_it(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return total / reps;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %9.4f ms   parallel %9.4f ms   speedup %.2fx\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        const auto topo = samd::generate_topology(samd::FamilySpec::erdos_renyi(0.2), 192, 7);
        const auto w = samd::build_mixing_matrix(topo, samd::MixingRule::metropolis);
        samd::Matrix values(192, 64);
        samd::rng::Stream rs(11);
        for (long i = 0; i < values.size(); ++i) values.data()[i] = rs.normal();
        samd::Matrix sink;
        const double serial = time_it(
            [&] {
                sink = samd::consensus_round_serial(w, values);
                for (int q = 0; q < 49; ++q) sink = samd::consensus_round_serial(w, sink);
            },
            5);
        const double parallel = time_it(
            [&] {
                sink = samd::consensus_round(w, values);
                for (int q = 0; q < 49; ++q) sink = samd::consensus_round(w, sink);
            },
            5);
        report("consensus (m=192, 50 rounds)", serial, parallel);
    }

    {
        const auto task = samd::LogisticTask::make(20, 2.0, 0.5, 3);
        const auto truth = samd::GroundTruth::prepare(task, 200000);
        samd::Vector x = samd::Vector::Constant(21, 0.1);
        double sink = 0.0;
        const double serial = time_it([&] { sink += truth.objective_serial(x); }, 10);
        const double parallel = time_it([&] { sink += truth.objective(x); }, 10);
        report("holdout objective (N=2e5)", serial, parallel);
        (void)sink;
    }

    {
        samd::ExperimentConfig cfg = samd::ExperimentConfig::defaults();
        cfg.m_list = {8, 16};
        cfg.instance_count = 8;
        cfg.n_eval = 20000;
        cfg.algorithms = {{"dsamd", 5.0}, {"central_md", 0.5}};
        const double serial = time_it([&] { samd::run_sweep_serial(cfg); }, 1);
        const double parallel = time_it([&] { samd::run_sweep(cfg); }, 1);
        report("sweep (2 points x 8 inst)", serial, parallel);
    }
    return 0;
}
