#pragma once

#include "samd/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace samd {

// Two-class Gaussian logistic model: labels Bernoulli(label_prior),
// features N(mu_label, sigma_r2 * I). Class means are drawn standard-normal
// from the task seed, so every instance gets a fresh problem.
struct LogisticTask {
    int dimension = 20;
    Vector mu0, mu1;
    double sigma_r2 = 2.0;
    double label_prior = 0.5;
    std::uint64_t rng_seed = 0;

    static LogisticTask make(int d, double sigma_r2, double label_prior,
                             std::uint64_t seed);
};

struct OracleSample {
    Vector features;
    int label = 0;
};

// Deterministic function of (task seed, node, t): replaying a run
// reproduces the identical stream, and distinct (node, t) draws are
// independent.
OracleSample sample_stream(const LogisticTask& task, int node, long t);

// Gradient of the negative log-likelihood at the stacked point
// (coefficients, intercept): (sigmoid(y'x + x0) - l) * (y, 1).
Vector stochastic_subgradient(const LogisticTask& task, const Vector& x_aug,
                              const OracleSample& sample);

struct SubgradientEstimate {
    Vector g;
    Vector eval_point;
    int batch_size = 1;
};

// Average of stochastic subgradients over samples t in ((s-1)b, sb] at the
// fixed search point x_aug.
SubgradientEstimate mini_batch(const LogisticTask& task, int node, long s, int b,
                               const Vector& x_aug);

// Fixed-seed holdout defining the surrogate objective for gap evaluation.
// psi_star and x_star come from a damped-Newton solve on the holdout to
// gradient norm 1e-10. Shared across all algorithms in a run.
class GroundTruth {
public:
    GroundTruth() = default;  // unprepared; evaluate_gap throws

    static GroundTruth prepare(const LogisticTask& task, long n_eval);

    bool prepared() const { return n_eval_ > 0; }
    long n_eval() const { return n_eval_; }
    double psi_star() const;
    const Vector& x_star() const;

    // Holdout-averaged negative log-likelihood and its gradient.
    double objective(const Vector& x_aug) const;
    Vector gradient(const Vector& x_aug) const;
    // Serial reference for the blocked OpenMP reduction used by objective().
    double objective_serial(const Vector& x_aug) const;

    double evaluate_gap(const Vector& x_aug) const;
    // One gap per row of `points`; the row layout matches evaluate_gap.
    std::vector<double> evaluate_gaps(const Matrix& points) const;

    // Mean squared feature norm, E||(y,1)||^2; 0.25 * this bounds the
    // logistic gradient Lipschitz constant.
    double mean_feature_sq_norm() const;

    // Binary cache keyed by (seed, d, sigma_r2, label_prior, n_eval).
    void save(const std::filesystem::path& path) const;
    static GroundTruth load(const std::filesystem::path& path);
    bool matches(const LogisticTask& task, long n_eval) const;

private:
    long n_eval_ = 0;
    std::uint64_t task_seed_ = 0;
    int dimension_ = 0;
    double sigma_r2_ = 0.0;
    double label_prior_ = 0.0;
    Matrix phi_;      // n_eval x (d+1), last column is the intercept 1
    Vector labels_;   // 0/1
    Vector x_star_;
    double psi_star_ = 0.0;

    void solve_ground_truth();
};

// Empirical estimate of the subgradient noise variance E||G - g||^2 at a
// point (dual norm = l2 for the shipped experiments).
double estimate_sigma2(const LogisticTask& task, const GroundTruth& truth,
                       const Vector& at, int n_samples);

}  // namespace samd
