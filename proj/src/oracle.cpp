#include "samd/oracle.hpp"

#include "samd/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace samd {

namespace {

// seed-derivation tags
constexpr std::uint64_t kTagMu = 1;
constexpr std::uint64_t kTagStream = 2;
constexpr std::uint64_t kTagHoldout = 3;
constexpr std::uint64_t kTagSigma = 4;

constexpr long kReductionBlock = 8192;

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
inline double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

OracleSample draw_sample(const LogisticTask& task, std::uint64_t seed) {
    rng::Stream rs(seed);
    OracleSample s;
    s.label = rs.uniform() < task.label_prior ? 1 : 0;
    const Vector& mu = s.label == 1 ? task.mu1 : task.mu0;
    const double sd = std::sqrt(task.sigma_r2);
    s.features.resize(task.dimension);
    for (int i = 0; i < task.dimension; ++i) s.features[i] = mu[i] + sd * rs.normal();
    return s;
}

}  // namespace

LogisticTask LogisticTask::make(int d, double sigma_r2, double label_prior,
                                std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("task dimension must be positive");
    if (sigma_r2 < 0.0) throw std::invalid_argument("sigma_r2 must be nonnegative");
    if (!(label_prior > 0.0 && label_prior < 1.0))
        throw std::invalid_argument("label_prior must lie in (0, 1)");
    LogisticTask task;
    task.dimension = d;
    task.sigma_r2 = sigma_r2;
    task.label_prior = label_prior;
    task.rng_seed = seed;
    rng::Stream rs(rng::derive_seed(seed, {kTagMu}));
    task.mu0.resize(d);
    task.mu1.resize(d);
    for (int i = 0; i < d; ++i) task.mu0[i] = rs.normal();
    for (int i = 0; i < d; ++i) task.mu1[i] = rs.normal();
    return task;
}

OracleSample sample_stream(const LogisticTask& task, int node, long t) {
    if (node < 0 || t < 1) throw std::invalid_argument("bad stream index");
    return draw_sample(task, rng::derive_seed(task.rng_seed,
                                              {kTagStream, static_cast<std::uint64_t>(node),
                                               static_cast<std::uint64_t>(t)}));
}

Vector stochastic_subgradient(const LogisticTask& task, const Vector& x_aug,
                              const OracleSample& sample) {
    if (x_aug.size() != task.dimension + 1)
        throw std::invalid_argument("x_aug must have d+1 entries");
    if (!x_aug.allFinite()) throw std::invalid_argument("x_aug must be finite");
    const double z = sample.features.dot(x_aug.head(task.dimension)) + x_aug[task.dimension];
    const double w = sigmoid(z) - sample.label;
    Vector g(task.dimension + 1);
    g.head(task.dimension) = w * sample.features;
    g[task.dimension] = w;
    return g;
}

SubgradientEstimate mini_batch(const LogisticTask& task, int node, long s, int b,
                               const Vector& x_aug) {
    if (b < 1) throw std::invalid_argument("mini_batch requires b >= 1");
    if (s < 1) throw std::invalid_argument("mini_batch requires s >= 1");
    SubgradientEstimate est;
    est.eval_point = x_aug;
    est.batch_size = b;
    est.g = Vector::Zero(task.dimension + 1);
    const long t0 = (s - 1) * static_cast<long>(b);
    for (int k = 1; k <= b; ++k)
        est.g += stochastic_subgradient(task, x_aug, sample_stream(task, node, t0 + k));
    est.g /= static_cast<double>(b);
    return est;
}

// ----------------------------------------------------------------- GroundTruth

GroundTruth GroundTruth::prepare(const LogisticTask& task, long n_eval) {
    if (n_eval < 1) throw std::invalid_argument("n_eval must be positive");
    GroundTruth gt;
    gt.n_eval_ = n_eval;
    gt.task_seed_ = task.rng_seed;
    gt.dimension_ = task.dimension;
    gt.sigma_r2_ = task.sigma_r2;
    gt.label_prior_ = task.label_prior;
    gt.phi_.resize(n_eval, task.dimension + 1);
    gt.labels_.resize(n_eval);
    for (long t = 0; t < n_eval; ++t) {
        const OracleSample s = draw_sample(
            task, rng::derive_seed(task.rng_seed, {kTagHoldout, static_cast<std::uint64_t>(t)}));
        gt.phi_.row(t).head(task.dimension) = s.features.transpose();
        gt.phi_(t, task.dimension) = 1.0;
        gt.labels_[t] = s.label;
    }
    gt.solve_ground_truth();
    return gt;
}

double GroundTruth::psi_star() const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    return psi_star_;
}

const Vector& GroundTruth::x_star() const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    return x_star_;
}

// Blocked reduction: per-block partial sums are accumulated in block order,
// so the result is bitwise identical for any thread count.
double GroundTruth::objective(const Vector& x_aug) const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    const long nblocks = (n_eval_ + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (nblocks > 1)
    for (long blk = 0; blk < nblocks; ++blk) {
        const long lo = blk * kReductionBlock;
        const long len = std::min<long>(kReductionBlock, n_eval_ - lo);
        const Vector z = phi_.middleRows(lo, len) * x_aug;
        double acc = 0.0;
        for (long i = 0; i < len; ++i) acc += softplus(z[i]) - labels_[lo + i] * z[i];
        partial[blk] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total / static_cast<double>(n_eval_);
}

double GroundTruth::objective_serial(const Vector& x_aug) const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    const long nblocks = (n_eval_ + kReductionBlock - 1) / kReductionBlock;
    double total = 0.0;
    for (long blk = 0; blk < nblocks; ++blk) {
        const long lo = blk * kReductionBlock;
        const long len = std::min<long>(kReductionBlock, n_eval_ - lo);
        const Vector z = phi_.middleRows(lo, len) * x_aug;
        double acc = 0.0;
        for (long i = 0; i < len; ++i) acc += softplus(z[i]) - labels_[lo + i] * z[i];
        total += acc;
    }
    return total / static_cast<double>(n_eval_);
}

Vector GroundTruth::gradient(const Vector& x_aug) const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    const long nblocks = (n_eval_ + kReductionBlock - 1) / kReductionBlock;
    Matrix partial = Matrix::Zero(x_aug.size(), nblocks);
#pragma omp parallel for schedule(static) if (nblocks > 1)
    for (long blk = 0; blk < nblocks; ++blk) {
        const long lo = blk * kReductionBlock;
        const long len = std::min<long>(kReductionBlock, n_eval_ - lo);
        Vector z = phi_.middleRows(lo, len) * x_aug;
        for (long i = 0; i < len; ++i) z[i] = sigmoid(z[i]) - labels_[lo + i];
        partial.col(blk) = phi_.middleRows(lo, len).transpose() * z;
    }
    Vector g = Vector::Zero(x_aug.size());
    for (long blk = 0; blk < nblocks; ++blk) g += partial.col(blk);
    return g / static_cast<double>(n_eval_);
}

double GroundTruth::evaluate_gap(const Vector& x_aug) const {
    return objective(x_aug) - psi_star();
}

std::vector<double> GroundTruth::evaluate_gaps(const Matrix& points) const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    if (points.cols() != dimension_ + 1)
        throw std::invalid_argument("gap points must have d+1 columns");
    const long npts = points.rows();
    std::vector<double> gaps(npts, 0.0);
    const long nblocks = (n_eval_ + kReductionBlock - 1) / kReductionBlock;
    Matrix partial = Matrix::Zero(npts, nblocks);
#pragma omp parallel for schedule(static) if (nblocks > 1)
    for (long blk = 0; blk < nblocks; ++blk) {
        const long lo = blk * kReductionBlock;
        const long len = std::min<long>(kReductionBlock, n_eval_ - lo);
        const Matrix z = phi_.middleRows(lo, len) * points.transpose();  // len x npts
        for (long j = 0; j < npts; ++j) {
            double acc = 0.0;
            for (long i = 0; i < len; ++i) acc += softplus(z(i, j)) - labels_[lo + i] * z(i, j);
            partial(j, blk) = acc;
        }
    }
    for (long j = 0; j < npts; ++j) {
        double total = 0.0;
        for (long blk = 0; blk < nblocks; ++blk) total += partial(j, blk);
        gaps[j] = total / static_cast<double>(n_eval_) - psi_star_;
    }
    return gaps;
}

double GroundTruth::mean_feature_sq_norm() const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    return phi_.squaredNorm() / static_cast<double>(n_eval_);
}

void GroundTruth::solve_ground_truth() {
    // damped Newton on the holdout NLL, gradient tolerance 1e-10
    const int n = dimension_ + 1;
    Vector w = Vector::Zero(n);
    double fw = objective(w);
    for (int it = 0; it < 200; ++it) {
        const Vector g = gradient(w);
        if (g.norm() <= 1e-10) break;
        Matrix hess = Matrix::Zero(n, n);
        const long nblocks = (n_eval_ + kReductionBlock - 1) / kReductionBlock;
        std::vector<Matrix> partial(nblocks);
#pragma omp parallel for schedule(static) if (nblocks > 1)
        for (long blk = 0; blk < nblocks; ++blk) {
            const long lo = blk * kReductionBlock;
            const long len = std::min<long>(kReductionBlock, n_eval_ - lo);
            Vector z = phi_.middleRows(lo, len) * w;
            for (long i = 0; i < len; ++i) {
                const double s = sigmoid(z[i]);
                z[i] = s * (1.0 - s);
            }
            partial[blk] = phi_.middleRows(lo, len).transpose() *
                           z.asDiagonal() * phi_.middleRows(lo, len);
        }
        for (long blk = 0; blk < nblocks; ++blk) hess += partial[blk];
        hess /= static_cast<double>(n_eval_);
        hess.diagonal().array() += 1e-12;
        const Vector dw = -hess.llt().solve(g);
        double step = 1.0;
        for (int bt = 0; bt < 60; ++bt) {
            const Vector w_try = w + step * dw;
            const double f_try = objective(w_try);
            if (f_try <= fw + 0.25 * step * g.dot(dw)) {
                w = w_try;
                fw = f_try;
                break;
            }
            step *= 0.5;
        }
    }
    x_star_ = w;
    psi_star_ = fw;
}

// binary cache --------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'S', 'A', 'M', 'D', 'H', 'O', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void GroundTruth::save(const std::filesystem::path& path) const {
    if (!prepared()) throw std::logic_error("ground truth not prepared");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open holdout cache for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, task_seed_);
    put(out, dimension_);
    put(out, sigma_r2_);
    put(out, label_prior_);
    put(out, n_eval_);
    put(out, psi_star_);
    out.write(reinterpret_cast<const char*>(x_star_.data()),
              static_cast<std::streamsize>(sizeof(double)) * x_star_.size());
    out.write(reinterpret_cast<const char*>(labels_.data()),
              static_cast<std::streamsize>(sizeof(double)) * labels_.size());
    out.write(reinterpret_cast<const char*>(phi_.data()),
              static_cast<std::streamsize>(sizeof(double)) * phi_.size());
    if (!out) throw std::runtime_error("holdout cache write failed: " + path.string());
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open holdout cache: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    std::uint32_t version = 0;
    get(in, version);
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || version != kVersion)
        throw std::runtime_error("holdout cache has wrong magic/version: " + path.string());
    GroundTruth gt;
    get(in, gt.task_seed_);
    get(in, gt.dimension_);
    get(in, gt.sigma_r2_);
    get(in, gt.label_prior_);
    get(in, gt.n_eval_);
    get(in, gt.psi_star_);
    gt.x_star_.resize(gt.dimension_ + 1);
    in.read(reinterpret_cast<char*>(gt.x_star_.data()),
            static_cast<std::streamsize>(sizeof(double)) * gt.x_star_.size());
    gt.labels_.resize(gt.n_eval_);
    in.read(reinterpret_cast<char*>(gt.labels_.data()),
            static_cast<std::streamsize>(sizeof(double)) * gt.labels_.size());
    gt.phi_.resize(gt.n_eval_, gt.dimension_ + 1);
    in.read(reinterpret_cast<char*>(gt.phi_.data()),
            static_cast<std::streamsize>(sizeof(double)) * gt.phi_.size());
    if (!in) throw std::runtime_error("holdout cache truncated: " + path.string());
    return gt;
}

bool GroundTruth::matches(const LogisticTask& task, long n_eval) const {
    return prepared() && task_seed_ == task.rng_seed && dimension_ == task.dimension &&
           sigma_r2_ == task.sigma_r2 && label_prior_ == task.label_prior &&
           n_eval_ == n_eval;
}

double estimate_sigma2(const LogisticTask& task, const GroundTruth& truth,
                       const Vector& at, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be positive");
    const Vector g_mean = truth.gradient(at);
    double acc = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const OracleSample s = draw_sample(
            task, rng::derive_seed(task.rng_seed, {kTagSigma, static_cast<std::uint64_t>(k)}));
        acc += (stochastic_subgradient(task, at, s) - g_mean).squaredNorm();
    }
    return acc / static_cast<double>(n_samples);
}

}  // namespace samd
