#include "samd/geometry.hpp"

#include "samd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace samd {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

double lp_norm(const Vector& v, double p) {
    if (v.size() == 0) return 0.0;
    // rescale to avoid overflow for large entries
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        acc += std::pow(std::abs(v[i]) / scale, p);
    }
    return scale * std::pow(acc, 1.0 / p);
}

}  // namespace

// ---------------------------------------------------------------- FeasibleSet

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("ball radius must be positive");
    FeasibleSet s;
    s.kind_ = Kind::euclidean_ball;
    s.dimension_ = static_cast<int>(center.size());
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("box bounds dimension mismatch");
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("box lower bound exceeds upper bound");
    FeasibleSet s;
    s.kind_ = Kind::box;
    s.dimension_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

FeasibleSet FeasibleSet::unbounded(int dimension) {
    if (dimension <= 0) throw std::invalid_argument("dimension must be positive");
    FeasibleSet s;
    s.kind_ = Kind::unbounded;
    s.dimension_ = dimension;
    return s;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
    if (x.size() != dimension_) return false;
    switch (kind_) {
        case Kind::euclidean_ball:
            return (x - center_).norm() <= radius_ + tol;
        case Kind::box:
            return (x.array() >= lower_.array() - tol).all() &&
                   (x.array() <= upper_.array() + tol).all();
        case Kind::unbounded:
            return true;
    }
    return false;
}

Vector FeasibleSet::project(const Vector& p) const {
    if (p.size() != dimension_)
        throw std::invalid_argument("projection input dimension mismatch");
    switch (kind_) {
        case Kind::euclidean_ball: {
            Vector v = p - center_;
            const double nrm = v.norm();
            if (nrm <= radius_) return p;
            return center_ + v * (radius_ / nrm);
        }
        case Kind::box:
            return p.cwiseMax(lower_).cwiseMin(upper_);
        case Kind::unbounded:
            return p;
    }
    return p;
}

// ------------------------------------------------------------------ NormPair

NormPair NormPair::euclidean() {
    NormPair n;
    n.primal_norm = [](const Vector& v) { return v.norm(); };
    n.dual_norm = [](const Vector& v) { return v.norm(); };
    n.inner_product = [](const Vector& a, const Vector& b) { return a.dot(b); };
    n.c_star = 1.0;
    return n;
}

NormPair NormPair::lp(double p, int dimension) {
    if (p <= 1.0) throw std::invalid_argument("lp norm pair requires p > 1");
    const double q = p / (p - 1.0);
    NormPair n;
    n.primal_norm = [p](const Vector& v) { return lp_norm(v, p); };
    n.dual_norm = [q](const Vector& v) { return lp_norm(v, q); };
    n.inner_product = [](const Vector& a, const Vector& b) { return a.dot(b); };
    // norm-equivalence constants between l_q and l_2: C* = n^{|1 - 2/q|}
    n.c_star = std::pow(static_cast<double>(dimension), std::abs(1.0 - 2.0 / q));
    return n;
}

NormPair NormPair::l1_linf(int dimension) {
    NormPair n;
    n.primal_norm = [](const Vector& v) { return v.lpNorm<1>(); };
    n.dual_norm = [](const Vector& v) { return v.lpNorm<Eigen::Infinity>(); };
    n.inner_product = [](const Vector& a, const Vector& b) { return a.dot(b); };
    n.c_star = static_cast<double>(dimension);
    return n;
}

// ------------------------------------------------------------ MirrorGeometry

MirrorGeometry MirrorGeometry::euclidean(FeasibleSet domain) {
    MirrorGeometry g;
    g.name_ = "euclidean";
    g.p_ = 2.0;
    g.alpha_ = 1.0;
    g.norms_ = NormPair::euclidean();
    g.domain_ = std::move(domain);
    return g;
}

MirrorGeometry MirrorGeometry::pnorm(double p, FeasibleSet domain) {
    if (!(p > 1.0 && p <= 2.0))
        throw std::invalid_argument("pnorm geometry requires 1 < p <= 2");
    MirrorGeometry g;
    g.name_ = "pnorm:" + std::to_string(p);
    g.p_ = p;
    g.alpha_ = p - 1.0;  // (1/2)||x||_p^2 is (p-1)-strongly convex w.r.t. l_p
    g.norms_ = NormPair::lp(p, domain.dimension());
    g.domain_ = std::move(domain);
    return g;
}

MirrorGeometry MirrorGeometry::from_name(std::string_view name, FeasibleSet domain) {
    if (name == "euclidean") return euclidean(std::move(domain));
    constexpr std::string_view prefix = "pnorm:";
    if (name.substr(0, prefix.size()) == prefix) {
        const std::string_view num = name.substr(prefix.size());
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
        if (ec != std::errc() || ptr != num.data() + num.size())
            throw std::invalid_argument("bad pnorm exponent in geometry name: " +
                                        std::string(name));
        return pnorm(p, std::move(domain));
    }
    throw std::invalid_argument("unknown geometry name: " + std::string(name));
}

double MirrorGeometry::omega(const Vector& x) const {
    if (p_ == 2.0) return 0.5 * x.squaredNorm();
    const double n = lp_norm(x, p_);
    return 0.5 * n * n;
}

Vector MirrorGeometry::grad_omega(const Vector& x) const {
    if (p_ == 2.0) return x;
    const double nrm = lp_norm(x, p_);
    if (nrm == 0.0) return Vector::Zero(x.size());
    Vector g(x.size());
    const double factor = std::pow(nrm, 2.0 - p_);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]);
        g[i] = (a == 0.0) ? 0.0
                          : factor * (x[i] > 0 ? 1.0 : -1.0) * std::pow(a, p_ - 1.0);
    }
    return g;
}

double MirrorGeometry::d_omega() const {
    if (!domain_.is_compact())
        throw std::domain_error("d_omega undefined on an unbounded domain");
    double omega_max = 0.0, omega_min = 0.0;
    if (domain_.kind() == FeasibleSet::Kind::euclidean_ball) {
        const double c = domain_.center().norm();
        const double r = domain_.radius();
        if (p_ == 2.0) {
            omega_max = 0.5 * (c + r) * (c + r);
            const double inner = std::max(0.0, c - r);
            omega_min = 0.5 * inner * inner;
        } else {
            if (c != 0.0)
                throw std::invalid_argument(
                    "analytic d_omega for pnorm geometry needs an origin-centered ball");
            const int n = domain_.dimension();
            // max ||x||_p over the l2 ball is attained on the diagonal for p <= 2
            const double m = r * std::pow(static_cast<double>(n), 1.0 / p_ - 0.5);
            omega_max = 0.5 * m * m;
            omega_min = 0.0;
        }
    } else {  // box
        Vector far(domain_.dimension()), near(domain_.dimension());
        for (int i = 0; i < domain_.dimension(); ++i) {
            const double lo = domain_.lower()[i], hi = domain_.upper()[i];
            far[i] = std::max(std::abs(lo), std::abs(hi));
            near[i] = std::clamp(0.0, lo, hi);
        }
        omega_max = omega(far);
        omega_min = omega(near);
    }
    return std::sqrt(omega_max - omega_min);
}

double MirrorGeometry::omega_radius() const {
    const double d = d_omega();
    return std::sqrt(2.0 * d * d / alpha_);
}

Vector MirrorGeometry::omega_argmin() const {
    const Vector zero = Vector::Zero(domain_.dimension());
    if (p_ == 2.0) return domain_.project(zero);
    switch (domain_.kind()) {
        case FeasibleSet::Kind::unbounded:
            return zero;
        case FeasibleSet::Kind::box:
            return domain_.project(zero);  // separable objective: clamp 0
        case FeasibleSet::Kind::euclidean_ball:
            if (domain_.contains(zero)) return zero;
            break;
    }
    // fall back to projected gradient on omega itself
    Vector z = domain_.project(zero);
    double step = 1.0;
    for (int it = 0; it < 10000; ++it) {
        const Vector g = grad_omega(z);
        Vector z_next;
        for (int bt = 0; bt < 60; ++bt) {
            z_next = domain_.project(z - step * g);
            const Vector d = z_next - z;
            if (omega(z_next) <= omega(z) + g.dot(d) + 0.5 / step * d.squaredNorm()) break;
            step *= 0.5;
        }
        const double residual = (z_next - z).norm() / step;
        z = z_next;
        if (residual <= 1e-12 * (1.0 + z.norm())) break;
        step = std::min(step * 2.0, 1.0);
    }
    return z;
}

double MirrorGeometry::bregman(const Vector& x, const Vector& z) const {
    if (!domain_.contains(x) || !domain_.contains(z))
        throw std::domain_error("bregman arguments must lie in the feasible set");
    return omega(z) - omega(x) - grad_omega(x).dot(z - x);
}

Vector MirrorGeometry::prox_map(const Vector& x, const Vector& y) const {
    if (!all_finite(y) || !all_finite(x))
        throw std::invalid_argument("prox_map requires finite inputs");
    if (!domain_.contains(x))
        throw std::domain_error("prox_map base point must lie in the feasible set");
    if (p_ == 2.0) return domain_.project(x - y);

    // Projected gradient on f(z) = <y, z-x> + omega(z) - omega(x) - <grad
    // omega(x), z-x>; f is alpha-strongly convex (also w.r.t. l2 for p < 2).
    const Vector gx = grad_omega(x);
    const auto value = [&](const Vector& z) {
        return y.dot(z - x) + omega(z) - omega(x) - gx.dot(z - x);
    };
    const auto grad = [&](const Vector& z) -> Vector { return y + grad_omega(z) - gx; };

    constexpr double tol = 1e-10;
    constexpr int max_iters = 10000;
    Vector z = domain_.project(x - y);
    double fz = value(z);
    double step = 1.0;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        const Vector g = grad(z);
        Vector z_next;
        double f_next = 0.0;
        // backtracking on the proximal-gradient descent condition
        for (int bt = 0; bt < 60; ++bt) {
            z_next = domain_.project(z - step * g);
            const Vector d = z_next - z;
            f_next = value(z_next);
            if (f_next <= fz + g.dot(d) + 0.5 / step * d.squaredNorm()) break;
            step *= 0.5;
        }
        residual = (z_next - z).norm() / step;
        z = z_next;
        fz = f_next;
        if (residual <= tol * (1.0 + z.norm())) return z;
        step = std::min(step * 2.0, 1.0);
    }
    throw std::runtime_error("prox_map inner solver did not converge; residual = " +
                             std::to_string(residual));
}

// -------------------------------------------------------- prox Lipschitz scan

namespace {

Vector sample_domain_point(const FeasibleSet& set, rng::Stream& rs) {
    const int n = set.dimension();
    Vector g(n);
    for (int i = 0; i < n; ++i) g[i] = rs.normal();
    switch (set.kind()) {
        case FeasibleSet::Kind::euclidean_ball: {
            const double u = std::pow(rs.uniform(), 1.0 / n);
            const double nrm = g.norm();
            if (nrm == 0.0) return set.center();
            return set.center() + g * (set.radius() * u / nrm);
        }
        case FeasibleSet::Kind::box: {
            Vector x(n);
            for (int i = 0; i < n; ++i)
                x[i] = set.lower()[i] + rs.uniform() * (set.upper()[i] - set.lower()[i]);
            return x;
        }
        case FeasibleSet::Kind::unbounded:
            return g;
    }
    return g;
}

}  // namespace

ProxLipschitzReport check_prox_lipschitz(const MirrorGeometry& geometry,
                                          int trials, std::uint64_t rng_seed) {
    if (trials < 1) throw std::invalid_argument("check_prox_lipschitz needs trials >= 1");
    const int n = geometry.domain().dimension();
    const double y_scales[] = {0.1, 1.0, 3.0};
    ProxLipschitzReport report;
    report.trials = trials;
    rng::Stream rs(rng::derive_seed(rng_seed, {0x9a0e}));
    for (int t = 0; t < trials; ++t) {
        const double scale = y_scales[t % 3];
        const Vector x = sample_domain_point(geometry.domain(), rs);
        Vector y(n);
        for (int i = 0; i < n; ++i) y[i] = scale * rs.normal();

        Vector x2, y2;
        if (t % 2 == 0) {
            x2 = sample_domain_point(geometry.domain(), rs);
            y2 = Vector(n);
            for (int i = 0; i < n; ++i) y2[i] = scale * rs.normal();
        } else {
            // local perturbation pair
            Vector dx(n), dy(n);
            for (int i = 0; i < n; ++i) dx[i] = rs.normal();
            for (int i = 0; i < n; ++i) dy[i] = rs.normal();
            x2 = geometry.domain().project(x + 1e-3 * dx);
            y2 = y + 1e-3 * dy;
        }
        const double den = geometry.norms().primal_norm(x - x2) +
                           geometry.norms().dual_norm(y - y2);
        if (den < 1e-12) {
            ++report.skipped;  // 0/0 guard for degenerate pairs
            continue;
        }
        const Vector px = geometry.prox_map(x, y);
        const Vector px2 = geometry.prox_map(x2, y2);
        const double num = geometry.norms().primal_norm(px - px2);
        report.max_ratio = std::max(report.max_ratio, num / den);
    }
    return report;
}

}  // namespace samd
