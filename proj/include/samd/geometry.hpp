#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace samd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Convex feasible set X. Euclidean balls and boxes are compact; `unbounded`
// exists for experiment parity only (no projection, no finite radius).
class FeasibleSet {
public:
    enum class Kind { euclidean_ball, box, unbounded };

    static FeasibleSet ball(Vector center, double radius);
    static FeasibleSet box(Vector lower, Vector upper);
    static FeasibleSet unbounded(int dimension);

    Kind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    bool is_compact() const { return kind_ != Kind::unbounded; }

    const Vector& center() const { return center_; }
    double radius() const { return radius_; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

    bool contains(const Vector& x, double tol = 1e-9) const;
    // Euclidean projection onto the set (identity for `unbounded`).
    Vector project(const Vector& p) const;

private:
    Kind kind_ = Kind::unbounded;
    int dimension_ = 0;
    Vector center_;
    double radius_ = 0.0;
    Vector lower_, upper_;
};

// Primal/dual norm pair with its inner product and the variance-averaging
// constant C* (how much averaging k i.i.d. vectors shrinks dual-norm
// variance; 1 for the Euclidean pair, n for (l1, linf)).
struct NormPair {
    std::function<double(const Vector&)> primal_norm;
    std::function<double(const Vector&)> dual_norm;
    std::function<double(const Vector&, const Vector&)> inner_product;
    double c_star = 1.0;

    static NormPair euclidean();
    static NormPair lp(double p, int dimension);       // primal l_p, dual l_q
    static NormPair l1_linf(int dimension);            // C* = n
};

// Distance-generating function omega with its strong-convexity modulus,
// norm pair, domain, and the radius constants consumed by the bounds.
class MirrorGeometry {
public:
    static MirrorGeometry euclidean(FeasibleSet domain);
    // omega = (1/2)||x||_p^2, 1 < p <= 2, alpha = p-1 w.r.t. the l_p norm.
    static MirrorGeometry pnorm(double p, FeasibleSet domain);
    // "euclidean" or "pnorm:<p>"
    static MirrorGeometry from_name(std::string_view name, FeasibleSet domain);

    const std::string& name() const { return name_; }
    double alpha() const { return alpha_; }
    const NormPair& norms() const { return norms_; }
    const FeasibleSet& domain() const { return domain_; }

    double omega(const Vector& x) const;
    Vector grad_omega(const Vector& x) const;

    // sqrt(max_X omega - min_X omega); throws std::domain_error when X is
    // not compact and std::invalid_argument when no analytic form is known.
    double d_omega() const;
    // Omega_omega = sqrt(2 d_omega^2 / alpha)
    double omega_radius() const;
    Vector omega_argmin() const;

    double bregman(const Vector& x, const Vector& z) const;
    // argmin_{z in X} <y, z-x> + V(x,z). Closed form (projection of x-y)
    // for the Euclidean instance; projected-gradient inner solve otherwise
    // (tolerance 1e-10, cap 1e4 iterations).
    Vector prox_map(const Vector& x, const Vector& y) const;

private:
    std::string name_;
    double p_ = 2.0;
    double alpha_ = 1.0;
    NormPair norms_;
    FeasibleSet domain_;
};

struct ProxLipschitzReport {
    double max_ratio = 0.0;
    int trials = 0;
    int skipped = 0;  // degenerate (0/0) pairs
};

// Diagnostic: samples random (x, x', y, y') quadruples (global pairs mixed
// with small perturbations at several y scales) and reports the maximum of
// ||P_x(y) - P_x'(y')|| / (||x - x'|| + ||y - y'||_*).
ProxLipschitzReport check_prox_lipschitz(const MirrorGeometry& geometry,
                                          int trials, std::uint64_t rng_seed);

}  // namespace samd
