#include "samd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samd::bounds {

namespace {

// (1 + x)^s - 1 in log space; monotone and cancellation-free for tiny x.
double pow1p_minus1(double x, double s) {
    return std::expm1(s * std::log1p(x));
}

// m^2 sqrt(C*) lambda2^r; zero for a single node (no consensus deviation).
double deviation_factor(const ProblemConstants& c, const BoundInputs& in) {
    if (in.m == 1) return 0.0;
    return static_cast<double>(in.m) * in.m * std::sqrt(c.c_star) *
           std::pow(in.lambda2, in.r);
}

double noise_scale(const ProblemConstants& c, const BoundInputs& in) {
    return c.M + std::sqrt(c.sigma2) / std::sqrt(static_cast<double>(in.b));
}

double m_term(const ProblemConstants& c, MTermForm form) {
    return form == MTermForm::squared ? 4.0 * c.M * c.M : 4.0 * c.M;
}

double effective_gamma(const ProblemConstants& c, const BoundInputs& in) {
    const double cap = c.alpha / (2.0 * c.L);
    return in.gamma > 0.0 ? std::min(in.gamma, cap) : cap;
}

double d_omega_checked(const ProblemConstants& c) {
    if (!(c.d_omega > 0.0) || !std::isfinite(c.d_omega))
        throw std::domain_error("gap bound needs a compact domain (finite d_omega > 0)");
    return c.d_omega;
}

double omega_radius(const ProblemConstants& c) {
    if (c.omega_radius > 0.0) return c.omega_radius;
    const double d = d_omega_checked(c);
    return std::sqrt(2.0 * d * d / c.alpha);
}

}  // namespace

double xi_dsamd(const ProblemConstants& c, const BoundInputs& in, long s) {
    const double dev = deviation_factor(c, in);
    return noise_scale(c, in) * (1.0 + dev) * pow1p_minus1(c.alpha * dev, static_cast<double>(s)) +
           2.0 * c.M;
}

double delta2_dsamd(const ProblemConstants& c, const BoundInputs& in, long s,
                    MTermForm form) {
    const double dev = deviation_factor(c, in);
    const double ns = noise_scale(c, in);
    const double grow = pow1p_minus1(c.alpha * dev, static_cast<double>(s));
    const double m = static_cast<double>(in.m);
    const double lam2r = in.m == 1 ? 0.0 : std::pow(in.lambda2, 2 * in.r);
    return 2.0 * ns * ns * (1.0 + m * m * m * m * c.c_star * lam2r) * grow * grow +
           4.0 * c.c_star * c.sigma2 / (m * in.b) +
           4.0 * lam2r * c.c_star * c.sigma2 * m * m / in.b + m_term(c, form);
}

double xi_adsamd(const ProblemConstants& c, const BoundInputs& in, long s) {
    const double dev = deviation_factor(c, in);
    const double gamma_s = effective_gamma(c, in) * (s + 1.0) / 2.0;
    return noise_scale(c, in) * (1.0 + dev) *
               pow1p_minus1(2.0 * gamma_s * c.L * dev, static_cast<double>(s)) +
           2.0 * c.M;
}

double delta2_adsamd(const ProblemConstants& c, const BoundInputs& in, long s,
                     MTermForm form) {
    const double dev = deviation_factor(c, in);
    const double ns = noise_scale(c, in);
    const double gamma_s = effective_gamma(c, in) * (s + 1.0) / 2.0;
    const double grow = pow1p_minus1(2.0 * gamma_s * c.L * dev, static_cast<double>(s));
    const double m = static_cast<double>(in.m);
    const double lam2r = in.m == 1 ? 0.0 : std::pow(in.lambda2, 2 * in.r);
    return 2.0 * ns * ns * grow * grow +
           4.0 * c.c_star * c.sigma2 / in.b * (lam2r * m * m + 1.0 / m) + m_term(c, form);
}

double dsamd_gamma_star(const ProblemConstants& c, const BoundInputs& in) {
    const double d = d_omega_checked(c);
    const double delta2 = delta2_dsamd(c, in, in.S, MTermForm::squared);
    const double S = static_cast<double>(in.S);
    return std::min(c.alpha / (2.0 * c.L),
                    std::sqrt(c.alpha * d * d / (2.0 * S * (4.0 * c.M * c.M + 2.0 * delta2))));
}

double adsamd_gamma_star(const ProblemConstants& c, const BoundInputs& in) {
    const double d = d_omega_checked(c);
    const double delta2 = delta2_adsamd(c, in, in.S, MTermForm::squared);
    const double S = static_cast<double>(in.S);
    return std::min(c.alpha / (2.0 * c.L),
                    std::sqrt(c.alpha * d * d / (S * (S * S + 1.0) * (4.0 * c.M * c.M + delta2))));
}

GapBound gap_bound_dsamd(const ProblemConstants& c, const BoundInputs& in, MTermForm form) {
    const double d = d_omega_checked(c);
    const double omega_r = omega_radius(c);
    const double S = static_cast<double>(in.S);
    const double delta2 = delta2_dsamd(c, in, in.S, form);
    const double xi = xi_dsamd(c, in, in.S);
    GapBound out;
    out.deterministic_term = 2.0 * c.L * omega_r * omega_r / (c.alpha * S);
    out.stochastic_term = std::sqrt(2.0 * (4.0 * c.M * c.M + 2.0 * delta2) / (c.alpha * S));
    out.bias_term = xi == 0.0 ? 0.0 : std::sqrt(c.alpha / 2.0) * xi * d / c.L;
    out.total = out.deterministic_term + out.stochastic_term + out.bias_term;
    out.gamma_star = dsamd_gamma_star(c, in);
    return out;
}

GapBound gap_bound_adsamd(const ProblemConstants& c, const BoundInputs& in, MTermForm form) {
    const double d = d_omega_checked(c);
    const double S = static_cast<double>(in.S);
    const double delta2 = delta2_adsamd(c, in, in.S, form);
    const double xi = xi_adsamd(c, in, in.S);
    const double m_sqrt_term = form == MTermForm::squared ? 4.0 * c.M * c.M : 4.0 * c.M;
    GapBound out;
    out.deterministic_term = 8.0 * c.L * d * d / (c.alpha * S * S);
    out.stochastic_term = 4.0 * d * std::sqrt((m_sqrt_term + delta2) / (c.alpha * S));
    out.bias_term = xi == 0.0 ? 0.0 : std::sqrt(32.0 / c.alpha) * d * xi;
    out.total = out.deterministic_term + out.stochastic_term + out.bias_term;
    out.gamma_star = adsamd_gamma_star(c, in);
    return out;
}

CorollaryReport corollary_conditions(const ProblemConstants& c, int m, long T, double rho,
                                     double lambda2, Variant variant, double c_mult) {
    if (!(lambda2 >= 0.0 && lambda2 < 1.0))
        throw std::invalid_argument("corollary_conditions needs 0 <= lambda2 < 1");
    const double sigma = std::sqrt(c.sigma2);
    const double mT = static_cast<double>(m) * static_cast<double>(T);
    CorollaryReport rep;

    if (m == 1) {
        // single node: no network conditions to satisfy
        rep.b_min = 1.0;
        rep.rho_min = 0.0;
    } else if (lambda2 == 0.0) {
        rep.b_min = std::max(1.0, std::ceil(1.0 / rho));
        rep.rho_min = 0.0;
    } else {
        const double log_gap = std::log(1.0 / lambda2);
        rep.b_min = std::max(1.0, std::ceil(c_mult * (1.0 + std::log(mT) / (rho * log_gap))));
        rep.rho_min = variant == Variant::dsamd
                          ? std::sqrt(static_cast<double>(m)) * std::log(mT) /
                                (sigma * std::sqrt(static_cast<double>(T)) * log_gap)
                          : std::pow(static_cast<double>(m), 0.25) * std::log(mT) /
                                (sigma * std::pow(static_cast<double>(T), 0.75) * log_gap);
    }
    rep.b_max = variant == Variant::dsamd
                    ? sigma * std::sqrt(static_cast<double>(T) / m)
                    : std::sqrt(sigma) * std::pow(static_cast<double>(T), 0.75) /
                          std::pow(static_cast<double>(m), 0.25);
    rep.T_min = variant == Variant::dsamd
                    ? static_cast<double>(m) / c.sigma2
                    : std::cbrt(static_cast<double>(m)) / c.sigma2;
    rep.M_max = std::min(1.0 / m, 1.0 / std::sqrt(m * c.sigma2 * static_cast<double>(T)));

    rep.b_window_ok = rep.b_min <= rep.b_max;
    rep.rho_ok = rho >= rep.rho_min;
    rep.T_ok = static_cast<double>(T) >= rep.T_min;
    rep.M_ok = c.M <= rep.M_max;
    return rep;
}

}  // namespace samd::bounds
