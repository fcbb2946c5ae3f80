#pragma once

// Pointwise functions of the continuous energy-transport model
//
//   d_t n      = Lap(n theta^{1/2-beta})
//   d_t (n th) = kappa Lap(n theta^{3/2-beta}) + n (1 - theta) / tau
//
// The second stored field is always the energy density w = n*theta; theta is
// derived on demand.

#include <variant>

#include "etm/small_matrix.hpp"

namespace etm {

struct ConstantRelaxation {
    double tau = 1.0;
    friend bool operator==(const ConstantRelaxation&, const ConstantRelaxation&) = default;
};

/// tau(theta) = tau0 + tau1 * theta^{1/2-beta}
struct TemperatureDependentRelaxation {
    double tau0 = 1.0;
    double tau1 = 1.0;
    friend bool operator==(const TemperatureDependentRelaxation&, const TemperatureDependentRelaxation&) = default;
};

using Relaxation = std::variant<ConstantRelaxation, TemperatureDependentRelaxation>;

struct ModelParams {
    double beta = 0.0;
    double kappa = 4.0 / 3.0;
    Relaxation relaxation = ConstantRelaxation{};
    double n_D = 1.0;
    double theta_D = 1.0;

    /// Builds parameters with kappa derived from beta.
    static ModelParams make(double beta, Relaxation relaxation = ConstantRelaxation{}, double n_D = 1.0,
                            double theta_D = 1.0);

    /// Throws ConfigError if an invariant is violated. Exponents outside
    /// [-1/2, 1/2) are rejected unless `allow_extended_beta`.
    void validate(bool allow_extended_beta = false) const;

    double w_D() const { return n_D * theta_D; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Exponent pair (b1, b2) of the two-term entropy functional.
struct EntropyPair {
    double b1 = -0.5;
    double b2 = 5.0;

    /// Throws ConfigError unless b1 <= b2 and both are nonzero.
    void validate() const;

    friend bool operator==(const EntropyPair&, const EntropyPair&) = default;
};

double kappa_of(double beta);

/// base^exponent with explicit handling of zero bases; negative bases and
/// singular powers of zero throw DomainError.
double checked_pow(double base, double exponent);

/// (n, theta) -> (u, v) = (n theta^{1/2-beta}, n theta^{3/2-beta}).
Vec2 to_uv(double n, double theta, double beta);

/// Inverse of to_uv. Returns (n, theta); vacuum v == 0 maps to (0, 0).
Vec2 from_uv(double u, double v, double beta);

/// Diffusive fluxes (g1, g2) = (n theta^{1/2-beta}, n theta^{3/2-beta}) as functions of (n, w).
Vec2 flux_pair(double n, double w, double beta);

/// d(g1, g2)/d(n, w); row i holds the gradient of g_i.
Mat2 flux_pair_jacobian(double n, double w, double beta);

/// Energy relaxation source n (1 - theta) / tau(theta) = (n - w) / tau(theta).
double relaxation_term(double n, double w, const ModelParams& params);

/// Gradient of relaxation_term with respect to (n, w).
Vec2 relaxation_gradient(double n, double w, const ModelParams& params);

/// f_b(n, w) = n^{2-b} w^b = n^2 theta^b.
double f_b(double n, double w, double b);

/// (df_b/dn, df_b/dw) = ((2-b) n theta^b, b n theta^{b-1}).
Vec2 f_b_grad(double n, double w, double b);

/// Hessian of f_b in (n, w). Homogeneous of degree zero, so it depends on theta only.
Mat2 f_b_hessian(double theta, double b);

struct HessianInvariants {
    double det = 0.0;
    double trace = 0.0;
};

/// det = b(b-2) theta^{2b-2}, trace = (b-1)((b-2) theta^b + b theta^{b-2}).
HessianInvariants f_b_hessian_invariants(double theta, double b);

/// Lower bound det/tr summed over b1 and b2 for the smallest eigenvalue of
/// D^2 f_{b1} + D^2 f_{b2}.
double lambda_min_lower_bound(double theta, double b1, double b2);

/// A(n, theta) = n theta^{1/2-beta} [[1, (2-beta) theta], [(2-beta) theta, (3-beta)(2-beta) theta^2]].
Mat2 diffusion_matrix(double n, double theta, double beta);

/// (w1, w2) = (log(n / theta^{3/2}), -1 / theta).
Vec2 entropy_variables(double n, double theta);

/// n log(n / theta^{3/2}).
double log_entropy_density(double n, double theta);

} // namespace etm
