#include "etm/model.hpp"

#include <cmath>
#include <string>

#include "etm/errors.hpp"

namespace etm {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

double theta_of(double n, double w) { return w / n; }

} // namespace

ModelParams ModelParams::make(double beta, Relaxation relaxation, double n_D, double theta_D) {
    return ModelParams{beta, kappa_of(beta), relaxation, n_D, theta_D};
}

void ModelParams::validate(bool allow_extended_beta) const {
    if (!std::isfinite(beta)) throw ConfigError("model.beta", "must be finite");
    if (!allow_extended_beta && !(beta >= -0.5 && beta < 0.5))
        throw ConfigError("model.beta", "must lie in [-1/2, 1/2) (use --allow-extended-beta to override)");
    if (kappa != kappa_of(beta)) throw ConfigError("model.kappa", "must equal 2/3 (2 - beta)");
    if (beta < 0.5 && !(kappa > 1.0)) throw ConfigError("model.kappa", "must exceed 1");
    if (const auto* c = std::get_if<ConstantRelaxation>(&relaxation)) {
        if (!(c->tau > 0.0)) throw ConfigError("model.relaxation.tau", "must be positive");
    } else {
        const auto& td = std::get<TemperatureDependentRelaxation>(relaxation);
        if (!(td.tau0 > 0.0)) throw ConfigError("model.relaxation.tau0", "must be positive");
        if (!(td.tau1 > 0.0)) throw ConfigError("model.relaxation.tau1", "must be positive");
    }
    if (!(n_D > 0.0)) throw ConfigError("model.n_D", "must be positive");
    if (!(theta_D > 0.0)) throw ConfigError("model.theta_D", "must be positive");
}

void EntropyPair::validate() const {
    if (b1 == 0.0 || b2 == 0.0) throw ConfigError("entropy_pairs", "exponents must be nonzero");
    if (!(b1 <= b2)) throw ConfigError("entropy_pairs", "requires b1 <= b2");
}

double kappa_of(double beta) { return 2.0 / 3.0 * (2.0 - beta); }

double checked_pow(double base, double exponent) {
    if (base < 0.0 || std::isnan(base)) throw DomainError("power of a negative base");
    if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        if (exponent == 0.0) return 1.0;
        throw DomainError("negative power of zero");
    }
    return std::pow(base, exponent);
}

Vec2 to_uv(double n, double theta, double beta) {
    require(n >= 0.0 && theta >= 0.0, "to_uv: n and theta must be nonnegative");
    const double u = n * checked_pow(theta, 0.5 - beta);
    return {u, u * theta};
}

Vec2 from_uv(double u, double v, double beta) {
    require(u >= 0.0 && v >= 0.0, "from_uv: u and v must be nonnegative");
    if (v == 0.0) return {0.0, 0.0};
    require(u > 0.0, "from_uv: u must be positive where v > 0");
    const double theta = v / u;
    // u^{3/2-beta} v^{beta-1/2} = u theta^{beta-1/2}
    return {u * std::pow(theta, beta - 0.5), theta};
}

Vec2 flux_pair(double n, double w, double beta) {
    require(n > 0.0 && w >= 0.0, "flux_pair: requires n > 0 and w >= 0");
    const double theta = theta_of(n, w);
    const double g1 = n * checked_pow(theta, 0.5 - beta);
    return {g1, g1 * theta};
}

Mat2 flux_pair_jacobian(double n, double w, double beta) {
    require(n > 0.0 && w > 0.0, "flux_pair_jacobian: requires n > 0 and w > 0");
    const double theta = theta_of(n, w);
    const double a = 0.5 - beta;
    const double s = std::pow(theta, a); // theta^{1/2-beta}
    return {(0.5 + beta) * s, a * s / theta,
            (beta - 0.5) * s * theta, (1.5 - beta) * s};
}

double relaxation_term(double n, double w, const ModelParams& params) {
    require(n > 0.0 && w >= 0.0, "relaxation_term: requires n > 0 and w >= 0");
    if (const auto* c = std::get_if<ConstantRelaxation>(&params.relaxation)) return (n - w) / c->tau;
    const auto& td = std::get<TemperatureDependentRelaxation>(params.relaxation);
    const double tau = td.tau0 + td.tau1 * checked_pow(theta_of(n, w), 0.5 - params.beta);
    return (n - w) / tau;
}

Vec2 relaxation_gradient(double n, double w, const ModelParams& params) {
    require(n > 0.0 && w >= 0.0, "relaxation_gradient: requires n > 0 and w >= 0");
    if (const auto* c = std::get_if<ConstantRelaxation>(&params.relaxation)) return {1.0 / c->tau, -1.0 / c->tau};
    const auto& td = std::get<TemperatureDependentRelaxation>(params.relaxation);
    const double a = 0.5 - params.beta;
    const double theta = theta_of(n, w);
    const double s = checked_pow(theta, a);
    const double tau = td.tau0 + td.tau1 * s;
    // ds/dn = -a s / n, ds/dw = a theta^{a-1} / n
    const double ds_dn = -a * s / n;
    const double ds_dw = a * checked_pow(theta, a - 1.0) / n;
    const double r = (n - w) / (tau * tau);
    return {1.0 / tau - r * td.tau1 * ds_dn, -1.0 / tau - r * td.tau1 * ds_dw};
}

double f_b(double n, double w, double b) {
    require(n >= 0.0 && w >= 0.0, "f_b: requires n >= 0 and w >= 0");
    if (n > 0.0 && w > 0.0) return n * n * std::pow(w / n, b);
    return checked_pow(n, 2.0 - b) * checked_pow(w, b);
}

Vec2 f_b_grad(double n, double w, double b) {
    require(n > 0.0 && w > 0.0, "f_b_grad: requires n > 0 and w > 0");
    const double theta = theta_of(n, w);
    const double tb1 = std::pow(theta, b - 1.0);
    return {(2.0 - b) * n * tb1 * theta, b * n * tb1};
}

Mat2 f_b_hessian(double theta, double b) {
    require(theta > 0.0, "f_b_hessian: requires theta > 0");
    const double tb = std::pow(theta, b);
    const double off = b * (2.0 - b) * tb / theta;
    return {(2.0 - b) * (1.0 - b) * tb, off, off, b * (b - 1.0) * tb / (theta * theta)};
}

HessianInvariants f_b_hessian_invariants(double theta, double b) {
    require(theta > 0.0, "f_b_hessian_invariants: requires theta > 0");
    return {b * (b - 2.0) * std::pow(theta, 2.0 * b - 2.0),
            (b - 1.0) * ((b - 2.0) * std::pow(theta, b) + b * std::pow(theta, b - 2.0))};
}

double lambda_min_lower_bound(double theta, double b1, double b2) {
    double bound = 0.0;
    for (double b : {b1, b2}) {
        const auto inv = f_b_hessian_invariants(theta, b);
        if (inv.trace == 0.0) throw DomainError("lambda_min_lower_bound: vanishing Hessian trace");
        bound += inv.det / inv.trace;
    }
    return bound;
}

Mat2 diffusion_matrix(double n, double theta, double beta) {
    require(n >= 0.0 && theta >= 0.0, "diffusion_matrix: requires n >= 0 and theta >= 0");
    const double scale = n * checked_pow(theta, 0.5 - beta);
    const double off = scale * (2.0 - beta) * theta;
    return {scale, off, off, scale * (3.0 - beta) * (2.0 - beta) * theta * theta};
}

Vec2 entropy_variables(double n, double theta) {
    require(n > 0.0 && theta > 0.0, "entropy_variables: requires n > 0 and theta > 0");
    return {std::log(n) - 1.5 * std::log(theta), -1.0 / theta};
}

double log_entropy_density(double n, double theta) {
    require(n > 0.0 && theta > 0.0, "log_entropy_density: requires n > 0 and theta > 0");
    return n * (std::log(n) - 1.5 * std::log(theta));
}

} // namespace etm
