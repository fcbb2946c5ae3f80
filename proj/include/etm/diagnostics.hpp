#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "etm/discretization.hpp"
#include "etm/model.hpp"

namespace etm {

/// Pointwise relative entropy density
/// f_b(n, w) - f_b(n_D, w_D) - grad f_b(n_D, w_D) . (n - n_D, w - w_D).
double relative_entropy_density(double n, double w, double b, const ModelParams& params);

/// phi_b: trapezoid quadrature of relative_entropy_density.
double phi_b(const State& state, double b, const ModelParams& params, const Grid1D& grid);

/// S_{b1,b2} = phi_{b1} / |b1| + phi_{b2} / |b2|.
double entropy_S(const State& state, const EntropyPair& pair, const ModelParams& params, const Grid1D& grid);

/// Unweighted dissipation integral
///   int (theta^{b1+1/2-beta} + theta^{b2+1/2-beta}) |n_x|^2
///     + n^2 (theta^{b1-3/2-beta} + theta^{b2-3/2-beta}) |theta_x|^2 dx
/// with one-sided cell gradients and cell-averaged coefficients.
double dissipation_integral(const State& state, const EntropyPair& pair, double beta, const Grid1D& grid);

struct EntropyStep {
    double t = 0.0;
    double h = 0.0;
    double S = 0.0;
    double delta_S = 0.0;
    double dissipation = 0.0;
    std::optional<double> ratio; ///< c_j = -delta_S / (h D_j), present when D_j > dissipation_floor
    bool monotone = true;        ///< delta_S <= tol_S max(1, |S_{j-1}|)
};

struct EntropyInequalityReport {
    EntropyPair pair;
    double S0 = 0.0;
    std::vector<EntropyStep> steps;
    bool monotone = true;
    std::optional<std::size_t> first_violation;
    std::optional<double> min_ratio; ///< empirical C1
    bool ratios_positive = true;
};

/// Incremental form of entropy_inequality_report; fed one accepted state at a time.
class EntropyInequalityMonitor {
public:
    static constexpr double kDefaultTol = 1e-10;
    static constexpr double kDissipationFloor = 1e-14;

    EntropyInequalityMonitor(EntropyPair pair, const ModelParams& params, const Grid1D& grid, const State& initial,
                             double tol_S = kDefaultTol, double dissipation_floor = kDissipationFloor);

    /// Records the step to `state` taken with step size h; returns the step entry.
    const EntropyStep& add(const State& state, double h);

    const EntropyInequalityReport& report() const { return report_; }

private:
    ModelParams params_;
    Grid1D grid_;
    double tol_S_;
    double floor_;
    double last_S_;
    EntropyInequalityReport report_;
};

/// Report over consecutive accepted states; step sizes are the time differences.
EntropyInequalityReport entropy_inequality_report(std::span<const State> states, const EntropyPair& pair,
                                                  const ModelParams& params, const Grid1D& grid,
                                                  double tol_S = EntropyInequalityMonitor::kDefaultTol);

struct EquilibriumDistance {
    double dist_n = 0.0; ///< ||n - n_D||_{L2}
    double dist_w = 0.0; ///< ||w - n_D theta_D||_{L2}
    double rel_n = 0.0;  ///< dist_n / ||n_D||_{L2}
    double rel_w = 0.0;  ///< dist_w / ||n_D theta_D||_{L2}
    double squared_sum() const { return dist_n * dist_n + dist_w * dist_w; }
};

EquilibriumDistance distance_to_equilibrium(const State& state, const ModelParams& params, const Grid1D& grid);

struct DecayFit {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t samples = 0;
    double exp_rate = 0.0; ///< v ~ exp(a - rate t)
    double exp_r2 = 0.0;
    double alg_C1 = 0.0;   ///< v ~ C1 / (1 + C2 t)
    double alg_C2 = 0.0;
    double alg_r2 = 0.0;
};

/// Least squares of log v against t and of 1/v against t over samples with
/// t_start <= t <= t_end. Requires at least 10 samples and positive values.
DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_start, double t_end);
DecayFit fit_decay(std::span<const double> times, std::span<const double> values);

struct AlgebraicEnvelope {
    double C1 = 0.0;
    double C2 = 0.0;
    bool holds = false; ///< v(t) <= C1 / (1 + C2 t) at every sample
    std::optional<std::size_t> first_violation;
};

/// C2 from the algebraic fit when it is positive, otherwise from a fit of
/// v(0)/v - 1 = C2 t through the origin; C1 = max_k v_k (1 + C2 t_k).
AlgebraicEnvelope algebraic_envelope(std::span<const double> times, std::span<const double> values);

struct GronwallReport {
    std::optional<std::size_t> hypothesis_violation;  ///< first j with x_j + k x_j^2 > x_{j-1}
    std::optional<std::size_t> conclusion_violation;  ///< first j with x_j > x_0 / (1 + k x_0 j / (1 + 2 k x_0))
    bool hypothesis_holds() const { return !hypothesis_violation; }
    bool conclusion_holds() const { return !conclusion_violation; }
};

double gronwall_bound(double x0, double kappa_g, std::size_t j);

GronwallReport gronwall_bound_check(std::span<const double> x, double kappa_g, double rel_tol = 1e-12);

/// Trapezoid quadrature of n log(n / theta^{3/2}).
double log_entropy(const State& state, const Grid1D& grid);

} // namespace etm
