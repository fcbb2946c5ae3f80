#include "etm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "etm/errors.hpp"

namespace etm {

double relative_entropy_density(double n, double w, double b, const ModelParams& params) {
    const double n_D = params.n_D;
    const double w_D = params.w_D();
    const Vec2 grad_D = f_b_grad(n_D, w_D, b);
    return f_b(n, w, b) - f_b(n_D, w_D, b) - grad_D.x * (n - n_D) - grad_D.y * (w - w_D);
}

double phi_b(const State& state, double b, const ModelParams& params, const Grid1D& grid) {
    std::vector<double> integrand(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        integrand[i] = relative_entropy_density(state.n[i], state.w[i], b, params);
    return trapezoid(integrand, grid);
}

double entropy_S(const State& state, const EntropyPair& pair, const ModelParams& params, const Grid1D& grid) {
    return phi_b(state, pair.b1, params, grid) / std::abs(pair.b1) +
           phi_b(state, pair.b2, params, grid) / std::abs(pair.b2);
}

double dissipation_integral(const State& state, const EntropyPair& pair, double beta, const Grid1D& grid) {
    const std::size_t size = state.size();
    if (size != grid.size()) throw std::invalid_argument("dissipation_integral: length mismatch");
    std::vector<double> coef_n(size), coef_theta(size), theta(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double n = state.n[i];
        const double th = state.theta(i);
        if (!(n > 0.0 && th > 0.0)) throw DomainError("dissipation_integral: requires a positive state");
        theta[i] = th;
        coef_n[i] = std::pow(th, pair.b1 + 0.5 - beta) + std::pow(th, pair.b2 + 0.5 - beta);
        coef_theta[i] = n * n * (std::pow(th, pair.b1 - 1.5 - beta) + std::pow(th, pair.b2 - 1.5 - beta));
    }
    const double dx = grid.dx();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < size; ++i) {
        const double dn = (state.n[i + 1] - state.n[i]) / dx;
        const double dth = (theta[i + 1] - theta[i]) / dx;
        acc += 0.5 * (coef_n[i] + coef_n[i + 1]) * dn * dn + 0.5 * (coef_theta[i] + coef_theta[i + 1]) * dth * dth;
    }
    return acc * dx;
}

EntropyInequalityMonitor::EntropyInequalityMonitor(EntropyPair pair, const ModelParams& params, const Grid1D& grid,
                                                   const State& initial, double tol_S, double dissipation_floor)
    : params_(params), grid_(grid), tol_S_(tol_S), floor_(dissipation_floor) {
    report_.pair = pair;
    report_.S0 = entropy_S(initial, pair, params_, grid_);
    last_S_ = report_.S0;
}

const EntropyStep& EntropyInequalityMonitor::add(const State& state, double h) {
    EntropyStep step;
    step.t = state.t;
    step.h = h;
    step.S = entropy_S(state, report_.pair, params_, grid_);
    step.delta_S = step.S - last_S_;
    step.dissipation = dissipation_integral(state, report_.pair, params_.beta, grid_);
    step.monotone = step.delta_S <= tol_S_ * std::max(1.0, std::abs(last_S_));
    if (step.dissipation > floor_ && h > 0.0) {
        step.ratio = -step.delta_S / (h * step.dissipation);
        report_.min_ratio = report_.min_ratio ? std::min(*report_.min_ratio, *step.ratio) : *step.ratio;
        if (!(*step.ratio > 0.0)) report_.ratios_positive = false;
    }
    if (!step.monotone && !report_.first_violation) {
        report_.monotone = false;
        report_.first_violation = report_.steps.size();
    }
    last_S_ = step.S;
    report_.steps.push_back(step);
    return report_.steps.back();
}

EntropyInequalityReport entropy_inequality_report(std::span<const State> states, const EntropyPair& pair,
                                                  const ModelParams& params, const Grid1D& grid, double tol_S) {
    if (states.empty()) throw std::invalid_argument("entropy_inequality_report: no states");
    EntropyInequalityMonitor monitor(pair, params, grid, states.front(), tol_S);
    for (std::size_t j = 1; j < states.size(); ++j) monitor.add(states[j], states[j].t - states[j - 1].t);
    return monitor.report();
}

EquilibriumDistance distance_to_equilibrium(const State& state, const ModelParams& params, const Grid1D& grid) {
    const std::size_t size = state.size();
    std::vector<double> dn2(size), dw2(size);
    const double w_D = params.w_D();
    for (std::size_t i = 0; i < size; ++i) {
        dn2[i] = (state.n[i] - params.n_D) * (state.n[i] - params.n_D);
        dw2[i] = (state.w[i] - w_D) * (state.w[i] - w_D);
    }
    EquilibriumDistance d;
    d.dist_n = std::sqrt(trapezoid(dn2, grid));
    d.dist_w = std::sqrt(trapezoid(dw2, grid));
    const double length = std::sqrt(grid.x_max() - grid.x_min());
    d.rel_n = d.dist_n / (params.n_D * length);
    d.rel_w = d.dist_w / (w_D * length);
    return d;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit least_squares(std::span<const double> t, std::span<const double> y) {
    const auto m = static_cast<double>(t.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        mt += t[k];
        my += y[k];
    }
    mt /= m;
    my /= m;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        stt += (t[k] - mt) * (t[k] - mt);
        sty += (t[k] - mt) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    LineFit fit;
    fit.slope = stt > 0.0 ? sty / stt : 0.0;
    fit.intercept = my - fit.slope * mt;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double e = y[k] - (fit.intercept + fit.slope * t[k]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

} // namespace

DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_start, double t_end) {
    if (times.size() != values.size()) throw std::invalid_argument("fit_decay: length mismatch");
    std::vector<double> t, log_v, inv_v;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_start || times[k] > t_end) continue;
        if (!(values[k] > 0.0)) throw DomainError("fit_decay: values must be positive in the window");
        t.push_back(times[k]);
        log_v.push_back(std::log(values[k]));
        inv_v.push_back(1.0 / values[k]);
    }
    if (t.size() < 10) throw std::invalid_argument("fit_decay: at least 10 samples required in the window");

    DecayFit fit;
    fit.t_start = t.front();
    fit.t_end = t.back();
    fit.samples = t.size();
    const auto e = least_squares(t, log_v);
    fit.exp_rate = -e.slope;
    fit.exp_r2 = e.r2;
    // 1/v = 1/C1 + (C2/C1) t
    const auto a = least_squares(t, inv_v);
    fit.alg_C1 = 1.0 / a.intercept;
    fit.alg_C2 = a.slope * fit.alg_C1;
    fit.alg_r2 = a.r2;
    return fit;
}

DecayFit fit_decay(std::span<const double> times, std::span<const double> values) {
    if (times.empty()) throw std::invalid_argument("fit_decay: empty series");
    return fit_decay(times, values, times.front(), times.back());
}

AlgebraicEnvelope algebraic_envelope(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size() || times.empty()) throw std::invalid_argument("algebraic_envelope: bad series");
    AlgebraicEnvelope env;
    double C2 = 0.0;
    if (times.size() >= 10) {
        bool positive = std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
        if (positive) {
            const auto fit = fit_decay(times, values);
            if (fit.alg_C1 > 0.0 && fit.alg_C2 > 0.0) C2 = fit.alg_C2;
        }
    }
    if (!(C2 > 0.0)) {
        // v0 / v - 1 = C2 (t - t0), least squares through the origin
        double num = 0.0, den = 0.0;
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(values[k] > 0.0)) continue;
            const double dt = times[k] - times[0];
            num += dt * (values[0] / values[k] - 1.0);
            den += dt * dt;
        }
        C2 = den > 0.0 && num > 0.0 ? num / den : 1.0;
    }
    env.C2 = C2;
    double C1 = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) C1 = std::max(C1, values[k] * (1.0 + C2 * times[k]));
    env.C1 = C1;
    env.holds = true;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (values[k] > C1 / (1.0 + C2 * times[k]) * (1.0 + 1e-12)) {
            env.holds = false;
            env.first_violation = k;
            break;
        }
    }
    if (!(C1 > 0.0)) env.holds = false;
    return env;
}

double gronwall_bound(double x0, double kappa_g, std::size_t j) {
    return x0 / (1.0 + kappa_g * x0 * static_cast<double>(j) / (1.0 + 2.0 * kappa_g * x0));
}

GronwallReport gronwall_bound_check(std::span<const double> x, double kappa_g, double rel_tol) {
    if (!(kappa_g > 0.0)) throw std::invalid_argument("gronwall_bound_check: kappa must be positive");
    GronwallReport report;
    if (x.empty()) return report;
    for (std::size_t j = 1; j < x.size(); ++j) {
        if (!report.hypothesis_violation && x[j] + kappa_g * x[j] * x[j] > x[j - 1] * (1.0 + rel_tol))
            report.hypothesis_violation = j;
        if (!report.conclusion_violation && x[j] > gronwall_bound(x[0], kappa_g, j) * (1.0 + rel_tol))
            report.conclusion_violation = j;
    }
    return report;
}

double log_entropy(const State& state, const Grid1D& grid) {
    std::vector<double> integrand(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        integrand[i] = log_entropy_density(state.n[i], state.theta(i));
    return trapezoid(integrand, grid);
}

} // namespace etm
