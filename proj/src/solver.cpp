#include "etm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etm/errors.hpp"

namespace etm {

void SolverConfig::validate() const {
    if (!(newton_tol > 0.0)) throw ConfigError("solver.newton_tol", "must be positive");
    if (newton_max_iters < 1) throw ConfigError("solver.newton_max_iters", "must be at least 1");
    if (!(dt_min > 0.0)) throw ConfigError("solver.dt_min", "must be positive");
    if (!(dt_min <= dt_init)) throw ConfigError("solver.dt_init", "must be at least dt_min");
    if (!(dt_init <= dt_max)) throw ConfigError("solver.dt_init", "must not exceed dt_max");
    if (!(grow_factor > 1.0)) throw ConfigError("solver.grow_factor", "must exceed 1");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("solver.shrink_factor", "must lie in (0, 1)");
    if (!(t_end > 0.0)) throw ConfigError("solver.t_end", "must be positive");
    for (double s : snapshot_times)
        if (!(s >= 0.0)) throw ConfigError("solver.snapshot_times", "must be nonnegative");
}

namespace {

Mat2 inverse(const Mat2& m) {
    const double det = m.det();
    const double scale = (std::abs(m.a11) + std::abs(m.a12)) * (std::abs(m.a21) + std::abs(m.a22));
    if (!std::isfinite(det) || std::abs(det) <= 64.0 * std::numeric_limits<double>::epsilon() * scale || scale == 0.0)
        throw LinearSolveBreakdown("block_thomas_solve: singular pivot block");
    const double inv = 1.0 / det;
    return {m.a22 * inv, -m.a12 * inv, -m.a21 * inv, m.a11 * inv};
}

double max_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

std::vector<double> block_thomas_solve(const BlockTridiagonal& J, std::span<const double> rhs) {
    const std::size_t m = J.size();
    if (rhs.size() != 2 * m) throw std::invalid_argument("block_thomas_solve: rhs length mismatch");
    if (m == 0) return {};

    // Forward elimination: pivots D'_i = D_i - L_i D'_{i-1}^{-1} U_{i-1}.
    std::vector<Mat2> pivot_inv(m);
    std::vector<Vec2> y(m);
    pivot_inv[0] = inverse(J.diag[0]);
    y[0] = {rhs[0], rhs[1]};
    for (std::size_t i = 1; i < m; ++i) {
        const Mat2 factor = J.lower[i] * pivot_inv[i - 1];
        pivot_inv[i] = inverse(J.diag[i] - factor * J.upper[i - 1]);
        y[i] = Vec2{rhs[2 * i], rhs[2 * i + 1]} - factor * y[i - 1];
    }

    std::vector<double> x(2 * m);
    Vec2 next = pivot_inv[m - 1] * y[m - 1];
    x[2 * m - 2] = next.x;
    x[2 * m - 1] = next.y;
    for (std::size_t i = m - 1; i-- > 0;) {
        next = pivot_inv[i] * (y[i] - J.upper[i] * next);
        x[2 * i] = next.x;
        x[2 * i + 1] = next.y;
    }
    return x;
}

const char* to_string(NewtonStatus status) {
    switch (status) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::Infeasible: return "infeasible";
    case NewtonStatus::NoConvergence: return "no-convergence";
    }
    return "unknown";
}

NewtonResult newton_solve(const State& state_old, double h, const ModelParams& params, const Grid1D& grid,
                          const SolverConfig& config) {
    if (!(h > 0.0)) throw std::invalid_argument("newton_solve: h must be positive");
    NewtonResult result;
    result.state = state_old;
    std::vector<double> x = state_old.packed();

    for (int k = 0;; ++k) {
        const auto F = assemble_residual(result.state, state_old, h, params, grid);
        const double r = max_norm(F);
        result.residual_history.push_back(r);
        result.iterations = k;
        if (r <= config.newton_tol) {
            result.status = NewtonStatus::Converged;
            return result;
        }
        if (k == config.newton_max_iters || !std::isfinite(r)) {
            result.status = NewtonStatus::NoConvergence;
            return result;
        }

        std::vector<double> delta;
        try {
            delta = block_thomas_solve(assemble_jacobian(result.state, h, params, grid), F);
        } catch (const LinearSolveBreakdown&) {
            result.status = NewtonStatus::Infeasible;
            return result;
        }
        bool feasible = true;
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] -= delta[j];
            if (!(x[j] > 0.0) || !std::isfinite(x[j])) feasible = false;
        }
        result.state = State::unpack(x, state_old.t);
        if (!feasible) {
            result.iterations = k + 1;
            result.status = NewtonStatus::Infeasible;
            return result;
        }
    }
}

std::size_t Trajectory::accepted_count() const {
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.accepted; }));
}

Trajectory advance(const State& initial, const ModelParams& params, const Grid1D& grid, const SolverConfig& config,
                   const StepObserver& observer) {
    if (!initial.positive()) throw std::invalid_argument("advance: initial state must be strictly positive");

    Trajectory traj;
    traj.snapshot_requests = config.snapshot_times;
    std::sort(traj.snapshot_requests.begin(), traj.snapshot_requests.end());
    std::size_t next_snapshot = 0;
    auto take_snapshots = [&](const State& s) {
        while (next_snapshot < traj.snapshot_requests.size() && s.t >= traj.snapshot_requests[next_snapshot]) {
            traj.snapshots.push_back(s);
            ++next_snapshot;
        }
    };

    State state = initial;
    take_snapshots(state);
    double dt = config.dt_init;
    const double t_end = config.t_end;
    const double t_slack = 1e-12 * std::max(1.0, std::abs(t_end));

    while (t_end - state.t > t_slack) {
        const bool final_step = t_end - state.t <= dt;
        const double h = final_step ? t_end - state.t : dt;
        auto result = newton_solve(state, h, params, grid, config);

        StepRecord rec;
        rec.dt = h;
        rec.newton_iters = result.iterations;
        rec.residual_norm = result.residual_history.back();
        rec.status = result.status;

        if (result.status == NewtonStatus::Converged) {
            State next = std::move(result.state);
            next.t = final_step ? t_end : state.t + h;
            rec.t = next.t;
            rec.accepted = true;
            rec.min_n = next.min_n();
            rec.min_theta = next.min_theta();
            traj.steps.push_back(rec);
            if (observer) observer(state, next, rec);
            state = std::move(next);
            take_snapshots(state);
            if (config.adaptive && result.iterations == 0) dt = std::min(dt * config.grow_factor, config.dt_max);
            continue;
        }

        rec.t = state.t + h;
        rec.accepted = false;
        if (result.state.size() == state.size()) {
            rec.min_n = result.state.min_n();
            rec.min_theta = result.state.min_theta();
        }
        traj.steps.push_back(rec);
        if (!config.adaptive || dt <= config.dt_min) {
            traj.final_state = state;
            const std::string why = config.adaptive ? "time step fell below dt_min" : "fixed time step failed";
            throw SolverAbort(why + " at t = " + std::to_string(state.t) + " (" + to_string(result.status) + ")",
                              state, std::move(traj));
        }
        dt = std::max(dt * config.shrink_factor, config.dt_min);
    }

    traj.final_state = std::move(state);
    return traj;
}

} // namespace etm
