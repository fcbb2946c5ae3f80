#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "etm/discretization.hpp"
#include "etm/model.hpp"

namespace etm {

struct SolverConfig {
    double newton_tol = 1e-10; ///< max-norm of the residual
    int newton_max_iters = 25;
    double dt_init = 2e-3;
    double dt_max = 2e-3;
    double dt_min = 1e-12;
    double grow_factor = 1.25;
    double shrink_factor = 0.75;
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    /// When false every step uses dt_init and any failed step aborts the run.
    bool adaptive = true;

    void validate() const;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Solves J x = rhs by block LU elimination without pivoting between blocks.
/// Throws LinearSolveBreakdown on a singular pivot block.
std::vector<double> block_thomas_solve(const BlockTridiagonal& J, std::span<const double> rhs);

enum class NewtonStatus { Converged, Infeasible, NoConvergence };

const char* to_string(NewtonStatus status);

struct NewtonResult {
    NewtonStatus status = NewtonStatus::NoConvergence;
    State state;   ///< the converged state, or the last iterate
    int iterations = 0;
    std::vector<double> residual_history; ///< ||F||_inf before each update and at the end
};

/// One implicit Euler step of size h starting from state_old as initial guess.
/// An iterate with a nonpositive n or w component (or a singular pivot block)
/// is reported as Infeasible.
NewtonResult newton_solve(const State& state_old, double h, const ModelParams& params, const Grid1D& grid,
                          const SolverConfig& config);

struct StepRecord {
    double t = 0.0;  ///< time reached (accepted) or attempted target (rejected)
    double dt = 0.0;
    int newton_iters = 0;
    bool accepted = false;
    double min_n = 0.0;
    double min_theta = 0.0;
    double residual_norm = 0.0;
    NewtonStatus status = NewtonStatus::Converged;
};

/// Called after each accepted step with the previous and new state.
using StepObserver = std::function<void(const State& previous, const State& current, const StepRecord& record)>;

struct Trajectory {
    std::vector<StepRecord> steps; ///< accepted and rejected attempts in order
    std::vector<double> snapshot_requests;
    std::vector<State> snapshots;  ///< first accepted state at or after each request
    State final_state;

    std::size_t accepted_count() const;
};

/// The controller gave up: dt fell to dt_min (or a fixed step failed).
class SolverAbort : public std::runtime_error {
public:
    SolverAbort(const std::string& what, State last_good, Trajectory partial)
        : std::runtime_error(what), last_good_(std::move(last_good)), partial_(std::move(partial)) {}

    const State& last_good() const { return last_good_; }
    const Trajectory& partial() const { return partial_; }

private:
    State last_good_;
    Trajectory partial_;
};

/// Integrates from `initial` to config.t_end with the adaptive controller:
/// dt grows by grow_factor when the initial guess already meets the tolerance,
/// shrinks by shrink_factor on an infeasible or non-converged Newton solve.
Trajectory advance(const State& initial, const ModelParams& params, const Grid1D& grid, const SolverConfig& config,
                   const StepObserver& observer = {});

} // namespace etm
