#pragma once

// Run orchestration behind the `etm` command line tool: simulate a configured
// run with on-the-fly diagnostics, write CSV/JSON outputs, beta sweeps and the
// short-trajectory verification suite.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etm/admissible.hpp"
#include "etm/config.hpp"
#include "etm/diagnostics.hpp"
#include "etm/solver.hpp"

namespace etm {

enum ExitCode : int { kExitSuccess = 0, kExitVerifyFailed = 1, kExitConfigError = 2, kExitSolverAbort = 3 };

inline constexpr const char* kTrajectoryHeader =
    "t,dt,newton_iters,S_pair,dissipation,dist_n,dist_w,rel_dist_n,rel_dist_w,min_n,min_theta,log_entropy";

struct TrajectoryRow {
    double t = 0.0;
    double dt = 0.0;
    int newton_iters = 0;
    double S_pair = 0.0;
    double dissipation = 0.0;
    EquilibriumDistance distance;
    double min_n = 0.0;
    double min_theta = 0.0;
    double log_entropy = 0.0;
};

struct EntropyVerdict {
    EntropyInequalityReport report;
    /// Monotonicity is only asserted for theta_D = 1 (no boundary source).
    bool applicable = false;
};

struct RunResult {
    RunConfig config;
    bool completed = false;
    std::string message;
    std::vector<TrajectoryRow> rows;       ///< initial state followed by each accepted step
    std::size_t rejected_steps = 0;
    std::vector<double> snapshot_requests;
    std::vector<State> snapshots;
    State final_state;                     ///< last good state when aborted
    std::vector<EntropyVerdict> entropy;
    std::optional<DecayFit> decay_n;       ///< exponential fit of rel_dist_n over [0.2 t_end, t_end]
    std::optional<DecayFit> decay_w;
    std::optional<DecayFit> decay_squared; ///< both fits of dist_n^2 + dist_w^2 over the whole run
    std::optional<AlgebraicEnvelope> envelope;

    /// Column of the trajectory table by its CSV header name.
    std::vector<double> column(std::string_view name) const;
};

/// Runs the configured simulation without touching the filesystem (except
/// for reading a tabulated initial condition relative to `base_dir`).
/// Throws ConfigError; a solver abort is reported through `completed == false`.
RunResult execute_run(const RunConfig& config, const std::filesystem::path& base_dir = {});

/// trajectory.csv, snapshot_t<t>.csv (x,n,theta,u,v), summary.json and
/// last_good_state.csv when the run aborted.
void write_run_outputs(const RunResult& result, const std::filesystem::path& out_dir);

std::string snapshot_file_name(double requested_time);

/// execute_run + write_run_outputs; returns an ExitCode. Config errors are
/// reported on stderr.
int run_and_write(const RunConfig& config, const std::filesystem::path& out_dir,
                  const std::filesystem::path& base_dir = {});

struct SweepEntry {
    double beta = 0.0;
    int exit_code = kExitSuccess;
    std::string message;
};

/// One run per beta (concurrently) in <out_dir>/beta_<beta>/, plus
/// decay_combined.csv (beta,t,rel_dist_n,rel_dist_w) and sweep_summary.json.
/// Each run uses the entropy pair (beta - 1/2, 5).
std::vector<SweepEntry> sweep(const std::vector<double>& betas, const RunConfig& base,
                              const std::filesystem::path& out_dir, const std::filesystem::path& base_dir = {});

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Invariant suite on a short trajectory (t_end capped at 0.02).
std::vector<VerifyCheck> verify(const RunConfig& config, const std::filesystem::path& base_dir = {});

void write_region_scan(const RegionScanSpec& spec, const std::filesystem::path& path);

} // namespace etm
