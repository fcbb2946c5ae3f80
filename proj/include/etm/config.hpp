#pragma once

// Run configuration, its JSON file format and the Gaussian-wells preset.
//
// Schema (every key optional unless noted; unknown keys are rejected):
//
//   model:    beta (required), n_D, theta_D,
//             relaxation: {kind: "constant", tau} | {kind: "temperature-dependent", tau0, tau1}
//   grid:     x_min, x_max, num_points, left, right ("dirichlet" | "neumann")
//   solver:   newton_tol, newton_max_iters, dt_init, dt_max, dt_min, grow_factor,
//             shrink_factor, t_end, snapshot_times, adaptive
//   initial_condition (required):
//             {kind: "preset", name: "gaussian-wells"}
//             {kind: "expression", n: <field>, theta: <field>}   field = "expr" | [{x_max?, expr}, ...]
//             {kind: "tabulated", path}                          CSV with columns x,n,theta
//   entropy_pairs: [[b1, b2], ...]
//   output_dir, allow_extended_beta

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "etm/discretization.hpp"
#include "etm/model.hpp"
#include "etm/solver.hpp"

namespace etm {

enum class BoundaryKind { Dirichlet, Neumann };

struct GridSpec {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t num_points = 501;
    BoundaryKind left = BoundaryKind::Dirichlet;
    BoundaryKind right = BoundaryKind::Dirichlet;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct PresetInitial {
    std::string name = "gaussian-wells";
    friend bool operator==(const PresetInitial&, const PresetInitial&) = default;
};

struct ExpressionSegment {
    std::optional<double> x_max;
    std::string expr;
    friend bool operator==(const ExpressionSegment&, const ExpressionSegment&) = default;
};

struct ExpressionInitial {
    std::vector<ExpressionSegment> n;
    std::vector<ExpressionSegment> theta;
    friend bool operator==(const ExpressionInitial&, const ExpressionInitial&) = default;
};

struct TabulatedInitial {
    std::string path;
    friend bool operator==(const TabulatedInitial&, const TabulatedInitial&) = default;
};

using InitialCondition = std::variant<PresetInitial, ExpressionInitial, TabulatedInitial>;

struct RunConfig {
    ModelParams model;
    GridSpec grid;
    SolverConfig solver;
    InitialCondition initial_condition = PresetInitial{};
    std::vector<EntropyPair> entropy_pairs;
    std::string output_dir = "out";
    bool allow_extended_beta = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& config);

/// Grid with Dirichlet data taken from the model's (n_D, theta_D).
Grid1D make_grid(const RunConfig& config);

/// Initial state on the grid; throws ConfigError unless strictly positive.
/// Relative tabulated paths resolve against `base_dir`.
State initial_state(const RunConfig& config, const Grid1D& grid, const std::filesystem::path& base_dir = {});

/// n0(x) = exp(-48 x^2) on [0, 1/2], exp(-48 (x-1)^2) on (1/2, 1].
double gaussian_wells(double x);

/// Default snapshot times of the presets.
std::vector<double> preset_snapshot_times();

/// Omega = (0,1), 501 nodes, Dirichlet n_D = theta_D = 1 at both ends, tau = 1,
/// dt_max = 2e-3, t_end = 1, Gaussian wells with theta0 = n0, pair (beta - 1/2, 5).
RunConfig preset_gaussian_wells(double beta);

} // namespace etm
