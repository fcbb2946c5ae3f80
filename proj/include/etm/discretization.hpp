#pragma once

// Central finite differences on a uniform 1-D grid and the fully implicit
// Euler residual / Jacobian in the unknowns (n, w = n theta).
//
// Unknowns are interleaved per node: x[2i] = n_i, x[2i+1] = w_i.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "etm/model.hpp"
#include "etm/small_matrix.hpp"

namespace etm {

struct Dirichlet {
    double n_D = 1.0;
    double theta_D = 1.0;
    friend bool operator==(const Dirichlet&, const Dirichlet&) = default;
};

/// grad g1 . nu = grad g2 . nu = 0
struct NeumannZeroFlux {
    friend bool operator==(const NeumannZeroFlux&, const NeumannZeroFlux&) = default;
};

using BoundaryCondition = std::variant<Dirichlet, NeumannZeroFlux>;

class Grid1D {
public:
    Grid1D(double x_min, double x_max, std::size_t num_points, BoundaryCondition left, BoundaryCondition right);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return num_points_; }
    double dx() const { return dx_; }
    double x(std::size_t i) const;
    std::vector<double> nodes() const;
    const BoundaryCondition& left() const { return left_; }
    const BoundaryCondition& right() const { return right_; }

    /// Dirichlet data at node i, or nullptr for interior and Neumann nodes.
    const Dirichlet* dirichlet_at(std::size_t i) const;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    double x_min_;
    double x_max_;
    std::size_t num_points_;
    double dx_;
    BoundaryCondition left_;
    BoundaryCondition right_;
};

struct State {
    std::vector<double> n;
    std::vector<double> w;
    double t = 0.0;

    std::size_t size() const { return n.size(); }
    double theta(std::size_t i) const { return w[i] / n[i]; }
    bool positive() const;
    double min_n() const;
    double min_theta() const;

    /// Interleaved (n_0, w_0, n_1, w_1, ...).
    std::vector<double> packed() const;
    static State unpack(std::span<const double> x, double t);

    friend bool operator==(const State&, const State&) = default;
};

/// Constant state equal to the boundary data (n_D, n_D theta_D).
State equilibrium_state(const Grid1D& grid, const ModelParams& params);

/// Three-point Laplacian. Dirichlet end nodes yield 0; Neumann ends use
/// ghost-node reflection, e.g. 2 (g_1 - g_0) / dx^2 on the left.
std::vector<double> discrete_laplacian(std::span<const double> g, const Grid1D& grid);

/// Block-tridiagonal matrix with 2x2 blocks. lower[0] and upper[size-1] are unused.
struct BlockTridiagonal {
    std::vector<Mat2> lower;
    std::vector<Mat2> diag;
    std::vector<Mat2> upper;

    explicit BlockTridiagonal(std::size_t blocks = 0) : lower(blocks), diag(blocks), upper(blocks) {}
    std::size_t size() const { return diag.size(); }

    std::vector<double> multiply(std::span<const double> x) const;
    double norm_inf() const;
};

/// F1_i = n_i - n_i^old - h L(g1)_i
/// F2_i = w_i - w_i^old - h kappa L(g2)_i - h R(n_i, w_i)
/// with fluxes and relaxation at the new state. Dirichlet nodes contribute
/// F1 = n_i - n_D, F2 = w_i - n_D theta_D, and adjacent stencils read the
/// boundary data instead of the nodal unknowns.
std::vector<double> assemble_residual(const State& state_new, const State& state_old, double h,
                                      const ModelParams& params, const Grid1D& grid);

/// Exact derivative of assemble_residual with respect to the packed unknowns.
BlockTridiagonal assemble_jacobian(const State& state_new, double h, const ModelParams& params, const Grid1D& grid);

/// Trapezoid rule over the nodes.
double trapezoid(std::span<const double> values, const Grid1D& grid);

} // namespace etm
