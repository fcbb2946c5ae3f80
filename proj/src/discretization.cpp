#include "etm/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etm/errors.hpp"

namespace etm {

Grid1D::Grid1D(double x_min, double x_max, std::size_t num_points, BoundaryCondition left, BoundaryCondition right)
    : x_min_(x_min), x_max_(x_max), num_points_(num_points), dx_(0.0), left_(left), right_(right) {
    if (!(x_min < x_max)) throw ConfigError("grid", "x_min must be less than x_max");
    if (num_points < 3) throw ConfigError("grid.num_points", "must be at least 3");
    if (std::holds_alternative<NeumannZeroFlux>(left) && std::holds_alternative<NeumannZeroFlux>(right))
        throw ConfigError("grid", "at least one end must carry Dirichlet data");
    for (const auto* bc : {&left_, &right_}) {
        if (const auto* d = std::get_if<Dirichlet>(bc); d && !(d->n_D > 0.0 && d->theta_D > 0.0))
            throw ConfigError("grid", "Dirichlet data must be positive");
    }
    dx_ = (x_max - x_min) / static_cast<double>(num_points - 1);
}

double Grid1D::x(std::size_t i) const {
    if (i + 1 == num_points_) return x_max_;
    return x_min_ + static_cast<double>(i) * dx_;
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> out(num_points_);
    for (std::size_t i = 0; i < num_points_; ++i) out[i] = x(i);
    return out;
}

const Dirichlet* Grid1D::dirichlet_at(std::size_t i) const {
    if (i == 0) return std::get_if<Dirichlet>(&left_);
    if (i + 1 == num_points_) return std::get_if<Dirichlet>(&right_);
    return nullptr;
}

bool State::positive() const {
    for (std::size_t i = 0; i < n.size(); ++i)
        if (!(n[i] > 0.0) || !(w[i] > 0.0)) return false;
    return true;
}

double State::min_n() const { return *std::min_element(n.begin(), n.end()); }

double State::min_theta() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n.size(); ++i) m = std::min(m, theta(i));
    return m;
}

std::vector<double> State::packed() const {
    std::vector<double> x(2 * n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        x[2 * i] = n[i];
        x[2 * i + 1] = w[i];
    }
    return x;
}

State State::unpack(std::span<const double> x, double t) {
    State s;
    s.n.resize(x.size() / 2);
    s.w.resize(x.size() / 2);
    for (std::size_t i = 0; i < s.n.size(); ++i) {
        s.n[i] = x[2 * i];
        s.w[i] = x[2 * i + 1];
    }
    s.t = t;
    return s;
}

State equilibrium_state(const Grid1D& grid, const ModelParams& params) {
    return State{std::vector<double>(grid.size(), params.n_D), std::vector<double>(grid.size(), params.w_D()), 0.0};
}

namespace {

struct Stencil {
    double left = 0.0;
    double center = 0.0;
    double right = 0.0;
};

// Laplacian weights (times dx^2) for a non-Dirichlet row.
Stencil laplacian_stencil(std::size_t i, std::size_t size) {
    if (i == 0) return {0.0, -2.0, 2.0};
    if (i + 1 == size) return {2.0, -2.0, 0.0};
    return {1.0, -2.0, 1.0};
}

// Fluxes at every node; Dirichlet nodes take the boundary data.
std::vector<Vec2> nodal_fluxes(const State& s, const ModelParams& params, const Grid1D& grid) {
    std::vector<Vec2> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (const auto* d = grid.dirichlet_at(i))
            g[i] = flux_pair(d->n_D, d->n_D * d->theta_D, params.beta);
        else
            g[i] = flux_pair(s.n[i], s.w[i], params.beta);
    }
    return g;
}

void check_sizes(const State& s, const Grid1D& grid) {
    if (s.n.size() != grid.size() || s.w.size() != grid.size())
        throw std::invalid_argument("state size does not match the grid");
}

} // namespace

std::vector<double> discrete_laplacian(std::span<const double> g, const Grid1D& grid) {
    if (g.size() != grid.size()) throw std::invalid_argument("discrete_laplacian: length mismatch");
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    const std::size_t size = g.size();
    std::vector<double> out(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
        if (grid.dirichlet_at(i)) continue;
        const auto st = laplacian_stencil(i, size);
        double acc = st.center * g[i];
        if (i > 0) acc += st.left * g[i - 1];
        if (i + 1 < size) acc += st.right * g[i + 1];
        out[i] = acc * inv_dx2;
    }
    return out;
}

std::vector<double> BlockTridiagonal::multiply(std::span<const double> x) const {
    const std::size_t m = size();
    std::vector<double> y(2 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 acc = diag[i] * Vec2{x[2 * i], x[2 * i + 1]};
        if (i > 0) acc = acc + lower[i] * Vec2{x[2 * i - 2], x[2 * i - 1]};
        if (i + 1 < m) acc = acc + upper[i] * Vec2{x[2 * i + 2], x[2 * i + 3]};
        y[2 * i] = acc.x;
        y[2 * i + 1] = acc.y;
    }
    return y;
}

double BlockTridiagonal::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        Mat2 abs_sum{std::abs(diag[i].a11), std::abs(diag[i].a12), std::abs(diag[i].a21), std::abs(diag[i].a22)};
        auto add_abs = [&](const Mat2& b) {
            abs_sum = abs_sum + Mat2{std::abs(b.a11), std::abs(b.a12), std::abs(b.a21), std::abs(b.a22)};
        };
        if (i > 0) add_abs(lower[i]);
        if (i + 1 < size()) add_abs(upper[i]);
        best = std::max(best, abs_sum.norm_inf());
    }
    return best;
}

std::vector<double> assemble_residual(const State& state_new, const State& state_old, double h,
                                      const ModelParams& params, const Grid1D& grid) {
    check_sizes(state_new, grid);
    check_sizes(state_old, grid);
    const std::size_t size = grid.size();
    const auto g = nodal_fluxes(state_new, params, grid);
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    std::vector<double> F(2 * size);
    for (std::size_t i = 0; i < size; ++i) {
        const double n = state_new.n[i];
        const double w = state_new.w[i];
        if (const auto* d = grid.dirichlet_at(i)) {
            F[2 * i] = n - d->n_D;
            F[2 * i + 1] = w - d->n_D * d->theta_D;
            continue;
        }
        const auto st = laplacian_stencil(i, size);
        Vec2 lap = st.center * g[i];
        if (i > 0) lap = lap + st.left * g[i - 1];
        if (i + 1 < size) lap = lap + st.right * g[i + 1];
        lap = inv_dx2 * lap;
        F[2 * i] = n - state_old.n[i] - h * lap.x;
        F[2 * i + 1] = w - state_old.w[i] - h * params.kappa * lap.y - h * relaxation_term(n, w, params);
    }
    return F;
}

BlockTridiagonal assemble_jacobian(const State& state_new, double h, const ModelParams& params, const Grid1D& grid) {
    check_sizes(state_new, grid);
    const std::size_t size = grid.size();
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());

    // d(g1, kappa g2)/d(n, w) at each non-Dirichlet node; zero at Dirichlet nodes
    std::vector<Mat2> dflux(size);
    for (std::size_t i = 0; i < size; ++i) {
        if (grid.dirichlet_at(i)) continue;
        Mat2 jg = flux_pair_jacobian(state_new.n[i], state_new.w[i], params.beta);
        jg.a21 *= params.kappa;
        jg.a22 *= params.kappa;
        dflux[i] = jg;
    }

    BlockTridiagonal J(size);
    for (std::size_t i = 0; i < size; ++i) {
        if (grid.dirichlet_at(i)) {
            J.diag[i] = Mat2::identity();
            continue;
        }
        const auto st = laplacian_stencil(i, size);
        const double scale = h * inv_dx2;
        const Vec2 dr = relaxation_gradient(state_new.n[i], state_new.w[i], params);
        J.diag[i] = Mat2::identity() - (scale * st.center) * dflux[i] - h * Mat2{0.0, 0.0, dr.x, dr.y};
        if (i > 0) J.lower[i] = -(scale * st.left) * dflux[i - 1];
        if (i + 1 < size) J.upper[i] = -(scale * st.right) * dflux[i + 1];
    }
    return J;
}

double trapezoid(std::span<const double> values, const Grid1D& grid) {
    if (values.size() != grid.size()) throw std::invalid_argument("trapezoid: length mismatch");
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
    return acc * grid.dx();
}

} // namespace etm
