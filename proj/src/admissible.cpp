#include "etm/admissible.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <random>

#include "etm/csv.hpp"
#include "etm/errors.hpp"

namespace etm {

namespace {

// Snap k*step grid coordinates onto the nearest short decimal so that 0.01-grids
// print as 0.13 rather than 0.13000000000000003.
double snap_decimal(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

} // namespace

MembershipMargins nstar_membership(double beta, double b) {
    const double s = 2.0 * beta - 1.0;
    const double linear = (1.0 - 2.0 * beta) * b + 6.0;
    const double cubic = 4.0 * s * b * b * b + 4.0 * (4.0 * beta * beta - 12.0 * beta + 11.0) * b * b +
                         (8.0 * beta * beta * beta - 44.0 * beta * beta + 70.0 * beta - 73.0) * b - 6.0 * s * s;
    return {linear > 0.0 && cubic > 0.0, linear, cubic};
}

bool nbeta_membership(double beta, double b1, double b2) {
    return nstar_membership(beta, b1).member && nstar_membership(beta, b2).member && b1 <= b2 &&
           b1 <= beta - 0.5 && b2 >= 2.5 - beta;
}

QuadFormCoeffs quad_form_coeffs(double beta, double b) {
    const double lin = -2.0 * b * beta + b + 6.0;
    return {lin / 3.0, lin * (2.0 * b - 2.0 * beta + 1.0) / 12.0,
            b * (4.0 * b * beta * beta - 8.0 * b * beta - 4.0 * beta * beta + 9.0 * b + 2.0 * beta - 6.0) / 6.0};
}

EquivalenceCheck positive_definite_equiv_check(double beta, double b, double band) {
    const auto q = quad_form_coeffs(beta, b);
    const auto m = nstar_membership(beta, b);
    EquivalenceCheck out;
    out.positive_definite = q.A > 0.0 && q.discriminant() > 0.0;
    out.member = m.member;
    out.boundary = std::abs(m.linear) <= band || std::abs(m.cubic) <= band;
    return out;
}

EquivalenceStats sample_equivalence(std::size_t samples, double beta_min, double beta_max, double b_min,
                                    double b_max, unsigned seed, double band) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> beta_dist(beta_min, beta_max);
    std::uniform_real_distribution<double> b_dist(b_min, b_max);
    EquivalenceStats stats;
    for (std::size_t i = 0; i < samples; ++i) {
        const double beta = beta_dist(rng);
        const double b = b_dist(rng);
        const auto check = positive_definite_equiv_check(beta, b, band);
        ++stats.samples;
        if (check.boundary) {
            ++stats.boundary;
        } else if (!check.agree()) {
            ++stats.disagreements;
        }
    }
    return stats;
}

std::vector<double> AxisRange::values() const {
    const double steps = (max - min) / step;
    auto count = static_cast<std::size_t>(std::floor(steps + 1e-9));
    // the end point is on the grid when the step divides the range
    const bool end_on_grid = std::abs(steps - std::round(steps)) <= 1e-9;
    if (include_max || !end_on_grid) count += 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(snap_decimal(min + static_cast<double>(k) * step));
    return out;
}

void RegionScanSpec::validate() const {
    auto check_axis = [](const AxisRange& r, const std::string& name) {
        if (!(r.min < r.max)) throw ConfigError(name, "min must be less than max");
        if (!(r.step > 0.0)) throw ConfigError(name + ".step", "must be positive");
        const double steps = (r.max - r.min) / r.step;
        if (std::abs(steps - std::round(steps)) > 1e-12 * std::max(1.0, steps))
            throw ConfigError(name + ".step", "must divide the range");
    };
    check_axis(beta, "beta");
    check_axis(b, "b");
}

const RegionCell* RegionScan::find(double beta, double b, double tol) const {
    for (const auto& c : cells)
        if (std::abs(c.beta - beta) <= tol && std::abs(c.b - b) <= tol) return &c;
    return nullptr;
}

RegionScan region_scan(const RegionScanSpec& spec) {
    spec.validate();
    const auto betas = spec.beta.values();
    const auto bs = spec.b.values();
    RegionScan scan;
    scan.beta_count = betas.size();
    scan.b_count = bs.size();
    scan.cells.reserve(betas.size() * bs.size());
    for (double beta : betas) {
        for (double b : bs) {
            RegionCell cell{beta, b, nstar_membership(beta, b)};
            if (cell.margins.member && beta > -0.5 && beta < 0.5 && b > 0.0 && b < 2.0)
                scan.gap_violations.push_back(cell);
            scan.cells.push_back(cell);
        }
    }
    return scan;
}

void write_region_csv(std::ostream& out, const RegionScan& scan) {
    csv::write_header(out, "beta,b,member,margin_linear,margin_cubic");
    for (const auto& c : scan.cells) {
        out << csv::format(c.beta) << ',' << csv::format(c.b) << ',' << (c.margins.member ? "true" : "false") << ','
            << csv::format(c.margins.linear) << ',' << csv::format(c.margins.cubic) << '\n';
    }
}

} // namespace etm
