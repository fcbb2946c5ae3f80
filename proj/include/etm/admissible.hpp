#pragma once

// Admissible entropy exponents.
//
// b belongs to N*_beta when the gradient quadratic form produced by the entropy
// f_b = n^2 theta^b is positive definite, which reduces to one linear and one
// cubic polynomial inequality in b. Pairs (b1, b2) in N_beta additionally
// straddle the exponents beta - 1/2 and 5/2 - beta.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace etm {

struct MembershipMargins {
    bool member = false;
    double linear = 0.0; ///< (1 - 2 beta) b + 6
    double cubic = 0.0;  ///< 4(2 beta-1) b^3 + 4(4 beta^2-12 beta+11) b^2 + ...
};

MembershipMargins nstar_membership(double beta, double b);

bool nbeta_membership(double beta, double b1, double b2);

struct QuadFormCoeffs {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;

    double discriminant() const { return A * C - B * B; }
};

/// Coefficients of A |grad n|^2 + 2B (.)(.) + C |grad theta|^2 in the entropy dissipation.
QuadFormCoeffs quad_form_coeffs(double beta, double b);

struct EquivalenceCheck {
    bool positive_definite = false;
    bool member = false;
    bool boundary = false; ///< some margin within the band; excluded from statistics
    bool agree() const { return positive_definite == member; }
};

inline constexpr double kBoundaryBand = 1e-9;

EquivalenceCheck positive_definite_equiv_check(double beta, double b, double band = kBoundaryBand);

struct EquivalenceStats {
    std::size_t samples = 0;
    std::size_t boundary = 0;
    std::size_t disagreements = 0;
};

/// Uniform sampling of (beta, b) with a seeded generator.
EquivalenceStats sample_equivalence(std::size_t samples, double beta_min, double beta_max, double b_min,
                                    double b_max, unsigned seed, double band = kBoundaryBand);

struct AxisRange {
    double min = 0.0;
    double max = 0.0;
    double step = 0.01;
    bool include_max = false;

    /// Grid points min + k step; the end point is included when `include_max`.
    std::vector<double> values() const;
};

struct RegionScanSpec {
    AxisRange beta{-0.5, 0.5, 0.01, false};
    AxisRange b{-10.0, 10.0, 0.01, true};

    /// Throws ConfigError: min < max, step > 0, step divides the range within 1e-12 slack.
    void validate() const;
};

struct RegionCell {
    double beta = 0.0;
    double b = 0.0;
    MembershipMargins margins;
};

struct RegionScan {
    std::size_t beta_count = 0;
    std::size_t b_count = 0;
    std::vector<RegionCell> cells; ///< beta-major
    /// Members with -1/2 < beta < 1/2 and 0 < b < 2 (expected to be empty).
    std::vector<RegionCell> gap_violations;

    const RegionCell* find(double beta, double b, double tol = 1e-9) const;
};

RegionScan region_scan(const RegionScanSpec& spec);

/// Header `beta,b,member,margin_linear,margin_cubic`; member written as true/false.
void write_region_csv(std::ostream& out, const RegionScan& scan);

} // namespace etm
