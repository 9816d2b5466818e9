#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "toricvol/errors.hpp"

namespace toricvol {

// Monomial support of one polynomial: one nonnegative integer exponent row
// per monomial, plus a positive variance weight per row. Degenerate
// (lower-dimensional) supports are allowed here and rejected only when a
// full system is assembled.
class SupportSpec {
public:
    SupportSpec(Eigen::MatrixXd exponents, Eigen::VectorXd variance);
    explicit SupportSpec(Eigen::MatrixXd exponents);

    int rows() const { return static_cast<int>(exponents_.rows()); }
    int dims() const { return static_cast<int>(exponents_.cols()); }
    const Eigen::MatrixXd& exponents() const { return exponents_; }
    const Eigen::VectorXd& variance() const { return variance_; }

    /// Rank of the row set after translating the first row to the origin.
    int affine_rank() const;
    bool full_dimensional() const { return affine_rank() == dims(); }

    /// Max Euclidean distance between two exponent rows.
    double diameter() const;

private:
    Eigen::MatrixXd exponents_;
    Eigen::VectorXd variance_;
};

// Convex polytope in dimension 1..3, stored by its exact vertex set.
struct Polytope {
    int dim = 0;
    std::vector<Eigen::VectorXd> vertices;
};

/// Convex hull of a point set, dim <= 3. The result's vertex list contains
/// exactly the extreme points (no interior, edge or facet-interior points).
Polytope convex_hull(const std::vector<Eigen::VectorXd>& points, int dim);

Polytope polytope_of(const SupportSpec& spec);

/// Lebesgue measure of the hull: length / area / volume by dimension.
/// Lower-dimensional input gives 0.
double polytope_volume(const Polytope& poly);

Polytope minkowski_sum(const Polytope& a, const Polytope& b);

double diameter(const Polytope& poly);

/// Mixed volume of dim polytopes in R^dim, normalized so that
/// mixed_volume(P, ..., P) = polytope_volume(P). Inclusion-exclusion over
/// Minkowski sums; exact for integer vertices at desk scale.
double mixed_volume(const std::vector<Polytope>& polys);

/// mixed_volume scaled by n!: the generic root count of a sparse system.
double bernshtein_count(const std::vector<Polytope>& polys);

/// Supporting halfspaces (outward normal n, offset c with n.x <= c on the
/// polytope). Full-dimensional input only.
struct Halfspace {
    Eigen::VectorXd normal;
    double offset;
};
std::vector<Halfspace> facets(const Polytope& poly);

/// Signed distance from x to the boundary, positive inside.
double interior_margin(const Polytope& poly, const Eigen::VectorXd& x);

struct DelzantReport {
    bool delzant = false;
    std::string reason;
};

/// 2-d lattice polygon smoothness check: at every vertex the two primitive
/// integer edge directions must span the lattice (determinant +-1).
DelzantReport delzant_check_2d(const SupportSpec& spec);

}  // namespace toricvol
