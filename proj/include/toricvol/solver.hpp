#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "toricvol/quadrature.hpp"
#include "toricvol/systems.hpp"

namespace toricvol {

struct Root {
    Eigen::VectorXcd z;   // torus coordinates, all |z_j| > 0
    ToricPoint at;        // p = log|z|, q = arg z
    double residual = 0.0;
};

struct RootSet {
    std::vector<Root> roots;
    bool ok = true;        // false: sample rejected as numerically degenerate
    std::string note;
};

/// Roots in (C*)^1 of a sparse univariate polynomial given by monomial
/// coefficients over the support rows: companion matrix eigenvalues plus
/// Newton polish; roots at 0 are dropped by exponent shifting.
RootSet solve_univariate(const SupportSpec& spec,
                         const Eigen::VectorXcd& monomial);

/// Root of a system whose supports are all {0, e_1, ..., e_n}.
RootSet solve_linear(const SystemSpec& spec, const PolySample& f);

/// Roots in (C*)^2 via the Sylvester resultant in the second variable,
/// evaluated on a unit circle and interpolated, then per-root 2-d Newton.
RootSet solve_bivariate(const SystemSpec& spec, const PolySample& f);

/// Dispatch on shape: univariate, linear, or bivariate.
RootSet solve_system(const SystemSpec& spec, const PolySample& f);

/// Number of roots of `rs` whose toric coordinates lie inside the region.
int count_in_region(const RootSet& rs, const Region& region);

bool point_in_region(const ToricPoint& at, const Region& region);

struct CountMcResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t rejected = 0;  // samples the solver flagged as degenerate
};

/// Monte Carlo mean number of roots in the region: draw samples, solve,
/// count. Deterministic in (seed, samples) regardless of worker count.
CountMcResult count_roots_mc(const SystemSpec& spec, const Region& region,
                             std::uint64_t samples, std::uint64_t seed,
                             int workers = 1);

}  // namespace toricvol
