#pragma once

#include <cstdint>
#include <vector>

#include "toricvol/systems.hpp"

namespace toricvol {

/// Closed interval, possibly unbounded on either side.
struct Interval {
    double lo;
    double hi;
    bool bounded() const;
    double length() const;
};

/// Product region in (p, q) space. q_full means all angles, measure (2 pi)^n.
struct Region {
    std::vector<Interval> p;
    bool q_full = true;
    std::vector<Interval> q;

    static Region full_space(int dims);
    static Region p_box(std::vector<Interval> box);  // q full
    double q_measure(int dims) const;
    bool p_bounded() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // last refinement change
    long evals = 0;
    bool converged = false;
};

/// Expected number of roots in the region: tensor Gauss-Legendre over the
/// p-box with order doubling until the relative change drops below tol;
/// unbounded sides are truncated at a radius that doubles until the value
/// stabilizes. The integrand is q-independent, so the q-measure multiplies.
QuadResult integrate_density(const SystemSpec& spec, const Region& region,
                             double tol = 1e-6);

struct McResult {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

/// Uniform Monte Carlo estimate of the same integral. Unbounded p-sides are
/// truncated at radius 30 (density tails decay exponentially). Partial sums
/// are combined in fixed block order, so the result does not depend on the
/// worker count.
McResult integrate_mc(const SystemSpec& spec, const Region& region,
                      std::uint64_t samples, std::uint64_t seed,
                      int workers = 1);

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

}  // namespace toricvol
