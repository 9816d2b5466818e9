#pragma once

#include <cstdint>
#include <vector>

#include "toricvol/condition.hpp"
#include "toricvol/solver.hpp"

namespace toricvol {

struct RealMcResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    double reject_rate = 0.0;
};

/// Monte Carlo mean count of real positive roots with log-coordinates in
/// the box. Real-coefficient systems only; univariate or linear shapes.
RealMcResult expected_real_mc(const SystemSpec& spec,
                              const std::vector<Interval>& p_box,
                              std::uint64_t samples, std::uint64_t seed,
                              int workers = 1);

/// Analytic upper bound for that mean:
/// (4 pi^2)^(-n/2) * sqrt(box volume) * sqrt(pi^n * expected complex count).
double real_count_bound(const SystemSpec& spec,
                        const std::vector<Interval>& p_box, double tol = 1e-6);

/// Exact density route for unmixed n=1 systems:
/// (1/pi) * integral of sqrt(metric) over the box. Cross-checks the MC mean.
double real_density_count(const SystemSpec& spec,
                          const std::vector<Interval>& p_box, double tol = 1e-8);

struct RealTailPoint {
    double eps = 0.0;
    double empirical = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double nu_real = 0.0;  // linear-family real tail at eps
    double rhs = 0.0;      // E(box) * nu_real
    std::uint64_t tail_count = 0;
};

struct RealTailReport {
    std::vector<RealTailPoint> points;
    double e_of_u = 0.0;  // MC mean used on the right-hand side
    std::uint64_t samples = 0;
};

/// Tail of the condition over real positive roots in the box for an unmixed
/// real system, against E(box) times the real linear-family tail (estimated
/// at the unique root of real linear samples, any sign, via angle
/// components in {0, pi}).
RealTailReport real_condition_tail(const SystemSpec& spec,
                                   const std::vector<Interval>& p_box,
                                   const std::vector<double>& eps_list,
                                   std::uint64_t samples, std::uint64_t seed,
                                   int workers = 1,
                                   double wilson_z = 2.5758293035489004);

}  // namespace toricvol
