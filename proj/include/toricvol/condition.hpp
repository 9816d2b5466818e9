#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "toricvol/solver.hpp"
#include "toricvol/systems.hpp"

namespace toricvol {

/// The metrics of all supports of a system at one p.
struct MetricFamily {
    std::vector<Eigen::MatrixXd> mats;
};
MetricFamily metrics_at(const SystemSpec& spec, const Eigen::VectorXd& p);

/// Multiprojective distance from a system (unit-normalized per polynomial)
/// to the set of systems singular at the given root, with certified-order
/// sandwich bounds on its inverse: inv_lower <= 1/dp <= inv_upper always
/// holds for the returned values, with equality of the three in the unmixed
/// case (where everything reduces to one singular value).
struct ConditionReport {
    double dp = 0.0;
    double inv_lower = 0.0;
    double inv_upper = 0.0;
    Eigen::VectorXcd v_star;  // direction attaining dp
    bool singular = false;
};

ConditionReport fiber_distance(const SystemSpec& spec, const PolySample& f,
                               const ToricPoint& at, int search_budget = 2048);

/// 1/dp, +inf when singular.
double inverse_distance(const ConditionReport& r);

/// Condition of the sample over a region: max of 1/dp over the roots lying
/// in the region; 0 if no root lies there; +inf if a root is singular.
struct MuResult {
    double mu = 0.0;
    int roots_in_region = 0;
    bool rejected = false;
};
MuResult mu_region(const SystemSpec& spec, const PolySample& f,
                   const Region& region, int search_budget = 512);
MuResult mu_of_roots(const SystemSpec& spec, const PolySample& f,
                     const RootSet& roots, const Region& region,
                     int search_budget = 512);

/// Joint diagonalization defect: an upper bound on
/// min_L max_i cond2(L^T M_i L), found by seeding with the matrix geometric
/// mean and refining by coordinate descent. Equals 1 when the metrics of
/// the family are pairwise proportional.
double mixed_dilation(const MetricFamily& family);

/// Max of mixed_dilation over a closed p-grid of the region, endpoints
/// included (unbounded sides are truncated at radius 5). Odd grid counts
/// include the box center.
double kappa_region(const SystemSpec& spec, const Region& region, int grid = 9);

/// max_i |u|_{M_i}.
double intersection_norm(const MetricFamily& family, const Eigen::VectorXd& u);

/// Symmetric positive definite geometric mean (Karcher) of a family.
Eigen::MatrixXd spd_geometric_mean(const std::vector<Eigen::MatrixXd>& mats);

struct TailPoint {
    double eps = 0.0;
    double empirical = 0.0;   // fraction of samples with mu > 1/eps
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double rhs = 0.0;         // density ratio * linear-family tail at scaled eps
    std::uint64_t tail_count = 0;
};

struct TailReport {
    std::vector<TailPoint> points;
    double kappa_hat = 1.0;
    double density_ratio = 1.0;
    std::uint64_t samples = 0;
    std::uint64_t rejected = 0;
};

/// Monte Carlo tail of mu(f, region) against the comparison bound:
/// rhs(eps) = [density ratio over the region vs the linear family]
///            * [linear-family tail at sqrt(kappa_hat) * eps].
/// The linear tail is estimated with the same sample count on the full
/// space. Wilson intervals use the given z.
TailReport nu_tail_mc(const SystemSpec& spec, const Region& region,
                      const std::vector<double>& eps_list,
                      std::uint64_t samples, std::uint64_t seed,
                      int workers = 1, double wilson_z = 2.5758293035489004);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::uint64_t hits,
                                          std::uint64_t trials, double z);

}  // namespace toricvol
