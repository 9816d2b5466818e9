#pragma once

#include <Eigen/Dense>
#include <vector>

#include "toricvol/supports.hpp"

namespace toricvol {

/// Point on the torus chart: z_j = exp(p_j + i q_j).
struct ToricPoint {
    Eigen::VectorXd p;
    Eigen::VectorXd q;

    static ToricPoint real_point(Eigen::VectorXd p_) {
        ToricPoint t;
        t.q = Eigen::VectorXd::Zero(p_.size());
        t.p = std::move(p_);
        return t;
    }
};

/// Everything the potential of one support yields at one point.
/// grad is the momentum (a point of the support hull); metric is the
/// positive semidefinite form dv^H dv = hess/2, independent of q.
struct KahlerEval {
    ToricPoint at;
    Eigen::VectorXcd vhat;    // sqrt(variance) * z^A, may overflow for huge |p|
    double vnorm = 0.0;       // |vhat| = exp(g)
    double g = 0.0;           // potential value
    Eigen::RowVectorXd grad;  // momentum, lies in the support hull
    Eigen::MatrixXd hess;     // second derivative of g in p
    Eigen::MatrixXcd dv;      // derivative of the normalized section, rows x dims
    Eigen::MatrixXd metric;   // hess/2 = dv^H dv
    Eigen::VectorXd weights;  // softmax row weights |v_alpha|^2, sum to 1
};

KahlerEval kahler_eval(const SupportSpec& spec, const ToricPoint& at);

/// Momentum map gradient of the potential; stable for any |p|.
Eigen::RowVectorXd momentum(const SupportSpec& spec, const Eigen::VectorXd& p);

/// Light path: only the metric hess/2 at p.
Eigen::MatrixXd metric_at(const SupportSpec& spec, const Eigen::VectorXd& p);

/// Invert the momentum map by damped Newton on the convex potential.
/// Target must be strictly interior to the support hull.
Eigen::VectorXd momentum_invert(const SupportSpec& spec,
                                const Eigen::RowVectorXd& target,
                                double tol = 1e-10);

/// Mixed discriminant, permutation expansion (dims <= 4), normalized so
/// that the unmixed case returns det. Hermitian inputs give a real value.
double mixed_discriminant(const std::vector<Eigen::MatrixXcd>& mats);
double mixed_discriminant(const std::vector<Eigen::MatrixXd>& mats);

/// Density of expected roots per unit dp dq volume:
/// (n!/pi^n) * mixed discriminant of the metrics at p. Independent of q.
double root_density(const std::vector<SupportSpec>& supports,
                    const Eigen::VectorXd& p);

/// Torus-action Hamiltonian flow of H = momentum . xi: p stays frozen and
/// q moves linearly with velocity -hess(p) xi, so the endpoint is exact.
struct FlowResult {
    ToricPoint start;
    ToricPoint end;            // q wrapped to (-pi, pi]
    Eigen::VectorXd q_end_raw; // unwrapped endpoint
    double h_start = 0.0;
    double h_end = 0.0;
};
FlowResult hamiltonian_flow(const SupportSpec& spec, const ToricPoint& start,
                            const Eigen::VectorXd& xi, double t);

double wrap_angle(double q);

}  // namespace toricvol
