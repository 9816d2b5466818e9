#include "toricvol/toric.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace toricvol {

namespace {

// Shifted log scales y_alpha = A_alpha . p + log(sqrt(c_alpha)) and softmax
// weights; every downstream quantity is safe for any |p|.
struct Softmax {
    Eigen::VectorXd y;
    double shift;          // max y
    Eigen::VectorXd s;     // exp(y - shift)
    double s2;             // sum s^2
    Eigen::VectorXd w;     // s^2 / s2, sums to 1
    double g;              // shift + log(sqrt(s2))
};

Softmax softmax_weights(const SupportSpec& spec, const Eigen::VectorXd& p) {
    if (p.size() != spec.dims())
        throw ValidationError("point dimension does not match the support");
    Softmax sm;
    sm.y = spec.exponents() * p + 0.5 * spec.variance().array().log().matrix();
    sm.shift = sm.y.maxCoeff();
    sm.s = (sm.y.array() - sm.shift).exp();
    sm.s2 = sm.s.squaredNorm();
    sm.w = sm.s.array().square() / sm.s2;
    sm.g = sm.shift + 0.5 * std::log(sm.s2);
    return sm;
}

Eigen::RowVectorXd grad_from(const SupportSpec& spec, const Softmax& sm) {
    // Affine combination anchored at the dominant row. Exact-arithmetic
    // equal to w^T A, but when one row dominates the remaining terms only
    // nudge the anchor toward the other rows, so the rounded value cannot
    // land outside the hull (the plain quotient can overshoot by one ulp).
    const Eigen::MatrixXd& a = spec.exponents();
    int istar = 0;
    sm.w.maxCoeff(&istar);
    Eigen::RowVectorXd out =
        sm.w.transpose() * (a.rowwise() - a.row(istar));
    return out + a.row(istar);
}

Eigen::MatrixXd metric_from(const SupportSpec& spec, const Softmax& sm) {
    // Centered form: sum of weighted outer products of (row - mean). The
    // covariance-difference form cancels catastrophically near the hull
    // vertices and can round to slightly negative values.
    const Eigen::MatrixXd& a = spec.exponents();
    const Eigen::RowVectorXd grad = grad_from(spec, sm);
    const Eigen::MatrixXd centered = a.rowwise() - grad;
    Eigen::MatrixXd m = centered.transpose() * sm.w.asDiagonal() * centered;
    return 0.5 * (m + m.transpose());
}

}  // namespace

KahlerEval kahler_eval(const SupportSpec& spec, const ToricPoint& at) {
    if (at.q.size() != spec.dims() || at.p.size() != spec.dims())
        throw ValidationError("point dimension does not match the support");
    const Softmax sm = softmax_weights(spec, at.p);
    const Eigen::MatrixXd& a = spec.exponents();

    KahlerEval out;
    out.at = at;
    out.g = sm.g;
    out.vnorm = std::exp(sm.g);
    out.weights = sm.w;
    out.grad = grad_from(spec, sm);
    out.metric = metric_from(spec, sm);
    out.hess = 2.0 * out.metric;

    const Eigen::VectorXd phase = a * at.q;
    const double root_s2 = std::sqrt(sm.s2);
    Eigen::VectorXcd unit(spec.rows());
    for (int i = 0; i < spec.rows(); ++i)
        unit[i] = std::polar(sm.s[i] / root_s2, phase[i]);
    out.vhat = unit * out.vnorm;
    out.dv.resize(spec.rows(), spec.dims());
    for (int i = 0; i < spec.rows(); ++i)
        out.dv.row(i) = unit[i] * (a.row(i) - out.grad);
    return out;
}

Eigen::RowVectorXd momentum(const SupportSpec& spec, const Eigen::VectorXd& p) {
    return grad_from(spec, softmax_weights(spec, p));
}

Eigen::MatrixXd metric_at(const SupportSpec& spec, const Eigen::VectorXd& p) {
    return metric_from(spec, softmax_weights(spec, p));
}

Eigen::VectorXd momentum_invert(const SupportSpec& spec,
                                const Eigen::RowVectorXd& target, double tol) {
    if (target.size() != spec.dims())
        throw ValidationError("target dimension does not match the support");
    if (!spec.full_dimensional())
        throw ValidationError("momentum inversion needs a full-dimensional support");
    if (spec.dims() <= 3) {
        const Polytope hull = polytope_of(spec);
        if (interior_margin(hull, target.transpose()) <= tol)
            throw ValidationError("target momentum is not interior to the support hull");
    }

    // Damped Newton on the strictly convex h(p) = g(p) - target . p.
    Eigen::VectorXd p = Eigen::VectorXd::Zero(spec.dims());
    const auto h_value = [&](const Eigen::VectorXd& x) {
        return softmax_weights(spec, x).g - target.dot(x);
    };
    double h = h_value(p);
    for (int it = 0; it < 200; ++it) {
        const Softmax sm = softmax_weights(spec, p);
        const Eigen::RowVectorXd grad = grad_from(spec, sm) - target;
        if (grad.norm() <= tol) return p;
        const Eigen::MatrixXd hess = 2.0 * metric_from(spec, sm);
        const Eigen::VectorXd step = -hess.ldlt().solve(grad.transpose());
        // Near the optimum the value differences underflow and Armijo can
        // stall, so take full Newton steps there (quadratic basin).
        if (grad.norm() < 1e-6) {
            p += step;
            h = h_value(p);
            continue;
        }
        double lambda = 1.0;
        const double slope = grad.dot(step);
        while (lambda > 1e-14) {
            const Eigen::VectorXd cand = p + lambda * step;
            const double hc = h_value(cand);
            if (hc <= h + 0.25 * lambda * slope) {
                p = cand;
                h = hc;
                break;
            }
            lambda *= 0.5;
        }
        if (lambda <= 1e-14)
            throw NumericError("momentum inversion line search stalled");
    }
    throw NumericError("momentum inversion did not converge");
}

namespace {

template <typename Mat>
std::complex<double> mixed_disc_impl(const std::vector<Mat>& mats) {
    const int n = static_cast<int>(mats.size());
    if (n < 1) throw ValidationError("mixed discriminant of an empty family");
    if (n > 4)
        throw DimensionLimitError("mixed discriminant supports dimensions 1 to 4");
    for (const auto& m : mats)
        if (m.rows() != n || m.cols() != n)
            throw ValidationError("mixed discriminant needs n matrices of size n");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::complex<double> acc = 0.0;
    double count = 0.0;
    Mat b(n, n);
    do {
        for (int k = 0; k < n; ++k) b.col(k) = mats[perm[k]].col(k);
        acc += b.determinant();
        count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / count;
}

}  // namespace

double mixed_discriminant(const std::vector<Eigen::MatrixXcd>& mats) {
    const std::complex<double> d = mixed_disc_impl(mats);
    if (std::abs(d.imag()) > 1e-8 * (1.0 + std::abs(d.real())))
        throw NumericError("mixed discriminant of a non-Hermitian family");
    return d.real();
}

double mixed_discriminant(const std::vector<Eigen::MatrixXd>& mats) {
    return mixed_disc_impl(mats).real();
}

double root_density(const std::vector<SupportSpec>& supports,
                    const Eigen::VectorXd& p) {
    const int n = static_cast<int>(supports.size());
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(supports.size());
    for (const auto& s : supports) mats.push_back(metric_at(s, p));
    double nfact = 1.0;
    for (int i = 2; i <= n; ++i) nfact *= i;
    return nfact * std::pow(M_PI, -n) * mixed_discriminant(mats);
}

double wrap_angle(double q) {
    double w = std::remainder(q, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

FlowResult hamiltonian_flow(const SupportSpec& spec, const ToricPoint& start,
                            const Eigen::VectorXd& xi, double t) {
    if (xi.size() != spec.dims())
        throw ValidationError("flow direction dimension mismatch");
    const KahlerEval ev = kahler_eval(spec, start);

    FlowResult out;
    out.start = start;
    out.end.p = start.p;  // conserved exactly
    out.q_end_raw = start.q - t * (ev.hess * xi);
    out.end.q = out.q_end_raw.unaryExpr([](double q) { return wrap_angle(q); });
    out.h_start = ev.grad.dot(xi);
    // p is bitwise unchanged, so the conserved value recomputes identically.
    out.h_end = momentum(spec, out.end.p).dot(xi);
    return out;
}

}  // namespace toricvol
