#include "toricvol/systems.hpp"

#include <cmath>
#include <functional>

#include "toricvol/rng.hpp"

namespace toricvol {

SystemSpec::SystemSpec(Field field, std::vector<SupportSpec> supports)
    : field_(field), supports_(std::move(supports)) {
    if (supports_.empty()) throw ValidationError("system needs at least one polynomial");
    dims_ = supports_.front().dims();
    if (static_cast<int>(supports_.size()) != dims_)
        throw ValidationError("square system needs n polynomials in n variables");
    for (const auto& s : supports_) {
        if (s.dims() != dims_)
            throw ValidationError("all supports must share the variable count");
        if (!s.full_dimensional())
            throw ValidationError("degenerate support: hull is lower-dimensional");
    }
}

bool SystemSpec::unmixed() const {
    for (int i = 1; i < size(); ++i) {
        if (supports_[i].rows() != supports_[0].rows()) return false;
        if ((supports_[i].exponents() - supports_[0].exponents())
                .cwiseAbs().maxCoeff() > 0)
            return false;
        if ((supports_[i].variance() - supports_[0].variance())
                .cwiseAbs().maxCoeff() > 1e-12)
            return false;
    }
    return true;
}

SystemSpec linear_system(int dims, Field field) {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(dims + 1, dims);
    rows.bottomRows(dims).setIdentity();
    std::vector<SupportSpec> supports(static_cast<std::size_t>(dims),
                                      SupportSpec(rows));
    return SystemSpec(field, std::move(supports));
}

SupportSpec dense_support(int dims, int deg) {
    std::vector<Eigen::VectorXd> rows;
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(dims);
    // Enumerate exponent tuples with sum <= deg in lexicographic order.
    const std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == dims) {
            rows.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            rec(pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    rec(0, deg);

    Eigen::MatrixXd exps(rows.size(), dims);
    Eigen::VectorXd var(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        exps.row(static_cast<int>(i)) = rows[i].transpose();
        // multinomial deg! / (i_1! ... i_n! (deg - sum)!)
        double logw = std::lgamma(deg + 1.0);
        double sum = 0.0;
        for (int j = 0; j < dims; ++j) {
            logw -= std::lgamma(rows[i][j] + 1.0);
            sum += rows[i][j];
        }
        logw -= std::lgamma(deg - sum + 1.0);
        var[static_cast<int>(i)] = std::exp(logw);
    }
    return SupportSpec(std::move(exps), std::move(var));
}

PolySample sample_system(const SystemSpec& spec, std::uint64_t seed,
                         std::uint64_t trial) {
    GaussianStream rng(seed, trial);
    PolySample out;
    out.coeffs.reserve(spec.size());
    for (int i = 0; i < spec.size(); ++i) {
        Eigen::VectorXcd c(spec.support(i).rows());
        for (int a = 0; a < c.size(); ++a) {
            c[a] = (spec.field() == Field::complex_coeffs)
                       ? rng.cnormal()
                       : std::complex<double>(rng.normal(), 0.0);
        }
        out.coeffs.push_back(std::move(c));
    }
    return out;
}

Eigen::VectorXcd monomial_coeffs(const SupportSpec& spec,
                                 const Eigen::VectorXcd& ortho) {
    if (ortho.size() != spec.rows())
        throw ValidationError("coefficient length does not match the support");
    return ortho.array() * spec.variance().array().sqrt();
}

Eigen::VectorXcd ortho_coeffs(const SupportSpec& spec,
                              const Eigen::VectorXcd& monomial) {
    if (monomial.size() != spec.rows())
        throw ValidationError("coefficient length does not match the support");
    return monomial.array() / spec.variance().array().sqrt();
}

ScaledValue evaluate_scaled(const SupportSpec& spec,
                            const Eigen::VectorXcd& ortho,
                            const ToricPoint& at) {
    const KahlerEval ev = kahler_eval(spec, at);
    // |vhat_a| / exp(g) = sqrt(weight_a), so the unit section never
    // overflows even where vhat itself would.
    std::complex<double> acc = 0.0;
    for (int a = 0; a < spec.rows(); ++a) {
        const double phase = spec.exponents().row(a).dot(at.q);
        acc += ortho[a] * std::sqrt(ev.weights[a]) *
               std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return {acc, ev.g};
}

Eigen::VectorXcd evaluate(const SystemSpec& spec, const PolySample& f,
                          const ToricPoint& at) {
    Eigen::VectorXcd out(spec.size());
    for (int i = 0; i < spec.size(); ++i) {
        const ScaledValue sv = evaluate_scaled(spec.support(i), f.coeffs[i], at);
        out[i] = sv.value * std::exp(sv.log_scale);
    }
    return out;
}

double rel_residual(const SystemSpec& spec, const PolySample& f,
                    const ToricPoint& at) {
    double worst = 0.0;
    for (int i = 0; i < spec.size(); ++i) {
        const ScaledValue sv = evaluate_scaled(spec.support(i), f.coeffs[i], at);
        worst = std::max(worst, std::abs(sv.value) / f.coeffs[i].norm());
    }
    return worst;
}

Eigen::MatrixXcd condition_matrix(const SystemSpec& spec, const PolySample& f,
                                  const ToricPoint& at) {
    Eigen::MatrixXcd d(spec.size(), spec.dims());
    for (int i = 0; i < spec.size(); ++i) {
        const KahlerEval ev = kahler_eval(spec.support(i), at);
        d.row(i) = f.coeffs[i].transpose() * ev.dv;
    }
    return d;
}

}  // namespace toricvol
