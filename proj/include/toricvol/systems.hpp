#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "toricvol/supports.hpp"
#include "toricvol/toric.hpp"

namespace toricvol {

enum class Field { complex_coeffs, real_coeffs };

// A square sparse system shape: one full-dimensional support per equation.
class SystemSpec {
public:
    SystemSpec(Field field, std::vector<SupportSpec> supports);

    Field field() const { return field_; }
    int dims() const { return dims_; }
    int size() const { return static_cast<int>(supports_.size()); }
    const std::vector<SupportSpec>& supports() const { return supports_; }
    const SupportSpec& support(int i) const { return supports_.at(i); }

    /// True if every polynomial has the same support and variance.
    bool unmixed() const;

private:
    Field field_;
    int dims_;
    std::vector<SupportSpec> supports_;
};

/// Standard linear shape in n variables: rows {0, e_1, ..., e_n}, unit
/// variances. The comparison family for condition tail bounds.
SystemSpec linear_system(int dims, Field field = Field::complex_coeffs);

/// Dense support of total degree <= deg in n variables with the multinomial
/// variance weights (the unitarily invariant ensemble).
SupportSpec dense_support(int dims, int deg);

// Coefficients of one sampled system, stored in the orthonormalized frame
// (unit Gaussian per row). Monomial coefficients are coeffs * sqrt(variance).
struct PolySample {
    std::vector<Eigen::VectorXcd> coeffs;
};

/// Draw trial `trial` of the seeded ensemble. Complex field: independent
/// N(0,1) real and imaginary parts per row; real field: N(0,1) per row.
PolySample sample_system(const SystemSpec& spec, std::uint64_t seed,
                         std::uint64_t trial);

Eigen::VectorXcd monomial_coeffs(const SupportSpec& spec,
                                 const Eigen::VectorXcd& ortho_coeffs);
Eigen::VectorXcd ortho_coeffs(const SupportSpec& spec,
                              const Eigen::VectorXcd& monomial);

/// Scaled evaluation: value of f at the point is `value * exp(log_scale)`.
/// `value` stays O(|coeffs|) for any p, so overflow never occurs here.
struct ScaledValue {
    std::complex<double> value;
    double log_scale;
};
ScaledValue evaluate_scaled(const SupportSpec& spec,
                            const Eigen::VectorXcd& ortho, const ToricPoint& at);

/// Plain values of all polynomials; may overflow for extreme |p|.
Eigen::VectorXcd evaluate(const SystemSpec& spec, const PolySample& f,
                          const ToricPoint& at);

/// max_i |f_i(at)| / |f_i|, measured against the normalized section, so the
/// result is scale-free in both the coefficients and the point.
double rel_residual(const SystemSpec& spec, const PolySample& f,
                    const ToricPoint& at);

/// n x n matrix with rows f_i . dv_i(at); its determinant squared is the
/// Jacobian factor of the root map.
Eigen::MatrixXcd condition_matrix(const SystemSpec& spec, const PolySample& f,
                                  const ToricPoint& at);

inline double root_density(const SystemSpec& spec, const Eigen::VectorXd& p) {
    return root_density(spec.supports(), p);
}

}  // namespace toricvol
