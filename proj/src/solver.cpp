#include "toricvol/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <thread>

namespace toricvol {

namespace {

using cd = std::complex<double>;

constexpr double kResidualTol = 1e-8;
constexpr double kMinAbsCoord = 1e-12;

// Roots of c[0] + c[1] z + ... + c[d] z^d with c[d] != 0, as eigenvalues of
// the companion matrix.
std::vector<cd> companion_roots(const Eigen::VectorXcd& c) {
    const int d = static_cast<int>(c.size()) - 1;
    std::vector<cd> out;
    if (d <= 0) return out;
    if (d == 1) {
        out.push_back(-c[0] / c[1]);
        return out;
    }
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    comp.diagonal(-1).setOnes();
    comp.col(d - 1) = -c.head(d) / c[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) return out;
    for (int i = 0; i < d; ++i) {
        const cd z = es.eigenvalues()[i];
        if (std::isfinite(z.real()) && std::isfinite(z.imag())) out.push_back(z);
    }
    return out;
}

cd horner(const Eigen::VectorXcd& c, cd z) {
    cd acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        acc = acc * z + c[i];
    return acc;
}

cd horner_deriv(const Eigen::VectorXcd& c, cd z) {
    cd acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
        acc = acc * z + c[i] * static_cast<double>(i);
    return acc;
}

// Newton steps that stop as soon as they no longer help.
cd polish_univariate(const Eigen::VectorXcd& c, cd z) {
    double best = std::abs(horner(c, z));
    for (int it = 0; it < 16; ++it) {
        const cd dp = horner_deriv(c, z);
        if (std::abs(dp) == 0.0) break;
        const cd step = horner(c, z) / dp;
        const cd cand = z - step;
        const double val = std::abs(horner(c, cand));
        if (!(val < best)) break;
        best = val;
        z = cand;
    }
    return z;
}

ToricPoint toric_of(const Eigen::VectorXcd& z) {
    ToricPoint t;
    t.p.resize(z.size());
    t.q.resize(z.size());
    for (int i = 0; i < z.size(); ++i) {
        t.p[i] = std::log(std::abs(z[i]));
        t.q[i] = std::arg(z[i]);
    }
    return t;
}

double root_residual(const SupportSpec& spec, const Eigen::VectorXcd& monomial,
                     const ToricPoint& at) {
    const Eigen::VectorXcd ortho = ortho_coeffs(spec, monomial);
    // Residual against the normalized section: scale-free in point and coeffs.
    std::vector<SupportSpec> one{spec};
    SystemSpec dummy = SystemSpec(Field::complex_coeffs, one);
    PolySample f;
    f.coeffs.push_back(ortho);
    return rel_residual(dummy, f, at);
}

bool is_linear_shape(const SystemSpec& spec) {
    const int n = spec.dims();
    for (const auto& s : spec.supports()) {
        if (s.rows() != n + 1) return false;
        std::vector<char> seen(n + 1, 0);
        for (int r = 0; r < s.rows(); ++r) {
            const Eigen::RowVectorXd row = s.exponents().row(r);
            const double sum = row.sum();
            if (sum == 0.0) {
                if (seen[n]) return false;
                seen[n] = 1;
                continue;
            }
            if (sum != 1.0) return false;
            int j = 0;
            while (j < n && row[j] != 1.0) ++j;
            if (j == n || seen[j]) return false;
            seen[j] = 1;
        }
    }
    return true;
}

}  // namespace

RootSet solve_univariate(const SupportSpec& spec,
                         const Eigen::VectorXcd& monomial) {
    if (spec.dims() != 1)
        throw ValidationError("univariate solver needs a one-variable support");
    if (monomial.size() != spec.rows())
        throw ValidationError("coefficient length does not match the support");

    RootSet out;
    const int maxdeg =
        static_cast<int>(std::llround(spec.exponents().col(0).maxCoeff()));
    Eigen::VectorXcd dense = Eigen::VectorXcd::Zero(maxdeg + 1);
    for (int r = 0; r < spec.rows(); ++r)
        dense[static_cast<int>(std::llround(spec.exponents()(r, 0)))] +=
            monomial[r];

    const double scale = dense.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        out.ok = false;
        out.note = "zero polynomial";
        return out;
    }
    int tail = 0;
    while (tail <= maxdeg && std::abs(dense[tail]) <= 1e-13 * scale) ++tail;
    int head = maxdeg;
    while (head >= tail && std::abs(dense[head]) <= 1e-13 * scale) --head;
    if (head < tail) {
        out.ok = false;
        out.note = "all coefficients negligible";
        return out;
    }
    if (head - tail !=
        static_cast<int>(std::llround(spec.exponents().col(0).maxCoeff() -
                                      spec.exponents().col(0).minCoeff())))
        out.note = "degree deflated by small extreme coefficients";

    // Roots at zero are excluded by dropping the common z^tail factor.
    const Eigen::VectorXcd reduced = dense.segment(tail, head - tail + 1);
    for (cd z : companion_roots(reduced)) {
        z = polish_univariate(reduced, z);
        if (std::abs(z) <= kMinAbsCoord) continue;
        Root root;
        root.z = Eigen::VectorXcd::Constant(1, z);
        root.at = toric_of(root.z);
        root.residual = root_residual(spec, monomial, root.at);
        if (root.residual > kResidualTol) {
            out.ok = false;
            out.note = "root failed the residual check";
            continue;
        }
        out.roots.push_back(std::move(root));
    }
    if (static_cast<int>(out.roots.size()) != head - tail) {
        out.ok = false;
        if (out.note.empty()) out.note = "lost roots during companion solve";
    }
    return out;
}

RootSet solve_linear(const SystemSpec& spec, const PolySample& f) {
    if (!is_linear_shape(spec))
        throw ValidationError("linear solver needs supports {0, e_1, ..., e_n}");
    const int n = spec.dims();
    Eigen::MatrixXcd a(n, n);
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd mono =
            monomial_coeffs(spec.support(i), f.coeffs[i]);
        for (int r = 0; r < spec.support(i).rows(); ++r) {
            const Eigen::RowVectorXd row = spec.support(i).exponents().row(r);
            if (row.sum() == 0.0) {
                b[i] = mono[r];
                continue;
            }
            int j = 0;
            while (row[j] != 1.0) ++j;
            a(i, j) = mono[r];
        }
    }

    RootSet out;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    lu.setThreshold(1e-12);
    if (lu.rank() < n) {
        out.ok = false;
        out.note = "singular linear system";
        return out;
    }
    const Eigen::VectorXcd z = lu.solve(-b);
    for (int j = 0; j < n; ++j) {
        if (std::abs(z[j]) <= kMinAbsCoord) {
            out.ok = false;
            out.note = "root off the torus";
            return out;
        }
    }
    Root root;
    root.z = z;
    root.at = toric_of(z);
    root.residual = rel_residual(spec, f, root.at);
    if (root.residual > kResidualTol) {
        out.ok = false;
        out.note = "root failed the residual check";
        return out;
    }
    out.roots.push_back(std::move(root));
    return out;
}

namespace {

// Dense coefficient grid c(ex, ey) of one bivariate polynomial.
Eigen::MatrixXcd coeff_grid(const SupportSpec& spec,
                            const Eigen::VectorXcd& monomial) {
    const int dx =
        static_cast<int>(std::llround(spec.exponents().col(0).maxCoeff()));
    const int dy =
        static_cast<int>(std::llround(spec.exponents().col(1).maxCoeff()));
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dx + 1, dy + 1);
    for (int r = 0; r < spec.rows(); ++r)
        c(static_cast<int>(std::llround(spec.exponents()(r, 0))),
          static_cast<int>(std::llround(spec.exponents()(r, 1)))) += monomial[r];
    return c;
}

// Strip an all-but-negligible outer border so structural degrees match the
// actual coefficients (also removes x^k/y^k factors: roots at 0 are not on
// the torus).
Eigen::MatrixXcd trim_grid(Eigen::MatrixXcd c, int& shift_x, int& shift_y) {
    const double scale = c.cwiseAbs().maxCoeff();
    const double tol = 1e-13 * scale;
    auto row_small = [&](int r) {
        return c.row(r).cwiseAbs().maxCoeff() <= tol;
    };
    auto col_small = [&](int k) {
        return c.col(k).cwiseAbs().maxCoeff() <= tol;
    };
    int rlo = 0, rhi = static_cast<int>(c.rows()) - 1;
    int clo = 0, chi = static_cast<int>(c.cols()) - 1;
    while (rlo < rhi && row_small(rlo)) ++rlo;
    while (rhi > rlo && row_small(rhi)) --rhi;
    while (clo < chi && col_small(clo)) ++clo;
    while (chi > clo && col_small(chi)) --chi;
    shift_x = rlo;
    shift_y = clo;
    return c.block(rlo, clo, rhi - rlo + 1, chi - clo + 1);
}

cd grid_eval(const Eigen::MatrixXcd& c, cd x, cd y) {
    cd acc = 0.0;
    for (int r = static_cast<int>(c.rows()) - 1; r >= 0; --r) {
        cd rowv = 0.0;
        for (int k = static_cast<int>(c.cols()) - 1; k >= 0; --k)
            rowv = rowv * y + c(r, k);
        acc = acc * x + rowv;
    }
    return acc;
}

cd grid_eval_dx(const Eigen::MatrixXcd& c, cd x, cd y) {
    cd acc = 0.0;
    for (int r = static_cast<int>(c.rows()) - 1; r >= 1; --r) {
        cd rowv = 0.0;
        for (int k = static_cast<int>(c.cols()) - 1; k >= 0; --k)
            rowv = rowv * y + c(r, k);
        acc = acc * x + rowv * static_cast<double>(r);
    }
    return acc;
}

cd grid_eval_dy(const Eigen::MatrixXcd& c, cd x, cd y) {
    cd acc = 0.0;
    for (int r = static_cast<int>(c.rows()) - 1; r >= 0; --r) {
        cd rowv = 0.0;
        for (int k = static_cast<int>(c.cols()) - 1; k >= 1; --k)
            rowv = rowv * y + c(r, k) * static_cast<double>(k);
        acc = acc * x + rowv;
    }
    return acc;
}

// Coefficients (in y) of f(x0, .).
Eigen::VectorXcd y_poly_at(const Eigen::MatrixXcd& c, cd x0) {
    Eigen::VectorXcd out(c.cols());
    for (int k = 0; k < c.cols(); ++k) {
        cd acc = 0.0;
        for (int r = static_cast<int>(c.rows()) - 1; r >= 0; --r)
            acc = acc * x0 + c(r, k);
        out[k] = acc;
    }
    return out;
}

bool newton_2d(const Eigen::MatrixXcd& c1, const Eigen::MatrixXcd& c2, cd& x,
               cd& y) {
    for (int it = 0; it < 30; ++it) {
        const cd f1 = grid_eval(c1, x, y);
        const cd f2 = grid_eval(c2, x, y);
        Eigen::Matrix2cd jac;
        jac << grid_eval_dx(c1, x, y), grid_eval_dy(c1, x, y),
            grid_eval_dx(c2, x, y), grid_eval_dy(c2, x, y);
        const cd det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
        if (std::abs(det) == 0.0) return false;
        const cd dx = (f1 * jac(1, 1) - f2 * jac(0, 1)) / det;
        const cd dy = (f2 * jac(0, 0) - f1 * jac(1, 0)) / det;
        x -= dx;
        y -= dy;
        if (!std::isfinite(x.real()) || !std::isfinite(y.real()) ||
            !std::isfinite(x.imag()) || !std::isfinite(y.imag()))
            return false;
        const double step = std::abs(dx) + std::abs(dy);
        if (step <= 1e-13 * (1.0 + std::abs(x) + std::abs(y))) return true;
    }
    return true;  // judged by the residual afterwards
}

}  // namespace

RootSet solve_bivariate(const SystemSpec& spec, const PolySample& f) {
    if (spec.dims() != 2)
        throw ValidationError("bivariate solver needs a two-variable system");
    RootSet out;

    int sx1 = 0, sy1 = 0, sx2 = 0, sy2 = 0;
    const Eigen::MatrixXcd c1 = trim_grid(
        coeff_grid(spec.support(0), monomial_coeffs(spec.support(0), f.coeffs[0])),
        sx1, sy1);
    const Eigen::MatrixXcd c2 = trim_grid(
        coeff_grid(spec.support(1), monomial_coeffs(spec.support(1), f.coeffs[1])),
        sx2, sy2);

    const int dy1 = static_cast<int>(c1.cols()) - 1;
    const int dy2 = static_cast<int>(c2.cols()) - 1;
    const int dx1 = static_cast<int>(c1.rows()) - 1;
    const int dx2 = static_cast<int>(c2.rows()) - 1;
    if (dy1 + dy2 == 0) {
        out.ok = false;
        out.note = "no dependence on the second variable";
        return out;
    }

    // Sylvester resultant in y, sampled on the unit circle in x and
    // recovered by inverse DFT.
    const int m = dy1 + dy2;
    const int degx = dx1 * dy2 + dx2 * dy1;
    const int big = degx + 1;
    std::vector<cd> dets(big);
    for (int t = 0; t < big; ++t) {
        const cd x = std::polar(1.0, 2.0 * M_PI * t / big);
        const Eigen::VectorXcd p1 = y_poly_at(c1, x);
        const Eigen::VectorXcd p2 = y_poly_at(c2, x);
        Eigen::MatrixXcd syl = Eigen::MatrixXcd::Zero(m, m);
        for (int r = 0; r < dy2; ++r)
            for (int k = 0; k <= dy1; ++k) syl(r, r + k) = p1[dy1 - k];
        for (int r = 0; r < dy1; ++r)
            for (int k = 0; k <= dy2; ++k) syl(dy2 + r, r + k) = p2[dy2 - k];
        dets[t] = (m == 0) ? cd(1.0) : syl.determinant();
    }
    Eigen::VectorXcd res(big);
    for (int j = 0; j < big; ++j) {
        cd acc = 0.0;
        for (int t = 0; t < big; ++t)
            acc += dets[t] * std::polar(1.0, -2.0 * M_PI * j * t / big);
        res[j] = acc / static_cast<double>(big);
    }

    const double rscale = res.cwiseAbs().maxCoeff();
    if (!(rscale > 0.0) || !std::isfinite(rscale)) {
        out.ok = false;
        out.note = "resultant vanished";
        return out;
    }
    int tail = 0, head = static_cast<int>(res.size()) - 1;
    while (tail < head && std::abs(res[tail]) <= 1e-10 * rscale) ++tail;
    while (head > tail && std::abs(res[head]) <= 1e-10 * rscale) --head;
    if (head == tail) {
        out.ok = false;
        out.note = "resultant degenerated to a monomial";
        return out;
    }
    const Eigen::VectorXcd rpoly = res.segment(tail, head - tail + 1);

    for (cd x : companion_roots(rpoly)) {
        x = polish_univariate(rpoly, x);
        if (std::abs(x) <= kMinAbsCoord) continue;
        // Pick the equation with the healthier leading y-coefficient.
        const Eigen::VectorXcd p1 = y_poly_at(c1, x);
        const Eigen::VectorXcd p2 = y_poly_at(c2, x);
        const double lead1 =
            dy1 > 0 ? std::abs(p1[dy1]) / (p1.cwiseAbs().maxCoeff() + 1e-300)
                    : 0.0;
        const double lead2 =
            dy2 > 0 ? std::abs(p2[dy2]) / (p2.cwiseAbs().maxCoeff() + 1e-300)
                    : 0.0;
        const Eigen::VectorXcd& yp = (lead1 >= lead2) ? p1 : p2;
        if (yp.size() < 2) continue;
        for (cd y : companion_roots(yp)) {
            if (std::abs(y) <= kMinAbsCoord) continue;
            cd rx = x, ry = y;
            if (!newton_2d(c1, c2, rx, ry)) continue;
            if (std::abs(rx) <= kMinAbsCoord || std::abs(ry) <= kMinAbsCoord)
                continue;
            Root root;
            root.z = Eigen::VectorXcd(2);
            root.z << rx, ry;
            root.at = toric_of(root.z);
            root.residual = rel_residual(spec, f, root.at);
            if (root.residual > kResidualTol) continue;
            bool dup = false;
            for (const auto& r : out.roots) {
                const double dp = (r.at.p - root.at.p).cwiseAbs().maxCoeff();
                double dq = 0.0;
                for (int j = 0; j < 2; ++j)
                    dq = std::max(dq,
                                  std::abs(wrap_angle(r.at.q[j] - root.at.q[j])));
                if (dp < 1e-6 && dq < 1e-6) {
                    dup = true;
                    break;
                }
            }
            if (!dup) out.roots.push_back(std::move(root));
        }
    }
    return out;
}

RootSet solve_system(const SystemSpec& spec, const PolySample& f) {
    if (spec.dims() == 1)
        return solve_univariate(spec.support(0),
                                monomial_coeffs(spec.support(0), f.coeffs[0]));
    if (is_linear_shape(spec)) return solve_linear(spec, f);
    if (spec.dims() == 2) return solve_bivariate(spec, f);
    throw DimensionLimitError(
        "root solving beyond two variables is limited to the linear shape");
}

bool point_in_region(const ToricPoint& at, const Region& region) {
    for (int d = 0; d < at.p.size(); ++d) {
        if (at.p[d] < region.p[d].lo || at.p[d] > region.p[d].hi) return false;
    }
    if (region.q_full) return true;
    for (int d = 0; d < at.q.size(); ++d) {
        const double q = wrap_angle(at.q[d]);
        if (q < region.q[d].lo || q > region.q[d].hi) return false;
    }
    return true;
}

int count_in_region(const RootSet& rs, const Region& region) {
    int c = 0;
    for (const auto& r : rs.roots)
        if (point_in_region(r.at, region)) ++c;
    return c;
}

CountMcResult count_roots_mc(const SystemSpec& spec, const Region& region,
                             std::uint64_t samples, std::uint64_t seed,
                             int workers) {
    if (static_cast<int>(region.p.size()) != spec.dims())
        throw ValidationError("region dimension mismatch");
    const std::uint64_t block = 1024;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<double> sum1(nblocks, 0.0), sum2(nblocks, 0.0);
    std::vector<std::uint64_t> rej(nblocks, 0);

    const auto run_block = [&](std::uint64_t b) {
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(samples, lo + block);
        for (std::uint64_t s = lo; s < hi; ++s) {
            const PolySample f = sample_system(spec, seed, s);
            const RootSet rs = solve_system(spec, f);
            if (!rs.ok) {
                ++rej[b];
                continue;
            }
            const double c = count_in_region(rs, region);
            sum1[b] += c;
            sum2[b] += c * c;
        }
    };
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                while (true) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= nblocks) return;
                    run_block(b);
                }
            });
        for (auto& th : pool) th.join();
    }

    CountMcResult out;
    out.samples = samples;
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        s1 += sum1[b];
        s2 += sum2[b];
        out.rejected += rej[b];
    }
    const double kept = static_cast<double>(samples - out.rejected);
    out.mean = s1 / kept;
    const double var = std::max(0.0, s2 / kept - out.mean * out.mean);
    out.stderr_ = std::sqrt(var / kept);
    return out;
}

}  // namespace toricvol
