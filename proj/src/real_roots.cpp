#include "toricvol/real_roots.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "toricvol/condition.hpp"
#include "toricvol/quadrature.hpp"
#include "toricvol/rng.hpp"
#include "toricvol/solver.hpp"

namespace toricvol {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void validate_box(const SystemSpec& spec, const std::vector<Interval>& box) {
    if (static_cast<int>(box.size()) != spec.dims())
        throw ValidationError("box dimension mismatch");
    for (const auto& iv : box) {
        if (!iv.bounded() || !(iv.hi > iv.lo))
            throw ValidationError("box must be bounded with positive length");
    }
}

bool p_in_box(const Eigen::VectorXd& p, const std::vector<Interval>& box) {
    for (int d = 0; d < p.size(); ++d)
        if (p[d] < box[d].lo || p[d] > box[d].hi) return false;
    return true;
}

// Positive real roots of a univariate sample, reported as p = log x.
// Complex companion roots are filtered to the near-real ones, polished on
// the real axis, then deduplicated (conjugate pairs collapse to one point).
std::vector<double> positive_real_roots(const SystemSpec& spec,
                                        const PolySample& f, bool* ok) {
    const SupportSpec& sup = spec.supports()[0];
    const Eigen::VectorXcd mono = monomial_coeffs(sup, f.coeffs[0]);
    const RootSet rs = solve_univariate(sup, mono);
    if (!rs.ok) {
        *ok = false;
        return {};
    }
    *ok = true;
    const int deg = static_cast<int>(std::lround(sup.exponents().col(0).maxCoeff()));
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(deg + 1);
    for (int r = 0; r < mono.size(); ++r) {
        const int e = static_cast<int>(std::lround(sup.exponents()(r, 0)));
        dense[e] += mono[r].real();
    }
    const auto eval = [&](double x, double* dp) {
        double v = dense[deg], d = 0.0;
        for (int k = deg - 1; k >= 0; --k) {
            d = d * x + v;
            v = v * x + dense[k];
        }
        *dp = d;
        return v;
    };
    std::vector<double> xs;
    for (const auto& r : rs.roots) {
        if (std::abs(r.z[0].imag()) > 1e-8 * (1.0 + std::abs(r.z[0]))) continue;
        double x = r.z[0].real();
        if (!(x > 0.0)) continue;
        for (int it = 0; it < 8; ++it) {
            double d;
            const double v = eval(x, &d);
            if (d == 0.0) break;
            const double nx = x - v / d;
            if (!std::isfinite(nx) || nx <= 0.0) break;
            if (std::abs(nx - x) <= 1e-15 * x) {
                x = nx;
                break;
            }
            x = nx;
        }
        double d;
        const double v = eval(x, &d);
        double mag = 0.0;
        for (int k = 0; k <= deg; ++k)
            mag = std::max(mag, std::abs(dense[k]) * std::pow(x, k));
        if (std::abs(v) > 1e-7 * (mag + 1e-300)) continue;
        xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    std::vector<double> out;
    for (double x : xs) {
        if (!out.empty() && std::abs(x - out.back()) <= 1e-9 * (1.0 + x))
            continue;
        out.push_back(x);
    }
    std::vector<double> ps;
    for (double x : out) ps.push_back(std::log(x));
    return ps;
}

// Count of roots with every coordinate real and positive, p inside the box.
int positive_count(const SystemSpec& spec, const PolySample& f,
                   const std::vector<Interval>& box, bool* ok) {
    if (spec.dims() == 1 && spec.supports()[0].rows() > 2) {
        const std::vector<double> ps = positive_real_roots(spec, f, ok);
        if (!*ok) return 0;
        int c = 0;
        for (double p : ps)
            if (p >= box[0].lo && p <= box[0].hi) ++c;
        return c;
    }
    const RootSet rs = solve_system(spec, f);
    if (!rs.ok) {
        *ok = false;
        return 0;
    }
    *ok = true;
    int c = 0;
    for (const auto& r : rs.roots) {
        bool positive = true;
        for (int d = 0; d < spec.dims(); ++d) {
            if (std::abs(r.z[d].imag()) > 1e-8 * (1.0 + std::abs(r.z[d])) ||
                r.z[d].real() <= 0.0) {
                positive = false;
                break;
            }
        }
        if (positive && p_in_box(r.at.p, box)) ++c;
    }
    return c;
}

}  // namespace

RealMcResult expected_real_mc(const SystemSpec& spec,
                              const std::vector<Interval>& p_box,
                              std::uint64_t samples, std::uint64_t seed,
                              int workers) {
    validate_box(spec, p_box);
    if (spec.field() != Field::real_coeffs)
        throw ValidationError("real root counting needs a real coefficient field");
    const std::uint64_t block = 1024;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<double> sum1(nblocks, 0.0), sum2(nblocks, 0.0);
    std::vector<std::uint64_t> rej(nblocks, 0);

    const auto run_block = [&](std::uint64_t b) {
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(samples, lo + block);
        for (std::uint64_t s = lo; s < hi; ++s) {
            const PolySample f = sample_system(spec, seed, s);
            bool ok = true;
            const int c = positive_count(spec, f, p_box, &ok);
            if (!ok) {
                ++rej[b];
                continue;
            }
            sum1[b] += c;
            sum2[b] += static_cast<double>(c) * c;
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

    double s1 = 0.0, s2 = 0.0;
    std::uint64_t rejected = 0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        s1 += sum1[b];
        s2 += sum2[b];
        rejected += rej[b];
    }
    RealMcResult out;
    out.samples = samples;
    out.reject_rate = static_cast<double>(rejected) / samples;
    const double kept = static_cast<double>(samples - rejected);
    out.mean = s1 / kept;
    const double var = std::max(0.0, s2 / kept - out.mean * out.mean);
    out.stderr_ = std::sqrt(var / kept);
    return out;
}

double real_count_bound(const SystemSpec& spec,
                        const std::vector<Interval>& p_box, double tol) {
    validate_box(spec, p_box);
    const int n = spec.dims();
    double vol = 1.0;
    for (const auto& iv : p_box) vol *= iv.length();
    const double mass =
        integrate_density(spec, Region::p_box(p_box), tol).value;
    return std::pow(4.0 * kPi * kPi, -0.5 * n) * std::sqrt(vol) *
           std::sqrt(std::pow(kPi, n) * mass);
}

double real_density_count(const SystemSpec& spec,
                          const std::vector<Interval>& p_box, double tol) {
    validate_box(spec, p_box);
    if (spec.dims() != 1 || !spec.unmixed())
        throw DimensionLimitError(
            "real density integration only covers one unmixed support in one variable");
    const auto f = [&](double p) {
        Eigen::VectorXd pv(1);
        pv[0] = p;
        // The metric underflows to a tiny negative number deep in the
        // vertex regions; clamp before the square root.
        return std::sqrt(std::max(0.0, metric_at(spec.supports()[0], pv)(0, 0)));
    };
    double prev = 0.0;
    for (int order = 16; order <= 4096; order *= 2) {
        const auto& gl = gauss_legendre(order);
        double acc = 0.0;
        const double mid = 0.5 * (p_box[0].lo + p_box[0].hi);
        const double half = 0.5 * p_box[0].length();
        for (int k = 0; k < order; ++k)
            acc += gl.second[k] * f(mid + half * gl.first[k]);
        acc *= half;
        if (order > 16 && std::abs(acc - prev) <= tol * std::abs(acc) + 1e-14)
            return acc / kPi;
        prev = acc;
    }
    return prev / kPi;
}

RealTailReport real_condition_tail(const SystemSpec& spec,
                                   const std::vector<Interval>& p_box,
                                   const std::vector<double>& eps_list,
                                   std::uint64_t samples, std::uint64_t seed,
                                   int workers, double wilson_z) {
    validate_box(spec, p_box);
    if (spec.field() != Field::real_coeffs)
        throw ValidationError("real tail analysis needs a real coefficient field");
    if (eps_list.empty()) throw ValidationError("empty epsilon list");
    const int n = spec.dims();
    const SystemSpec lin = linear_system(n, Field::real_coeffs);

    const std::size_t ne = eps_list.size();
    const std::uint64_t block = 512;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<std::uint64_t> tail(nblocks * ne, 0), lin_tail(nblocks * ne, 0),
        rej(nblocks, 0);
    std::vector<double> csum(nblocks, 0.0);

    const auto mu_at_positive_roots = [&](const SystemSpec& sp,
                                          const PolySample& f,
                                          const std::vector<Interval>& box,
                                          bool box_filter, bool* ok,
                                          int* count) {
        const RootSet rs = solve_system(sp, f);
        double mu = 0.0;
        *count = 0;
        if (!rs.ok) {
            *ok = false;
            return mu;
        }
        *ok = true;
        for (const auto& r : rs.roots) {
            bool real_root = true;
            bool positive = true;
            for (int d = 0; d < sp.dims(); ++d) {
                if (std::abs(r.z[d].imag()) > 1e-8 * (1.0 + std::abs(r.z[d]))) {
                    real_root = false;
                    break;
                }
                if (r.z[d].real() <= 0.0) positive = false;
            }
            if (!real_root) continue;
            if (box_filter) {
                if (!positive || !p_in_box(r.at.p, box)) continue;
            }
            ++*count;
            const ConditionReport rep = fiber_distance(sp, f, r.at, 512);
            mu = std::max(mu, inverse_distance(rep));
        }
        return mu;
    };

    const auto run_block = [&](std::uint64_t b) {
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(samples, lo + block);
        for (std::uint64_t s = lo; s < hi; ++s) {
            const PolySample f = sample_system(spec, seed, s);
            bool ok = true;
            int count = 0;
            const double mu =
                mu_at_positive_roots(spec, f, p_box, true, &ok, &count);
            if (!ok) {
                ++rej[b];
            } else {
                csum[b] += count;
                if (count > 0) {
                    for (std::size_t e = 0; e < ne; ++e)
                        if (mu > 1.0 / eps_list[e]) ++tail[b * ne + e];
                }
            }
            // The comparison family: one real root of either sign.
            const PolySample fl = sample_system(lin, seed, (1ULL << 32) + s);
            bool lok = true;
            int lcount = 0;
            const double lmu =
                mu_at_positive_roots(lin, fl, p_box, false, &lok, &lcount);
            if (lok && lcount > 0) {
                for (std::size_t e = 0; e < ne; ++e)
                    if (lmu > 1.0 / eps_list[e]) ++lin_tail[b * ne + e];
            }
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

    RealTailReport rep;
    rep.samples = samples;
    std::uint64_t rejected = 0;
    double ctotal = 0.0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        rejected += rej[b];
        ctotal += csum[b];
    }
    const std::uint64_t kept = samples - rejected;
    rep.e_of_u = kept ? ctotal / kept : 0.0;

    for (std::size_t e = 0; e < ne; ++e) {
        RealTailPoint pt;
        pt.eps = eps_list[e];
        std::uint64_t hits = 0, lin_hits = 0;
        for (std::uint64_t b = 0; b < nblocks; ++b) {
            hits += tail[b * ne + e];
            lin_hits += lin_tail[b * ne + e];
        }
        pt.tail_count = hits;
        pt.empirical = kept ? static_cast<double>(hits) / kept : 0.0;
        const auto wi = wilson_interval(hits, kept, wilson_z);
        pt.wilson_lo = wi.first;
        pt.wilson_hi = wi.second;
        pt.nu_real = static_cast<double>(lin_hits) / samples;
        pt.rhs = rep.e_of_u * pt.nu_real;
        rep.points.push_back(pt);
    }
    return rep;
}

}  // namespace toricvol
