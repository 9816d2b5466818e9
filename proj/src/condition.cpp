#include "toricvol/condition.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "toricvol/quadrature.hpp"
#include "toricvol/rng.hpp"

namespace toricvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd spd_power(const Eigen::MatrixXd& m, double expo) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    for (int i = 0; i < lam.size(); ++i)
        lam[i] = (lam[i] > 0) ? std::pow(lam[i], expo) : 0.0;
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd spd_log(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < lam.size(); ++i) lam[i] = std::log(std::max(lam[i], 1e-300));
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd spd_exp(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd lam = es.eigenvalues().array().exp();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

bool metrics_all_equal(const std::vector<Eigen::MatrixXd>& mats) {
    for (std::size_t i = 1; i < mats.size(); ++i) {
        const double scale = mats[0].cwiseAbs().maxCoeff() + 1e-300;
        if ((mats[i] - mats[0]).cwiseAbs().maxCoeff() > 1e-12 * scale)
            return false;
    }
    return true;
}

bool metrics_proportional(const std::vector<Eigen::MatrixXd>& mats) {
    const double t0 = mats[0].trace();
    for (std::size_t i = 1; i < mats.size(); ++i) {
        const double r = mats[i].trace() / t0;
        const double scale = mats[i].cwiseAbs().maxCoeff() + 1e-300;
        if ((mats[i] - r * mats[0]).cwiseAbs().maxCoeff() > 1e-10 * scale)
            return false;
    }
    return true;
}

// Derivative-free maximization of `obj` over the unit sphere of C^n viewed
// as R^{2n}: coordinate pattern search with a shrinking step.
Eigen::VectorXcd sphere_search(
    const std::function<double(const Eigen::VectorXcd&)>& obj,
    Eigen::VectorXcd v0, double* best_out) {
    const int n = static_cast<int>(v0.size());
    Eigen::VectorXd x(2 * n);
    for (int i = 0; i < n; ++i) {
        x[2 * i] = v0[i].real();
        x[2 * i + 1] = v0[i].imag();
    }
    x.normalize();
    const auto unpack = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v[i] = {y[2 * i], y[2 * i + 1]};
        return v;
    };
    double best = obj(unpack(x));
    double step = 0.3;
    int evals = 0;
    while (step > 1e-8 && evals < 20000) {
        bool improved = false;
        for (int k = 0; k < 2 * n; ++k) {
            for (double s : {step, -step}) {
                Eigen::VectorXd y = x;
                y[k] += s;
                y.normalize();
                const double val = obj(unpack(y));
                ++evals;
                if (val > best * (1.0 + 1e-14)) {
                    best = val;
                    x = y;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    if (best_out) *best_out = best;
    return unpack(x);
}

}  // namespace

MetricFamily metrics_at(const SystemSpec& spec, const Eigen::VectorXd& p) {
    MetricFamily fam;
    fam.mats.reserve(spec.size());
    for (const auto& s : spec.supports()) fam.mats.push_back(metric_at(s, p));
    return fam;
}

double inverse_distance(const ConditionReport& r) {
    return r.singular ? kInf : 1.0 / r.dp;
}

ConditionReport fiber_distance(const SystemSpec& spec, const PolySample& f,
                               const ToricPoint& at, int search_budget) {
    const int n = spec.dims();
    PolySample fn = f;
    for (auto& c : fn.coeffs) c /= c.norm();

    const Eigen::MatrixXcd d = condition_matrix(spec, fn, at);
    const MetricFamily fam = metrics_at(spec, at.p);
    // Row i of d has norm at most |M_i^{1/2}|, so that is the natural scale
    // for deciding that the matrix is numerically singular. A purely
    // relative test would never fire for n = 1.
    double dscale = 0.0;
    for (const auto& m : fam.mats)
        dscale = std::max(dscale, std::sqrt(std::abs(m.trace())));
    Eigen::JacobiSVD<Eigen::MatrixXcd> dsvd(d);
    ConditionReport rep;
    if (dsvd.singularValues()[n - 1] <=
        1e-13 * (dsvd.singularValues()[0] + dscale)) {
        rep.singular = true;
        rep.dp = 0.0;
        rep.inv_lower = rep.inv_upper = kInf;
        rep.v_star = Eigen::VectorXcd::Zero(n);
        return rep;
    }
    const Eigen::MatrixXcd dinv = d.fullPivLu().inverse();

    std::vector<Eigen::MatrixXd> roots_of_m;
    roots_of_m.reserve(fam.mats.size());
    for (const auto& m : fam.mats) roots_of_m.push_back(spd_power(m, 0.5));

    // The exact upper bound: largest singular value over the family.
    double upper = 0.0;
    int arg_upper = 0;
    std::vector<Eigen::VectorXcd> special;
    for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXcd x =
            roots_of_m[i].cast<std::complex<double>>() * dinv;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(x, Eigen::ComputeFullV);
        if (svd.singularValues()[0] > upper) {
            upper = svd.singularValues()[0];
            arg_upper = i;
        }
        special.push_back(svd.matrixV().col(0));            // max direction
        special.push_back(svd.matrixV().col(n - 1));        // min direction
    }
    rep.inv_upper = upper;

    if (metrics_all_equal(fam.mats)) {
        // One metric: every bound collapses to the same singular value.
        rep.dp = 1.0 / upper;
        rep.inv_lower = upper;
        rep.v_star = special[static_cast<std::size_t>(2 * arg_upper)];
        return rep;
    }

    const auto quad_forms = [&](const Eigen::VectorXcd& v) {
        const Eigen::VectorXcd w = dinv * v;
        const Eigen::VectorXd wr = w.real(), wi = w.imag();
        Eigen::VectorXd qf(n);
        for (int i = 0; i < n; ++i)
            qf[i] = wr.dot(fam.mats[i] * wr) + wi.dot(fam.mats[i] * wi);
        return qf;
    };
    const auto obj_dp = [&](const Eigen::VectorXcd& v) {
        const Eigen::VectorXd qf = quad_forms(v);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::norm(v[i]) / qf[i];
        return std::sqrt(acc);
    };
    const auto obj_low = [&](const Eigen::VectorXcd& v) {
        return std::sqrt(quad_forms(v).minCoeff());
    };

    double dp_best = kInf, low_best = 0.0;
    Eigen::VectorXcd dp_arg, low_arg;
    const auto consider = [&](const Eigen::VectorXcd& v) {
        const double a = obj_dp(v);
        if (a < dp_best) {
            dp_best = a;
            dp_arg = v;
        }
        const double b = obj_low(v);
        if (b > low_best) {
            low_best = b;
            low_arg = v;
        }
    };

    GaussianStream rng(0x746f726963ULL, 0);  // fixed: report is deterministic
    for (const auto& v : special) consider(v.normalized());
    for (int i = 0; i < n; ++i)
        consider(Eigen::VectorXcd::Unit(n, i));
    for (int k = 0; k < search_budget; ++k) {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.cnormal();
        consider(v.normalized());
    }

    double polished = 0.0;
    const Eigen::VectorXcd low_ref = sphere_search(obj_low, low_arg, &polished);
    if (polished > low_best) {
        low_best = polished;
        low_arg = low_ref;
    }
    const Eigen::VectorXcd dp_ref = sphere_search(
        [&](const Eigen::VectorXcd& v) { return -obj_dp(v); }, dp_arg,
        &polished);
    if (-polished < dp_best) {
        dp_best = -polished;
        dp_arg = dp_ref;
    }
    // Cross-evaluate so the returned values always sandwich: for every v,
    // obj_dp(v) <= 1/obj_low(v), hence feeding each argmax into the other
    // objective preserves inv_lower <= 1/dp.
    consider(low_arg);
    consider(dp_arg);

    rep.dp = dp_best;
    rep.inv_lower = low_best;
    rep.v_star = dp_arg;
    return rep;
}

MuResult mu_of_roots(const SystemSpec& spec, const PolySample& f,
                     const RootSet& roots, const Region& region,
                     int search_budget) {
    MuResult out;
    if (!roots.ok) {
        out.rejected = true;
        return out;
    }
    for (const auto& r : roots.roots) {
        if (!point_in_region(r.at, region)) continue;
        ++out.roots_in_region;
        const ConditionReport rep = fiber_distance(spec, f, r.at, search_budget);
        out.mu = std::max(out.mu, inverse_distance(rep));
    }
    return out;
}

MuResult mu_region(const SystemSpec& spec, const PolySample& f,
                   const Region& region, int search_budget) {
    return mu_of_roots(spec, f, solve_system(spec, f), region, search_budget);
}

Eigen::MatrixXd spd_geometric_mean(const std::vector<Eigen::MatrixXd>& mats) {
    if (mats.empty()) throw ValidationError("geometric mean of an empty family");
    if (mats.size() == 1) return mats[0];
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mats[0].rows(), mats[0].cols());
    for (const auto& m : mats) g += m;
    g /= static_cast<double>(mats.size());
    // Karcher fixed point: average the logs at the current base point.
    for (int it = 0; it < 200; ++it) {
        const Eigen::MatrixXd gh = spd_power(g, 0.5);
        const Eigen::MatrixXd gih = spd_power(g, -0.5);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.rows(), g.cols());
        for (const auto& m : mats) acc += spd_log(gih * m * gih);
        acc /= static_cast<double>(mats.size());
        acc = 0.5 * (acc + acc.transpose());
        if (acc.cwiseAbs().maxCoeff() < 1e-13) break;
        g = gh * spd_exp(acc) * gh;
        g = 0.5 * (g + g.transpose());
    }
    return g;
}

double mixed_dilation(const MetricFamily& family) {
    const auto& mats = family.mats;
    if (mats.empty()) throw ValidationError("mixed dilation of an empty family");
    const int n = static_cast<int>(mats[0].rows());
    if (n == 1 || metrics_proportional(mats)) return 1.0;

    const auto cond_of = [&](const Eigen::MatrixXd& l) {
        double worst = 1.0;
        for (const auto& m : mats) {
            Eigen::MatrixXd s = l.transpose() * m * l;
            s = 0.5 * (s + s.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s,
                                                              Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues()[0];
            const double hi = es.eigenvalues()[n - 1];
            if (!(lo > 0.0)) return kInf;
            worst = std::max(worst, hi / lo);
        }
        return worst;
    };

    std::vector<Eigen::MatrixXd> candidates;
    candidates.push_back(spd_power(spd_geometric_mean(mats), -0.5));
    candidates.push_back(Eigen::MatrixXd::Identity(n, n));
    for (const auto& m : mats) candidates.push_back(spd_power(m, -0.5));

    Eigen::MatrixXd best_l = candidates[0];
    double best = cond_of(best_l);
    for (const auto& l : candidates) {
        const double c = cond_of(l);
        if (c < best) {
            best = c;
            best_l = l;
        }
    }
    // Coordinate descent over the entries of L.
    double step = 0.25;
    while (step > 1e-5) {
        bool improved = false;
        const double scale = best_l.cwiseAbs().maxCoeff();
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                for (double s : {step, -step}) {
                    Eigen::MatrixXd l = best_l;
                    l(r, c) += s * scale;
                    const double val = cond_of(l);
                    if (val < best * (1.0 - 1e-12)) {
                        best = val;
                        best_l = l;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

double kappa_region(const SystemSpec& spec, const Region& region, int grid) {
    if (static_cast<int>(region.p.size()) != spec.dims())
        throw ValidationError("region dimension mismatch");
    std::vector<Interval> box = region.p;
    for (auto& iv : box) {
        if (!std::isfinite(iv.lo)) iv.lo = std::min(-5.0, iv.hi - 1.0);
        if (!std::isfinite(iv.hi)) iv.hi = std::max(5.0, iv.lo + 1.0);
    }
    const int n = spec.dims();
    std::vector<int> idx(n, 0);
    double worst = 1.0;
    // Closed grid: endpoints included, center included for odd counts.
    while (true) {
        Eigen::VectorXd p(n);
        for (int d = 0; d < n; ++d) {
            const double t =
                grid > 1 ? static_cast<double>(idx[d]) / (grid - 1) : 0.5;
            p[d] = box[d].lo + t * (box[d].hi - box[d].lo);
        }
        worst = std::max(worst, mixed_dilation(metrics_at(spec, p)));
        int d = 0;
        while (d < n && ++idx[d] == grid) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return worst;
}

double intersection_norm(const MetricFamily& family, const Eigen::VectorXd& u) {
    double worst = 0.0;
    for (const auto& m : family.mats)
        worst = std::max(worst, std::sqrt(std::max(0.0, u.dot(m * u))));
    return worst;
}

std::pair<double, double> wilson_interval(std::uint64_t hits,
                                          std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double nt = static_cast<double>(trials);
    const double ph = static_cast<double>(hits) / nt;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = (ph + z2 / (2.0 * nt)) / denom;
    const double half =
        z * std::sqrt(ph * (1.0 - ph) / nt + z2 / (4.0 * nt * nt)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

TailReport nu_tail_mc(const SystemSpec& spec, const Region& region,
                      const std::vector<double>& eps_list,
                      std::uint64_t samples, std::uint64_t seed, int workers,
                      double wilson_z) {
    if (eps_list.empty()) throw ValidationError("empty epsilon list");
    const int n = spec.dims();
    TailReport rep;
    rep.samples = samples;
    rep.kappa_hat = kappa_region(spec, region, 7);

    const SystemSpec lin = linear_system(n);
    const double num = integrate_density(spec, region, 1e-6).value;
    const double den = integrate_density(lin, region, 1e-6).value;
    rep.density_ratio = num / den;

    const std::size_t ne = eps_list.size();
    const std::uint64_t block = 256;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<std::uint64_t> tail(nblocks * ne, 0), lin_tail(nblocks * ne, 0),
        rejects(nblocks, 0);

    // Thresholds for the linear reference: scaled by sqrt(kappa).
    std::vector<double> lin_eps(ne);
    for (std::size_t e = 0; e < ne; ++e)
        lin_eps[e] = std::sqrt(rep.kappa_hat) * eps_list[e];
    const Region full = Region::full_space(n);

    const auto run_block = [&](std::uint64_t b) {
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(samples, lo + block);
        for (std::uint64_t s = lo; s < hi; ++s) {
            const PolySample f = sample_system(spec, seed, s);
            const MuResult mu = mu_region(spec, f, region, 512);
            if (mu.rejected) {
                ++rejects[b];
            } else {
                for (std::size_t e = 0; e < ne; ++e)
                    if (mu.mu > 1.0 / eps_list[e]) ++tail[b * ne + e];
            }
            // Independent stream for the comparison family.
            const PolySample fl =
                sample_system(lin, seed, (1ULL << 32) + s);
            const MuResult ml = mu_of_roots(lin, fl, solve_linear(lin, fl), full);
            if (!ml.rejected) {
                for (std::size_t e = 0; e < ne; ++e)
                    if (ml.mu > 1.0 / lin_eps[e]) ++lin_tail[b * ne + e];
            }
        }
    };

    if (workers <= 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                while (true) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= nblocks) return;
                    run_block(b);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::uint64_t rejected = 0;
    for (auto r : rejects) rejected += r;
    rep.rejected = rejected;
    const std::uint64_t kept = samples - rejected;

    for (std::size_t e = 0; e < ne; ++e) {
        TailPoint pt;
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
        const double nu_lin = static_cast<double>(lin_hits) / samples;
        pt.rhs = rep.density_ratio * nu_lin;
        rep.points.push_back(pt);
    }
    return rep;
}

}  // namespace toricvol
