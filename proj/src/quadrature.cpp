#include "toricvol/quadrature.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "toricvol/rng.hpp"

namespace toricvol {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMcTruncation = 30.0;
}

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

double Interval::length() const { return hi - lo; }

Region Region::full_space(int dims) {
    Region r;
    r.p.assign(dims, Interval{-kInf, kInf});
    r.q_full = true;
    return r;
}

Region Region::p_box(std::vector<Interval> box) {
    Region r;
    r.p = std::move(box);
    r.q_full = true;
    return r;
}

double Region::q_measure(int dims) const {
    if (q_full) return std::pow(2.0 * M_PI, dims);
    if (static_cast<int>(q.size()) != dims)
        throw ValidationError("q box dimension mismatch");
    double m = 1.0;
    for (const auto& iv : q) {
        if (!iv.bounded() || iv.hi < iv.lo)
            throw ValidationError("q intervals must be bounded with lo <= hi");
        if (iv.length() > 2.0 * M_PI + 1e-12)
            throw ValidationError("q interval is longer than the full circle");
        m *= iv.length();
    }
    return m;
}

bool Region::p_bounded() const {
    for (const auto& iv : p)
        if (!iv.bounded()) return false;
    return true;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int order) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
        cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    std::vector<double> x(order), w(order);
    // Newton on Legendre polynomials from the Chebyshev initial guess.
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = -t;
        x[order - 1 - i] = t;
        const double wi = 2.0 / ((1.0 - t * t) * pp * pp);
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    return cache.emplace(order, std::make_pair(std::move(x), std::move(w)))
        .first->second;
}

namespace {

// Tensor Gauss-Legendre of f over a bounded box at a fixed order per axis.
double tensor_gl(const std::function<double(const Eigen::VectorXd&)>& f,
                 const std::vector<Interval>& box, int order, long& evals) {
    const int n = static_cast<int>(box.size());
    const auto& [nodes, weights] = gauss_legendre(order);
    Eigen::VectorXd p(n);
    std::vector<int> idx(n, 0);
    double acc = 0.0;
    while (true) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            const double mid = 0.5 * (box[d].lo + box[d].hi);
            const double half = 0.5 * (box[d].hi - box[d].lo);
            p[d] = mid + half * nodes[idx[d]];
            w *= half * weights[idx[d]];
        }
        acc += w * f(p);
        ++evals;
        int d = 0;
        while (d < n && ++idx[d] == order) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return acc;
}

QuadResult gl_adaptive(const std::function<double(const Eigen::VectorXd&)>& f,
                       const std::vector<Interval>& box, double tol,
                       int max_order) {
    QuadResult res;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int order = 8; order <= max_order; order *= 2) {
        const double val = tensor_gl(f, box, order, res.evals);
        if (std::isfinite(prev)) {
            res.error = std::abs(val - prev);
            if (res.error <= tol * std::abs(val) + 1e-14) {
                res.value = val;
                res.converged = true;
                return res;
            }
        }
        prev = val;
        res.value = val;
    }
    res.converged = false;
    return res;
}

std::vector<Interval> truncate_box(const std::vector<Interval>& box, double r) {
    std::vector<Interval> out = box;
    for (auto& iv : out) {
        if (!std::isfinite(iv.lo)) iv.lo = std::min(-r, iv.hi - 1.0);
        if (!std::isfinite(iv.hi)) iv.hi = std::max(r, iv.lo + 1.0);
    }
    return out;
}

void check_p_box(const Region& region, int dims) {
    if (static_cast<int>(region.p.size()) != dims)
        throw ValidationError("p box dimension mismatch");
    for (const auto& iv : region.p)
        if (iv.hi < iv.lo) throw ValidationError("p interval with hi < lo");
}

}  // namespace

QuadResult integrate_density(const SystemSpec& spec, const Region& region,
                             double tol) {
    if (spec.dims() > 3)
        throw DimensionLimitError(
            "density quadrature supports dimensions 1 to 3");
    check_p_box(region, spec.dims());
    const double qm = region.q_measure(spec.dims());
    const auto f = [&](const Eigen::VectorXd& p) {
        return root_density(spec, p);
    };
    const int max_order = spec.dims() >= 3 ? 128 : (spec.dims() == 2 ? 512 : 4096);

    QuadResult res;
    if (region.p_bounded()) {
        res = gl_adaptive(f, region.p, tol, max_order);
    } else {
        // Double the truncation radius until the integral stabilizes.
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (double r = 8.0; r <= 128.0; r *= 2.0) {
            const QuadResult inner =
                gl_adaptive(f, truncate_box(region.p, r), tol * 0.5, max_order);
            res.evals += inner.evals;
            res.value = inner.value;
            res.converged = inner.converged;
            if (!inner.converged) break;
            if (std::isfinite(prev)) {
                const double change = std::abs(inner.value - prev);
                res.error = std::max(inner.error, change);
                if (change <= tol * std::abs(inner.value) + 1e-14) {
                    res.converged = true;
                    break;
                }
                res.converged = false;
            }
            prev = inner.value;
        }
    }
    res.value *= qm;
    res.error *= qm;
    return res;
}

McResult integrate_mc(const SystemSpec& spec, const Region& region,
                      std::uint64_t samples, std::uint64_t seed, int workers) {
    check_p_box(region, spec.dims());
    if (samples == 0) throw ValidationError("integrate_mc needs samples > 0");
    const double qm = region.q_measure(spec.dims());
    const std::vector<Interval> box = truncate_box(region.p, kMcTruncation);
    double volume = qm;
    for (const auto& iv : box) volume *= iv.length();

    // Fixed-size blocks with one RNG stream per block; partial sums combine
    // in block order, so the worker count never changes the result.
    const std::uint64_t block = 4096;
    const std::uint64_t nblocks = (samples + block - 1) / block;
    std::vector<double> sum1(nblocks, 0.0), sum2(nblocks, 0.0);

    const auto run_block = [&](std::uint64_t b) {
        GaussianStream rng(seed, b);
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(samples, lo + block);
        Eigen::VectorXd p(spec.dims());
        double s1 = 0.0, s2 = 0.0;
        for (std::uint64_t k = lo; k < hi; ++k) {
            for (int d = 0; d < spec.dims(); ++d)
                p[d] = rng.uniform(box[d].lo, box[d].hi);
            const double v = root_density(spec, p);
            s1 += v;
            s2 += v * v;
        }
        sum1[b] = s1;
        sum2[b] = s2;
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

    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        s1 += sum1[b];
        s2 += sum2[b];
    }
    const double mean = s1 / static_cast<double>(samples);
    const double var =
        std::max(0.0, s2 / static_cast<double>(samples) - mean * mean);
    McResult out;
    out.value = mean * volume;
    out.stderr_ = std::sqrt(var / static_cast<double>(samples)) * volume;
    out.samples = samples;
    return out;
}

}  // namespace toricvol
