#include "toricvol/supports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace toricvol {

namespace {

double coord_scale(const std::vector<Eigen::VectorXd>& pts) {
    double s = 1.0;
    for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
    return s;
}

std::vector<Eigen::VectorXd> dedupe_points(std::vector<Eigen::VectorXd> pts,
                                           double tol) {
    std::sort(pts.begin(), pts.end(),
              [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                  for (int i = 0; i < a.size(); ++i) {
                      if (a[i] != b[i]) return a[i] < b[i];
                  }
                  return false;
              });
    std::vector<Eigen::VectorXd> out;
    for (const auto& p : pts) {
        if (out.empty() || (out.back() - p).cwiseAbs().maxCoeff() > tol)
            out.push_back(p);
    }
    return out;
}

double cross2(const Eigen::VectorXd& o, const Eigen::VectorXd& a,
              const Eigen::VectorXd& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Monotone chain, collinear points dropped, counterclockwise order.
std::vector<Eigen::VectorXd> hull_2d(std::vector<Eigen::VectorXd> pts,
                                     double tol) {
    pts = dedupe_points(std::move(pts), tol);
    const int n = static_cast<int>(pts.size());
    if (n <= 2) return pts;
    const double s = coord_scale(pts);
    const double ctol = 1e-9 * s * s;
    std::vector<Eigen::VectorXd> h(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= ctol) --k;
        h[k++] = pts[i];
    }
    for (int i = n - 2, lo = k + 1; i >= 0; --i) {
        while (k >= lo && cross2(h[k - 2], h[k - 1], pts[i]) <= ctol) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    if (h.size() == 2 && (h[0] - h[1]).cwiseAbs().maxCoeff() <= tol) h.resize(1);
    return h;
}

struct Plane {
    Eigen::Vector3d normal;  // outward
    double offset = 0.0;     // normal . x <= offset on the hull
    std::vector<char> on;    // per input point: lies on the plane
};

Eigen::Vector3d as3(const Eigen::VectorXd& v) {
    return Eigen::Vector3d(v[0], v[1], v[2]);
}

// All supporting planes spanned by point triples. Points must have full
// affine rank. Exact for integer coordinates at desk scale.
std::vector<Plane> supporting_planes(const std::vector<Eigen::VectorXd>& pts) {
    const int n = static_cast<int>(pts.size());
    const double s = coord_scale(pts);
    const double tol = 1e-9 * s * s * s;
    std::vector<Plane> planes;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                bool seen = false;
                for (const auto& pl : planes) {
                    if (pl.on[i] && pl.on[j] && pl.on[k]) {
                        seen = true;
                        break;
                    }
                }
                if (seen) continue;
                const Eigen::Vector3d a = as3(pts[i]);
                Eigen::Vector3d nrm =
                    (as3(pts[j]) - a).cross(as3(pts[k]) - a);
                if (nrm.cwiseAbs().maxCoeff() <= tol) continue;
                double lo = 0.0, hi = 0.0;
                std::vector<char> on(n, 0);
                for (int l = 0; l < n; ++l) {
                    const double d = nrm.dot(as3(pts[l]) - a);
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                    on[l] = std::abs(d) <= tol;
                }
                const double side_tol = tol * nrm.norm();
                if (lo < -side_tol && hi > side_tol) continue;
                if (hi > side_tol) {
                    nrm = -nrm;  // flip so every point is on the <= side
                }
                Plane pl;
                pl.normal = nrm;
                pl.offset = nrm.dot(a);
                pl.on = std::move(on);
                planes.push_back(std::move(pl));
            }
        }
    }
    return planes;
}

std::vector<Eigen::VectorXd> hull_3d(std::vector<Eigen::VectorXd> pts,
                                     double tol) {
    pts = dedupe_points(std::move(pts), tol);
    const auto planes = supporting_planes(pts);
    std::vector<Eigen::VectorXd> verts;
    for (int l = 0; l < static_cast<int>(pts.size()); ++l) {
        Eigen::Matrix3Xd active(3, 0);
        for (const auto& pl : planes) {
            if (!pl.on[l]) continue;
            active.conservativeResize(3, active.cols() + 1);
            active.col(active.cols() - 1) = pl.normal.normalized();
        }
        if (active.cols() < 3) continue;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(active.transpose());
        lu.setThreshold(1e-7);
        if (lu.rank() == 3) verts.push_back(pts[l]);
    }
    return verts;
}

// Hull of points whose affine span has the given rank < dim: compute in an
// orthonormal basis of the span and map back.
Polytope degenerate_hull(const std::vector<Eigen::VectorXd>& pts, int dim,
                         const Eigen::MatrixXd& basis) {
    const int r = static_cast<int>(basis.cols());
    Polytope out;
    out.dim = dim;
    if (r == 0) {
        out.vertices.push_back(pts.front());
        return out;
    }
    const Eigen::VectorXd origin = pts.front();
    std::vector<Eigen::VectorXd> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.push_back(basis.transpose() * (p - origin));
    Polytope sub = convex_hull(flat, r);
    for (const auto& v : sub.vertices) out.vertices.push_back(origin + basis * v);
    return out;
}

Eigen::MatrixXd affine_basis(const std::vector<Eigen::VectorXd>& pts, int dim) {
    Eigen::MatrixXd diffs(dim, pts.size() - 1);
    for (std::size_t i = 1; i < pts.size(); ++i)
        diffs.col(static_cast<int>(i - 1)) = pts[i] - pts[0];
    if (diffs.cols() == 0) return Eigen::MatrixXd(dim, 0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diffs);
    qr.setThreshold(1e-9);
    const int r = static_cast<int>(qr.rank());
    Eigen::MatrixXd q = qr.householderQ();
    return q.leftCols(r);
}

long long llround_checked(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9)
        throw ValidationError("expected an integer lattice coordinate");
    return static_cast<long long>(r);
}

}  // namespace

SupportSpec::SupportSpec(Eigen::MatrixXd exponents, Eigen::VectorXd variance)
    : exponents_(std::move(exponents)), variance_(std::move(variance)) {
    if (exponents_.rows() < 1 || exponents_.cols() < 1)
        throw ValidationError("support needs at least one row and one column");
    if (variance_.size() != exponents_.rows())
        throw ValidationError("variance length must match the number of rows");
    for (int i = 0; i < exponents_.rows(); ++i) {
        for (int j = 0; j < exponents_.cols(); ++j) {
            const double e = exponents_(i, j);
            if (e < 0 || std::abs(e - std::round(e)) > 1e-9)
                throw ValidationError(
                    "support exponents must be nonnegative integers");
            exponents_(i, j) = std::round(e);
        }
        if (!(variance_[i] > 0))
            throw ValidationError("variances must be positive");
        for (int k = 0; k < i; ++k) {
            if ((exponents_.row(i) - exponents_.row(k)).cwiseAbs().maxCoeff() <
                0.5)
                throw ValidationError("duplicate support rows");
        }
    }
}

SupportSpec::SupportSpec(Eigen::MatrixXd exponents)
    : SupportSpec(std::move(exponents),
                  Eigen::VectorXd::Ones(exponents.rows())) {}

int SupportSpec::affine_rank() const {
    if (rows() == 1) return 0;
    Eigen::MatrixXd diffs = exponents_.bottomRows(rows() - 1);
    diffs.rowwise() -= exponents_.row(0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
    lu.setThreshold(1e-9);
    return static_cast<int>(lu.rank());
}

double SupportSpec::diameter() const {
    double d = 0.0;
    for (int i = 0; i < rows(); ++i)
        for (int j = i + 1; j < rows(); ++j)
            d = std::max(d, (exponents_.row(i) - exponents_.row(j)).norm());
    return d;
}

Polytope convex_hull(const std::vector<Eigen::VectorXd>& points, int dim) {
    if (points.empty()) throw ValidationError("convex hull of an empty set");
    if (dim < 1 || dim > 3)
        throw DimensionLimitError("convex hull supports dimensions 1 to 3");
    for (const auto& p : points)
        if (p.size() != dim)
            throw ValidationError("point dimension mismatch in convex hull");

    const double tol = 1e-9 * coord_scale(points);
    Polytope out;
    out.dim = dim;
    if (dim == 1) {
        double lo = points[0][0], hi = points[0][0];
        for (const auto& p : points) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        out.vertices.push_back(Eigen::VectorXd::Constant(1, lo));
        if (hi - lo > tol)
            out.vertices.push_back(Eigen::VectorXd::Constant(1, hi));
        return out;
    }

    auto pts = dedupe_points(points, tol);
    const Eigen::MatrixXd basis = affine_basis(pts, dim);
    const int rank = static_cast<int>(basis.cols());
    if (rank < dim) return degenerate_hull(pts, dim, basis);

    out.vertices = (dim == 2) ? hull_2d(std::move(pts), tol)
                              : hull_3d(std::move(pts), tol);
    return out;
}

Polytope polytope_of(const SupportSpec& spec) {
    if (spec.dims() > 3)
        throw DimensionLimitError("polytope operations support dimensions 1 to 3");
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(spec.rows());
    for (int i = 0; i < spec.rows(); ++i)
        pts.push_back(spec.exponents().row(i).transpose());
    return convex_hull(pts, spec.dims());
}

double polytope_volume(const Polytope& poly) {
    const auto& v = poly.vertices;
    if (v.empty()) throw ValidationError("volume of an empty polytope");
    if (poly.dim == 1) {
        if (v.size() < 2) return 0.0;
        return std::abs(v[1][0] - v[0][0]);
    }
    if (poly.dim == 2) {
        if (v.size() < 3) return 0.0;
        double a2 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& p = v[i];
            const auto& q = v[(i + 1) % v.size()];
            a2 += p[0] * q[1] - q[0] * p[1];
        }
        return std::abs(a2) / 2.0;
    }
    if (v.size() < 4) return 0.0;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(3);
    for (const auto& p : v) centroid += p;
    centroid /= static_cast<double>(v.size());
    const auto planes = supporting_planes(v);
    if (planes.empty()) return 0.0;
    double vol = 0.0;
    for (const auto& pl : planes) {
        std::vector<Eigen::VectorXd> face;
        for (std::size_t l = 0; l < v.size(); ++l)
            if (pl.on[l]) face.push_back(v[l]);
        if (face.size() < 3) continue;
        // Planar polygon area via an in-plane orthonormal basis.
        const Eigen::Vector3d nz = pl.normal.normalized();
        Eigen::Vector3d ux = nz.unitOrthogonal();
        const Eigen::Vector3d uy = nz.cross(ux);
        std::vector<Eigen::VectorXd> flat;
        for (const auto& p : face) {
            Eigen::VectorXd f(2);
            const Eigen::Vector3d d = as3(p) - as3(face[0]);
            f << ux.dot(d), uy.dot(d);
            flat.push_back(f);
        }
        Polytope poly2;
        poly2.dim = 2;
        poly2.vertices = hull_2d(flat, 1e-9 * coord_scale(flat));
        const double area = polytope_volume(poly2);
        const double height = (pl.offset - pl.normal.dot(as3(centroid))) /
                              pl.normal.norm();
        vol += area * height / 3.0;
    }
    return vol;
}

Polytope minkowski_sum(const Polytope& a, const Polytope& b) {
    if (a.dim != b.dim)
        throw ValidationError("Minkowski sum needs equal dimensions");
    std::vector<Eigen::VectorXd> sums;
    sums.reserve(a.vertices.size() * b.vertices.size());
    for (const auto& p : a.vertices)
        for (const auto& q : b.vertices) sums.push_back(p + q);
    return convex_hull(sums, a.dim);
}

double diameter(const Polytope& poly) {
    double d = 0.0;
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
        for (std::size_t j = i + 1; j < poly.vertices.size(); ++j)
            d = std::max(d, (poly.vertices[i] - poly.vertices[j]).norm());
    return d;
}

namespace {

bool same_vertex_set(const Polytope& a, const Polytope& b) {
    if (a.vertices.size() != b.vertices.size()) return false;
    auto va = dedupe_points(a.vertices, 1e-9);
    auto vb = dedupe_points(b.vertices, 1e-9);
    for (std::size_t i = 0; i < va.size(); ++i)
        if ((va[i] - vb[i]).cwiseAbs().maxCoeff() > 1e-9) return false;
    return true;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

double mixed_volume(const std::vector<Polytope>& polys) {
    const int n = static_cast<int>(polys.size());
    if (n < 1) throw ValidationError("mixed volume of an empty family");
    if (n > 3)
        throw DimensionLimitError("mixed volume supports dimensions 1 to 3");
    for (const auto& p : polys)
        if (p.dim != n)
            throw ValidationError(
                "mixed volume needs n polytopes in n dimensions");

    bool all_same = true;
    for (int i = 1; i < n && all_same; ++i)
        all_same = same_vertex_set(polys[0], polys[i]);
    if (all_same) return polytope_volume(polys[0]);

    // Inclusion-exclusion over Minkowski sums of subsets.
    double acc = 0.0;
    for (int mask = 1; mask < (1 << n); ++mask) {
        Polytope sum;
        bool first = true;
        int bits = 0;
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1 << i))) continue;
            ++bits;
            sum = first ? polys[i] : minkowski_sum(sum, polys[i]);
            first = false;
        }
        const double sign = ((n - bits) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * polytope_volume(sum);
    }
    return acc / factorial(n);
}

double bernshtein_count(const std::vector<Polytope>& polys) {
    return factorial(static_cast<int>(polys.size())) * mixed_volume(polys);
}

std::vector<Halfspace> facets(const Polytope& poly) {
    const auto& v = poly.vertices;
    std::vector<Halfspace> out;
    if (poly.dim == 1) {
        if (v.size() < 2)
            throw ValidationError("facets need a full-dimensional polytope");
        const double lo = std::min(v[0][0], v[1][0]);
        const double hi = std::max(v[0][0], v[1][0]);
        out.push_back({Eigen::VectorXd::Constant(1, -1.0), -lo});
        out.push_back({Eigen::VectorXd::Constant(1, 1.0), hi});
        return out;
    }
    if (poly.dim == 2) {
        if (v.size() < 3)
            throw ValidationError("facets need a full-dimensional polytope");
        // Vertices are in counterclockwise order; outward normal of edge
        // (a -> b) is (dy, -dx).
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& a = v[i];
            const auto& b = v[(i + 1) % v.size()];
            Eigen::VectorXd nrm(2);
            nrm << b[1] - a[1], a[0] - b[0];
            out.push_back({nrm, nrm.dot(a)});
        }
        return out;
    }
    if (v.size() < 4)
        throw ValidationError("facets need a full-dimensional polytope");
    for (const auto& pl : supporting_planes(v)) {
        Eigen::VectorXd nrm(3);
        nrm << pl.normal[0], pl.normal[1], pl.normal[2];
        out.push_back({nrm, pl.offset});
    }
    return out;
}

double interior_margin(const Polytope& poly, const Eigen::VectorXd& x) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& h : facets(poly))
        margin = std::min(margin, (h.offset - h.normal.dot(x)) / h.normal.norm());
    return margin;
}

DelzantReport delzant_check_2d(const SupportSpec& spec) {
    if (spec.dims() != 2)
        throw ValidationError("lattice smoothness check is two-dimensional");
    const Polytope hull = polytope_of(spec);
    if (hull.vertices.size() < 3)
        return {false, "support polygon is not two-dimensional"};

    const auto& v = hull.vertices;  // counterclockwise
    const int m = static_cast<int>(v.size());
    for (int i = 0; i < m; ++i) {
        const auto& prev = v[(i + m - 1) % m];
        const auto& cur = v[i];
        const auto& next = v[(i + 1) % m];
        long long e1x = llround_checked(prev[0] - cur[0]);
        long long e1y = llround_checked(prev[1] - cur[1]);
        long long e2x = llround_checked(next[0] - cur[0]);
        long long e2y = llround_checked(next[1] - cur[1]);
        const long long g1 = std::gcd(std::abs(e1x), std::abs(e1y));
        const long long g2 = std::gcd(std::abs(e2x), std::abs(e2y));
        e1x /= g1;
        e1y /= g1;
        e2x /= g2;
        e2y /= g2;
        const long long det = e1x * e2y - e1y * e2x;
        if (det != 1 && det != -1) {
            std::ostringstream os;
            os << "vertex (" << cur[0] << ", " << cur[1]
               << ") has primitive edge determinant " << det;
            return {false, os.str()};
        }
    }
    return {true, "all vertices are smooth"};
}

}  // namespace toricvol
