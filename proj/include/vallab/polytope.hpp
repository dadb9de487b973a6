#pragma once

// Low-level V-polytope machinery: affine rank, brute-force facet and
// vertex enumeration, and exact volume by recursive simplicial
// decomposition (cone over each facet from the centroid).
//
// Everything here is sized for desk-scale inputs (dimension <= 4, a few
// dozen vertices); enumeration is combinatorial by design.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vallab {

struct Halfspace {
    Eigen::VectorXd normal;  // unit
    double offset;           // <normal, x> <= offset
};

namespace poly_detail {

inline void next_combination_init(std::vector<int>& idx, int k) {
    idx.resize(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
}

inline bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    return true;
}

}  // namespace poly_detail

// Orthonormal basis of the affine hull of the columns of V, anchored at
// the centroid. Returns (anchor, basis with rank columns).
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> affine_hull(const Eigen::MatrixXd& verts,
                                                               double tol = 1e-10) {
    const Eigen::VectorXd anchor = verts.rowwise().mean();
    Eigen::MatrixXd centered = verts.colwise() - anchor;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const double scale = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol * std::max(1.0, scale)) ++rank;
    return {anchor, svd.matrixU().leftCols(rank)};
}

// Facets of a full-dimensional V-polytope (columns of verts, d rows).
// Brute force: every d-subset spanning a hyperplane with all vertices on
// one side contributes; duplicates are merged.
inline std::vector<Halfspace> enumerate_facets(const Eigen::MatrixXd& verts, double tol = 1e-9) {
    const int d = static_cast<int>(verts.rows());
    const int m = static_cast<int>(verts.cols());
    std::vector<Halfspace> facets;
    if (d == 0 || m < d) return facets;
    if (d == 1) {
        const double lo = verts.row(0).minCoeff();
        const double hi = verts.row(0).maxCoeff();
        facets.push_back({Eigen::VectorXd::Constant(1, 1.0), hi});
        facets.push_back({Eigen::VectorXd::Constant(1, -1.0), -lo});
        return facets;
    }

    const double scale = std::max(1.0, verts.cwiseAbs().maxCoeff());
    std::vector<int> idx;
    poly_detail::next_combination_init(idx, d);
    do {
        Eigen::MatrixXd diff(d - 1, d);
        for (int i = 1; i < d; ++i)
            diff.row(i - 1) = (verts.col(idx[i]) - verts.col(idx[0])).transpose();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullV);
        if (svd.rank() < d - 1) continue;  // degenerate subset
        Eigen::VectorXd normal = svd.matrixV().col(d - 1);
        double b = normal.dot(verts.col(idx[0]));
        int below = 0, above = 0;
        for (int j = 0; j < m; ++j) {
            const double s = normal.dot(verts.col(j)) - b;
            if (s > tol * scale) ++above;
            if (s < -tol * scale) ++below;
        }
        if (above > 0 && below > 0) continue;
        if (above > 0) {
            normal = -normal;
            b = -b;
        }
        bool dup = false;
        for (const auto& f : facets)
            if ((f.normal - normal).norm() < 1e-7 && std::abs(f.offset - b) < 1e-7 * scale) {
                dup = true;
                break;
            }
        if (!dup) facets.push_back({normal, b});
    } while (poly_detail::next_combination(idx, m));
    return facets;
}

// Vertices of the (bounded) intersection of halfspaces in d dimensions.
// Every d-subset with an invertible system yields a candidate point,
// kept when it satisfies all constraints.
inline Eigen::MatrixXd enumerate_vertices(const std::vector<Halfspace>& hs, int d,
                                          double tol = 1e-8) {
    std::vector<Eigen::VectorXd> pts;
    const int m = static_cast<int>(hs.size());
    if (m < d) return Eigen::MatrixXd(d, 0);
    double scale = 1.0;
    for (const auto& h : hs) scale = std::max(scale, std::abs(h.offset));

    std::vector<int> idx;
    poly_detail::next_combination_init(idx, d);
    do {
        Eigen::MatrixXd a(d, d);
        Eigen::VectorXd b(d);
        for (int i = 0; i < d; ++i) {
            a.row(i) = hs[idx[i]].normal.transpose();
            b[i] = hs[idx[i]].offset;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd x = lu.solve(b);
        bool ok = true;
        for (const auto& h : hs)
            if (h.normal.dot(x) > h.offset + tol * scale) {
                ok = false;
                break;
            }
        if (!ok) continue;
        bool dup = false;
        for (const auto& p : pts)
            if ((p - x).norm() < 1e-7 * scale) {
                dup = true;
                break;
            }
        if (!dup) pts.push_back(x);
    } while (poly_detail::next_combination(idx, m));

    Eigen::MatrixXd out(d, static_cast<int>(pts.size()));
    for (int j = 0; j < static_cast<int>(pts.size()); ++j) out.col(j) = pts[j];
    return out;
}

// Exact volume of a V-polytope. Degenerate inputs have volume zero;
// otherwise the polytope is coned over its facets from the centroid and
// facet measures are computed recursively in facet coordinates.
inline double polytope_volume(const Eigen::MatrixXd& verts) {
    const int d = static_cast<int>(verts.rows());
    if (verts.cols() == 0) return 0.0;
    if (d == 0) return 0.0;
    if (d == 1) return verts.row(0).maxCoeff() - verts.row(0).minCoeff();

    auto [anchor, basis] = affine_hull(verts);
    if (basis.cols() < d) return 0.0;

    const Eigen::VectorXd centroid = verts.rowwise().mean();
    double vol = 0.0;
    for (const auto& f : enumerate_facets(verts)) {
        const double h = f.offset - f.normal.dot(centroid);
        if (h <= 0) continue;
        // Vertices incident to the facet, expressed in facet coordinates.
        std::vector<int> on;
        const double scale = std::max(1.0, verts.cwiseAbs().maxCoeff());
        for (int j = 0; j < verts.cols(); ++j)
            if (std::abs(f.normal.dot(verts.col(j)) - f.offset) < 1e-8 * scale) on.push_back(j);
        if (static_cast<int>(on.size()) < d) continue;
        Eigen::MatrixXd fv(d, static_cast<int>(on.size()));
        for (int j = 0; j < static_cast<int>(on.size()); ++j) fv.col(j) = verts.col(on[j]);
        auto [fa, fb] = affine_hull(fv);
        if (fb.cols() < d - 1) continue;
        const Eigen::MatrixXd flat = fb.transpose() * (fv.colwise() - fa);
        vol += h * polytope_volume(flat) / static_cast<double>(d);
    }
    return vol;
}

// Convex polygon perimeter (2-D vertex sets; interior points tolerated).
inline double polygon_perimeter(const Eigen::MatrixXd& verts) {
    if (verts.rows() != 2) throw std::invalid_argument("polygon_perimeter: ambient dimension must be 2");
    const auto facets = enumerate_facets(verts);
    double per = 0.0;
    const double scale = std::max(1.0, verts.cwiseAbs().maxCoeff());
    for (const auto& f : facets) {
        double lo = 1e300, hi = -1e300;
        const Eigen::Vector2d t(-f.normal[1], f.normal[0]);
        for (int j = 0; j < verts.cols(); ++j) {
            if (std::abs(f.normal.dot(verts.col(j)) - f.offset) < 1e-8 * scale) {
                const double s = t.dot(verts.col(j));
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
        }
        if (hi > lo) per += hi - lo;
    }
    return per;
}

// Detects an axis-aligned box (all 2^d sign combinations of per-axis
// extremes present); returns side lengths when it is one.
inline bool is_axis_box(const Eigen::MatrixXd& verts, Eigen::VectorXd& lo, Eigen::VectorXd& hi,
                        double tol = 1e-9) {
    const int d = static_cast<int>(verts.rows());
    const int m = static_cast<int>(verts.cols());
    if (m != (1 << d)) return false;
    lo = verts.rowwise().minCoeff();
    hi = verts.rowwise().maxCoeff();
    const double scale = std::max(1.0, verts.cwiseAbs().maxCoeff());
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int j = 0; j < m; ++j) {
        int code = 0;
        for (int i = 0; i < d; ++i) {
            if (std::abs(verts(i, j) - lo[i]) < tol * scale)
                ;
            else if (std::abs(verts(i, j) - hi[i]) < tol * scale)
                code |= (1 << i);
            else
                return false;
        }
        if (seen[code]) return false;
        seen[code] = true;
    }
    return true;
}

}  // namespace vallab
