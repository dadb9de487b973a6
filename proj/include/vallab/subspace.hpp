#pragma once

// Affine subspaces and body slicing. A slice K ∩ E is returned in the
// intrinsic coordinates of E (dimension = dim E); an empty intersection
// is a first-class result (std::nullopt), not an error.

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "vallab/body.hpp"
#include "vallab/polytope.hpp"

namespace vallab {

struct AffineSubspace {
    Eigen::VectorXd base;        // a point of E
    Eigen::MatrixXd directions;  // n x d, orthonormal columns

    AffineSubspace(Eigen::VectorXd base_point, Eigen::MatrixXd dirs)
        : base(std::move(base_point)), directions(std::move(dirs)) {
        if (directions.rows() != base.size())
            throw std::invalid_argument("AffineSubspace: shape mismatch");
        const int d = static_cast<int>(directions.cols());
        const double defect =
            (directions.transpose() * directions - Eigen::MatrixXd::Identity(d, d)).norm();
        if (defect > 1e-10)
            throw std::invalid_argument("AffineSubspace: directions not orthonormal");
    }

    int ambient_dim() const { return static_cast<int>(base.size()); }
    int dim() const { return static_cast<int>(directions.cols()); }

    Eigen::VectorXd embed(const Eigen::VectorXd& y) const { return base + directions * y; }

    // Orthonormal basis of the orthogonal complement of span(directions).
    Eigen::MatrixXd complement() const {
        const int n = ambient_dim();
        const int d = dim();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(directions);
        const Eigen::MatrixXd q = qr.householderQ();
        return q.rightCols(n - d);
    }

    // Checks span invariance under an ambient operator (e.g. a complex
    // structure J): J * span == span.
    bool span_invariant_under(const Eigen::MatrixXd& op, double tol = 1e-10) const {
        const Eigen::MatrixXd ju = op * directions;
        const Eigen::MatrixXd resid = ju - directions * (directions.transpose() * ju);
        return resid.norm() <= tol;
    }
};

// Distance from the subspace to the body: GJK on the projection of K - q
// onto the orthogonal complement of span(E).
inline GjkResult subspace_body_distance(const AffineSubspace& e, const ConvexBody& k,
                                        double tol = 1e-9, int max_iter = 10000) {
    if (e.ambient_dim() != k.dim())
        throw std::invalid_argument("subspace_body_distance: dimension mismatch");
    const Eigen::MatrixXd c = e.complement();
    const Eigen::VectorXd q0 = c.transpose() * e.base;
    SupportPointFn sp = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        return c.transpose() * support_point(k, c * w) - q0;
    };
    return gjk_distance_to_origin(sp, static_cast<int>(c.cols()), tol, max_iter);
}

// K ∩ E in E-coordinates. Supported: polytopes (halfspace intersection),
// balls, ellipsoids, and scalings/rigid images of those.
inline std::optional<ConvexBody> slice(const ConvexBody& body, const AffineSubspace& e,
                                       double tol = 1e-9) {
    if (body.dim() != e.ambient_dim()) throw std::invalid_argument("slice: dimension mismatch");
    const int d = e.dim();
    const ConvexBody b = simplified(body);

    switch (b.kind()) {
        case ConvexBody::Kind::Ball: {
            const Eigen::VectorXd rel = b.center() - e.base;
            const Eigen::VectorXd y0 = e.directions.transpose() * rel;
            const double off2 = rel.squaredNorm() - y0.squaredNorm();
            const double r2 = b.radius() * b.radius() - off2;
            if (r2 <= tol * tol) return std::nullopt;
            return ConvexBody::ball(y0, std::sqrt(r2));
        }
        case ConvexBody::Kind::Ellipsoid: {
            const Eigen::LDLT<Eigen::MatrixXd> ainv(b.shape());
            const Eigen::VectorXd rel = e.base - b.center();
            const Eigen::MatrixXd aq = ainv.solve(e.directions);
            const Eigen::MatrixXd m = e.directions.transpose() * aq;  // d x d, PD
            const Eigen::VectorXd g = aq.transpose() * rel;
            const double c0 = rel.dot(ainv.solve(rel));
            const Eigen::LDLT<Eigen::MatrixXd> mld(m);
            const Eigen::VectorXd y0 = -mld.solve(g);
            const double rem = 1.0 - (c0 + g.dot(y0));
            if (rem <= tol) return std::nullopt;
            // {y : (y - y0)^T M (y - y0) <= rem}
            const Eigen::MatrixXd shape =
                rem * m.inverse();
            return ConvexBody::ellipsoid(y0, shape);
        }
        case ConvexBody::Kind::Polytope: {
            const auto facets = enumerate_facets(b.vertices());
            if (facets.empty())
                throw std::invalid_argument("slice: polytope must be full-dimensional");
            std::vector<Halfspace> hs;
            hs.reserve(facets.size());
            for (const auto& f : facets) {
                Eigen::VectorXd a = e.directions.transpose() * f.normal;
                const double off = f.offset - f.normal.dot(e.base);
                const double nrm = a.norm();
                if (nrm < 1e-12) {
                    if (off < -1e-12) return std::nullopt;  // E misses the slab entirely
                    continue;
                }
                hs.push_back({a / nrm, off / nrm});
            }
            const Eigen::MatrixXd verts = enumerate_vertices(hs, d);
            if (verts.cols() == 0) return std::nullopt;
            return ConvexBody::polytope(verts);
        }
        case ConvexBody::Kind::Scaled: {
            const double f = b.factor();
            const AffineSubspace inner(e.base / f, e.directions);
            auto s = slice(b.child(), inner, tol);
            if (!s) return std::nullopt;
            return simplified(ConvexBody::scaled(f, *s));
        }
        case ConvexBody::Kind::Transformed: {
            const auto& m = b.motion();
            const AffineSubspace inner(m.rotation.transpose() * (e.base - m.translation),
                                       m.rotation.transpose() * e.directions);
            return slice(b.child(), inner, tol);
        }
        case ConvexBody::Kind::MinkSum:
            throw std::invalid_argument("slice: Minkowski sums are not sliceable");
    }
    throw std::logic_error("slice: unknown kind");
}

}  // namespace vallab
