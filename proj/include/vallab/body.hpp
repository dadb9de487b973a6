#pragma once

// Convex-body kernel. Bodies are immutable expression values: polytopes
// by vertices, balls, ellipsoids, Minkowski sums, scalings and rigid
// images of other bodies. Every variant exposes exact support and
// support-point oracles; membership, distance and intersection queries
// reduce to GJK on those oracles.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vallab/gjk.hpp"
#include "vallab/mc.hpp"
#include "vallab/polytope.hpp"
#include "vallab/random.hpp"

namespace vallab {

// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

struct RigidMotion {
    Eigen::MatrixXd rotation;
    Eigen::VectorXd translation;

    RigidMotion(Eigen::MatrixXd r, Eigen::VectorXd t)
        : rotation(std::move(r)), translation(std::move(t)) {
        const int n = static_cast<int>(rotation.rows());
        if (rotation.cols() != n || translation.size() != n)
            throw std::invalid_argument("RigidMotion: shape mismatch");
        const double defect =
            (rotation.transpose() * rotation - Eigen::MatrixXd::Identity(n, n)).norm();
        if (defect > 1e-10) throw std::invalid_argument("RigidMotion: rotation not orthogonal");
    }

    static RigidMotion identity(int n) {
        return RigidMotion(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n));
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return rotation * x + translation; }
};

class ConvexBody {
public:
    enum class Kind { Polytope, Ball, Ellipsoid, MinkSum, Scaled, Transformed };

    static ConvexBody polytope(Eigen::MatrixXd vertices) {
        if (vertices.cols() == 0) throw std::invalid_argument("polytope: empty vertex list");
        ConvexBody b(Kind::Polytope, static_cast<int>(vertices.rows()));
        b.vertices_ = std::move(vertices);
        return b;
    }

    static ConvexBody ball(Eigen::VectorXd center, double radius) {
        if (radius <= 0) throw std::invalid_argument("ball: radius must be positive");
        ConvexBody b(Kind::Ball, static_cast<int>(center.size()));
        b.center_ = std::move(center);
        b.radius_ = radius;
        return b;
    }

    // Ellipsoid {x : (x-c)^T A^{-1} (x-c) <= 1} with A positive definite.
    static ConvexBody ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape) {
        const int n = static_cast<int>(center.size());
        if (shape.rows() != n || shape.cols() != n)
            throw std::invalid_argument("ellipsoid: shape matrix size mismatch");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
        if (es.eigenvalues().minCoeff() <= 0)
            throw std::invalid_argument("ellipsoid: shape matrix must be positive definite");
        ConvexBody b(Kind::Ellipsoid, n);
        b.center_ = std::move(center);
        b.shape_ = std::move(shape);
        return b;
    }

    static ConvexBody mink_sum(std::vector<ConvexBody> parts) {
        if (parts.empty()) throw std::invalid_argument("mink_sum: no parts");
        const int n = parts[0].dim();
        for (const auto& p : parts)
            if (p.dim() != n) throw std::invalid_argument("mink_sum: dimension mismatch");
        ConvexBody b(Kind::MinkSum, n);
        b.parts_ = std::move(parts);
        return b;
    }

    static ConvexBody scaled(double factor, ConvexBody body) {
        if (factor <= 0) throw std::invalid_argument("scaled: factor must be positive");
        ConvexBody b(Kind::Scaled, body.dim());
        b.factor_ = factor;
        b.parts_.push_back(std::move(body));
        return b;
    }

    static ConvexBody transformed(RigidMotion motion, ConvexBody body) {
        if (motion.rotation.rows() != body.dim())
            throw std::invalid_argument("transformed: dimension mismatch");
        ConvexBody b(Kind::Transformed, body.dim());
        b.motion_ = std::make_shared<RigidMotion>(std::move(motion));
        b.parts_.push_back(std::move(body));
        return b;
    }

    static ConvexBody point(Eigen::VectorXd x) {
        Eigen::MatrixXd v(x.size(), 1);
        v.col(0) = x;
        return polytope(std::move(v));
    }

    static ConvexBody axis_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        const int n = static_cast<int>(lo.size());
        Eigen::MatrixXd v(n, 1 << n);
        for (int c = 0; c < (1 << n); ++c)
            for (int i = 0; i < n; ++i) v(i, c) = (c & (1 << i)) ? hi[i] : lo[i];
        return polytope(std::move(v));
    }

    static ConvexBody translated(const Eigen::VectorXd& t, ConvexBody body) {
        const int n = body.dim();
        return transformed(RigidMotion(Eigen::MatrixXd::Identity(n, n), t), std::move(body));
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const Eigen::MatrixXd& vertices() const { return vertices_; }
    const Eigen::VectorXd& center() const { return center_; }
    double radius() const { return radius_; }
    const Eigen::MatrixXd& shape() const { return shape_; }
    const std::vector<ConvexBody>& parts() const { return parts_; }
    const ConvexBody& child() const { return parts_.front(); }
    double factor() const { return factor_; }
    const RigidMotion& motion() const { return *motion_; }

private:
    ConvexBody(Kind k, int n) : kind_(k), dim_(n) {
        if (n < 1) throw std::invalid_argument("ConvexBody: ambient dimension must be >= 1");
    }

    Kind kind_;
    int dim_;
    Eigen::MatrixXd vertices_;
    Eigen::VectorXd center_;
    double radius_ = 0.0;
    Eigen::MatrixXd shape_;
    std::vector<ConvexBody> parts_;
    double factor_ = 1.0;
    std::shared_ptr<const RigidMotion> motion_;
};

namespace body_detail {
inline void check_dim(const ConvexBody& b, const Eigen::VectorXd& u, const char* where) {
    if (u.size() != b.dim()) throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}
}  // namespace body_detail

// Support function h_K(u) = max_{x in K} <x, u>. Exact for every variant.
inline double support(const ConvexBody& b, const Eigen::VectorXd& u) {
    body_detail::check_dim(b, u, "support");
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope:
            return (b.vertices().transpose() * u).maxCoeff();
        case ConvexBody::Kind::Ball:
            return b.center().dot(u) + b.radius() * u.norm();
        case ConvexBody::Kind::Ellipsoid:
            return b.center().dot(u) + std::sqrt(u.dot(b.shape() * u));
        case ConvexBody::Kind::MinkSum: {
            double s = 0.0;
            for (const auto& p : b.parts()) s += support(p, u);
            return s;
        }
        case ConvexBody::Kind::Scaled:
            return b.factor() * support(b.child(), u);
        case ConvexBody::Kind::Transformed:
            return support(b.child(), b.motion().rotation.transpose() * u) +
                   b.motion().translation.dot(u);
    }
    throw std::logic_error("support: unknown kind");
}

// A point of K attaining the support value in direction u.
inline Eigen::VectorXd support_point(const ConvexBody& b, const Eigen::VectorXd& u) {
    body_detail::check_dim(b, u, "support_point");
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope: {
            Eigen::Index best;
            (b.vertices().transpose() * u).maxCoeff(&best);
            return b.vertices().col(best);
        }
        case ConvexBody::Kind::Ball: {
            const double nu = u.norm();
            if (nu < 1e-300) return b.center();
            return b.center() + (b.radius() / nu) * u;
        }
        case ConvexBody::Kind::Ellipsoid: {
            const Eigen::VectorXd au = b.shape() * u;
            const double q = std::sqrt(u.dot(au));
            if (q < 1e-300) return b.center();
            return b.center() + au / q;
        }
        case ConvexBody::Kind::MinkSum: {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(b.dim());
            for (const auto& p : b.parts()) s += support_point(p, u);
            return s;
        }
        case ConvexBody::Kind::Scaled:
            return b.factor() * support_point(b.child(), u);
        case ConvexBody::Kind::Transformed:
            return b.motion().apply(support_point(b.child(), b.motion().rotation.transpose() * u));
    }
    throw std::logic_error("support_point: unknown kind");
}

// Collapses expression nodes with closed forms: balls under scaling,
// rigid motions and ball-ball sums; ellipsoids under scaling and rigid
// motions; polytopes under affine images.
inline ConvexBody simplified(const ConvexBody& b) {
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope:
        case ConvexBody::Kind::Ball:
        case ConvexBody::Kind::Ellipsoid:
            return b;
        case ConvexBody::Kind::Scaled: {
            const ConvexBody c = simplified(b.child());
            const double f = b.factor();
            if (c.kind() == ConvexBody::Kind::Ball)
                return ConvexBody::ball(f * c.center(), f * c.radius());
            if (c.kind() == ConvexBody::Kind::Ellipsoid)
                return ConvexBody::ellipsoid(f * c.center(), f * f * c.shape());
            if (c.kind() == ConvexBody::Kind::Polytope)
                return ConvexBody::polytope(f * c.vertices());
            return ConvexBody::scaled(f, c);
        }
        case ConvexBody::Kind::Transformed: {
            const ConvexBody c = simplified(b.child());
            const auto& m = b.motion();
            if (c.kind() == ConvexBody::Kind::Ball)
                return ConvexBody::ball(m.apply(c.center()), c.radius());
            if (c.kind() == ConvexBody::Kind::Ellipsoid)
                return ConvexBody::ellipsoid(m.apply(c.center()),
                                             m.rotation * c.shape() * m.rotation.transpose());
            if (c.kind() == ConvexBody::Kind::Polytope) {
                Eigen::MatrixXd v = m.rotation * c.vertices();
                v.colwise() += m.translation;
                return ConvexBody::polytope(std::move(v));
            }
            return ConvexBody::transformed(m, c);
        }
        case ConvexBody::Kind::MinkSum: {
            std::vector<ConvexBody> flat;
            for (const auto& p : b.parts()) {
                ConvexBody s = simplified(p);
                if (s.kind() == ConvexBody::Kind::MinkSum)
                    for (const auto& q : s.parts()) flat.push_back(q);
                else
                    flat.push_back(std::move(s));
            }
            // Merge balls (B(c1,r1)+B(c2,r2) = B(c1+c2,r1+r2)) and collect
            // point parts into a single translation.
            std::vector<ConvexBody> out;
            Eigen::VectorXd ball_c = Eigen::VectorXd::Zero(b.dim());
            double ball_r = 0.0;
            bool have_ball = false;
            Eigen::VectorXd shift = Eigen::VectorXd::Zero(b.dim());
            for (auto& p : flat) {
                if (p.kind() == ConvexBody::Kind::Ball) {
                    ball_c += p.center();
                    ball_r += p.radius();
                    have_ball = true;
                } else if (p.kind() == ConvexBody::Kind::Polytope && p.vertices().cols() == 1) {
                    shift += p.vertices().col(0);
                } else {
                    out.push_back(std::move(p));
                }
            }
            // Fold the translation into the ball or a polytope part.
            if (have_ball) {
                ball_c += shift;
                shift.setZero();
            } else if (!shift.isZero(0.0)) {
                for (auto& p : out)
                    if (p.kind() == ConvexBody::Kind::Polytope) {
                        Eigen::MatrixXd v = p.vertices();
                        v.colwise() += shift;
                        p = ConvexBody::polytope(std::move(v));
                        shift.setZero();
                        break;
                    }
            }
            if (have_ball) out.push_back(ConvexBody::ball(ball_c, ball_r));
            if (!shift.isZero(0.0) || out.empty()) out.push_back(ConvexBody::point(shift));
            if (out.size() == 1) return out[0];
            return ConvexBody::mink_sum(std::move(out));
        }
    }
    throw std::logic_error("simplified: unknown kind");
}

// Distance from a point to the body (GJK on K - x).
inline GjkResult distance_to(const ConvexBody& b, const Eigen::VectorXd& x, double tol = 1e-9,
                             int max_iter = 10000) {
    body_detail::check_dim(b, x, "distance_to");
    SupportPointFn sp = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return support_point(b, u) - x;
    };
    return gjk_distance_to_origin(sp, b.dim(), tol, max_iter);
}

inline bool contains(const ConvexBody& b, const Eigen::VectorXd& x, double tol = 1e-9) {
    body_detail::check_dim(b, x, "contains");
    if (tol < 0) throw std::invalid_argument("contains: tol must be nonnegative");
    switch (b.kind()) {
        case ConvexBody::Kind::Ball:
            return (x - b.center()).norm() <= b.radius() + tol;
        case ConvexBody::Kind::Ellipsoid: {
            const Eigen::VectorXd d = x - b.center();
            return d.dot(b.shape().ldlt().solve(d)) <= 1.0 + tol;
        }
        case ConvexBody::Kind::Scaled:
            return contains(b.child(), x / b.factor(), tol / b.factor());
        case ConvexBody::Kind::Transformed:
            return contains(b.child(),
                            b.motion().rotation.transpose() * (x - b.motion().translation), tol);
        default: {
            SupportPointFn sp = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
                return support_point(b, u) - x;
            };
            return gjk_within(sp, b.dim(), tol + 1e-12);
        }
    }
}

// Minimum distance between two bodies (GJK on A - B), with the certified
// bracket from the solver.
inline GjkResult min_distance(const ConvexBody& a, const ConvexBody& c, double tol = 1e-9,
                              int max_iter = 10000) {
    if (a.dim() != c.dim()) throw std::invalid_argument("min_distance: dimension mismatch");
    SupportPointFn sp = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return support_point(a, u) - support_point(c, -u);
    };
    return gjk_distance_to_origin(sp, a.dim(), tol, max_iter);
}

// True iff dist(A, B) <= tol. Throws on an unresolved bracket, carrying
// the best bounds.
inline bool intersect_nonempty(const ConvexBody& a, const ConvexBody& c, double tol = 1e-9,
                               int max_iter = 10000) {
    const GjkResult r = min_distance(a, c, std::max(tol * 0.1, 1e-12), max_iter);
    if (r.distance <= tol) return true;
    if (r.lower_bound > tol) return false;
    if (r.converged) return r.distance <= tol + 1e-12;
    throw std::runtime_error("intersect_nonempty: undecided after iteration cap; gap [" +
                             std::to_string(r.lower_bound) + ", " + std::to_string(r.distance) + "]");
}

// Axis-aligned bounding box from support values, inflated by eps.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box(const ConvexBody& b,
                                                                double eps = 1e-9) {
    const int n = b.dim();
    Eigen::VectorXd lo(n), hi(n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        e[i] = 1.0;
        hi[i] = support(b, e) + eps;
        e[i] = -1.0;
        lo[i] = -support(b, e) - eps;
        e[i] = 0.0;
    }
    return {lo, hi};
}

// Upper bound on max |x| over the body; exact for polytopes and balls.
inline double outer_radius(const ConvexBody& b) {
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope:
            return b.vertices().colwise().norm().maxCoeff();
        case ConvexBody::Kind::Ball:
            return b.center().norm() + b.radius();
        case ConvexBody::Kind::Ellipsoid: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.shape());
            return b.center().norm() + std::sqrt(es.eigenvalues().maxCoeff());
        }
        case ConvexBody::Kind::MinkSum: {
            double s = 0.0;
            for (const auto& p : b.parts()) s += outer_radius(p);
            return s;
        }
        case ConvexBody::Kind::Scaled:
            return b.factor() * outer_radius(b.child());
        case ConvexBody::Kind::Transformed:
            return b.motion().translation.norm() + outer_radius(b.child());
    }
    throw std::logic_error("outer_radius: unknown kind");
}

// Exact volume where a closed form exists: polytopes (simplicial
// decomposition), balls, ellipsoids, scalings/rigid images thereof, and
// 2-D polygon + ball sums (area + perimeter*r + pi r^2).
inline double volume_exact(const ConvexBody& body) {
    const ConvexBody b = simplified(body);
    const int n = b.dim();
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope:
            return polytope_volume(b.vertices());
        case ConvexBody::Kind::Ball:
            return unit_ball_volume(n) * std::pow(b.radius(), n);
        case ConvexBody::Kind::Ellipsoid:
            return unit_ball_volume(n) * std::sqrt(b.shape().determinant());
        case ConvexBody::Kind::MinkSum: {
            if (n == 2 && b.parts().size() == 2) {
                const ConvexBody* poly = nullptr;
                const ConvexBody* ball = nullptr;
                for (const auto& p : b.parts()) {
                    if (p.kind() == ConvexBody::Kind::Polytope) poly = &p;
                    if (p.kind() == ConvexBody::Kind::Ball) ball = &p;
                }
                if (poly && ball) {
                    const double a = polytope_volume(poly->vertices());
                    const double per = polygon_perimeter(poly->vertices());
                    const double r = ball->radius();
                    return a + per * r + M_PI * r * r;
                }
            }
            throw std::invalid_argument("volume_exact: no closed form for this Minkowski sum");
        }
        default:
            throw std::invalid_argument("volume_exact: unsupported variant");
    }
}

inline bool volume_exact_supported(const ConvexBody& body) {
    const ConvexBody b = simplified(body);
    switch (b.kind()) {
        case ConvexBody::Kind::Polytope:
        case ConvexBody::Kind::Ball:
        case ConvexBody::Kind::Ellipsoid:
            return true;
        case ConvexBody::Kind::MinkSum: {
            if (b.dim() != 2 || b.parts().size() != 2) return false;
            bool poly = false, ball = false;
            for (const auto& p : b.parts()) {
                poly |= p.kind() == ConvexBody::Kind::Polytope;
                ball |= p.kind() == ConvexBody::Kind::Ball;
            }
            return poly && ball;
        }
        default:
            return false;
    }
}

// Monte Carlo volume: uniform sampling in the support bounding box.
inline MCEstimate volume_mc(const ConvexBody& b, const MCConfig& mc, const RandomStream& stream) {
    const auto [lo, hi] = bounding_box(b);
    double box_vol = 1.0;
    for (int i = 0; i < b.dim(); ++i) box_vol *= std::max(0.0, hi[i] - lo[i]);
    if (box_vol <= 0.0) return {0.0, 0.0, 0, stream.seed()};
    MCEstimate e = mc_mean(mc.samples, stream, mc.threads, [&](RandomStream& s) {
        const Eigen::VectorXd x = s.uniform_in_box(lo, hi);
        return contains(b, x, mc.membership_tol) ? 1.0 : 0.0;
    });
    return e * box_vol;
}

enum class VolumeMethod { Exact, MonteCarlo };

inline MCEstimate volume(const ConvexBody& b, VolumeMethod method, const MCConfig& mc,
                         const RandomStream& stream) {
    if (method == VolumeMethod::Exact) return {volume_exact(b), 0.0, 0, stream.seed()};
    return volume_mc(b, mc, stream);
}

// Hausdorff distance estimated as max_u |h_A(u) - h_B(u)| over sampled
// unit directions (a lower bound converging from below as n_dirs grows;
// equality holds for convex bodies in the limit).
inline double hausdorff_distance(const ConvexBody& a, const ConvexBody& b, std::uint64_t n_dirs,
                                 RandomStream stream) {
    if (a.dim() != b.dim()) throw std::invalid_argument("hausdorff_distance: dimension mismatch");
    if (n_dirs == 0) throw std::invalid_argument("hausdorff_distance: n_dirs must be positive");
    double best = 0.0;
    for (std::uint64_t i = 0; i < n_dirs; ++i) {
        const Eigen::VectorXd u = stream.unit_vector(a.dim());
        best = std::max(best, std::abs(support(a, u) - support(b, u)));
    }
    return best;
}

}  // namespace vallab
