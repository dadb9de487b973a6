#pragma once

// Curvature-integral route to intrinsic volumes, for families with
// closed-form boundary data: 2-D support-function curves and 3-D
// ellipsoids. Also hosts high-accuracy offset volumes vol(K + eps*D)
// for the same families (divergence theorem on the offset surface),
// which the Steiner route can use in place of Monte Carlo.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "vallab/body.hpp"

namespace vallab {

// Boundary of a smooth, strictly convex planar body given by its support
// function h(theta) and derivatives.
struct SupportCurve2D {
    std::function<double(double)> h;
    std::function<double(double)> dh;
    std::function<double(double)> ddh;

    static SupportCurve2D circle(double r) {
        return {[r](double) { return r; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    }

    // Centered ellipse with support h = sqrt(u^T A u), A positive definite.
    static SupportCurve2D ellipse(const Eigen::Matrix2d& shape) {
        auto g = [shape](double t) {
            const Eigen::Vector2d u(std::cos(t), std::sin(t));
            return u.dot(shape * u);
        };
        auto dg = [shape](double t) {
            const Eigen::Vector2d u(std::cos(t), std::sin(t));
            const Eigen::Vector2d du(-std::sin(t), std::cos(t));
            return 2.0 * du.dot(shape * u);
        };
        auto ddg = [shape](double t) {
            const Eigen::Vector2d u(std::cos(t), std::sin(t));
            const Eigen::Vector2d du(-std::sin(t), std::cos(t));
            return 2.0 * du.dot(shape * du) - 2.0 * u.dot(shape * u);
        };
        return {[g](double t) { return std::sqrt(g(t)); },
                [g, dg](double t) { return dg(t) / (2.0 * std::sqrt(g(t))); },
                [g, dg, ddg](double t) {
                    const double s = std::sqrt(g(t));
                    return ddg(t) / (2.0 * s) - dg(t) * dg(t) / (4.0 * s * s * s);
                }};
    }

    static SupportCurve2D ellipse_axes(double a, double b) {
        return ellipse(Eigen::Vector2d(a * a, b * b).asDiagonal().toDenseMatrix());
    }
};

namespace quad_detail {

// Composite trapezoid over one period; spectrally accurate for smooth
// periodic integrands.
template <class F>
double periodic_trapezoid(F&& f, double period, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f(period * i / n);
    return s * period / n;
}

// Composite Simpson on [a, b].
template <class F>
double simpson(F&& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace quad_detail

// V_i of a planar body from its boundary curve: the (1-i)-th elementary
// symmetric polynomial of the curvature integrated against arc length,
// normalized so that V_i of the unit disk is pi for i = 0, 1.
inline double curvature_intrinsic_2d(const SupportCurve2D& c, int i, int n_quad = 4096) {
    if (i < 0 || i > 1) throw std::invalid_argument("curvature_intrinsic_2d: i must be 0 or 1");
    return quad_detail::periodic_trapezoid(
        [&](double t) {
            const double rho = c.h(t) + c.ddh(t);  // radius of curvature
            if (rho <= 0)
                throw std::runtime_error("curvature_intrinsic_2d: non-convex curvature sign");
            // ds = rho dtheta; e_{1-i}(k) with k = 1/rho.
            return 0.5 * (i == 0 ? 1.0 : rho);
        },
        2 * M_PI, n_quad);
}

// Area enclosed by a support curve: (1/2) ∮ (h^2 - h'^2).
inline double support_curve_area(const SupportCurve2D& c, int n_quad = 4096) {
    return quad_detail::periodic_trapezoid(
        [&](double t) {
            const double h = c.h(t);
            const double dh = c.dh(t);
            return 0.5 * (h * h - dh * dh);
        },
        2 * M_PI, n_quad);
}

// Area of the outer parallel body at distance eps (support h + eps).
inline double support_curve_offset_area(const SupportCurve2D& c, double eps, int n_quad = 4096) {
    return quad_detail::periodic_trapezoid(
        [&](double t) {
            const double h = c.h(t) + eps;
            const double dh = c.dh(t);
            return 0.5 * (h * h - dh * dh);
        },
        2 * M_PI, n_quad);
}

// Closed-form boundary data of an axis-aligned ellipsoid in R^3 with
// semi-axes (a, b, c), parameterized over (u, v) in [0,2pi) x [0,pi].
struct EllipsoidPatch3 {
    double a, b, c;

    Eigen::Vector3d position(double u, double v) const {
        return {a * std::sin(v) * std::cos(u), b * std::sin(v) * std::sin(u), c * std::cos(v)};
    }

    // dsigma, k1 + k2, k1 * k2 at (u, v), from the fundamental forms.
    void boundary_data(double u, double v, double& dsigma, double& ksum, double& kprod) const {
        const double su = std::sin(u), cu = std::cos(u);
        const double sv = std::sin(v), cv = std::cos(v);
        const Eigen::Vector3d ru(-a * sv * su, b * sv * cu, 0);
        const Eigen::Vector3d rv(a * cv * cu, b * cv * su, -c * sv);
        const Eigen::Vector3d ruu(-a * sv * cu, -b * sv * su, 0);
        const Eigen::Vector3d ruv(-a * cv * su, b * cv * cu, 0);
        const Eigen::Vector3d rvv(-a * sv * cu, -b * sv * su, -c * cv);
        const Eigen::Vector3d nvec = ru.cross(rv);
        const double nn = nvec.norm();
        dsigma = nn;
        if (nn < 1e-300) {  // parameterization poles
            ksum = 0;
            kprod = 0;
            return;
        }
        // Inward normal, so that principal curvatures of convex bodies
        // come out positive.
        Eigen::Vector3d nh = nvec / nn;
        if (nh.dot(position(u, v)) > 0) nh = -nh;
        const double e1 = ru.dot(ru), f1 = ru.dot(rv), g1 = rv.dot(rv);
        const double l2 = ruu.dot(nh), m2 = ruv.dot(nh), n2 = rvv.dot(nh);
        const double det1 = e1 * g1 - f1 * f1;
        kprod = (l2 * n2 - m2 * m2) / det1;                     // Gaussian
        ksum = (e1 * n2 - 2 * f1 * m2 + g1 * l2) / det1;        // 2 * mean
    }
};

// V_i of a 3-D ellipsoid by boundary quadrature (i = 0, 1, 2), in the
// ball-identity normalization V_i(unit ball) = 4*pi/3.
inline double curvature_intrinsic_ellipsoid3(double a, double b, double c, int i,
                                             int n_u = 512, int n_v = 1024) {
    if (i < 0 || i > 2)
        throw std::invalid_argument("curvature_intrinsic_ellipsoid3: i must be in 0..2");
    const EllipsoidPatch3 p{a, b, c};
    const double binom[3] = {1.0, 2.0, 1.0};  // C(2, 2-i)
    const double integral = quad_detail::simpson(
        [&](double v) {
            return quad_detail::periodic_trapezoid(
                [&](double u) {
                    double ds, ks, kp;
                    p.boundary_data(u, v, ds, ks, kp);
                    if (ds > 1e-6 && (ks < -1e-9 || kp < -1e-9))
                        throw std::runtime_error(
                            "curvature_intrinsic_ellipsoid3: non-convex curvature sign");
                    const double sym = (i == 2) ? 1.0 : (i == 1 ? ks : kp);
                    return sym * ds;
                },
                2 * M_PI, n_u);
        },
        0.0, M_PI, n_v);
    return integral / (3.0 * binom[2 - i]);
}

// vol(E + eps*D) for an axis-aligned ellipsoid, by the divergence theorem
// over the normal offset surface x = r + eps * n.
inline double ellipsoid3_offset_volume(double a, double b, double c, double eps,
                                       int n_u = 512, int n_v = 1024) {
    const double a2 = a * a, b2 = b * b, c2 = c * c;
    auto contrib = [&](double u, double v) {
        const double su = std::sin(u), cu = std::cos(u);
        const double sv = std::sin(v), cv = std::cos(v);
        const Eigen::Vector3d r(a * sv * cu, b * sv * su, c * cv);
        const Eigen::Vector3d ru(-a * sv * su, b * sv * cu, 0);
        const Eigen::Vector3d rv(a * cv * cu, b * cv * su, -c * sv);
        const Eigen::Vector3d w(r[0] / a2, r[1] / b2, r[2] / c2);
        const Eigen::Vector3d wu(ru[0] / a2, ru[1] / b2, ru[2] / c2);
        const Eigen::Vector3d wv(rv[0] / a2, rv[1] / b2, rv[2] / c2);
        const double nw = w.norm();
        if (nw < 1e-300) return 0.0;
        const Eigen::Vector3d nh = w / nw;
        const Eigen::Vector3d nhu = wu / nw - w * (w.dot(wu)) / (nw * nw * nw);
        const Eigen::Vector3d nhv = wv / nw - w * (w.dot(wv)) / (nw * nw * nw);
        const Eigen::Vector3d x = r + eps * nh;
        const Eigen::Vector3d xu = ru + eps * nhu;
        const Eigen::Vector3d xv = rv + eps * nhv;
        return x.dot(xu.cross(xv)) / 3.0;
    };
    double total = quad_detail::simpson(
        [&](double v) {
            return quad_detail::periodic_trapezoid([&](double u) { return contrib(u, v); },
                                                   2 * M_PI, n_u);
        },
        0.0, M_PI, n_v);
    return std::abs(total);
}

// High-accuracy vol(K + eps*D) where a closed form or quadrature rule
// exists: balls (exact), 2-D ellipsoids and polygons, 3-D ellipsoids.
inline std::optional<double> offset_volume(const ConvexBody& body, double eps) {
    const ConvexBody b = simplified(body);
    const int n = b.dim();
    switch (b.kind()) {
        case ConvexBody::Kind::Ball:
            return unit_ball_volume(n) * std::pow(b.radius() + eps, n);
        case ConvexBody::Kind::Ellipsoid: {
            if (n == 2) {
                const SupportCurve2D c = SupportCurve2D::ellipse(b.shape());
                return support_curve_offset_area(c, eps);
            }
            if (n == 3) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.shape());
                const Eigen::Vector3d ax = es.eigenvalues().cwiseSqrt();
                return ellipsoid3_offset_volume(ax[0], ax[1], ax[2], eps);
            }
            return std::nullopt;
        }
        case ConvexBody::Kind::Polytope: {
            if (n == 2) {
                const double area = polytope_volume(b.vertices());
                const double per = polygon_perimeter(b.vertices());
                return area + per * eps + M_PI * eps * eps;
            }
            Eigen::VectorXd lo, hi;
            if (is_axis_box(b.vertices(), lo, hi)) {
                // vol(box + eps D) = sum_j e_{n-j}(sides) omega_j eps^j.
                const Eigen::VectorXd s = hi - lo;
                // Elementary symmetric polynomials of the side lengths.
                Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
                e[0] = 1.0;
                for (int i = 0; i < n; ++i)
                    for (int j = std::min(i + 1, n); j >= 1; --j) e[j] += s[i] * e[j - 1];
                double v = 0.0;
                for (int j = 0; j <= n; ++j)
                    v += e[n - j] * unit_ball_volume(j) * std::pow(eps, j);
                return v;
            }
            return std::nullopt;
        }
        default:
            return std::nullopt;
    }
}

}  // namespace vallab
