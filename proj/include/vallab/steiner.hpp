#pragma once

// Steiner route to intrinsic volumes: fit vol(K + eps*D) by a degree-n
// polynomial in eps, convert coefficients to V_0..V_n, and realize the
// derivative operator Lambda as a Richardson-extrapolated one-sided
// derivative at eps = 0.
//
// Normalization: the conversion constants are derived from the ball
// system vol(B_1 + eps*D) = omega_n (1 + eps)^n together with
// V_i(B_1) = omega_n, which is the curvature-formula normalization.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vallab/body.hpp"
#include "vallab/curvature.hpp"
#include "vallab/mc.hpp"

namespace vallab {

struct SteinerCoeffs {
    int n = 0;
    Eigen::VectorXd coeffs;        // c_0..c_n, vol(K + eps D) = sum c_j eps^j
    Eigen::VectorXd coeff_stderr;  // propagated through the least squares
    double residual = 0.0;         // rms fit residual
    double condition = 0.0;        // of the scaled Vandermonde
};

enum class SteinerVolumeMode {
    Auto,        // quadrature/closed-form offset volumes when available
    MonteCarlo,  // always sample
};

inline ConvexBody dilated(const ConvexBody& k, double eps) {
    return ConvexBody::mink_sum({k, ConvexBody::ball(Eigen::VectorXd::Zero(k.dim()), eps)});
}

// Steiner coefficients of the unit ball, from the binomial expansion of
// omega_n (1 + eps)^n.
inline Eigen::VectorXd unit_ball_steiner_coeffs(int n) {
    Eigen::VectorXd binom = Eigen::VectorXd::Zero(n + 1);
    binom[0] = 1.0;
    for (int row = 1; row <= n; ++row)
        for (int j = row; j >= 1; --j) binom[j] += binom[j - 1];
    return unit_ball_volume(n) * binom;
}

// Conversion constants gamma with V_i = gamma_i * c_{n-i}, pinned by the
// ball system: gamma_i = V_i(B_1) / c_{n-i}(B_1) = omega_n / c_{n-i}(B_1).
inline Eigen::VectorXd steiner_to_intrinsic_factors(int n) {
    const Eigen::VectorXd cball = unit_ball_steiner_coeffs(n);
    Eigen::VectorXd gamma(n + 1);
    for (int i = 0; i <= n; ++i) gamma[i] = unit_ball_volume(n) / cball[n - i];
    return gamma;
}

inline std::vector<double> default_steiner_radii(const ConvexBody& k) {
    const int n = k.dim();
    const double diam = 2.0 * outer_radius(k);
    std::vector<double> radii;
    for (int j = 1; j <= n + 2; ++j) radii.push_back(0.1 * j * std::max(diam, 1e-6));
    return radii;
}

inline SteinerCoeffs steiner_fit(const ConvexBody& k, const std::vector<double>& radii,
                                 const MCConfig& mc, const RandomStream& stream,
                                 SteinerVolumeMode mode = SteinerVolumeMode::Auto) {
    const int n = k.dim();
    const int m = static_cast<int>(radii.size());
    if (m < n + 1)
        throw std::invalid_argument("steiner_fit: need at least n+1 dilation radii");

    Eigen::VectorXd y(m), sigma(m);
    for (int r = 0; r < m; ++r) {
        if (radii[r] <= 0) throw std::invalid_argument("steiner_fit: radii must be positive");
        std::optional<double> exact;
        if (mode == SteinerVolumeMode::Auto) exact = offset_volume(k, radii[r]);
        if (exact) {
            y[r] = *exact;
            sigma[r] = 0.0;
        } else {
            const MCEstimate e = volume_mc(dilated(k, radii[r]), mc, stream.split(r));
            y[r] = e.value;
            sigma[r] = e.stderror;
        }
    }

    // Column-scaled Vandermonde keeps the conditioning meaningful.
    const double rmax = *std::max_element(radii.begin(), radii.end());
    Eigen::MatrixXd x(m, n + 1);
    for (int r = 0; r < m; ++r)
        for (int j = 0; j <= n; ++j) x(r, j) = std::pow(radii[r] / rmax, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()[0] / svd.singularValues()[n];
    if (!(cond < 1e8))
        throw std::invalid_argument("steiner_fit: ill-conditioned radii set, condition " +
                                    std::to_string(cond));

    const Eigen::VectorXd beta = svd.solve(y);
    const Eigen::VectorXd resid = y - x * beta;

    // Covariance of beta through the pseudoinverse.
    const Eigen::MatrixXd pinv =
        svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
        svd.matrixU().transpose();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n + 1);
    for (int j = 0; j <= n; ++j)
        for (int r = 0; r < m; ++r) var[j] += pinv(j, r) * pinv(j, r) * sigma[r] * sigma[r];

    SteinerCoeffs out;
    out.n = n;
    out.coeffs = beta;
    out.coeff_stderr = var.cwiseSqrt();
    for (int j = 0; j <= n; ++j) {
        const double scale = std::pow(rmax, j);
        out.coeffs[j] /= scale;
        out.coeff_stderr[j] /= scale;
    }
    out.residual = std::sqrt(resid.squaredNorm() / m);
    out.condition = cond;
    return out;
}

namespace steiner_detail {

inline double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Elementary symmetric polynomials e_0..e_d of the entries of s.
inline Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& s) {
    const int d = static_cast<int>(s.size());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d + 1);
    e[0] = 1.0;
    for (int q = 0; q < d; ++q)
        for (int j = std::min(q + 1, d); j >= 1; --j) e[j] += s[q] * e[j - 1];
    return e;
}

// Recognize a (possibly rotated) box spanned from a corner: d orthogonal
// edge vectors whose subset sums reproduce the 2^d vertex set. Returns
// the side lengths.
inline bool recognize_box(const Eigen::MatrixXd& y, Eigen::VectorXd& sides, double tol = 1e-9) {
    const int d = static_cast<int>(y.rows());
    const int m = static_cast<int>(y.cols());
    if (m != (1 << d)) return false;
    // Corner = lexicographically smallest vertex.
    int i0 = 0;
    for (int i = 1; i < m; ++i) {
        for (int q = 0; q < d; ++q) {
            if (y(q, i) < y(q, i0) - 1e-12) {
                i0 = i;
                break;
            }
            if (y(q, i) > y(q, i0) + 1e-12) break;
        }
    }
    std::vector<Eigen::VectorXd> diffs;
    for (int i = 0; i < m; ++i)
        if (i != i0) diffs.push_back(y.col(i) - y.col(i0));
    std::sort(diffs.begin(), diffs.end(),
              [](const auto& a, const auto& b) { return a.norm() < b.norm(); });
    // Greedy orthogonal edge set: face diagonals are never orthogonal to
    // both of their edges, so shortest-first selection finds the edges.
    std::vector<Eigen::VectorXd> edges;
    for (const auto& v : diffs) {
        bool ortho = true;
        for (const auto& e : edges)
            if (std::abs(e.dot(v)) > tol * (1.0 + e.norm() * v.norm())) {
                ortho = false;
                break;
            }
        if (ortho) edges.push_back(v);
        if (static_cast<int>(edges.size()) == d) break;
    }
    if (static_cast<int>(edges.size()) != d) return false;
    // Verify every subset sum is a vertex.
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        Eigen::VectorXd p = y.col(i0);
        for (int q = 0; q < d; ++q)
            if (mask & (1u << q)) p += edges[q];
        bool found = false;
        for (int i = 0; i < m; ++i)
            if ((y.col(i) - p).norm() <= tol * (1.0 + p.norm())) {
                found = true;
                break;
            }
        if (!found) return false;
    }
    sides.resize(d);
    for (int q = 0; q < d; ++q) sides[q] = edges[q].norm();
    return true;
}

// Standard-normalized intrinsic volumes (v_0, ..., v_d) of the body
// within its affine hull: v_0 = 1, v_d = intrinsic volume, and for
// orthogonal direct products the profiles convolve. The ball-identity
// normalized values follow as V_i = v_i * omega_{n-i} / C(n, i).
inline std::optional<Eigen::VectorXd> standard_profile(const ConvexBody& body);

// Orthonormal basis of the linear span of the body's directions (empty
// for a point, full for a ball/ellipsoid).
inline std::optional<Eigen::MatrixXd> direction_span(const ConvexBody& b) {
    switch (b.kind()) {
        case ConvexBody::Kind::Ball:
        case ConvexBody::Kind::Ellipsoid:
            return Eigen::MatrixXd::Identity(b.dim(), b.dim());
        case ConvexBody::Kind::Polytope: {
            const auto [base, dirs] = affine_hull(b.vertices());
            return dirs;
        }
        default:
            return std::nullopt;
    }
}

inline std::optional<Eigen::VectorXd> standard_profile(const ConvexBody& body) {
    const ConvexBody b = simplified(body);
    const int n = b.dim();
    switch (b.kind()) {
        case ConvexBody::Kind::Ball: {
            // v_i(B_r^n) = C(n, i) omega_n / omega_{n-i} * r^i.
            Eigen::VectorXd v(n + 1);
            for (int i = 0; i <= n; ++i)
                v[i] = binom(n, i) * unit_ball_volume(n) / unit_ball_volume(n - i) *
                       std::pow(b.radius(), i);
            return v;
        }
        case ConvexBody::Kind::Ellipsoid: {
            if (n != 2) return std::nullopt;
            // The 2-D curvature route returns perimeter / 2, which is v_1.
            Eigen::VectorXd v(3);
            v << 1.0, curvature_intrinsic_2d(SupportCurve2D::ellipse(b.shape()), 1, 512),
                M_PI * std::sqrt(b.shape().determinant());
            return v;
        }
        case ConvexBody::Kind::Polytope: {
            const auto [base, dirs] = affine_hull(b.vertices());
            const int d = static_cast<int>(dirs.cols());
            const Eigen::MatrixXd y =
                dirs.transpose() * (b.vertices().colwise() - base);
            if (d == 0) return Eigen::VectorXd::Ones(1);
            if (d == 1) {
                Eigen::VectorXd v(2);
                v << 1.0, y.row(0).maxCoeff() - y.row(0).minCoeff();
                return v;
            }
            if (d == 2) {
                Eigen::VectorXd v(3);
                v << 1.0, 0.5 * polygon_perimeter(y), polytope_volume(y);
                return v;
            }
            Eigen::VectorXd sides;
            if (recognize_box(y, sides)) return elementary_symmetric(sides);
            return std::nullopt;
        }
        case ConvexBody::Kind::MinkSum: {
            // Orthogonal direct products: profiles convolve.
            Eigen::VectorXd prof = Eigen::VectorXd::Ones(1);
            std::vector<Eigen::MatrixXd> spans;
            for (const ConvexBody& raw : b.parts()) {
                const ConvexBody part = simplified(raw);
                const auto span = direction_span(part);
                const auto p = standard_profile(part);
                if (!span || !p) return std::nullopt;
                for (const auto& other : spans)
                    if ((other.transpose() * *span).norm() > 1e-10) return std::nullopt;
                spans.push_back(*span);
                Eigen::VectorXd next = Eigen::VectorXd::Zero(prof.size() + p->size() - 1);
                for (int a = 0; a < prof.size(); ++a)
                    for (int c = 0; c < p->size(); ++c) next[a + c] += prof[a] * (*p)[c];
                prof = next;
            }
            return prof;
        }
        default:
            return std::nullopt;
    }
}

}  // namespace steiner_detail

// Closed-form intrinsic volumes where available: balls, 2-D bodies,
// (rotated) boxes, and orthogonal direct products of those; ball-identity
// normalization V_i = v_i * omega_{n-i} / C(n, i).
inline std::optional<double> intrinsic_volume_exact(const ConvexBody& body, int i) {
    const ConvexBody b = simplified(body);
    const int n = b.dim();
    if (i < 0 || i > n) throw std::invalid_argument("intrinsic_volume_exact: index out of range");
    const auto prof = steiner_detail::standard_profile(b);
    if (!prof) return std::nullopt;
    const double vi = i < prof->size() ? (*prof)[i] : 0.0;
    return vi * unit_ball_volume(n - i) / steiner_detail::binom(n, i);
}

// V_i(K) by the Steiner route (exact shortcut used only when the caller
// allows it through SteinerVolumeMode::Auto on the fit inputs).
inline MCEstimate intrinsic_volume(const ConvexBody& k, int i, const MCConfig& mc,
                                   const RandomStream& stream,
                                   SteinerVolumeMode mode = SteinerVolumeMode::Auto,
                                   const std::vector<double>* radii = nullptr) {
    const int n = k.dim();
    if (i < 0 || i > n) throw std::invalid_argument("intrinsic_volume: index out of range");
    const std::vector<double> rr = radii ? *radii : default_steiner_radii(k);
    const SteinerCoeffs sc = steiner_fit(k, rr, mc, stream, mode);
    const Eigen::VectorXd gamma = steiner_to_intrinsic_factors(n);
    return {gamma[i] * sc.coeffs[n - i], gamma[i] * sc.coeff_stderr[n - i],
            mc.samples * rr.size(), stream.seed()};
}

struct DerivativeEstimate {
    double value = 0.0;
    double error = 0.0;  // Richardson tail estimate
};

// (Lambda phi)(K): one-sided derivative of eps -> phi(K + eps D) at 0,
// by Richardson extrapolation of forward differences over the step
// schedule h0, h0/2, h0/4, ...
inline DerivativeEstimate lambda_apply(const std::function<double(const ConvexBody&)>& phi,
                                       const ConvexBody& k, double h0 = 0.2, int levels = 6) {
    if (levels < 2) throw std::invalid_argument("lambda_apply: need at least two levels");
    const double phi0 = phi(k);
    std::vector<std::vector<double>> t(levels);
    double prev_diag = 0.0;
    DerivativeEstimate out;
    for (int r = 0; r < levels; ++r) {
        const double h = h0 / std::pow(2.0, r);
        t[r].resize(r + 1);
        t[r][0] = (phi(dilated(k, h)) - phi0) / h;
        double p2 = 2.0;
        for (int j = 1; j <= r; ++j) {
            t[r][j] = (p2 * t[r][j - 1] - t[r - 1][j - 1]) / (p2 - 1.0);
            p2 *= 2.0;
        }
        if (r > 0) {
            out.value = t[r][r];
            out.error = std::abs(t[r][r] - prev_diag);
        }
        prev_diag = t[r][r];
    }
    if (!std::isfinite(out.value) || out.error > 1e6 * (std::abs(out.value) + 1.0))
        throw std::runtime_error("lambda_apply: extrapolation diverged");
    return out;
}

}  // namespace vallab
