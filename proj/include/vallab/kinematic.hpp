#pragma once

// Kinematic integrals over rigid motions: MC estimation of
// integral of chi(K1 cap U K2) dU for U in ISO(n) or IU(m), exact
// derivation of the principal kinematic constants from the ball system,
// and least-squares recovery of the Hermitian kinematic constants in C^2.
//
// dU convention: Haar probability on the rotation part, Lebesgue on
// translations (window-restricted with indicator correction). With this
// convention the two-ball integral is exactly omega_n (r+s)^n.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vallab/body.hpp"
#include "vallab/hermitian.hpp"
#include "vallab/random.hpp"
#include "vallab/steiner.hpp"

namespace vallab {

struct MotionMeasure {
    enum class Group { ISO, IU };
    Group group = Group::ISO;
    int rotation_size = 0;  // n for ISO(n); m for IU(m) (acting on R^{2m})
    Eigen::VectorXd window_lo, window_hi;

    double window_volume() const { return (window_hi - window_lo).prod(); }

    // Window covering {t : K1 cap (R K2 + t) != 0} for every rotation R:
    // the bounding box of K1 grown by the outer radius of K2.
    static MotionMeasure over(Group g, const ConvexBody& k1, const ConvexBody& k2,
                              double inflate = 1e-6) {
        if (k1.dim() != k2.dim())
            throw std::invalid_argument("MotionMeasure: dimension mismatch");
        const int n = k1.dim();
        if (g == Group::IU && n % 2 != 0)
            throw std::invalid_argument("MotionMeasure: IU needs even real dimension");
        MotionMeasure m;
        m.group = g;
        m.rotation_size = (g == Group::ISO) ? n : n / 2;
        const double r2 = outer_radius(k2) + inflate;
        m.window_lo.resize(n);
        m.window_hi.resize(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[i] = 1.0;
            m.window_hi[i] = support(k1, e) + r2;
            m.window_lo[i] = -support(k1, -e) - r2;
        }
        return m;
    }

    Eigen::MatrixXd sample_rotation(RandomStream& rng) const {
        return group == Group::ISO ? haar_rotation(rotation_size, rng)
                                   : realify(haar_unitary(rotation_size, rng));
    }
};

// window_volume x P[K1 cap (R K2 + t) != 0] under Haar R, uniform t.
inline MCEstimate kinematic_integral(const ConvexBody& k1, const ConvexBody& k2,
                                     const MotionMeasure& measure, const MCConfig& mc,
                                     const RandomStream& stream) {
    if (k1.dim() != k2.dim())
        throw std::invalid_argument("kinematic_integral: dimension mismatch");
    const int n = k1.dim();
    if (measure.window_lo.size() != n || (measure.window_hi - measure.window_lo).minCoeff() <= 0)
        throw std::invalid_argument("kinematic_integral: invalid translation window");
    const double wvol = measure.window_volume();

    MCEstimate e = mc_mean(mc.samples, stream, mc.threads, [&](RandomStream& s) {
        const Eigen::MatrixXd r = measure.sample_rotation(s);
        const Eigen::VectorXd t = s.uniform_in_box(measure.window_lo, measure.window_hi);
        // Support oracle of K1 - (R K2 + t); origin within tol iff they meet.
        SupportPointFn sp = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
            return support_point(k1, u) - r * support_point(k2, -(r.transpose() * u)) - t;
        };
        return gjk_within(sp, n, mc.membership_tol) ? 1.0 : 0.0;
    });
    return e * wvol;
}

struct KappaTable {
    int n = 0;
    Eigen::VectorXd kappa;  // kappa_0..kappa_n
    double residual = 0.0;  // max violation of the ball-system equations
};

// Solve omega_n (r+s)^n = sum_k kappa_k (omega_n r^k)(omega_n s^{n-k})
// over the supplied ball pairs; exact linear algebra, no MC.
inline KappaTable derive_kappa(int n, const std::vector<std::pair<double, double>>& ball_pairs) {
    const int m = static_cast<int>(ball_pairs.size());
    if (m < n + 1) throw std::invalid_argument("derive_kappa: need at least n+1 ball pairs");
    const double wn = unit_ball_volume(n);
    Eigen::MatrixXd x(m, n + 1);
    Eigen::VectorXd y(m);
    for (int q = 0; q < m; ++q) {
        const auto [r, s] = ball_pairs[q];
        if (r <= 0 || s <= 0) throw std::invalid_argument("derive_kappa: radii must be positive");
        for (int k = 0; k <= n; ++k) x(q, k) = wn * std::pow(r, k) * wn * std::pow(s, n - k);
        y[q] = wn * std::pow(r + s, n);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()[n] < 1e-12 * svd.singularValues()[0])
        throw std::invalid_argument("derive_kappa: singular ball system (degenerate radii)");
    KappaTable out;
    out.n = n;
    out.kappa = svd.solve(y);
    out.residual = (x * out.kappa - y).cwiseAbs().maxCoeff();
    return out;
}

// V_k with an exact value when the body family allows it, else the
// Steiner route; the boolean marks exactness.
inline MCEstimate intrinsic_volume_best(const ConvexBody& k, int i, const MCConfig& mc,
                                        const RandomStream& stream) {
    if (const auto exact = intrinsic_volume_exact(k, i)) return {*exact, 0.0, 0, stream.seed()};
    return intrinsic_volume(k, i, mc, stream);
}

struct KinematicCheck {
    MCEstimate lhs;
    double rhs = 0.0;
    double rhs_stderr = 0.0;
    double z = 0.0;
};

// Principal kinematic formula: MC LHS against
// sum_k kappa_k V_k(K1) V_{n-k}(K2).
inline KinematicCheck principal_kinematic_check(const ConvexBody& k1, const ConvexBody& k2,
                                                const KappaTable& kappa, const MCConfig& mc,
                                                const RandomStream& stream) {
    const int n = k1.dim();
    if (kappa.n != n) throw std::invalid_argument("principal_kinematic_check: kappa table for wrong n");
    KinematicCheck out;
    out.lhs = kinematic_integral(k1, k2, MotionMeasure::over(MotionMeasure::Group::ISO, k1, k2),
                                 mc, stream.split(0));
    for (int k = 0; k <= n; ++k) {
        const MCEstimate a = intrinsic_volume_best(k1, k, mc, stream.split(2 * k + 1));
        const MCEstimate b = intrinsic_volume_best(k2, n - k, mc, stream.split(2 * k + 2));
        out.rhs += kappa.kappa[k] * a.value * b.value;
        out.rhs_stderr = std::hypot(out.rhs_stderr,
                                    kappa.kappa[k] * std::hypot(a.stderror * b.value,
                                                                b.stderror * a.value));
    }
    const double sigma = std::hypot(out.lhs.stderror, out.rhs_stderr);
    out.z = sigma > 0 ? std::abs(out.lhs.value - out.rhs) / sigma : 0.0;
    return out;
}

struct HermitianIndex {
    int k1, k2, p1, p2;
};

// Basis-indexed constants for m = 2: k1 + k2 = 4 with p bounded by the
// basis range min{k, 2m-k}/2, giving 8 unknowns.
inline std::vector<HermitianIndex> hermitian_index_set(int m) {
    std::vector<HermitianIndex> idx;
    for (int k1 = 0; k1 <= 2 * m; ++k1) {
        const int k2 = 2 * m - k1;
        for (int p1 = 0; p1 < hermitian_p_count(k1, m); ++p1)
            for (int p2 = 0; p2 < hermitian_p_count(k2, m); ++p2)
                idx.push_back({k1, k2, p1, p2});
    }
    return idx;
}

struct KinematicFit {
    std::vector<HermitianIndex> indices;
    Eigen::VectorXd constants;
    Eigen::VectorXd constants_stderr;  // from the LHS MC noise through the solve
    Eigen::MatrixXd design;       // training rows
    double condition = 0.0;       // of the column-scaled design
    Eigen::VectorXd train_residual_rel;
    Eigen::VectorXd heldout_residual_rel;
    double symmetry_defect = 0.0;    // max |c(k1,k2,p1,p2) - c(k2,k1,p2,p1)|
    double symmetry_scale = 0.0;     // constant magnitude for comparison
    std::vector<MCEstimate> lhs;     // all pairs, train then held-out
};

// Least-squares recovery of the C^2 kinematic constants from MC motion
// integrals over IU(2): rows are body pairs, columns the 8 basis-indexed
// products U_{k1,p1}(A) U_{k2,p2}(B).
inline KinematicFit fit_hermitian_constants(
    int m, const std::vector<std::pair<ConvexBody, ConvexBody>>& train_pairs,
    const std::vector<std::pair<ConvexBody, ConvexBody>>& heldout_pairs, const MCConfig& mc,
    const RandomStream& stream) {
    if (m != 2)
        throw std::invalid_argument("fit_hermitian_constants: only m = 2 is supported");
    KinematicFit fit;
    fit.indices = hermitian_index_set(m);
    const int nc = static_cast<int>(fit.indices.size());
    if (static_cast<int>(train_pairs.size()) < 2 * nc)
        throw std::invalid_argument(
            "fit_hermitian_constants: need at least twice as many training pairs as unknowns");
    if (heldout_pairs.size() < 3)
        throw std::invalid_argument("fit_hermitian_constants: need at least 3 held-out pairs");

    auto design_row = [&](const std::pair<ConvexBody, ConvexBody>& pr, std::uint64_t id,
                          Eigen::VectorXd& row) {
        row.resize(nc);
        // U-values are shared across indices; evaluate each (k, p) once.
        std::array<std::array<double, 3>, 5> ua{}, ub{};
        for (int k = 0; k <= 2 * m; ++k)
            for (int p = 0; p < hermitian_p_count(k, m); ++p) {
                ua[k][p] = u_kp(pr.first, m, k, p, mc, stream.split(id * 97 + k * 8 + p)).value;
                ub[k][p] =
                    u_kp(pr.second, m, k, p, mc, stream.split(id * 97 + 40 + k * 8 + p)).value;
            }
        for (int c = 0; c < nc; ++c) {
            const auto& ix = fit.indices[c];
            row[c] = ua[ix.k1][ix.p1] * ub[ix.k2][ix.p2];
        }
    };

    const int nt = static_cast<int>(train_pairs.size());
    const int nh = static_cast<int>(heldout_pairs.size());
    Eigen::MatrixXd xt(nt, nc), xh(nh, nc);
    Eigen::VectorXd yt(nt), yh(nh);
    for (int r = 0; r < nt; ++r) {
        Eigen::VectorXd row;
        design_row(train_pairs[r], r, row);
        xt.row(r) = row;
        const MCEstimate lhs = kinematic_integral(
            train_pairs[r].first, train_pairs[r].second,
            MotionMeasure::over(MotionMeasure::Group::IU, train_pairs[r].first,
                                train_pairs[r].second),
            mc, stream.split(100000 + r));
        yt[r] = lhs.value;
        fit.lhs.push_back(lhs);
    }
    for (int r = 0; r < nh; ++r) {
        Eigen::VectorXd row;
        design_row(heldout_pairs[r], 1000 + r, row);
        xh.row(r) = row;
        const MCEstimate lhs = kinematic_integral(
            heldout_pairs[r].first, heldout_pairs[r].second,
            MotionMeasure::over(MotionMeasure::Group::IU, heldout_pairs[r].first,
                                heldout_pairs[r].second),
            mc, stream.split(200000 + r));
        yh[r] = lhs.value;
        fit.lhs.push_back(lhs);
    }

    // Column scaling before the solve; constants are rescaled back.
    Eigen::VectorXd scale(nc);
    for (int c = 0; c < nc; ++c) {
        scale[c] = xt.col(c).cwiseAbs().maxCoeff();
        if (scale[c] <= 0)
            throw std::invalid_argument("fit_hermitian_constants: degenerate design column");
    }
    const Eigen::MatrixXd xs = xt * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    fit.condition = svd.singularValues()[0] / svd.singularValues()[nc - 1];
    if (!(fit.condition < 1e6))
        throw std::runtime_error(
            "fit_hermitian_constants: design condition " + std::to_string(fit.condition) +
            " exceeds 1e6; choose body pairs that better break unitary symmetry");
    fit.constants = scale.cwiseInverse().asDiagonal() * svd.solve(yt);
    fit.design = xt;

    // Constant uncertainty from the LHS Monte Carlo noise.
    const Eigen::MatrixXd pinv = svd.matrixV() *
                                 svd.singularValues().cwiseInverse().asDiagonal() *
                                 svd.matrixU().transpose();
    fit.constants_stderr = Eigen::VectorXd::Zero(nc);
    for (int c = 0; c < nc; ++c) {
        for (int r = 0; r < nt; ++r)
            fit.constants_stderr[c] =
                std::hypot(fit.constants_stderr[c], pinv(c, r) * fit.lhs[r].stderror);
        fit.constants_stderr[c] /= scale[c];
    }

    fit.train_residual_rel = (xt * fit.constants - yt).cwiseAbs().cwiseQuotient(yt.cwiseAbs());
    fit.heldout_residual_rel = (xh * fit.constants - yh).cwiseAbs().cwiseQuotient(yh.cwiseAbs());

    fit.symmetry_scale = fit.constants.cwiseAbs().maxCoeff();
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
            const auto& ia = fit.indices[a];
            const auto& ib = fit.indices[b];
            if (ia.k1 == ib.k2 && ia.k2 == ib.k1 && ia.p1 == ib.p2 && ia.p2 == ib.p1)
                fit.symmetry_defect =
                    std::max(fit.symmetry_defect, std::abs(fit.constants[a] - fit.constants[b]));
        }
    return fit;
}

// RHS of the fitted Hermitian formula for one pair, with uncertainty
// from both the constants and the U_{k,p} estimates.
inline MCEstimate hermitian_rhs(const KinematicFit& fit, int m, const ConvexBody& k1,
                                const ConvexBody& k2, const MCConfig& mc,
                                const RandomStream& stream) {
    MCEstimate out{0.0, 0.0, 0, stream.seed()};
    for (std::size_t c = 0; c < fit.indices.size(); ++c) {
        const auto& ix = fit.indices[c];
        const MCEstimate a = u_kp(k1, m, ix.k1, ix.p1, mc, stream.split(2 * c));
        const MCEstimate b = u_kp(k2, m, ix.k2, ix.p2, mc, stream.split(2 * c + 1));
        out.value += fit.constants[c] * a.value * b.value;
        out.stderror = std::hypot(
            out.stderror,
            std::hypot(fit.constants_stderr[c] * a.value * b.value,
                       fit.constants[c] * std::hypot(a.stderror * b.value,
                                                     b.stderror * a.value)));
    }
    return out;
}

}  // namespace vallab
