#pragma once

// Unitarily invariant valuations on C^m, realized on R^{2m} with the
// interleaved complex structure (Re z_1, Im z_1, ..., Re z_m, Im z_m):
// U_{k,p}(K) averages V_{k-2p} of slices by complex affine (m-p)-planes.
//
// Measure convention: Haar probability on the rotational part of the
// Grassmannian, Lebesgue on the translations in the 2p-real-dimensional
// orthogonal complement (window-restricted with indicator correction).
// This makes U_{k,0} = V_k exactly.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vallab/body.hpp"
#include "vallab/random.hpp"
#include "vallab/steiner.hpp"
#include "vallab/subspace.hpp"

namespace vallab {

struct ComplexStructure {
    int m = 0;
    Eigen::MatrixXd j;  // 2m x 2m, j^2 = -I, orthogonal

    static ComplexStructure standard(int m) { return {m, complex_structure(m)}; }
};

// Haar unitary as a real orthogonal J-commuting matrix.
inline Eigen::MatrixXd sample_unitary(int m, RandomStream& rng) {
    return realify(haar_unitary(m, rng));
}

struct GrassmannSample {
    AffineSubspace subspace;       // complex dimension m - p (real 2(m-p))
    Eigen::MatrixXd complement;    // 2m x 2p, orthonormal, J-invariant span
    double window_volume = 0.0;    // Lebesgue measure of the translation window
};

// Draw a complex affine (m-p)-plane: J-commuting Haar rotation of the
// first m-p complex coordinate axes, translated uniformly in a window
// covering the projection of K onto the orthogonal complement.
inline GrassmannSample sample_grassmann(const ConvexBody& k, int m, int p, RandomStream& rng,
                                        double inflate = 1e-6) {
    if (k.dim() != 2 * m) throw std::invalid_argument("sample_grassmann: dimension mismatch");
    if (p < 1 || p > m) throw std::invalid_argument("sample_grassmann: p out of range");
    const Eigen::MatrixXd u = sample_unitary(m, rng);
    const Eigen::MatrixXd dirs = u.leftCols(2 * (m - p));
    const Eigen::MatrixXd comp = u.rightCols(2 * p);

    // Window = bounding box of the projection of K onto the complement.
    Eigen::VectorXd lo(2 * p), hi(2 * p);
    for (int q = 0; q < 2 * p; ++q) {
        hi[q] = support(k, comp.col(q)) + inflate;
        lo[q] = -support(k, -comp.col(q)) - inflate;
    }
    Eigen::VectorXd t(2 * p);
    for (int q = 0; q < 2 * p; ++q) t[q] = rng.uniform(lo[q], hi[q]);

    GrassmannSample out{AffineSubspace(comp * t, dirs), comp, (hi - lo).prod()};
    return out;
}

namespace hermitian_detail {

// V_i of a slice expressed in E-coordinates: closed form when available,
// otherwise an inner Steiner fit on a reduced budget.
inline double slice_intrinsic(const ConvexBody& s, int i, const MCConfig& mc, RandomStream& rng) {
    if (const auto exact = intrinsic_volume_exact(s, i)) return *exact;
    MCConfig inner = mc;
    inner.samples = mc.inner_samples;
    inner.threads = 1;
    return intrinsic_volume(s, i, inner, rng.split(rng.next_u64()),
                            SteinerVolumeMode::Auto)
        .value;
}

}  // namespace hermitian_detail

// U_{k,p}(K) for K in R^{2m}: Monte Carlo over Grassmann samples of
// V_{k-2p}(K cap E), with the convention above. p = 0 short-circuits to
// the Steiner-route V_k.
inline MCEstimate u_kp(const ConvexBody& k, int m, int kk, int p, const MCConfig& mc,
                       const RandomStream& stream) {
    if (k.dim() != 2 * m) throw std::invalid_argument("u_kp: body not in R^{2m}");
    if (p < 0 || kk < 0 || 2 * p > kk || kk > 2 * m)
        throw std::invalid_argument("u_kp: need 0 <= 2p <= k <= 2m");
    if (p == 0) {
        if (const auto exact = intrinsic_volume_exact(k, kk))
            return {*exact, 0.0, 0, stream.seed()};
        return intrinsic_volume(k, kk, mc, stream);
    }

    const int slice_dim = 2 * (m - p);
    const int inner_degree = kk - 2 * p;
    const double v0 = unit_ball_volume(slice_dim);  // V_0 of any nonempty slice

    return mc_mean(mc.samples, stream, mc.threads, [&](RandomStream& s) {
        const GrassmannSample g = sample_grassmann(k, m, p, s);
        if (inner_degree == 0) {
            // Only the nonemptiness of the slice matters.
            const GjkResult d = subspace_body_distance(g.subspace, k, mc.membership_tol);
            return d.distance <= mc.membership_tol ? g.window_volume * v0 : 0.0;
        }
        const auto sl = slice(k, g.subspace, mc.membership_tol);
        if (!sl) return 0.0;
        return g.window_volume * hermitian_detail::slice_intrinsic(*sl, inner_degree, mc, s);
    });
}

inline int hermitian_p_count(int kk, int m) {
    return std::min(kk, 2 * m - kk) / 2 + 1;  // valid p: 0 <= p <= min{k, 2m-k}/2
}

struct BasisRankReport {
    Eigen::MatrixXd values;   // bodies x p-values
    Eigen::MatrixXd stderrs;
    Eigen::VectorXd singular_values;  // of the column-scaled matrix
    double noise_floor = 0.0;
    int rank = 0;
};

// Evaluation matrix M[body][p] = U_{k,p}(body); its numerical rank at a
// 10x noise-floor threshold certifies the independence of the U_{k,p}.
inline BasisRankReport basis_rank(int kk, int m, const std::vector<ConvexBody>& family,
                                  const MCConfig& mc, const RandomStream& stream) {
    const int np = hermitian_p_count(kk, m);
    const int nb = static_cast<int>(family.size());
    if (nb < np) throw std::invalid_argument("basis_rank: body family smaller than the p-range");

    BasisRankReport out;
    out.values.resize(nb, np);
    out.stderrs.resize(nb, np);
    for (int b = 0; b < nb; ++b) {
        for (int p = 0; p < np; ++p) {
            const MCEstimate e =
                u_kp(family[b], m, kk, p, mc, stream.split(b * 16 + p));
            out.values(b, p) = e.value;
            out.stderrs(b, p) = e.stderror;
        }
    }

    // Column scaling keeps heterogeneous magnitudes comparable.
    Eigen::MatrixXd scaled = out.values;
    Eigen::MatrixXd sig = out.stderrs;
    for (int p = 0; p < np; ++p) {
        const double s = scaled.col(p).cwiseAbs().maxCoeff();
        if (s > 0) {
            scaled.col(p) /= s;
            sig.col(p) /= s;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    out.singular_values = svd.singularValues();
    out.noise_floor = sig.norm();
    const double thresh = 10.0 * std::max(out.noise_floor, 1e-12);
    out.rank = static_cast<int>((out.singular_values.array() > thresh).count());
    return out;
}

}  // namespace vallab
