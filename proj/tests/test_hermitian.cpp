#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "vallab/hermitian.hpp"

using namespace vallab;
using Eigen::MatrixXd;
using Eigen::Vector4d;
using Eigen::VectorXd;

namespace {

// Regular ngon in the complex coordinate `slot` of C^m, embedded in R^{2m}.
ConvexBody coord_disk(int m, int slot, double r, int ngon = 32) {
    MatrixXd v = MatrixXd::Zero(2 * m, ngon);
    for (int i = 0; i < ngon; ++i) {
        const double t = 2 * M_PI * i / ngon;
        v(2 * slot, i) = r * std::cos(t);
        v(2 * slot + 1, i) = r * std::sin(t);
    }
    return ConvexBody::polytope(v);
}

// Axis square [0,s]^2 in the complex coordinate `slot`.
ConvexBody coord_square(int m, int slot, double s) {
    MatrixXd v = MatrixXd::Zero(2 * m, 4);
    v(2 * slot, 1) = s;
    v(2 * slot + 1, 2) = s;
    v(2 * slot, 3) = s;
    v(2 * slot + 1, 3) = s;
    return ConvexBody::polytope(v);
}

}  // namespace

TEST_CASE("sampled subspaces are complex: J-invariant span, orthonormal frames") {
    RandomStream rng(1);
    const ConvexBody ball = ConvexBody::ball(Vector4d::Zero(), 1.0);
    const ComplexStructure cs = ComplexStructure::standard(2);
    for (int i = 0; i < 20; ++i) {
        const GrassmannSample g = sample_grassmann(ball, 2, 1, rng);
        CHECK(g.subspace.dim() == 2);
        CHECK(g.subspace.span_invariant_under(cs.j));
        // Complement is J-invariant too and orthogonal to the span.
        const MatrixXd cross = g.subspace.directions.transpose() * g.complement;
        CHECK(cross.norm() < 1e-10);
        CHECK((cs.j * g.complement -
               g.complement * (g.complement.transpose() * cs.j * g.complement))
                  .norm() < 1e-10);
        // Window covers the projected unit ball: volume >= (2r)^2.
        CHECK(g.window_volume >= 4.0);
        CHECK(g.window_volume <= 4.5);
    }
}

TEST_CASE("U_{k,0} coincides with V_k") {
    MCConfig mc;
    const ConvexBody box = ConvexBody::axis_box(VectorXd::Zero(4), Vector4d(1, 2, 1, 0.5));
    for (int k = 0; k <= 4; ++k) {
        const MCEstimate a = u_kp(box, 2, k, 0, mc, RandomStream(7));
        const MCEstimate b = intrinsic_volume(box, k, mc, RandomStream(7));
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
        CHECK(a.stderror == 0.0);
    }
}

TEST_CASE("U_{2,1} of a ball in C^2 is pi^2 r^2") {
    MCConfig mc;
    mc.samples = 200000;
    for (double r : {1.0, 1.7}) {
        const ConvexBody ball = ConvexBody::ball(Vector4d::Zero(), r);
        const MCEstimate e = u_kp(ball, 2, 2, 1, mc, RandomStream(11));
        CHECK(std::abs(e.value - M_PI * M_PI * r * r) <= 3 * e.stderror);
    }
}

TEST_CASE("homogeneity: U_{k,p}(2K) = 2^k U_{k,p}(K)") {
    MCConfig mc;
    mc.samples = 100000;
    const ConvexBody box = ConvexBody::axis_box(VectorXd::Zero(4), Vector4d(1, 1, 2, 1));
    const MCEstimate base = u_kp(box, 2, 2, 1, mc, RandomStream(13));
    const MCEstimate twice =
        u_kp(ConvexBody::scaled(2.0, box), 2, 2, 1, mc, RandomStream(14));
    CHECK(std::abs(twice.value - 4 * base.value) <=
          3 * std::hypot(twice.stderror, 4 * base.stderror));
}

TEST_CASE("unitary and translation invariance, even parity") {
    MCConfig mc;
    mc.samples = 100000;
    RandomStream setup(99);
    const ConvexBody box = ConvexBody::axis_box(VectorXd::Zero(4), Vector4d(1, 0.5, 2, 1));
    const MCEstimate base = u_kp(box, 2, 2, 1, mc, RandomStream(15));

    // Random element of IU(2): realified unitary rotation plus translation.
    const RigidMotion g(sample_unitary(2, setup), Vector4d(0.3, -1.0, 0.7, 0.2));
    const MCEstimate moved =
        u_kp(ConvexBody::transformed(g, box), 2, 2, 1, mc, RandomStream(16));
    CHECK(std::abs(moved.value - base.value) <= 3 * std::hypot(moved.stderror, base.stderror));

    // -K via the rotation -I (in SO(4)).
    const RigidMotion neg(-Eigen::MatrixXd::Identity(4, 4), VectorXd::Zero(4));
    const MCEstimate reflected =
        u_kp(ConvexBody::transformed(neg, box), 2, 2, 1, mc, RandomStream(17));
    CHECK(std::abs(reflected.value - base.value) <=
          3 * std::hypot(reflected.stderror, base.stderror));
}

TEST_CASE("p-range dimension counts") {
    // m = 2: (1, 1, 2, 1, 1) for k = 0..4.
    const int expected_m2[5] = {1, 1, 2, 1, 1};
    for (int k = 0; k <= 4; ++k) CHECK(hermitian_p_count(k, 2) == expected_m2[k]);
    // m = 3: (1, 1, 2, 2, 2, 1, 1) for k = 0..6.
    const int expected_m3[7] = {1, 1, 2, 2, 2, 1, 1};
    for (int k = 0; k <= 6; ++k) CHECK(hermitian_p_count(k, 3) == expected_m3[k]);
}

TEST_CASE("evaluation-matrix ranks for m=2 are (1,1,2,1,1)") {
    MCConfig mc;
    mc.samples = 60000;
    // Flat complex disk and totally real square separate U_{2,0} from
    // U_{2,1} strongly (slice-hit ratios ~3.0 vs ~1.5); the ball, box,
    // and disk x square product sit in between.
    MatrixXd rsq = MatrixXd::Zero(4, 4);
    rsq(0, 1) = 1;
    rsq(2, 2) = 1;
    rsq(0, 3) = 1;
    rsq(2, 3) = 1;
    const std::vector<ConvexBody> family{
        coord_disk(2, 0, 1.0),
        ConvexBody::polytope(rsq),
        ConvexBody::ball(Vector4d::Zero(), 1.0),
        ConvexBody::axis_box(VectorXd::Zero(4), VectorXd::Constant(4, 1.0)),
        ConvexBody::mink_sum({coord_disk(2, 0, 1.0), coord_square(2, 1, 1.0)})};
    const int expected[5] = {1, 1, 2, 1, 1};
    for (int k = 0; k <= 4; ++k) {
        const BasisRankReport r = basis_rank(k, 2, family, mc, RandomStream(21 + k));
        CHECK(r.rank == expected[k]);
    }
    // The k=2 columns are genuinely different valuations: slice-hit
    // ratios are not constant across the family.
    const BasisRankReport r2 = basis_rank(2, 2, family, mc, RandomStream(23));
    const double ratio0 = r2.values(0, 1) / r2.values(0, 0);
    const double ratio1 = r2.values(1, 1) / r2.values(1, 0);
    CHECK(std::abs(ratio0 - ratio1) > 1.0);
}

TEST_CASE("argument validation") {
    MCConfig mc;
    const ConvexBody ball = ConvexBody::ball(Vector4d::Zero(), 1.0);
    CHECK_THROWS_AS(u_kp(ball, 2, 5, 0, mc, RandomStream(1)), std::invalid_argument);
    CHECK_THROWS_AS(u_kp(ball, 2, 2, 2, mc, RandomStream(1)), std::invalid_argument);
    CHECK_THROWS_AS(u_kp(ball, 3, 2, 1, mc, RandomStream(1)), std::invalid_argument);
    const ConvexBody b2 = ConvexBody::ball(Eigen::Vector2d::Zero(), 1.0);
    RandomStream rng(1);
    CHECK_THROWS_AS(sample_grassmann(b2, 2, 1, rng), std::invalid_argument);
}
