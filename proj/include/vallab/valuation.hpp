#pragma once

// Valuation algebra: evaluator oracles with metadata, valuations of the
// form K -> integral of a polynomial density over K + A (GRep), the
// additivity / polynomiality / grading checks, Hadwiger-basis
// decomposition, and the diagonal-restriction product on GRep pairs.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vallab/body.hpp"
#include "vallab/gjk.hpp"
#include "vallab/mc.hpp"
#include "vallab/steiner.hpp"

namespace vallab {

// Sparse polynomial in n variables: sum of coeff * x^exponents terms.
struct Polynomial {
    int nvars = 0;
    std::vector<std::pair<Eigen::VectorXi, double>> terms;

    static Polynomial constant(int nvars, double c) {
        Polynomial p;
        p.nvars = nvars;
        if (c != 0.0) p.terms.emplace_back(Eigen::VectorXi::Zero(nvars), c);
        return p;
    }

    static Polynomial monomial(const Eigen::VectorXi& exps, double coeff) {
        if ((exps.array() < 0).any())
            throw std::invalid_argument("Polynomial: negative exponent");
        Polynomial p;
        p.nvars = static_cast<int>(exps.size());
        if (coeff != 0.0) p.terms.emplace_back(exps, coeff);
        return p;
    }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms) d = std::max(d, e.sum());
        return d;
    }

    double operator()(const Eigen::VectorXd& x) const {
        if (x.size() != nvars) throw std::invalid_argument("Polynomial: dimension mismatch");
        double v = 0.0;
        for (const auto& [e, c] : terms) {
            double t = c;
            for (int i = 0; i < nvars; ++i)
                for (int j = 0; j < e[i]; ++j) t *= x[i];
            v += t;
        }
        return v;
    }
};

enum class Parity { Even, Odd, Mixed };
enum class InvarianceTag { None, SO, O, U };

// Evaluator oracle with the metadata the algebra checks care about.
struct Valuation {
    std::function<MCEstimate(const ConvexBody&, const MCConfig&, const RandomStream&)> eval;
    std::optional<int> degree;
    Parity parity = Parity::Mixed;
    InvarianceTag invariance = InvarianceTag::None;

    MCEstimate operator()(const ConvexBody& k, const MCConfig& mc,
                          const RandomStream& stream) const {
        return eval(k, mc, stream);
    }
};

// One summand of a GRep valuation: K -> integral over K + body of density.
struct GRepTerm {
    Polynomial density;
    ConvexBody body;
};

// Finite sum of GRepTerms plus a scalar multiple of the Euler
// characteristic, which acts as the symbolic algebra unit.
struct GRep {
    double chi = 0.0;
    std::vector<GRepTerm> terms;

    int dim() const {
        if (terms.empty()) return 0;  // chi-only: dimension-agnostic
        return terms.front().body.dim();
    }

    static GRep chi_only(double c) { return GRep{c, {}}; }

    // K -> vol(K): density 1 over K + {0}.
    static GRep volume_rep(int n) {
        return GRep{0.0,
                    {{Polynomial::constant(n, 1.0), ConvexBody::point(Eigen::VectorXd::Zero(n))}}};
    }

    // K -> vol(K + D), unit-disk structuring body.
    static GRep dilated_volume_rep(int n) {
        return GRep{0.0,
                    {{Polynomial::constant(n, 1.0), ConvexBody::ball(Eigen::VectorXd::Zero(n), 1.0)}}};
    }

    // V_1 in the plane: from vol(K + D) = vol(K) + 2 V_1(K) + pi on convex K,
    // so V_1 = (vol(. + D) - vol - pi chi) / 2.
    static GRep v1_plane() {
        GRep g;
        g.chi = -M_PI / 2;
        g.terms.push_back({Polynomial::constant(2, 0.5),
                           ConvexBody::ball(Eigen::Vector2d::Zero(), 1.0)});
        g.terms.push_back({Polynomial::constant(2, -0.5),
                           ConvexBody::point(Eigen::Vector2d::Zero())});
        return g;
    }
};

// MC integral of each density over K + A_i, plus the chi coefficient
// (every supported body is nonempty and convex).
inline MCEstimate grep_evaluate(const GRep& phi, const ConvexBody& k, const MCConfig& mc,
                                const RandomStream& stream) {
    MCEstimate total{phi.chi, 0.0, 0, stream.seed()};
    for (std::size_t i = 0; i < phi.terms.size(); ++i) {
        const GRepTerm& term = phi.terms[i];
        if (term.body.dim() != k.dim())
            throw std::invalid_argument("grep_evaluate: term dimension mismatch");
        const ConvexBody domain = ConvexBody::mink_sum({k, term.body});
        const auto [lo, hi] = bounding_box(domain);
        const double box_vol = (hi - lo).prod();
        MCEstimate e = mc_mean(mc.samples, stream.split(i), mc.threads, [&](RandomStream& s) {
            const Eigen::VectorXd x = s.uniform_in_box(lo, hi);
            return contains(domain, x, mc.membership_tol) ? term.density(x) : 0.0;
        });
        total = total + e * box_vol;
    }
    total.seed = stream.seed();
    return total;
}

inline Valuation as_valuation(const GRep& phi, Parity parity = Parity::Mixed,
                              InvarianceTag tag = InvarianceTag::None) {
    Valuation v;
    v.eval = [phi](const ConvexBody& k, const MCConfig& mc, const RandomStream& s) {
        return grep_evaluate(phi, k, mc, s);
    };
    v.parity = parity;
    v.invariance = tag;
    return v;
}

// Union of two polytopes whose union is convex (e.g. boxes sharing a
// facet): the convex hull is spanned by the concatenated vertex lists.
inline ConvexBody convex_union(const ConvexBody& k1, const ConvexBody& k2) {
    const ConvexBody a = simplified(k1), b = simplified(k2);
    if (a.kind() != ConvexBody::Kind::Polytope || b.kind() != ConvexBody::Kind::Polytope)
        throw std::invalid_argument("convex_union: polytope inputs required");
    Eigen::MatrixXd verts(a.dim(), a.vertices().cols() + b.vertices().cols());
    verts << a.vertices(), b.vertices();
    return ConvexBody::polytope(verts);
}

// Intersection of two polytopes via their combined facet systems.
inline ConvexBody polytope_intersection(const ConvexBody& k1, const ConvexBody& k2) {
    const ConvexBody a = simplified(k1), b = simplified(k2);
    if (a.kind() != ConvexBody::Kind::Polytope || b.kind() != ConvexBody::Kind::Polytope)
        throw std::invalid_argument("polytope_intersection: polytope inputs required");
    std::vector<Halfspace> hs = enumerate_facets(a.vertices());
    const std::vector<Halfspace> hb = enumerate_facets(b.vertices());
    hs.insert(hs.end(), hb.begin(), hb.end());
    const Eigen::MatrixXd verts = enumerate_vertices(hs, a.dim());
    if (verts.cols() == 0)
        throw std::invalid_argument("polytope_intersection: empty intersection");
    return ConvexBody::polytope(verts);
}

struct AdditivityReport {
    double residual = 0.0;
    double stderror = 0.0;  // combined over the four evaluations
};

// |phi(K1 u K2) - phi(K1) - phi(K2) + phi(K1 n K2)| for pairs whose union
// is convex.
inline AdditivityReport check_additivity(const Valuation& phi, const ConvexBody& k1,
                                         const ConvexBody& k2, const MCConfig& mc,
                                         const RandomStream& stream) {
    const MCEstimate u = phi(convex_union(k1, k2), mc, stream.split(0));
    const MCEstimate a = phi(k1, mc, stream.split(1));
    const MCEstimate b = phi(k2, mc, stream.split(2));
    const MCEstimate i = phi(polytope_intersection(k1, k2), mc, stream.split(3));
    const MCEstimate r = u - a - b + i;
    return {std::abs(r.value), r.stderror};
}

namespace valuation_detail {

// All monomial exponent vectors in n variables with total degree <= d.
inline std::vector<Eigen::VectorXi> monomials_up_to(int n, int d) {
    std::vector<Eigen::VectorXi> out;
    Eigen::VectorXi e = Eigen::VectorXi::Zero(n);
    std::function<void(int, int)> rec = [&](int var, int remaining) {
        if (var == n) {
            out.push_back(e);
            return;
        }
        for (int q = 0; q <= remaining; ++q) {
            e[var] = q;
            rec(var + 1, remaining - q);
        }
        e[var] = 0;
    };
    rec(0, d);
    return out;
}

}  // namespace valuation_detail

struct PolynomialityReport {
    double rms_residual = 0.0;
    double noise_floor = 0.0;  // rms of the per-point MC stderrs
    Eigen::VectorXd coefficients;
};

// Least-squares fit of x -> phi(K + x) by a polynomial of total degree d
// over the given translation grid. A residual at the MC noise level
// confirms polynomiality of that degree.
inline PolynomialityReport check_polynomiality(const GRep& phi, const ConvexBody& k,
                                               const std::vector<Eigen::VectorXd>& translations,
                                               int d, const MCConfig& mc,
                                               const RandomStream& stream) {
    const int n = k.dim();
    const auto monos = valuation_detail::monomials_up_to(n, d);
    const int m = static_cast<int>(translations.size());
    if (m < static_cast<int>(monos.size()))
        throw std::invalid_argument("check_polynomiality: underdetermined translation grid");

    Eigen::VectorXd y(m), sigma(m);
    Eigen::MatrixXd x(m, monos.size());
    for (int r = 0; r < m; ++r) {
        const MCEstimate e =
            grep_evaluate(phi, ConvexBody::translated(translations[r], k), mc, stream.split(r));
        y[r] = e.value;
        sigma[r] = e.stderror;
        for (std::size_t j = 0; j < monos.size(); ++j)
            x(r, j) = Polynomial::monomial(monos[j], 1.0)(translations[r]);
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - x * beta;
    PolynomialityReport out;
    out.rms_residual = std::sqrt(resid.squaredNorm() / m);
    out.noise_floor = std::sqrt(sigma.squaredNorm() / m);
    out.coefficients = beta;
    return out;
}

struct GradingComponents {
    Eigen::VectorXd values;   // phi_k(K), k = 0..n
    Eigen::VectorXd stderrs;  // propagated through the Vandermonde solve
};

// Solve phi(lambda K) = sum_k lambda^k phi_k(K) for the homogeneous
// component values.
inline GradingComponents homogeneous_components(const Valuation& phi, const ConvexBody& k,
                                                const std::vector<double>& lambda_grid,
                                                const MCConfig& mc, const RandomStream& stream) {
    const int n = k.dim();
    const int m = static_cast<int>(lambda_grid.size());
    if (m < n + 1)
        throw std::invalid_argument("homogeneous_components: need at least n+1 scale factors");
    Eigen::VectorXd y(m), sigma(m);
    Eigen::MatrixXd x(m, n + 1);
    for (int r = 0; r < m; ++r) {
        if (lambda_grid[r] <= 0)
            throw std::invalid_argument("homogeneous_components: scales must be positive");
        const MCEstimate e = phi(ConvexBody::scaled(lambda_grid[r], k), mc, stream.split(r));
        y[r] = e.value;
        sigma[r] = e.stderror;
        for (int j = 0; j <= n; ++j) x(r, j) = std::pow(lambda_grid[r], j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()[0] / svd.singularValues()[n];
    if (!(cond < 1e8))
        throw std::invalid_argument("homogeneous_components: ill-conditioned scale grid");
    const Eigen::MatrixXd pinv = svd.matrixV() *
                                 svd.singularValues().cwiseInverse().asDiagonal() *
                                 svd.matrixU().transpose();
    GradingComponents out;
    out.values = pinv * y;
    out.stderrs = Eigen::VectorXd::Zero(n + 1);
    for (int j = 0; j <= n; ++j)
        for (int r = 0; r < m; ++r)
            out.stderrs[j] = std::hypot(out.stderrs[j], pinv(j, r) * sigma[r]);
    return out;
}

struct HadwigerDecomposition {
    Eigen::VectorXd coefficients;   // a_0..a_n in phi = sum a_i V_i
    double validation_residual;     // |phi(box) - sum a_i V_i(box)|
};

// Solve phi(B_r) = sum_i a_i omega_n r^i from ball probes, then validate
// the decomposition on a held-out box (balls alone cannot detect
// non-rotation-invariant contamination).
inline HadwigerDecomposition hadwiger_decompose(
    const std::function<double(const ConvexBody&)>& phi, int n,
    const std::vector<double>& probe_radii) {
    const int m = static_cast<int>(probe_radii.size());
    if (m < n + 1)
        throw std::invalid_argument("hadwiger_decompose: need at least n+1 probe radii");
    const double wn = unit_ball_volume(n);
    Eigen::VectorXd y(m);
    Eigen::MatrixXd x(m, n + 1);
    for (int r = 0; r < m; ++r) {
        if (probe_radii[r] <= 0)
            throw std::invalid_argument("hadwiger_decompose: radii must be positive");
        y[r] = phi(ConvexBody::ball(Eigen::VectorXd::Zero(n), probe_radii[r]));
        for (int i = 0; i <= n; ++i) x(r, i) = wn * std::pow(probe_radii[r], i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!(svd.singularValues()[0] / svd.singularValues()[n] < 1e10))
        throw std::invalid_argument("hadwiger_decompose: singular probe system");
    HadwigerDecomposition out;
    out.coefficients = svd.solve(y);

    const ConvexBody box =
        ConvexBody::axis_box(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 1.0));
    double rhs = 0.0;
    for (int i = 0; i <= n; ++i) rhs += out.coefficients[i] * *intrinsic_volume_exact(box, i);
    out.validation_residual = std::abs(phi(box) - rhs);
    return out;
}

inline double hadwiger_synthesize(const Eigen::VectorXd& a, const ConvexBody& k) {
    double v = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const auto vi = intrinsic_volume_exact(k, i);
        if (!vi) throw std::invalid_argument("hadwiger_synthesize: no exact V_i for this body");
        v += a[i] * *vi;
    }
    return v;
}

namespace valuation_detail {

// Membership oracle for {(x, y) : K n (x - A) n (y - B) != 0}. That set
// is the Minkowski sum (diagonal K) + A x {0} + {0} x B in the doubled
// space, so it has an exact support oracle and GJK decides membership.
inline bool product_cell_contains(const ConvexBody& k, const ConvexBody& a, const ConvexBody& b,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  double tol) {
    const int n = k.dim();
    SupportPointFn sp = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        const Eigen::VectorXd u = w.head(n);
        const Eigen::VectorXd v = w.tail(n);
        const Eigen::VectorXd pk = support_point(k, u + v);
        Eigen::VectorXd out(2 * n);
        out.head(n) = pk + support_point(a, u) - x;
        out.tail(n) = pk + support_point(b, v) - y;
        return out;
    };
    return gjk_within(sp, 2 * n, tol);
}

}  // namespace valuation_detail

// Product of two GRep valuations evaluated at K: the exterior product of
// the defining measures restricted to the diagonal. chi factors act as
// the unit and short-circuit.
inline MCEstimate alesker_product(const GRep& phi, const GRep& psi, const ConvexBody& k,
                                  const MCConfig& mc, const RandomStream& stream,
                                  bool allow_high_dim = false) {
    const int n = k.dim();
    if (n > 2 && !allow_high_dim)
        throw std::invalid_argument(
            "alesker_product: n > 2 needs the explicit high-dimension override");

    MCEstimate total{phi.chi * psi.chi, 0.0, 0, stream.seed()};
    // Unit law: chi * psi contributes psi itself (and symmetrically).
    if (phi.chi != 0.0 && !psi.terms.empty()) {
        const GRep rest{0.0, psi.terms};
        total = total + grep_evaluate(rest, k, mc, stream.split(1)) * phi.chi;
    }
    if (psi.chi != 0.0 && !phi.terms.empty()) {
        const GRep rest{0.0, phi.terms};
        total = total + grep_evaluate(rest, k, mc, stream.split(2)) * psi.chi;
    }

    std::uint64_t pair_id = 3;
    for (const GRepTerm& ti : phi.terms) {
        for (const GRepTerm& tj : psi.terms) {
            if (ti.body.dim() != n || tj.body.dim() != n)
                throw std::invalid_argument("alesker_product: term dimension mismatch");
            // x ranges over K + A_i, y over K + B_j.
            const auto [lox, hix] = bounding_box(ConvexBody::mink_sum({k, ti.body}));
            const auto [loy, hiy] = bounding_box(ConvexBody::mink_sum({k, tj.body}));
            const double box_vol = (hix - lox).prod() * (hiy - loy).prod();
            MCEstimate e =
                mc_mean(mc.samples, stream.split(pair_id++), mc.threads, [&](RandomStream& s) {
                    const Eigen::VectorXd x = s.uniform_in_box(lox, hix);
                    const Eigen::VectorXd y = s.uniform_in_box(loy, hiy);
                    if (!valuation_detail::product_cell_contains(k, ti.body, tj.body, x, y,
                                                                 mc.membership_tol))
                        return 0.0;
                    return ti.density(x) * tj.density(y);
                });
            total = total + e * box_vol;
        }
    }
    total.seed = stream.seed();
    return total;
}

struct PairingMatrix {
    Eigen::MatrixXd matrix;  // proportionality constants against vol
    int rank = 0;
};

// M[i][j] = (b_i . b_j)(K) / vol(K) for complementary-degree pairs,
// required to be constant (within 10%) across the body family; rank by
// SVD with a relative threshold.
inline PairingMatrix pairing_matrix(const std::vector<GRep>& basis,
                                    const std::vector<int>& degrees,
                                    const std::vector<ConvexBody>& family, const MCConfig& mc,
                                    const RandomStream& stream) {
    if (basis.size() != degrees.size())
        throw std::invalid_argument("pairing_matrix: basis/degree size mismatch");
    if (family.empty()) throw std::invalid_argument("pairing_matrix: empty body family");
    const int n = family.front().dim();
    const int b = static_cast<int>(basis.size());
    PairingMatrix out;
    out.matrix = Eigen::MatrixXd::Zero(b, b);
    std::uint64_t cell = 0;
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            ++cell;
            if (degrees[i] + degrees[j] != n) continue;  // excluded by grading
            std::vector<double> ratios;
            for (std::size_t f = 0; f < family.size(); ++f) {
                const MCEstimate p =
                    alesker_product(basis[i], basis[j], family[f], mc, stream.split(cell * 64 + f));
                ratios.push_back(p.value / volume_exact(family[f]));
            }
            const double mean =
                std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
            for (double r : ratios)
                if (std::abs(r - mean) > 0.10 * std::abs(mean))
                    throw std::runtime_error(
                        "pairing_matrix: proportionality spread exceeds 10%, product "
                        "inconsistent across bodies");
            out.matrix(i, j) = mean;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.matrix);
    const double thresh = 1e-6 * svd.singularValues()[0];
    out.rank = static_cast<int>((svd.singularValues().array() > thresh).count());
    return out;
}

}  // namespace vallab
