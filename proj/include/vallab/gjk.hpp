#pragma once

// GJK distance from the origin to a convex set given by a support-point
// oracle. Works in any small dimension; the simplex subproblem is solved
// by subset enumeration, which is exact and cheap for dim <= 8.
//
// The iterate carries a certified bracket: |v| is an upper bound on the
// distance and <v, s>/|v| (s the support point opposite v) a lower bound.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace vallab {

using SupportPointFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GjkResult {
    double distance = 0.0;     // upper bound |v| at termination
    double lower_bound = 0.0;  // certified lower bound on the true distance
    bool converged = false;
    int iterations = 0;
    Eigen::VectorXd closest;
};

namespace gjk_detail {

// Closest point to the origin in the convex hull of pts; prunes pts to
// the supporting subset of the minimizer.
inline Eigen::VectorXd closest_in_hull(std::vector<Eigen::VectorXd>& pts) {
    const int k = static_cast<int>(pts.size());
    double best = 1e300;
    Eigen::VectorXd best_v;
    std::vector<int> best_subset;

    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> subset;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) subset.push_back(i);
        const int s = static_cast<int>(subset.size());

        Eigen::VectorXd lambda(s);
        if (s == 1) {
            lambda[0] = 1.0;
        } else {
            Eigen::MatrixXd sys(s + 1, s + 1);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) sys(i, j) = pts[subset[i]].dot(pts[subset[j]]);
            sys.row(s).setOnes();
            sys.col(s).setOnes();
            sys(s, s) = 0.0;
            rhs[s] = 1.0;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
            if (!lu.isInvertible()) continue;
            lambda = lu.solve(rhs).head(s);
        }
        bool feasible = true;
        for (int i = 0; i < s; ++i)
            if (lambda[i] < -1e-12) {
                feasible = false;
                break;
            }
        if (!feasible) continue;

        Eigen::VectorXd v = Eigen::VectorXd::Zero(pts[0].size());
        for (int i = 0; i < s; ++i) v += lambda[i] * pts[subset[i]];
        const double nrm = v.squaredNorm();
        if (nrm < best) {
            best = nrm;
            best_v = v;
            best_subset = subset;
        }
    }

    std::vector<Eigen::VectorXd> kept;
    kept.reserve(best_subset.size());
    for (int i : best_subset) kept.push_back(pts[i]);
    pts.swap(kept);
    return best_v;
}

}  // namespace gjk_detail

inline GjkResult gjk_distance_to_origin(const SupportPointFn& support_point, int dim,
                                        double tol = 1e-9, int max_iter = 10000) {
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(dim);
    d0[0] = -1.0;
    std::vector<Eigen::VectorXd> w{support_point(d0)};

    GjkResult res;
    res.closest = w[0];
    double best_lower = 0.0;

    for (int it = 1; it <= max_iter; ++it) {
        res.iterations = it;
        const Eigen::VectorXd v = gjk_detail::closest_in_hull(w);
        res.closest = v;
        const double nv = v.norm();
        res.distance = nv;
        if (nv <= 1e-14) {
            res.lower_bound = 0.0;
            res.converged = true;
            return res;
        }
        const Eigen::VectorXd s = support_point(-v);
        const double lower = v.dot(s) / nv;
        best_lower = std::max(best_lower, lower);
        res.lower_bound = std::max(0.0, best_lower);
        if (nv - lower <= tol || nv - lower <= 1e-12 * nv) {
            res.converged = true;
            return res;
        }
        // No-progress guard: the new point adds nothing.
        bool dup = false;
        for (const auto& p : w)
            if ((p - s).norm() <= 1e-15 * (1.0 + nv)) {
                dup = true;
                break;
            }
        if (dup) {
            res.converged = true;
            return res;
        }
        w.push_back(s);
        if (static_cast<int>(w.size()) > dim + 2) w.erase(w.begin());
    }
    return res;  // not converged; caller sees the bracket
}

// Decide dist(origin, set) <= threshold without polishing the distance:
// exits as soon as either bracket side crosses the threshold, which is
// much cheaper than a full distance query for points away from the
// threshold shell.
inline bool gjk_within(const SupportPointFn& support_point, int dim, double threshold,
                       int max_iter = 1000) {
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(dim);
    d0[0] = -1.0;
    std::vector<Eigen::VectorXd> w{support_point(d0)};
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXd v = gjk_detail::closest_in_hull(w);
        const double nv = v.norm();
        if (nv <= threshold) return true;
        const Eigen::VectorXd s = support_point(-v);
        const double lower = v.dot(s) / nv;
        if (lower > threshold) return false;
        // Bracket stagnated at the threshold shell: resolve by upper bound.
        if (nv - lower <= 1e-12 * (1.0 + nv)) return nv <= threshold;
        bool dup = false;
        for (const auto& p : w)
            if ((p - s).norm() <= 1e-15 * (1.0 + nv)) {
                dup = true;
                break;
            }
        if (dup) return nv <= threshold;
        w.push_back(s);
        if (static_cast<int>(w.size()) > dim + 2) w.erase(w.begin());
    }
    return false;
}

}  // namespace vallab
