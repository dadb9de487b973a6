#pragma once

// Counter-based random streams (Philox4x32-10) plus the sampling
// primitives used by the Monte Carlo layer: uniforms, Gaussians,
// Haar-distributed rotations and unitaries.
//
// Streams are value types. split(i) derives a statistically independent
// child stream; the (seed, stream id, counter) triple fully determines
// every draw, so results are reproducible across thread counts.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace vallab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t m0 = 0xD2511F53ull * c[0];
    const std::uint64_t m1 = 0xCD9E8D57ull * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(m0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(m0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(m1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(m1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t k0, std::uint32_t k1) {
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, k0, k1);
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return ctr;
}

}  // namespace detail

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), id_(stream_id) {}

    RandomStream split(std::uint64_t i) const {
        return RandomStream(seed_, detail::splitmix64(id_ ^ detail::splitmix64(i + 1)));
    }

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform in [0,1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        have_cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd gaussian_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    // Uniform on the unit sphere S^{n-1}.
    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v = gaussian_vector(n);
        double nrm = v.norm();
        while (nrm < 1e-300) {
            v = gaussian_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

    // Uniform in an axis-aligned box [lo, hi].
    Eigen::VectorXd uniform_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd x(lo.size());
        for (int i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
        return x;
    }

    std::uint64_t seed() const { return seed_; }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter_),
            static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(id_),
            static_cast<std::uint32_t>(id_ >> 32)};
        buf_ = detail::philox4x32(ctr, static_cast<std::uint32_t>(seed_),
                                  static_cast<std::uint32_t>(seed_ >> 32));
        ++counter_;
        buf_pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Haar-distributed element of SO(n): QR of a Gaussian matrix with the
// R-diagonal sign fix, then a column flip if the determinant is -1.
inline Eigen::MatrixXd haar_rotation(int n, RandomStream& rng) {
    Eigen::MatrixXd g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    if (q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
}

// Haar-distributed element of U(m) as a complex matrix.
inline Eigen::MatrixXcd haar_unitary(int m, RandomStream& rng) {
    Eigen::MatrixXcd g(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) g(i, j) = std::complex<double>(rng.normal(), rng.normal());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j) {
        const std::complex<double> d = r(j, j);
        const double a = std::abs(d);
        if (a > 0) q.col(j) *= d / a;
    }
    return q;
}

// Realification of an m x m complex matrix in the interleaved layout
// (Re z_1, Im z_1, ..., Re z_m, Im z_m); the result commutes with the
// standard complex structure J.
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& u) {
    const int m = static_cast<int>(u.rows());
    Eigen::MatrixXd r(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double a = u(i, j).real();
            const double b = u(i, j).imag();
            r(2 * i, 2 * j) = a;
            r(2 * i, 2 * j + 1) = -b;
            r(2 * i + 1, 2 * j) = b;
            r(2 * i + 1, 2 * j + 1) = a;
        }
    return r;
}

// Standard complex structure J on R^{2m} in the interleaved layout.
inline Eigen::MatrixXd complex_structure(int m) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        j(2 * i, 2 * i + 1) = -1.0;
        j(2 * i + 1, 2 * i) = 1.0;
    }
    return j;
}

}  // namespace vallab
