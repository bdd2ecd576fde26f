#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tomoscope::linalg {

using cd = std::complex<double>;

/// Dense square complex matrix, row-major.
struct CMatrix {
    int n = 0;
    std::vector<cd> a;

    CMatrix() = default;
    explicit CMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {}

    cd& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const cd& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static CMatrix identity(int dim) {
        CMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }

    std::vector<cd> apply(const std::vector<cd>& v) const {
        std::vector<cd> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            cd acc = 0.0;
            for (int j = 0; j < n; ++j) acc += at(i, j) * v[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = acc;
        }
        return out;
    }

    double frobenius() const {
        double s = 0.0;
        for (const auto& z : a) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_hermitian_defect() const {
        double d = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                d = std::max(d, std::abs(at(i, j) - std::conj(at(j, i))));
        return d;
    }
};

/// Dense square real matrix, row-major.
struct RMatrix {
    int n = 0;
    std::vector<double> a;

    RMatrix() = default;
    explicit RMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const double& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static RMatrix identity(int dim) {
        RMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }

    RMatrix operator*(const RMatrix& o) const {
        RMatrix r(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double v = at(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < n; ++j) r.at(i, j) += v * o.at(k, j);
            }
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
};

struct EigenDecomposition {
    std::vector<double> values; ///< ascending
    CMatrix vectors;            ///< column k = eigenvector of values[k]
};

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix.
///
/// Robustness is preferred over asymptotics here: every matrix in this
/// library is small (dimension <= a few hundred) and Jacobi handles clustered
/// eigenvalues without the convergence surprises of shifted QR variants.
/// Each 2x2 pivot block [[app, b],[conj(b), aqq]] with b = |b| e^{i phi} is
/// annihilated exactly by the unitary
///     U = [[c, -s e^{i phi}], [s e^{-i phi}, c]],
/// where tan(2 theta) = 2|b| / (app - aqq) and (c, s) = (cos, sin) theta,
/// computed via the stable smaller-root formula. Sweeps repeat until the
/// off-diagonal Frobenius mass drops below `tol` times the matrix scale.
inline EigenDecomposition jacobi_hermitian(CMatrix h, double tol = 1e-13,
                                           int max_sweeps = 100) {
    const int n = h.n;
    if (n == 0) throw std::invalid_argument("jacobi_hermitian: empty matrix");
    const double scale = std::max(h.frobenius(), 1e-300);
    if (h.max_hermitian_defect() > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("jacobi_hermitian: matrix is not Hermitian");
    // Remove rounding-level asymmetry so the rotations see an exactly
    // Hermitian matrix.
    for (int i = 0; i < n; ++i) {
        h.at(i, i) = cd(h.at(i, i).real(), 0.0);
        for (int j = 0; j < i; ++j) {
            const cd m = 0.5 * (h.at(i, j) + std::conj(h.at(j, i)));
            h.at(i, j) = m;
            h.at(j, i) = std::conj(m);
        }
    }

    CMatrix q = CMatrix::identity(n);
    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += std::norm(h.at(i, j));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= tol * scale) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int qq = p + 1; qq < n; ++qq) {
                const cd b = h.at(p, qq);
                const double ab = std::abs(b);
                if (ab <= 1e-300) continue;
                const cd phase = b / ab; // e^{i phi}
                const double app = h.at(p, p).real();
                const double aqq = h.at(qq, qq).real();
                const double tau = (app - aqq) / (2.0 * ab);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cd spf = s * phase;             // s e^{i phi}
                const cd spc = s * std::conj(phase);  // s e^{-i phi}
                // columns p, q of H
                for (int i = 0; i < n; ++i) {
                    const cd hip = h.at(i, p), hiq = h.at(i, qq);
                    h.at(i, p) = c * hip + spc * hiq;
                    h.at(i, qq) = -spf * hip + c * hiq;
                }
                // rows p, q of H (conjugate rotation)
                for (int i = 0; i < n; ++i) {
                    const cd hpi = h.at(p, i), hqi = h.at(qq, i);
                    h.at(p, i) = c * hpi + spf * hqi;
                    h.at(qq, i) = -spc * hpi + c * hqi;
                }
                h.at(p, qq) = 0.0;
                h.at(qq, p) = 0.0;
                h.at(p, p) = cd(h.at(p, p).real(), 0.0);
                h.at(qq, qq) = cd(h.at(qq, qq).real(), 0.0);
                // accumulate eigenvectors: Q <- Q U
                for (int i = 0; i < n; ++i) {
                    const cd qip = q.at(i, p), qiq = q.at(i, qq);
                    q.at(i, p) = c * qip + spc * qiq;
                    q.at(i, qq) = -spf * qip + c * qiq;
                }
            }
        }
    }
    if (off_norm() > tol * scale * 10.0)
        throw std::runtime_error("jacobi_hermitian: did not converge");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return h.at(i, i).real() < h.at(j, j).real();
    });
    EigenDecomposition out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = CMatrix(n);
    for (int k = 0; k < n; ++k) {
        out.values[static_cast<std::size_t>(k)] = h.at(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        for (int i = 0; i < n; ++i)
            out.vectors.at(i, k) = q.at(i, order[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Matrix exponential of a real matrix by scaling and squaring with a Taylor
/// core. The argument is scaled until its max-norm is below 1/2, so the
/// truncated series converges far past the 1e-13 accuracy this library
/// documents; adequate for the small generators used here.
inline RMatrix expm(const RMatrix& m) {
    const int n = m.n;
    int squarings = 0;
    double norm = m.max_abs() * n; // crude upper bound on the induced norm
    while (norm > 0.5 && squarings < 60) {
        norm *= 0.5;
        ++squarings;
    }
    RMatrix b = m;
    const double inv = std::ldexp(1.0, -squarings);
    for (double& v : b.a) v *= inv;

    RMatrix result = RMatrix::identity(n);
    RMatrix term = RMatrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * b;
        for (double& v : term.a) v /= k;
        for (std::size_t i = 0; i < term.a.size(); ++i) result.a[i] += term.a[i];
        if (term.max_abs() < 1e-17) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace tomoscope::linalg
