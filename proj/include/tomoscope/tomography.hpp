#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tomoscope/fock.hpp"

namespace tomoscope::tomography {

using fock::PureState;
using linalg::cd;

/// Uniform quadrature grid, symmetric about zero. The point count is kept
/// odd so zero itself is sampled, which the origin-value checks rely on.
struct QuadratureGrid {
    int n_points = 321;
    double x_max = 8.0;

    QuadratureGrid() = default;
    QuadratureGrid(int n, double xm) : n_points(n), x_max(xm) {
        if (n_points < 3 || n_points % 2 == 0)
            throw std::invalid_argument("QuadratureGrid: n_points must be odd and >= 3");
        if (!(x_max > 0.0)) throw std::invalid_argument("QuadratureGrid: x_max must be positive");
    }

    double dx() const { return 2.0 * x_max / (n_points - 1); }
    double point(int i) const { return -x_max + i * dx(); }
};

/// Oscillator eigenfunctions psi_0..psi_max on the grid, table[n][i].
/// The three-term recurrence
///   psi_n = x sqrt(2/n) psi_{n-1} - sqrt((n-1)/n) psi_{n-2}
/// keeps every value normalized as it goes, unlike evaluating Hermite
/// polynomials and dividing by sqrt(2^n n!), which overflows near n ~ 150.
inline std::vector<std::vector<double>> wavefunction_table(int n_max, const QuadratureGrid& grid) {
    if (n_max < 0) throw std::invalid_argument("wavefunction_table: negative order");
    std::vector<std::vector<double>> table(static_cast<std::size_t>(n_max) + 1,
                                           std::vector<double>(static_cast<std::size_t>(grid.n_points)));
    const double norm0 = std::pow(std::numbers::pi, -0.25);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.point(i);
        table[0][static_cast<std::size_t>(i)] = norm0 * std::exp(-0.5 * x * x);
    }
    if (n_max >= 1)
        for (int i = 0; i < grid.n_points; ++i)
            table[1][static_cast<std::size_t>(i)] =
                grid.point(i) * std::numbers::sqrt2 * table[0][static_cast<std::size_t>(i)];
    for (int n = 2; n <= n_max; ++n) {
        const double c1 = std::sqrt(2.0 / n);
        const double c2 = std::sqrt((n - 1.0) / n);
        for (int i = 0; i < grid.n_points; ++i) {
            const double x = grid.point(i);
            table[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                x * c1 * table[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(i)] -
                c2 * table[static_cast<std::size_t>(n - 2)][static_cast<std::size_t>(i)];
        }
    }
    return table;
}

inline double oscillator_wavefunction(int n, double x) {
    const double psi0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0) return psi0;
    double prev = psi0;
    double curr = x * std::numbers::sqrt2 * psi0;
    for (int k = 2; k <= n; ++k) {
        const double next = x * std::sqrt(2.0 / k) * curr - std::sqrt((k - 1.0) / k) * prev;
        prev = curr;
        curr = next;
    }
    return curr;
}

/// Joint quadrature histogram of a two-mode state at one pair of rotated
/// quadrature angles. w is a probability density in both variables, sampled
/// on the grid: sum of w * dx^2 is 1 up to grid truncation.
struct TomogramSection {
    QuadratureGrid grid;
    double theta_a = 0.0;
    double theta_b = 0.0;
    std::vector<double> w; ///< row-major, w[ia * n_points + ib]

    double at(int ia, int ib) const {
        return w[static_cast<std::size_t>(ia) * grid.n_points + ib];
    }
    double total_mass() const {
        double s = 0.0;
        for (double v : w) s += v;
        return s * grid.dx() * grid.dx();
    }
};

/// The rotated-quadrature overlap <X,theta|n> equals e^{i n theta} psi_n(X),
/// so rotating the section angles only rephases the fixed-N amplitudes.
inline TomogramSection cv_section(const PureState& state, double theta_a, double theta_b,
                                  const QuadratureGrid& grid = QuadratureGrid()) {
    const fock::SubspaceBasis& basis = *state.basis;
    if (basis.kind() != fock::BasisKind::CvPair)
        throw std::invalid_argument("cv_section: needs a CV basis");
    const int n_tot = basis.total();
    const int np = grid.n_points;
    const auto psi = wavefunction_table(n_tot, grid);

    std::vector<cd> d(static_cast<std::size_t>(n_tot) + 1);
    for (int k = 0; k <= n_tot; ++k)
        d[static_cast<std::size_t>(k)] =
            state.amplitudes[static_cast<std::size_t>(k)] *
            std::polar(1.0, k * theta_a + (n_tot - k) * theta_b);

    TomogramSection sec;
    sec.grid = grid;
    sec.theta_a = theta_a;
    sec.theta_b = theta_b;
    sec.w.assign(static_cast<std::size_t>(np) * np, 0.0);
    std::vector<double> re(static_cast<std::size_t>(np)), im(static_cast<std::size_t>(np));
    for (int ia = 0; ia < np; ++ia) {
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        for (int k = 0; k <= n_tot; ++k) {
            const cd f = d[static_cast<std::size_t>(k)] * psi[static_cast<std::size_t>(k)][static_cast<std::size_t>(ia)];
            const auto& row = psi[static_cast<std::size_t>(n_tot - k)];
            const double fr = f.real(), fi = f.imag();
            if (fr == 0.0 && fi == 0.0) continue;
            for (int ib = 0; ib < np; ++ib) {
                re[static_cast<std::size_t>(ib)] += fr * row[static_cast<std::size_t>(ib)];
                im[static_cast<std::size_t>(ib)] += fi * row[static_cast<std::size_t>(ib)];
            }
        }
        double* out = &sec.w[static_cast<std::size_t>(ia) * np];
        for (int ib = 0; ib < np; ++ib)
            out[ib] = re[static_cast<std::size_t>(ib)] * re[static_cast<std::size_t>(ib)] +
                      im[static_cast<std::size_t>(ib)] * im[static_cast<std::size_t>(ib)];
    }
    return sec;
}

/// Marginal densities of a CV section: integrate out the partner variable.
struct CvMarginals {
    std::vector<double> a;
    std::vector<double> b;
};

inline CvMarginals marginals(const TomogramSection& sec) {
    const int np = sec.grid.n_points;
    const double dx = sec.grid.dx();
    CvMarginals m;
    m.a.assign(static_cast<std::size_t>(np), 0.0);
    m.b.assign(static_cast<std::size_t>(np), 0.0);
    for (int ia = 0; ia < np; ++ia)
        for (int ib = 0; ib < np; ++ib) {
            const double v = sec.at(ia, ib);
            m.a[static_cast<std::size_t>(ia)] += v * dx;
            m.b[static_cast<std::size_t>(ib)] += v * dx;
        }
    return m;
}

/// Measurement axis of one qubit on the Bloch sphere.
struct QubitAxis {
    double theta = 0.0;
    double phi = 0.0;
};

/// The same axis for every qubit; axis is 'x', 'y' or 'z'.
inline std::vector<QubitAxis> uniform_axes(int n_qubits, char axis) {
    QubitAxis a;
    switch (axis) {
    case 'x': a = {std::numbers::pi / 2.0, 0.0}; break;
    case 'y': a = {std::numbers::pi / 2.0, std::numbers::pi / 2.0}; break;
    case 'z': a = {0.0, 0.0}; break;
    default: throw std::invalid_argument("uniform_axes: axis must be x, y or z");
    }
    return std::vector<QubitAxis>(static_cast<std::size_t>(n_qubits), a);
}

/// Joint histogram of a field quadrature (density in X) and a full qubit
/// readout along per-qubit axes (probability mass over the 2^M outcomes).
/// Outcome bit 1 means the qubit was projected onto the axis-up state, with
/// qubit 1 in the most significant bit, matching the basis convention.
struct HybridSection {
    QuadratureGrid grid;
    double theta_f = 0.0;
    std::vector<QubitAxis> axes;
    int n_outcomes = 0;
    std::vector<double> w; ///< row-major, w[ix * n_outcomes + m]

    double at(int ix, int m) const {
        return w[static_cast<std::size_t>(ix) * n_outcomes + m];
    }
    double total_mass() const {
        double s = 0.0;
        for (double v : w) s += v;
        return s * grid.dx();
    }
};

inline HybridSection hybrid_section(const PureState& state, double theta_f,
                                    const std::vector<QubitAxis>& axes,
                                    const QuadratureGrid& grid = QuadratureGrid()) {
    const fock::SubspaceBasis& basis = *state.basis;
    if (basis.kind() != fock::BasisKind::Hybrid)
        throw std::invalid_argument("hybrid_section: needs a hybrid basis");
    const int m_qubits = basis.qubits();
    if (static_cast<int>(axes.size()) != m_qubits)
        throw std::invalid_argument("hybrid_section: one axis per qubit required");
    const int np = grid.n_points;
    const int n_out = 1 << m_qubits;
    const int dim = basis.dim();
    const auto psi = wavefunction_table(basis.total(), grid);

    // per-qubit single-spin overlaps <outcome | basis>, outcome up/down
    // against basis excited/ground
    std::vector<std::array<std::array<cd, 2>, 2>> ov(static_cast<std::size_t>(m_qubits));
    for (int q = 0; q < m_qubits; ++q) {
        const double half = 0.5 * axes[static_cast<std::size_t>(q)].theta;
        const cd ephi = std::polar(1.0, -axes[static_cast<std::size_t>(q)].phi);
        // ov[q][outcome][basis_bit]; outcome 1 = up, basis bit 1 = excited
        ov[static_cast<std::size_t>(q)][1][1] = std::cos(half);
        ov[static_cast<std::size_t>(q)][1][0] = std::sin(half) * ephi;
        ov[static_cast<std::size_t>(q)][0][1] = std::sin(half);
        ov[static_cast<std::size_t>(q)][0][0] = -std::cos(half) * ephi;
    }

    // Q[b][m] = product over qubits of the single-spin overlap
    std::vector<cd> q_table(static_cast<std::size_t>(n_out) * n_out);
    for (int b = 0; b < n_out; ++b)
        for (int m = 0; m < n_out; ++m) {
            cd prod = 1.0;
            for (int q = 0; q < m_qubits; ++q) {
                const int shift = m_qubits - 1 - q;
                const int bb = (b >> shift) & 1;
                const int mm = (m >> shift) & 1;
                prod *= ov[static_cast<std::size_t>(q)][static_cast<std::size_t>(mm)][static_cast<std::size_t>(bb)];
            }
            q_table[static_cast<std::size_t>(b) * n_out + m] = prod;
        }

    std::vector<cd> phase(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        phase[static_cast<std::size_t>(i)] =
            state.amplitudes[static_cast<std::size_t>(i)] *
            std::polar(1.0, basis.field_occupation(i) * theta_f);

    HybridSection sec;
    sec.grid = grid;
    sec.theta_f = theta_f;
    sec.axes = axes;
    sec.n_outcomes = n_out;
    sec.w.assign(static_cast<std::size_t>(np) * n_out, 0.0);
    std::vector<cd> amp(static_cast<std::size_t>(n_out));
    for (int ix = 0; ix < np; ++ix) {
        std::fill(amp.begin(), amp.end(), cd(0.0));
        for (int i = 0; i < dim; ++i) {
            const cd f = phase[static_cast<std::size_t>(i)] *
                         psi[static_cast<std::size_t>(basis.field_occupation(i))][static_cast<std::size_t>(ix)];
            if (f == cd(0.0)) continue;
            const cd* qrow = &q_table[static_cast<std::size_t>(basis.qubit_bits(i)) * n_out];
            for (int m = 0; m < n_out; ++m) amp[static_cast<std::size_t>(m)] += f * qrow[m];
        }
        double* out = &sec.w[static_cast<std::size_t>(ix) * n_out];
        for (int m = 0; m < n_out; ++m) out[m] = std::norm(amp[static_cast<std::size_t>(m)]);
    }
    return sec;
}

/// Marginals of a hybrid section: field density in X and outcome masses.
struct HybridMarginals {
    std::vector<double> field;   ///< density, one entry per grid point
    std::vector<double> outcome; ///< mass, one entry per outcome
};

inline HybridMarginals marginals(const HybridSection& sec) {
    const int np = sec.grid.n_points;
    const double dx = sec.grid.dx();
    HybridMarginals m;
    m.field.assign(static_cast<std::size_t>(np), 0.0);
    m.outcome.assign(static_cast<std::size_t>(sec.n_outcomes), 0.0);
    for (int ix = 0; ix < np; ++ix)
        for (int k = 0; k < sec.n_outcomes; ++k) {
            const double v = sec.at(ix, k);
            m.field[static_cast<std::size_t>(ix)] += v;
            m.outcome[static_cast<std::size_t>(k)] += v * dx;
        }
    return m;
}

} // namespace tomoscope::tomography
