#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tomoscope/fock.hpp"
#include "tomoscope/tomography.hpp"

namespace tomoscope::indicators {

using tomography::HybridSection;
using tomography::QuadratureGrid;
using tomography::TomogramSection;

/// Weights at or below this floor are treated as empty cells. Keeps logs
/// finite and makes the entropy of a clean product section exactly additive.
inline constexpr double weight_floor = 1e-14;

/// Entanglement indicators of a single tomogram section. Everything here is
/// computed from the section alone, the way an experiment would: no state
/// reconstruction happens anywhere downstream of the histogram.
///
/// tei: mutual information between the two readouts (marginal entropies
///      minus joint entropy), in bits.
/// ipr: 1 + inverse participation ratio of the joint minus the two marginal
///      ones. Unlike the others it is not zero on product sections.
/// pcc: absolute Pearson correlation between the two quadratures. Only
///      defined for CV sections; the qubit side has its own adapted version.
/// bd:  Bhattacharyya distance between the joint and the product of its
///      marginals, in bits. Nonnegative on the grid measure by
///      Cauchy-Schwarz, and bounded by tei/2 there.
struct SectionIndicators {
    double tei = 0.0;
    double ipr = 0.0;
    std::optional<double> pcc;
    double bd = 0.0;
    double mass = 0.0;      ///< total probability captured by the grid
    double eta_joint = 0.0; ///< participation ratio of the joint histogram
    double eta_a = 0.0;     ///< participation ratio of the first marginal
    double eta_b = 0.0;     ///< participation ratio of the second marginal
};

namespace detail {

inline double entropy_term(double w) {
    return (w > weight_floor) ? -w * std::log2(w) : 0.0;
}

/// Deterministic mean: sort first so the summation order never depends on
/// how the values were produced (thread count, plan order).
inline double sorted_mean(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("sorted_mean: empty");
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace detail

inline SectionIndicators section_indicators(const TomogramSection& sec) {
    const int np = sec.grid.n_points;
    const double dx = sec.grid.dx();
    const double cell = dx * dx;
    const auto marg = tomography::marginals(sec);

    double s_joint = 0.0, s_a = 0.0, s_b = 0.0;
    double eta_joint = 0.0, eta_a = 0.0, eta_b = 0.0;
    double mass = 0.0, bhatta = 0.0;
    double mu_a = 0.0, mu_b = 0.0;
    for (int ia = 0; ia < np; ++ia) {
        s_a += detail::entropy_term(marg.a[static_cast<std::size_t>(ia)]) * dx;
        s_b += detail::entropy_term(marg.b[static_cast<std::size_t>(ia)]) * dx;
        eta_a += marg.a[static_cast<std::size_t>(ia)] * marg.a[static_cast<std::size_t>(ia)] * dx;
        eta_b += marg.b[static_cast<std::size_t>(ia)] * marg.b[static_cast<std::size_t>(ia)] * dx;
    }
    for (int ia = 0; ia < np; ++ia) {
        const double xa = sec.grid.point(ia);
        const double* row = &sec.w[static_cast<std::size_t>(ia) * np];
        for (int ib = 0; ib < np; ++ib) {
            const double w = row[ib];
            mass += w;
            s_joint += detail::entropy_term(w);
            eta_joint += w * w;
            mu_a += xa * w;
            mu_b += sec.grid.point(ib) * w;
            const double prod = marg.a[static_cast<std::size_t>(ia)] * marg.b[static_cast<std::size_t>(ib)];
            bhatta += std::sqrt(w * prod);
        }
    }
    mass *= cell;
    s_joint *= cell;
    eta_joint *= cell;
    mu_a *= cell / mass;
    mu_b *= cell / mass;
    bhatta *= cell;

    double var_a = 0.0, var_b = 0.0, cov = 0.0;
    for (int ia = 0; ia < np; ++ia) {
        const double da = sec.grid.point(ia) - mu_a;
        const double* row = &sec.w[static_cast<std::size_t>(ia) * np];
        for (int ib = 0; ib < np; ++ib) {
            const double db = sec.grid.point(ib) - mu_b;
            var_a += da * da * row[ib];
            var_b += db * db * row[ib];
            cov += da * db * row[ib];
        }
    }
    var_a *= cell / mass;
    var_b *= cell / mass;
    cov *= cell / mass;
    if (var_a <= 0.0 || var_b <= 0.0)
        throw std::runtime_error("section_indicators: degenerate quadrature variance");

    SectionIndicators out;
    out.tei = s_a + s_b - s_joint;
    out.ipr = 1.0 + eta_joint - eta_a - eta_b;
    out.pcc = std::abs(cov) / std::sqrt(var_a * var_b);
    out.bd = -std::log2(std::max(bhatta, 1e-300));
    out.mass = mass;
    out.eta_joint = eta_joint;
    out.eta_a = eta_a;
    out.eta_b = eta_b;
    return out;
}

inline SectionIndicators hybrid_indicators(const HybridSection& sec) {
    const int np = sec.grid.n_points;
    const int n_out = sec.n_outcomes;
    const double dx = sec.grid.dx();
    const auto marg = tomography::marginals(sec);

    double s_joint = 0.0, s_f = 0.0, s_q = 0.0;
    double eta_joint = 0.0, eta_f = 0.0, eta_q = 0.0;
    double mass = 0.0, bhatta = 0.0;
    for (int ix = 0; ix < np; ++ix) {
        s_f += detail::entropy_term(marg.field[static_cast<std::size_t>(ix)]) * dx;
        eta_f += marg.field[static_cast<std::size_t>(ix)] * marg.field[static_cast<std::size_t>(ix)] * dx;
    }
    for (int m = 0; m < n_out; ++m) {
        s_q += detail::entropy_term(marg.outcome[static_cast<std::size_t>(m)]);
        eta_q += marg.outcome[static_cast<std::size_t>(m)] * marg.outcome[static_cast<std::size_t>(m)];
    }
    for (int ix = 0; ix < np; ++ix) {
        const double* row = &sec.w[static_cast<std::size_t>(ix) * n_out];
        for (int m = 0; m < n_out; ++m) {
            const double w = row[m];
            mass += w;
            s_joint += detail::entropy_term(w);
            eta_joint += w * w;
            bhatta += std::sqrt(w * marg.field[static_cast<std::size_t>(ix)] *
                                marg.outcome[static_cast<std::size_t>(m)]);
        }
    }
    mass *= dx;
    s_joint *= dx;
    eta_joint *= dx;
    bhatta *= dx;

    SectionIndicators out;
    out.tei = s_f + s_q - s_joint;
    out.ipr = 1.0 + eta_joint - eta_f - eta_q;
    out.pcc = std::nullopt; // quadrature-vs-outcome needs the adapted correlator below
    out.bd = -std::log2(std::max(bhatta, 1e-300));
    out.mass = mass;
    out.eta_joint = eta_joint;
    out.eta_a = eta_f;
    out.eta_b = eta_q;
    return out;
}

/// Correlation between the field quadrature and the total spin of the
/// readout pattern (+1/2 per up outcome, -1/2 per down). Along the z axis a
/// product eigenstate can make the spin deterministic; zero variance means
/// no correlation is observable, so 0 is returned rather than 0/0.
inline double hybrid_spin_correlator(const HybridSection& sec) {
    const int np = sec.grid.n_points;
    const int n_out = sec.n_outcomes;
    const double dx = sec.grid.dx();
    int m_qubits = 0;
    while ((1 << m_qubits) < n_out) ++m_qubits;

    std::vector<double> spin(static_cast<std::size_t>(n_out));
    for (int m = 0; m < n_out; ++m)
        spin[static_cast<std::size_t>(m)] =
            static_cast<double>(std::popcount(static_cast<unsigned>(m))) - 0.5 * m_qubits;

    double mass = 0.0, mu_x = 0.0, mu_s = 0.0;
    for (int ix = 0; ix < np; ++ix) {
        const double x = sec.grid.point(ix);
        const double* row = &sec.w[static_cast<std::size_t>(ix) * n_out];
        for (int m = 0; m < n_out; ++m) {
            mass += row[m];
            mu_x += x * row[m];
            mu_s += spin[static_cast<std::size_t>(m)] * row[m];
        }
    }
    mass *= dx;
    mu_x *= dx / mass;
    mu_s *= dx / mass;

    double var_x = 0.0, var_s = 0.0, cov = 0.0;
    for (int ix = 0; ix < np; ++ix) {
        const double dxp = sec.grid.point(ix) - mu_x;
        const double* row = &sec.w[static_cast<std::size_t>(ix) * n_out];
        for (int m = 0; m < n_out; ++m) {
            const double ds = spin[static_cast<std::size_t>(m)] - mu_s;
            var_x += dxp * dxp * row[m];
            var_s += ds * ds * row[m];
            cov += dxp * ds * row[m];
        }
    }
    var_x *= dx / mass;
    var_s *= dx / mass;
    cov *= dx / mass;
    if (var_x < 1e-24 || var_s < 1e-24) return 0.0;
    return std::abs(cov) / std::sqrt(var_x * var_s);
}

/// Angle plan for CV states: the list of (theta_a, theta_b) sections whose
/// indicators are averaged into the xi values.
struct CvAnglePlan {
    std::vector<std::pair<double, double>> sections;

    /// 5x5 grid of multiples of pi/5 in each angle.
    static CvAnglePlan default_plan() {
        CvAnglePlan p;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                p.sections.emplace_back(i * std::numbers::pi / 5.0, j * std::numbers::pi / 5.0);
        return p;
    }

    /// 3x3 grid of multiples of pi/3; cheaper plan for stability checks.
    static CvAnglePlan reduced_plan() {
        CvAnglePlan p;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                p.sections.emplace_back(i * std::numbers::pi / 3.0, j * std::numbers::pi / 3.0);
        return p;
    }
};

/// Angle plan for hybrid states: field angles crossed with one uniform
/// Bloch axis for the whole register per section.
struct HybridAnglePlan {
    std::vector<std::pair<double, char>> sections; ///< (theta_f, axis)

    /// five field angles (multiples of pi/5) times the three axes
    static HybridAnglePlan default_plan() {
        HybridAnglePlan p;
        for (int i = 0; i < 5; ++i)
            for (char ax : {'x', 'y', 'z'})
                p.sections.emplace_back(i * std::numbers::pi / 5.0, ax);
        return p;
    }

    /// three field angles (multiples of pi/3) times the three axes; cheaper
    /// plan used to show the averages are not fragile to plan size
    static HybridAnglePlan reduced_plan() {
        HybridAnglePlan p;
        for (int i = 0; i < 3; ++i)
            for (char ax : {'x', 'y', 'z'})
                p.sections.emplace_back(i * std::numbers::pi / 3.0, ax);
        return p;
    }
};

/// Angle-averaged indicator set for one state, plus the subsystem entropy
/// that serves as the entanglement reference.
struct XiSet {
    double svne = 0.0;
    double tei = 0.0;
    double ipr = 0.0;
    double pcc = 0.0;
    double bd = 0.0;
};

inline XiSet xi_set(const fock::PureState& state, const CvAnglePlan& plan,
                    const QuadratureGrid& grid = QuadratureGrid()) {
    std::vector<double> tei, ipr, pcc, bd;
    for (const auto& [ta, tb] : plan.sections) {
        const auto ind = section_indicators(tomography::cv_section(state, ta, tb, grid));
        tei.push_back(ind.tei);
        ipr.push_back(ind.ipr);
        pcc.push_back(*ind.pcc);
        bd.push_back(ind.bd);
    }
    XiSet out;
    out.svne = fock::svne(state, fock::Part::ModeA);
    out.tei = detail::sorted_mean(std::move(tei));
    out.ipr = detail::sorted_mean(std::move(ipr));
    out.pcc = detail::sorted_mean(std::move(pcc));
    out.bd = detail::sorted_mean(std::move(bd));
    return out;
}

inline XiSet xi_set(const fock::PureState& state, const HybridAnglePlan& plan,
                    const QuadratureGrid& grid = QuadratureGrid()) {
    const int m = state.basis->qubits();
    std::vector<double> tei, ipr, pcc, bd;
    for (const auto& [tf, ax] : plan.sections) {
        const auto sec = tomography::hybrid_section(state, tf, tomography::uniform_axes(m, ax), grid);
        const auto ind = hybrid_indicators(sec);
        tei.push_back(ind.tei);
        ipr.push_back(ind.ipr);
        pcc.push_back(hybrid_spin_correlator(sec));
        bd.push_back(ind.bd);
    }
    XiSet out;
    out.svne = fock::svne(state, fock::Part::Field);
    out.tei = detail::sorted_mean(std::move(tei));
    out.ipr = detail::sorted_mean(std::move(ipr));
    out.pcc = detail::sorted_mean(std::move(pcc));
    out.bd = detail::sorted_mean(std::move(bd));
    return out;
}

} // namespace tomoscope::indicators
