#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "tomoscope/fock.hpp"
#include "tomoscope/linalg.hpp"
#include "tomoscope/rng.hpp"

namespace tomoscope::models {

using fock::BasisPtr;
using fock::Ladder;
using fock::LadderFactor;
using fock::SubspaceBasis;
using linalg::CMatrix;
using linalg::cd;

struct HamiltonianOperator {
    BasisPtr basis;
    CMatrix matrix;
};

struct LadderTerm {
    double coeff;
    std::vector<LadderFactor> factors;
};

/// Assemble a Hamiltonian from ladder-operator monomials plus a constant
/// shift. Callers list both halves of every non-Hermitian pair explicitly;
/// the result is checked rather than symmetrized.
inline HamiltonianOperator assemble(BasisPtr basis, const std::vector<LadderTerm>& terms,
                                    double constant = 0.0) {
    HamiltonianOperator h{basis, CMatrix(basis->dim())};
    for (int ket = 0; ket < basis->dim(); ++ket) {
        for (const auto& term : terms) {
            const auto r = fock::apply_ladder(*basis, ket, term.factors);
            if (r) h.matrix.at(r->first, ket) += term.coeff * r->second;
        }
        h.matrix.at(ket, ket) += constant;
    }
    if (h.matrix.max_hermitian_defect() > 1e-12)
        throw std::logic_error("assemble: term list is not Hermitian");
    return h;
}

/// Two-well condensate with tunneling lambda and tilt omega1. On the fixed-N
/// subspace the omega0 and interaction pieces are constant shifts; the
/// nontrivial part is an (N+1)-dimensional tridiagonal hopping problem.
struct BecParams {
    int n_total = 10;
    double omega0 = 1.0;
    double omega1 = 0.0;
    double interaction = 1.0; ///< coefficient of the squared total number
    double lambda = 0.0;      ///< tunneling strength
};

inline HamiltonianOperator build_bec(const BecParams& p) {
    auto basis = std::make_shared<const SubspaceBasis>(SubspaceBasis::cv_pair(p.n_total));
    const double n = p.n_total;
    std::vector<LadderTerm> terms = {
        {p.omega1, {{Ladder::ADag}, {Ladder::A}}},
        {-p.omega1, {{Ladder::BDag}, {Ladder::B}}},
        {-p.lambda, {{Ladder::ADag}, {Ladder::B}}},
        {-p.lambda, {{Ladder::BDag}, {Ladder::A}}},
    };
    return assemble(basis, terms, p.omega0 * n + p.interaction * n * n);
}

/// Exact level energy of the condensate dimer: the tilt and tunneling combine
/// into a single effective splitting sqrt(lambda^2 + omega1^2).
inline double bec_level_energy(const BecParams& p, int k) {
    const double n = p.n_total;
    const double split = std::hypot(p.lambda, p.omega1);
    return p.omega0 * n + p.interaction * n * n + split * (2.0 * k - n);
}

/// Single oscillator mode (first slot) exchanging quanta with an anharmonic
/// second mode. The anharmonicity gamma multiplies b'b'bb.
struct AtomFieldParams {
    int n_total = 10;
    double omega_f = 1.0;
    double omega_a = 1.0;
    double gamma = 1.0;
    double g = 0.0;
};

inline HamiltonianOperator build_atom_field(const AtomFieldParams& p) {
    auto basis = std::make_shared<const SubspaceBasis>(SubspaceBasis::cv_pair(p.n_total));
    std::vector<LadderTerm> terms = {
        {p.omega_f, {{Ladder::ADag}, {Ladder::A}}},
        {p.omega_a, {{Ladder::BDag}, {Ladder::B}}},
        {p.gamma, {{Ladder::BDag}, {Ladder::BDag}, {Ladder::B}, {Ladder::B}}},
        {p.g, {{Ladder::ADag}, {Ladder::B}}},
        {p.g, {{Ladder::BDag}, {Ladder::A}}},
    };
    return assemble(basis, terms);
}

/// Resonator coupled to a chain of qubits, rotating-wave form. All
/// frequencies are cyclic (already divided by 2 pi), in GHz, so time scales
/// read directly in nanoseconds. sigma_z carries eigenvalues +-1/2.
struct TcParams {
    int n_total = 6;
    double nu_field = 7.78;
    double anharmonicity = 0.0;        ///< chi, multiplies n(n-1) of the field
    std::vector<double> nu_qubit;      ///< one entry per qubit
    double coupling = 1.2e-3;          ///< resonator-qubit exchange strength
    double swap_coupling = 0.0;        ///< nearest-neighbour qubit exchange
};

/// Dressed qubit frequencies from bare gaps and a common drive scale.
inline std::vector<double> qubit_frequencies(const std::vector<double>& gaps, double eps) {
    std::vector<double> out;
    out.reserve(gaps.size());
    for (double d : gaps) out.push_back(std::hypot(d, eps));
    return out;
}

/// Draw qubit gap detunings for a disorder realization.
inline std::vector<double> sample_gaps(double mean, double sd, int count, std::uint64_t seed) {
    auto draws = rng::normal_sequence(seed, count);
    for (double& d : draws) d = mean + sd * d;
    return draws;
}

inline HamiltonianOperator build_tc(const TcParams& p) {
    const int m = static_cast<int>(p.nu_qubit.size());
    if (m < 1) throw std::invalid_argument("build_tc: need at least one qubit");
    auto basis = std::make_shared<const SubspaceBasis>(SubspaceBasis::hybrid(p.n_total, m));
    std::vector<LadderTerm> terms = {
        {p.nu_field, {{Ladder::ADag}, {Ladder::A}}},
        {p.anharmonicity, {{Ladder::ADag}, {Ladder::ADag}, {Ladder::A}, {Ladder::A}}},
    };
    for (int q = 1; q <= m; ++q) {
        terms.push_back({p.nu_qubit[static_cast<std::size_t>(q - 1)], {{Ladder::SigmaZ, q}}});
        terms.push_back({p.coupling, {{Ladder::SigmaPlus, q}, {Ladder::A}}});
        terms.push_back({p.coupling, {{Ladder::ADag}, {Ladder::SigmaMinus, q}}});
    }
    for (int q = 1; q < m; ++q) {
        terms.push_back({p.swap_coupling, {{Ladder::SigmaPlus, q}, {Ladder::SigmaMinus, q + 1}}});
        terms.push_back({p.swap_coupling, {{Ladder::SigmaMinus, q}, {Ladder::SigmaPlus, q + 1}}});
    }
    return assemble(basis, terms);
}

struct EigenSystem {
    BasisPtr basis;
    std::vector<double> energies;           ///< ascending
    std::vector<std::vector<cd>> states;    ///< states[k] belongs to energies[k]
};

/// Rotate a state so its largest-magnitude component is real positive. Ties
/// keep the lowest index (strict > scan), making the convention deterministic.
inline void fix_phase(std::vector<cd>& v) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            imax = i;
        }
    }
    if (best < 1e-300) return;
    const cd rot = std::conj(v[imax]) / best;
    for (auto& z : v) z *= rot;
    v[imax] = cd(std::abs(v[imax]), 0.0);
}

inline EigenSystem hermitian_eigensystem(const HamiltonianOperator& h) {
    const auto eig = linalg::jacobi_hermitian(h.matrix);
    EigenSystem out;
    out.basis = h.basis;
    out.energies = eig.values;
    const int n = h.matrix.n;
    out.states.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto& v = out.states[static_cast<std::size_t>(k)];
        v.resize(static_cast<std::size_t>(n));
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(i)] = eig.vectors.at(i, k);
            norm2 += std::norm(v[static_cast<std::size_t>(i)]);
        }
        if (std::abs(norm2 - 1.0) > 1e-13) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& z : v) z *= inv;
        }
        fix_phase(v);
    }
    return out;
}

/// Exact eigensystem of the condensate dimer. The diagonalizing rotation is
/// the exponential of an antisymmetric tridiagonal generator whose angle
/// kappa = atan2(lambda, omega1); the two-argument arctangent keeps the
/// correct branch when the tilt goes negative, where the principal value
/// would pick the wrong eigenvector ordering.
inline EigenSystem bec_closed_form_system(const BecParams& p) {
    const int n = p.n_total;
    const int d = n + 1;
    const double kappa = std::atan2(p.lambda, p.omega1);
    linalg::RMatrix g(d);
    for (int j = 0; j + 1 < d; ++j) {
        const double v = 0.5 * kappa * std::sqrt(static_cast<double>(j + 1) * (n - j));
        g.at(j + 1, j) = v;
        g.at(j, j + 1) = -v;
    }
    const linalg::RMatrix vmat = linalg::expm(g);
    EigenSystem out;
    out.basis = std::make_shared<const SubspaceBasis>(SubspaceBasis::cv_pair(n));
    out.energies.resize(static_cast<std::size_t>(d));
    out.states.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        out.energies[static_cast<std::size_t>(k)] = bec_level_energy(p, k);
        auto& v = out.states[static_cast<std::size_t>(k)];
        v.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = vmat.at(i, k);
        fix_phase(v);
    }
    return out;
}

/// Reorder (and inside degenerate clusters, recombine) the eigenstates of
/// `cur` so that slot k continues the state that occupied slot k in `prev`.
///
/// Away from crossings a greedy max-overlap assignment suffices: slots claim
/// their best unused successor in order. Inside a numerically degenerate
/// cluster the solver returns an arbitrary orthonormal mix, so the previous
/// states are projected onto the cluster span and re-orthonormalized in slot
/// order, which keeps characters smooth through avoided crossings whose gap
/// falls below the cluster tolerance. A projection that loses more than half
/// its norm signals a genuine character change; the raw assigned member is
/// kept in that case.
inline EigenSystem track_states(const EigenSystem& prev, const EigenSystem& cur,
                                double cluster_tol = 1e-9) {
    const std::size_t n = cur.states.size();
    if (prev.states.size() != n)
        throw std::invalid_argument("track_states: dimension mismatch");

    auto overlap = [&](const std::vector<cd>& a, const std::vector<cd>& b) {
        cd s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return s;
    };

    std::vector<int> assign(n, -1);
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        double best = -1.0;
        int pick = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double o = std::abs(overlap(prev.states[k], cur.states[j]));
            if (o > best) {
                best = o;
                pick = static_cast<int>(j);
            }
        }
        assign[k] = pick;
        used[static_cast<std::size_t>(pick)] = true;
    }

    EigenSystem out;
    out.basis = cur.basis;
    out.energies.resize(n);
    out.states.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.energies[k] = cur.energies[static_cast<std::size_t>(assign[k])];
        out.states[k] = cur.states[static_cast<std::size_t>(assign[k])];
    }

    // degenerate clusters in the solver's ascending-energy order
    std::vector<int> cluster_id(n, -1);
    int n_clusters = 0;
    for (std::size_t j = 0; j < n;) {
        std::size_t e = j + 1;
        while (e < n && cur.energies[e] - cur.energies[e - 1] < cluster_tol) ++e;
        if (e - j >= 2) {
            for (std::size_t i = j; i < e; ++i) cluster_id[i] = n_clusters;
            ++n_clusters;
        }
        j = e;
    }
    for (int c = 0; c < n_clusters; ++c) {
        std::vector<std::size_t> members; // solver indices spanning the cluster
        for (std::size_t j = 0; j < n; ++j)
            if (cluster_id[j] == c) members.push_back(j);
        std::vector<std::size_t> slots; // output slots assigned into this cluster
        for (std::size_t k = 0; k < n; ++k)
            if (cluster_id[static_cast<std::size_t>(assign[k])] == c) slots.push_back(k);

        std::vector<std::vector<cd>> produced;
        for (const std::size_t k : slots) {
            std::vector<cd> v(prev.states[k].size(), cd(0.0));
            for (const std::size_t j : members) {
                const cd coef = overlap(cur.states[j], prev.states[k]);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += coef * cur.states[j][i];
            }
            for (const auto& w : produced) {
                const cd coef = overlap(w, v);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coef * w[i];
            }
            double norm2 = 0.0;
            for (const auto& z : v) norm2 += std::norm(z);
            if (norm2 < 0.25) {
                // lost too much of the previous character: keep the raw member
                v = out.states[k];
            } else {
                const double inv = 1.0 / std::sqrt(norm2);
                for (auto& z : v) z *= inv;
            }
            for (const auto& w : produced) {
                // guard: re-orthogonalize the fallback against earlier picks
                const cd coef = overlap(w, v);
                if (std::abs(coef) > 1e-9) {
                    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coef * w[i];
                    double n2 = 0.0;
                    for (const auto& z : v) n2 += std::norm(z);
                    const double inv = 1.0 / std::sqrt(n2);
                    for (auto& z : v) z *= inv;
                }
            }
            fix_phase(v);
            produced.push_back(v);
        }
        for (std::size_t s = 0; s < slots.size(); ++s) out.states[slots[s]] = produced[s];
    }
    return out;
}

} // namespace tomoscope::models
