#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tomoscope/linalg.hpp"

namespace tomoscope::fock {

using linalg::CMatrix;
using linalg::cd;

enum class BasisKind {
    CvPair, ///< two oscillator modes sharing N quanta: |k, N-k>
    Hybrid  ///< one oscillator mode plus M qubits, excitation number N
};

/// A fixed-total-number subspace basis. Every Hamiltonian in this library
/// conserves the total excitation number, so states never leave one of these
/// subspaces and full Fock-space truncation error is zero by construction.
class SubspaceBasis {
public:
    static SubspaceBasis cv_pair(int n_total) {
        if (n_total < 0) throw std::invalid_argument("cv_pair: negative total");
        SubspaceBasis b;
        b.kind_ = BasisKind::CvPair;
        b.total_ = n_total;
        b.dim_ = n_total + 1;
        return b;
    }

    /// Hybrid basis ordered by field occupation ascending, then qubit bit
    /// pattern ascending as an integer. Qubit 1 is the most significant bit,
    /// a set bit means that qubit is excited.
    static SubspaceBasis hybrid(int n_total, int n_qubits) {
        if (n_total < 0 || n_qubits < 1 || n_qubits > 24)
            throw std::invalid_argument("hybrid: bad dimensions");
        SubspaceBasis b;
        b.kind_ = BasisKind::Hybrid;
        b.total_ = n_total;
        b.qubits_ = n_qubits;
        b.bits_to_index_.assign(std::size_t{1} << n_qubits, -1);
        for (int nf = std::max(0, n_total - n_qubits); nf <= n_total; ++nf) {
            const int want = n_total - nf;
            for (unsigned bits = 0; bits < (1u << n_qubits); ++bits) {
                if (std::popcount(bits) != want) continue;
                b.bits_to_index_[bits] = static_cast<int>(b.states_.size());
                b.states_.emplace_back(nf, bits);
            }
        }
        b.dim_ = static_cast<int>(b.states_.size());
        return b;
    }

    BasisKind kind() const { return kind_; }
    int total() const { return total_; }
    int dim() const { return dim_; }
    int qubits() const { return qubits_; }

    int occupation_a(int index) const {
        require_kind(BasisKind::CvPair);
        return index;
    }
    int occupation_b(int index) const {
        require_kind(BasisKind::CvPair);
        return total_ - index;
    }
    int field_occupation(int index) const {
        require_kind(BasisKind::Hybrid);
        return states_[static_cast<std::size_t>(index)].first;
    }
    unsigned qubit_bits(int index) const {
        require_kind(BasisKind::Hybrid);
        return states_[static_cast<std::size_t>(index)].second;
    }
    /// qubit is 1-based; qubit 1 occupies the most significant bit
    bool qubit_up(int index, int qubit) const {
        return (qubit_bits(index) >> (qubits_ - qubit)) & 1u;
    }

    int index_of_cv(int na) const {
        require_kind(BasisKind::CvPair);
        return (na >= 0 && na <= total_) ? na : -1;
    }
    int index_of_hybrid(int nf, unsigned bits) const {
        require_kind(BasisKind::Hybrid);
        if (bits >= bits_to_index_.size()) return -1;
        const int idx = bits_to_index_[bits];
        if (idx < 0) return -1;
        return states_[static_cast<std::size_t>(idx)].first == nf ? idx : -1;
    }

private:
    void require_kind(BasisKind k) const {
        if (kind_ != k) throw std::logic_error("basis accessor used on wrong kind");
    }

    BasisKind kind_ = BasisKind::CvPair;
    int total_ = 0;
    int dim_ = 0;
    int qubits_ = 0;
    std::vector<std::pair<int, unsigned>> states_; // hybrid: (n_field, bits)
    std::vector<int> bits_to_index_;               // hybrid: bits -> index
};

using BasisPtr = std::shared_ptr<const SubspaceBasis>;

struct PureState {
    BasisPtr basis;
    std::vector<cd> amplitudes;

    double norm() const {
        double s = 0.0;
        for (const auto& z : amplitudes) s += std::norm(z);
        return std::sqrt(s);
    }
    void normalize() {
        const double n = norm();
        if (n < 1e-300) throw std::runtime_error("normalize: zero state");
        for (auto& z : amplitudes) z /= n;
    }
};

/// Subsystem selector for partial traces.
enum class Part { ModeA, ModeB, Field, Qubits };

/// Reduced density operator of one subsystem of a pure state. For ModeA,
/// ModeB and Field the fixed total number forces the matrix diagonal (the
/// traced-out partner label determines the kept label uniquely), so only the
/// probabilities are stored. The qubit register genuinely carries coherences
/// and gets a full matrix over the bit patterns present in the subspace.
struct DensityMatrix {
    std::vector<double> diag;     ///< nonempty iff the matrix is diagonal
    CMatrix full;                 ///< used when coherences survive
    std::vector<unsigned> labels; ///< row label: occupation, or qubit bits
    bool is_diagonal() const { return !diag.empty(); }
};

inline DensityMatrix reduced_density(const PureState& state, Part part) {
    const SubspaceBasis& b = *state.basis;
    DensityMatrix out;
    switch (part) {
    case Part::ModeA:
    case Part::ModeB: {
        if (b.kind() != BasisKind::CvPair)
            throw std::invalid_argument("reduced_density: mode parts need a CV basis");
        out.diag.resize(static_cast<std::size_t>(b.dim()));
        out.labels.resize(static_cast<std::size_t>(b.dim()));
        for (int k = 0; k < b.dim(); ++k) {
            const int occ = (part == Part::ModeA) ? b.occupation_a(k) : b.occupation_b(k);
            out.diag[static_cast<std::size_t>(occ)] = std::norm(state.amplitudes[static_cast<std::size_t>(k)]);
            out.labels[static_cast<std::size_t>(occ)] = static_cast<unsigned>(occ);
        }
        return out;
    }
    case Part::Field: {
        if (b.kind() != BasisKind::Hybrid)
            throw std::invalid_argument("reduced_density: field part needs a hybrid basis");
        const int nf_max = b.total();
        out.diag.assign(static_cast<std::size_t>(nf_max) + 1, 0.0);
        out.labels.resize(static_cast<std::size_t>(nf_max) + 1);
        for (std::size_t i = 0; i <= static_cast<std::size_t>(nf_max); ++i)
            out.labels[i] = static_cast<unsigned>(i);
        for (int i = 0; i < b.dim(); ++i)
            out.diag[static_cast<std::size_t>(b.field_occupation(i))] +=
                std::norm(state.amplitudes[static_cast<std::size_t>(i)]);
        return out;
    }
    case Part::Qubits: {
        if (b.kind() != BasisKind::Hybrid)
            throw std::invalid_argument("reduced_density: qubit part needs a hybrid basis");
        // rows are the bit patterns present in the subspace, ascending
        out.labels.reserve(static_cast<std::size_t>(b.dim()));
        for (int i = 0; i < b.dim(); ++i) out.labels.push_back(b.qubit_bits(i));
        std::sort(out.labels.begin(), out.labels.end());
        const int d = static_cast<int>(out.labels.size());
        out.full = CMatrix(d);
        auto row_of = [&](unsigned bits) {
            return static_cast<int>(std::lower_bound(out.labels.begin(), out.labels.end(), bits) -
                                    out.labels.begin());
        };
        // tracing over the field couples only patterns with equal popcount
        for (int i = 0; i < b.dim(); ++i) {
            for (int j = 0; j < b.dim(); ++j) {
                if (b.field_occupation(i) != b.field_occupation(j)) continue;
                out.full.at(row_of(b.qubit_bits(i)), row_of(b.qubit_bits(j))) +=
                    state.amplitudes[static_cast<std::size_t>(i)] *
                    std::conj(state.amplitudes[static_cast<std::size_t>(j)]);
            }
        }
        return out;
    }
    }
    throw std::logic_error("reduced_density: unreachable");
}

/// Shannon entropy (base 2) of a probability vector. Weights at or below
/// 1e-14 are dropped and each p is capped at 1 so rounding can never produce
/// a negative entropy.
inline double entropy_bits(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
        if (v <= 1e-14) continue;
        const double q = std::min(v, 1.0);
        s -= q * std::log2(q);
    }
    return s;
}

inline double svne(const DensityMatrix& rho) {
    if (rho.is_diagonal()) return entropy_bits(rho.diag);
    const auto eig = linalg::jacobi_hermitian(rho.full);
    return entropy_bits(eig.values);
}

inline double svne(const PureState& state, Part part) {
    return svne(reduced_density(state, part));
}

/// Elementary number-conserving operators used to assemble Hamiltonians.
/// Spin operators act on a named qubit; A/ADag act on the first mode (the
/// field in hybrid bases), B/BDag on the second oscillator mode.
enum class Ladder { A, ADag, B, BDag, SigmaPlus, SigmaMinus, SigmaZ };

struct LadderFactor {
    Ladder op;
    int qubit = 0; ///< 1-based, required for sigma operators
};

/// Apply a product of ladder factors (rightmost factor acts first) to basis
/// state `ket`. Intermediate occupations may leave the fixed-N subspace; the
/// result is nullopt if the state is annihilated or the final label falls
/// outside the subspace. Returns the final index and the real coefficient.
inline std::optional<std::pair<int, double>>
apply_ladder(const SubspaceBasis& b, int ket, const std::vector<LadderFactor>& factors) {
    double coeff = 1.0;
    if (b.kind() == BasisKind::CvPair) {
        int na = b.occupation_a(ket);
        int nb = b.occupation_b(ket);
        for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
            switch (it->op) {
            case Ladder::A:
                if (na == 0) return std::nullopt;
                coeff *= std::sqrt(static_cast<double>(na--));
                break;
            case Ladder::ADag:
                coeff *= std::sqrt(static_cast<double>(++na));
                break;
            case Ladder::B:
                if (nb == 0) return std::nullopt;
                coeff *= std::sqrt(static_cast<double>(nb--));
                break;
            case Ladder::BDag:
                coeff *= std::sqrt(static_cast<double>(++nb));
                break;
            default:
                throw std::invalid_argument("apply_ladder: spin operator on a CV basis");
            }
        }
        if (na + nb != b.total()) return std::nullopt;
        return std::make_pair(b.index_of_cv(na), coeff);
    }
    int nf = b.field_occupation(ket);
    unsigned bits = b.qubit_bits(ket);
    const int m = b.qubits();
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
        switch (it->op) {
        case Ladder::A:
            if (nf == 0) return std::nullopt;
            coeff *= std::sqrt(static_cast<double>(nf--));
            break;
        case Ladder::ADag:
            coeff *= std::sqrt(static_cast<double>(++nf));
            break;
        case Ladder::SigmaPlus:
        case Ladder::SigmaMinus:
        case Ladder::SigmaZ: {
            if (it->qubit < 1 || it->qubit > m)
                throw std::invalid_argument("apply_ladder: qubit index out of range");
            const unsigned mask = 1u << (m - it->qubit);
            const bool up = bits & mask;
            if (it->op == Ladder::SigmaPlus) {
                if (up) return std::nullopt;
                bits |= mask;
            } else if (it->op == Ladder::SigmaMinus) {
                if (!up) return std::nullopt;
                bits &= ~mask;
            } else {
                coeff *= up ? 0.5 : -0.5;
            }
            break;
        }
        default:
            throw std::invalid_argument("apply_ladder: second-mode operator on a hybrid basis");
        }
    }
    const int idx = b.index_of_hybrid(nf, bits);
    if (idx < 0) return std::nullopt;
    return std::make_pair(idx, coeff);
}

inline double ladder_matrix_element(const SubspaceBasis& b, int bra,
                                    const std::vector<LadderFactor>& factors, int ket) {
    const auto r = apply_ladder(b, ket, factors);
    if (!r || r->first != bra) return 0.0;
    return r->second;
}

} // namespace tomoscope::fock
