#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "tomoscope/models.hpp"

using namespace tomoscope;
using cd = std::complex<double>;

TEST_CASE("dimer hamiltonian matrix for one particle") {
    models::BecParams p;
    p.n_total = 1;
    p.omega0 = 1.0;
    p.omega1 = 0.25;
    p.interaction = 1.0;
    p.lambda = 0.25;
    const auto h = models::build_bec(p);
    REQUIRE(h.matrix.n == 2);
    // basis index = occupation of the first well
    REQUIRE(h.matrix.at(0, 0).real() == Catch::Approx(1.75).margin(1e-15)); // 2 - 0.25
    REQUIRE(h.matrix.at(1, 1).real() == Catch::Approx(2.25).margin(1e-15)); // 2 + 0.25
    REQUIRE(h.matrix.at(0, 1).real() == Catch::Approx(-0.25).margin(1e-15));
    REQUIRE(h.matrix.at(1, 0).real() == Catch::Approx(-0.25).margin(1e-15));

    const auto [lo, hi] = oracles::eig2(1.75, -0.25, 2.25);
    REQUIRE(models::bec_level_energy(p, 0) == Catch::Approx(lo).margin(1e-14));
    REQUIRE(models::bec_level_energy(p, 1) == Catch::Approx(hi).margin(1e-14));
}

TEST_CASE("closed-form dimer levels match the solver on both branch signs") {
    models::BecParams p;
    p.n_total = 3;
    for (double omega1 : {-0.8, -0.02, 0.0, 0.31, 1.0}) {
        for (double lambda : {0.25, 1.0}) {
            p.omega1 = omega1;
            p.lambda = lambda;
            const auto sys = models::hermitian_eigensystem(models::build_bec(p));
            for (int k = 0; k <= 3; ++k)
                REQUIRE(sys.energies[static_cast<std::size_t>(k)] ==
                        Catch::Approx(models::bec_level_energy(p, k)).margin(1e-12));
        }
    }
}

TEST_CASE("closed-form eigenvectors satisfy the eigenvalue equation") {
    models::BecParams p;
    p.n_total = 5;
    p.omega1 = -0.37; // negative detuning exercises the rotation branch cut
    p.lambda = 0.6;
    const auto h = models::build_bec(p);
    const auto sys = models::bec_closed_form_system(p);
    for (std::size_t k = 0; k < sys.states.size(); ++k) {
        const auto hv = h.matrix.apply(sys.states[k]);
        double worst = 0.0;
        for (std::size_t i = 0; i < hv.size(); ++i)
            worst = std::max(worst, std::abs(hv[i] - sys.energies[k] * sys.states[k][i]));
        REQUIRE(worst < 1e-10);
    }

    // and agrees with the iterative solver away from degeneracies
    const auto num = models::hermitian_eigensystem(h);
    for (std::size_t k = 0; k < num.states.size(); ++k) {
        cd ov = 0.0;
        for (std::size_t i = 0; i < num.states[k].size(); ++i)
            ov += std::conj(num.states[k][i]) * sys.states[k][i];
        REQUIRE(std::abs(ov) == Catch::Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("anharmonic atom-field model reproduces the degenerate spectrum") {
    models::AtomFieldParams p;
    p.n_total = 4;
    p.omega_f = 1.0;
    p.omega_a = 1.0;
    p.gamma = 1.0;
    p.g = 0.0;
    const auto sys = models::hermitian_eigensystem(models::build_atom_field(p));
    const double expect[5] = {4.0, 4.0, 6.0, 10.0, 16.0};
    for (int k = 0; k < 5; ++k)
        REQUIRE(sys.energies[static_cast<std::size_t>(k)] ==
                Catch::Approx(expect[k]).margin(1e-12));
}

TEST_CASE("assemble rejects non-hermitian term sets") {
    const auto basis =
        std::make_shared<const fock::SubspaceBasis>(fock::SubspaceBasis::cv_pair(2));
    // a^dag b without its conjugate partner
    std::vector<models::LadderTerm> terms = {
        {1.0, {{fock::Ladder::ADag}, {fock::Ladder::B}}}};
    REQUIRE_THROWS_AS(models::assemble(basis, terms, 0.0), std::logic_error);
}

TEST_CASE("dressed qubit gaps combine detuning and drive in quadrature") {
    const auto nu = models::qubit_frequencies({3.0, 4.0}, 4.0);
    REQUIRE(nu[0] == Catch::Approx(5.0).margin(1e-15));
    REQUIRE(nu[1] == Catch::Approx(std::sqrt(32.0)).margin(1e-14));
}

TEST_CASE("qubit chain with the pinned seed reproduces frozen observables") {
    const auto gaps = models::sample_gaps(5.6, 1.12, 5, 42);
    REQUIRE(gaps[0] == Catch::Approx(6.064486120483314).margin(1e-12));
    REQUIRE(gaps[1] == Catch::Approx(6.331002968810176).margin(1e-12));
    REQUIRE(gaps[2] == Catch::Approx(4.601087440736912).margin(1e-12));
    REQUIRE(gaps[3] == Catch::Approx(7.086053590351798).margin(1e-12));
    REQUIRE(gaps[4] == Catch::Approx(7.537144258489892).margin(1e-12));

    models::TcParams p;
    p.n_total = 6;
    p.nu_field = 7.78;
    p.coupling = 1.2e-3;
    p.nu_qubit = models::qubit_frequencies(gaps, 4.62);
    REQUIRE(p.nu_qubit[0] == Catch::Approx(7.62380429349644).margin(1e-11));
    REQUIRE(p.nu_qubit[4] == Catch::Approx(8.840415350722337).margin(1e-11));

    const auto sys = models::hermitian_eigensystem(models::build_tc(p));
    REQUIRE(sys.basis->dim() == 32);
    REQUIRE(sys.energies[0] == Catch::Approx(25.623389923209665).margin(1e-9));
    REQUIRE(sys.energies[1] - sys.energies[0] ==
            Catch::Approx(0.05768788266033198).margin(1e-9));

    // ground state is dominated by four photons with qubits 1 and 3 excited
    const int idx = sys.basis->index_of_hybrid(4, 0b10100u);
    REQUIRE(idx >= 0);
    double amax = 0.0;
    int iarg = -1;
    for (int i = 0; i < sys.basis->dim(); ++i) {
        const double a = std::abs(sys.states[0][static_cast<std::size_t>(i)]);
        if (a > amax) {
            amax = a;
            iarg = i;
        }
    }
    REQUIRE(iarg == idx);
    REQUIRE(amax == Catch::Approx(0.9989742646409626).margin(1e-9));
    REQUIRE(fock::svne({sys.basis, sys.states[0]}, fock::Part::Field) ==
            Catch::Approx(0.022489673901364478).margin(1e-9));
}

TEST_CASE("single qubit exchange gap matches the dressed closed form") {
    models::TcParams p;
    p.n_total = 1;
    p.nu_field = 7.78;
    p.coupling = 1.2e-3;
    p.nu_qubit = {7.0};
    const auto sys = models::hermitian_eigensystem(models::build_tc(p));
    // two dressed levels split by sqrt(detuning^2 + 4 lambda^2 n)
    const double split = std::sqrt(std::pow(7.78 - 7.0, 2) + 4.0 * 1.2e-3 * 1.2e-3);
    REQUIRE(sys.energies[1] - sys.energies[0] == Catch::Approx(split).margin(1e-12));
}

TEST_CASE("phase convention pins the largest component real positive") {
    std::vector<cd> v = {cd(0.2, -0.1), cd(-0.3, 0.6), cd(0.05, 0.0)};
    models::fix_phase(v);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    REQUIRE(imax == 1);
    REQUIRE(v[1].imag() == 0.0);
    REQUIRE(v[1].real() > 0.0);
    // norm preserved
    REQUIRE(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]) ==
            Catch::Approx(0.2 * 0.2 + 0.01 + 0.45 + 0.0025).margin(1e-14));
}

TEST_CASE("tracking follows states through an exact degeneracy") {
    models::AtomFieldParams p;
    p.n_total = 4;
    p.omega_f = 1.0;
    p.omega_a = 1.0;
    p.gamma = 1.0;

    auto solve = [&](double g) {
        models::AtomFieldParams q = p;
        q.g = g;
        return models::hermitian_eigensystem(models::build_atom_field(q));
    };

    std::vector<models::EigenSystem> path;
    for (int j = -10; j <= 10; ++j) {
        auto sys = solve(0.03 * j);
        if (path.empty())
            path.push_back(std::move(sys));
        else
            path.push_back(models::track_states(path.back(), sys));
    }
    const auto& mid = path[10]; // g = 0, the degenerate point

    // the two lowest tracked slots remain balanced two-branch superpositions
    REQUIRE(std::abs(mid.states[0][3]) == Catch::Approx(0.71478488).margin(1e-6));
    REQUIRE(std::abs(mid.states[0][4]) == Catch::Approx(0.69934439).margin(1e-6));
    REQUIRE(std::abs(mid.states[1][3]) == Catch::Approx(0.69934439).margin(1e-6));
    REQUIRE(std::abs(mid.states[1][4]) == Catch::Approx(0.71478488).margin(1e-6));
    REQUIRE(std::abs(mid.states[2][2]) == Catch::Approx(1.0).margin(1e-9));

    const double s01 = fock::svne({mid.basis, mid.states[0]}, fock::Part::ModeA);
    const double s1 = fock::svne({mid.basis, mid.states[1]}, fock::Part::ModeA);
    const double s2 = fock::svne({mid.basis, mid.states[2]}, fock::Part::ModeA);
    REQUIRE(s01 == Catch::Approx(0.9996560623961837).margin(1e-9));
    REQUIRE(s1 == Catch::Approx(0.9996560623961837).margin(1e-9));
    REQUIRE(s2 == Catch::Approx(0.0).margin(1e-12));

    // tracked states still solve the eigenproblem at the degenerate point
    const auto h = models::build_atom_field(p);
    for (int k = 0; k < 3; ++k) {
        const auto hv = h.matrix.apply(mid.states[static_cast<std::size_t>(k)]);
        double worst = 0.0;
        for (std::size_t i = 0; i < hv.size(); ++i)
            worst = std::max(worst,
                             std::abs(hv[i] - mid.energies[static_cast<std::size_t>(k)] *
                                                  mid.states[static_cast<std::size_t>(k)][i]));
        REQUIRE(worst < 1e-9);
    }
}

TEST_CASE("tracking keeps identity across a narrow avoided crossing") {
    // two-level dimer sweep through the minimum gap at zero detuning
    models::BecParams p;
    p.n_total = 1;
    p.lambda = 0.01;
    auto solve = [&](double w1) {
        models::BecParams q = p;
        q.omega1 = w1;
        return models::hermitian_eigensystem(models::build_bec(q));
    };
    models::EigenSystem prev = solve(-0.2);
    std::vector<cd> initial = prev.states[0];
    for (double w1 = -0.19; w1 <= 0.201; w1 += 0.01)
        prev = models::track_states(prev, solve(w1));
    // after passing the crossing the lower branch has rotated adiabatically
    cd ov = 0.0;
    for (std::size_t i = 0; i < initial.size(); ++i)
        ov += std::conj(initial[i]) * prev.states[0][i];
    REQUIRE(std::abs(ov) < 0.2); // nearly orthogonal to where it started
    REQUIRE(prev.energies[0] <= prev.energies[1]);
}

TEST_CASE("number conservation holds for every model generator") {
    using fock::Ladder;
    using fock::LadderFactor;

    auto commutator_norm = [](const models::HamiltonianOperator& h,
                              const std::vector<std::vector<LadderFactor>>& number_terms,
                              const std::vector<double>& coeffs) {
        const int n = h.matrix.n;
        linalg::CMatrix num(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (std::size_t t = 0; t < number_terms.size(); ++t)
                    v += coeffs[t] *
                         fock::ladder_matrix_element(*h.basis, i, number_terms[t], j);
                num.at(i, j) = v;
            }
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cd c = 0.0;
                for (int k = 0; k < n; ++k)
                    c += h.matrix.at(i, k) * num.at(k, j) - num.at(i, k) * h.matrix.at(k, j);
                worst = std::max(worst, std::abs(c));
            }
        return worst;
    };

    models::BecParams bp;
    bp.n_total = 4;
    bp.omega1 = 0.3;
    bp.lambda = 0.7;
    REQUIRE(commutator_norm(models::build_bec(bp),
                            {{{Ladder::ADag}, {Ladder::A}}, {{Ladder::BDag}, {Ladder::B}}},
                            {1.0, 1.0}) < 1e-12);

    models::AtomFieldParams ap;
    ap.n_total = 4;
    ap.g = 0.2;
    REQUIRE(commutator_norm(models::build_atom_field(ap),
                            {{{Ladder::ADag}, {Ladder::A}}, {{Ladder::BDag}, {Ladder::B}}},
                            {1.0, 1.0}) < 1e-12);

    models::TcParams tp;
    tp.n_total = 3;
    tp.nu_qubit = {7.6, 6.5, 8.4};
    tp.coupling = 1.2e-3;
    tp.swap_coupling = 1e-3;
    // total excitation: photon number plus (sigma_z + 1/2) per qubit
    const auto h = models::build_tc(tp);
    std::vector<std::vector<LadderFactor>> terms = {{{Ladder::ADag}, {Ladder::A}}};
    std::vector<double> coeffs = {1.0};
    for (int q = 1; q <= 3; ++q) {
        terms.push_back({{Ladder::SigmaZ, q}});
        coeffs.push_back(1.0);
    }
    REQUIRE(commutator_norm(h, terms, coeffs) < 1e-12);
}
