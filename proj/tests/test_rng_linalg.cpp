#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "tomoscope/linalg.hpp"
#include "tomoscope/rng.hpp"

using namespace tomoscope;
using cd = std::complex<double>;

TEST_CASE("splitmix stream is the published sequence") {
    // frozen from the scalar reference implementation, seed 42
    rng::SplitMix64 sm(42);
    const std::uint64_t first = sm.next();
    rng::SplitMix64 again(42);
    REQUIRE(again.next() == first);
    REQUIRE(first != sm.next()); // stream advances

    const auto normals = rng::normal_sequence(42, 4);
    REQUIRE(normals[0] == Catch::Approx(0.41471975043153037).margin(1e-15));
    REQUIRE(normals[1] == Catch::Approx(0.6526812221519428).margin(1e-15));
    REQUIRE(normals[2] == Catch::Approx(-0.8918862136277568).margin(1e-15));
    REQUIRE(normals[3] == Catch::Approx(1.326833562814106).margin(1e-15));
}

TEST_CASE("uniform01 stays inside the open interval") {
    rng::SplitMix64 sm(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = sm.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("sub-seeds are decorrelated and reproducible") {
    REQUIRE(rng::sub_seed(42, 0) == 2949826092126892291ULL);
    REQUIRE(rng::sub_seed(42, 1) == 6904877152625194467ULL);
    REQUIRE(rng::sub_seed(42, 2) == 7297471543603743092ULL);
    REQUIRE(rng::sub_seed(42, 3) == 701532786141963250ULL);
}

TEST_CASE("gaussian sampler caches the sine draw") {
    rng::GaussianSampler g(123);
    rng::GaussianSampler h(123);
    for (int i = 0; i < 7; ++i) REQUIRE(g.next() == h.next());
}

namespace {

linalg::CMatrix random_hermitian(int n, std::uint64_t seed) {
    rng::SplitMix64 sm(seed);
    linalg::CMatrix h(n);
    for (int i = 0; i < n; ++i) {
        h.at(i, i) = cd(2.0 * sm.uniform01() - 1.0, 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cd z(2.0 * sm.uniform01() - 1.0, 2.0 * sm.uniform01() - 1.0);
            h.at(i, j) = z;
            h.at(j, i) = std::conj(z);
        }
    }
    return h;
}

} // namespace

TEST_CASE("jacobi reconstructs random hermitian matrices") {
    for (int n : {2, 3, 8, 17}) {
        const auto h = random_hermitian(n, 1000 + static_cast<std::uint64_t>(n));
        const auto eig = linalg::jacobi_hermitian(h);

        for (std::size_t k = 1; k < eig.values.size(); ++k)
            REQUIRE(eig.values[k] >= eig.values[k - 1]);

        // orthonormality
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cd dot = 0.0;
                for (int i = 0; i < n; ++i)
                    dot += std::conj(eig.vectors.at(i, a)) * eig.vectors.at(i, b);
                REQUIRE(std::abs(dot - (a == b ? cd(1.0) : cd(0.0))) < 1e-12);
            }

        // H v = lambda v
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < n; ++i) {
                cd hv = 0.0;
                for (int j = 0; j < n; ++j) hv += h.at(i, j) * eig.vectors.at(j, k);
                worst = std::max(worst, std::abs(hv - eig.values[k] * eig.vectors.at(i, k)));
            }
        }
        REQUIRE(worst < 1e-12);
    }
}

TEST_CASE("jacobi rejects non-hermitian input") {
    linalg::CMatrix m(2);
    m.at(0, 1) = cd(1.0, 0.0);
    m.at(1, 0) = cd(2.0, 0.0);
    REQUIRE_THROWS_AS(linalg::jacobi_hermitian(m), std::invalid_argument);
}

TEST_CASE("jacobi handles already-diagonal input exactly") {
    linalg::CMatrix m(3);
    m.at(0, 0) = 3.0;
    m.at(1, 1) = -1.0;
    m.at(2, 2) = 0.5;
    const auto eig = linalg::jacobi_hermitian(m);
    REQUIRE(eig.values[0] == -1.0);
    REQUIRE(eig.values[1] == 0.5);
    REQUIRE(eig.values[2] == 3.0);
    REQUIRE(std::abs(eig.vectors.at(1, 0)) == 1.0); // plain permutation
}

TEST_CASE("matrix exponential of a rotation generator") {
    const double theta = 0.7354;
    linalg::RMatrix g(2);
    g.at(0, 1) = -theta;
    g.at(1, 0) = theta;
    const auto r = linalg::expm(g);
    REQUIRE(r.at(0, 0) == Catch::Approx(std::cos(theta)).margin(1e-14));
    REQUIRE(r.at(0, 1) == Catch::Approx(-std::sin(theta)).margin(1e-14));
    REQUIRE(r.at(1, 0) == Catch::Approx(std::sin(theta)).margin(1e-14));
    REQUIRE(r.at(1, 1) == Catch::Approx(std::cos(theta)).margin(1e-14));
}

TEST_CASE("matrix exponential of zero is the identity") {
    const auto r = linalg::expm(linalg::RMatrix(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) REQUIRE(r.at(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("exponential of antisymmetric generators is orthogonal") {
    // the generator shape used by the closed-form rotation, various sizes
    for (int n : {3, 5, 7}) {
        linalg::RMatrix g(n);
        rng::SplitMix64 sm(55 + static_cast<std::uint64_t>(n));
        for (int j = 0; j + 1 < n; ++j) {
            const double v = 2.0 * sm.uniform01() - 1.0;
            g.at(j + 1, j) = v;
            g.at(j, j + 1) = -v;
        }
        const auto r = linalg::expm(g);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += r.at(i, a) * r.at(i, b);
                REQUIRE(dot == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-13));
            }
    }
}
