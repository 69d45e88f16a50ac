#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <map>
#include <numbers>

#include "helpers.hpp"
#include "qkdsim/qmath.hpp"
#include "qkdsim/rng.hpp"

using namespace qkdsim;
using test_helpers::close;
using test_helpers::complex_close;
using test_helpers::random_state;
using test_helpers::random_unitary;
using test_helpers::within_4sigma;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("single_qubit_unitary at theta=0 is the identity regardless of phi") {
    const Unitary2 u = single_qubit_unitary(0.0, 1.7, 0.0);
    CHECK(u.at(0, 0) == Complex(1.0));
    CHECK(u.at(0, 1) == Complex(0.0));
    CHECK(u.at(1, 0) == Complex(0.0));
    CHECK(u.at(1, 1) == Complex(1.0));
}

TEST_CASE("single_qubit_unitary at theta=pi/2 swaps the basis with a sign") {
    const Unitary2 u = single_qubit_unitary(kPi / 2.0, 0.0, 0.0);
    // |0> -> |1>, |1> -> -|0>
    CHECK(complex_close(u.at(0, 0), Complex(0.0), 1e-12));
    CHECK(complex_close(u.at(1, 0), Complex(1.0), 1e-12));
    CHECK(complex_close(u.at(0, 1), Complex(-1.0), 1e-12));
    CHECK(complex_close(u.at(1, 1), Complex(0.0), 1e-12));
}

TEST_CASE("single_qubit_unitary is unitary at a generic parameter point") {
    const Unitary2 u = single_qubit_unitary(kPi / 6.0, 1.2, 0.7);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            Complex g(0.0);
            for (int k = 0; k < 2; ++k) g += std::conj(u.at(k, r)) * u.at(k, c);
            CHECK(complex_close(g, r == c ? Complex(1.0) : Complex(0.0), 1e-12));
        }
}

TEST_CASE("single_qubit_unitary rejects non-finite parameters") {
    CHECK_THROWS_AS(single_qubit_unitary(std::nan(""), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(single_qubit_unitary(0.0, INFINITY, 0.0), std::invalid_argument);
}

TEST_CASE("unitarity holds to 1e-12 over random parameter triples") {
    Rng rng(11);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Unitary2 u = random_unitary(rng);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                Complex g(0.0);
                for (int k = 0; k < 2; ++k) g += std::conj(u.at(k, r)) * u.at(k, c);
                worst = std::max(worst, std::abs(g - (r == c ? Complex(1.0) : Complex(0.0))));
            }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Unitary2 rejects non-unitary matrices") {
    CHECK_THROWS_AS(Unitary2({Complex(1.0), Complex(1.0), Complex(0.0), Complex(1.0)}),
                    std::invalid_argument);
}

TEST_CASE("TwoQubitState construction enforces the norm invariant") {
    CHECK_THROWS_AS(TwoQubitState({Complex(1.0), Complex(1.0), Complex(0.0), Complex(0.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TwoQubitState({Complex(std::nan("")), Complex(0.0), Complex(0.0), Complex(0.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TwoQubitState::normalized({Complex(0.0), Complex(0.0), Complex(0.0), Complex(0.0)}),
                    std::invalid_argument);
    const TwoQubitState s = TwoQubitState::normalized({Complex(3.0), Complex(4.0), Complex(0.0), Complex(0.0)});
    CHECK(close(s.norm_sq(), 1.0, 1e-12));
    CHECK(complex_close(s.amp()[0], Complex(0.6), 1e-12));
}

TEST_CASE("collective_apply with the identity leaves states bit-identical") {
    Rng rng(12);
    const Unitary2 id = single_qubit_unitary(0.0, 0.0, 0.0);
    for (int i = 0; i < 20; ++i) {
        const TwoQubitState s = random_state(rng);
        CHECK(collective_apply(id, s) == s);
    }
}

TEST_CASE("collective_apply on |01> at theta=pi/6 matches the direct tensor evaluation") {
    // Oracle: columns of U(pi/6,0,0) are (c,s) and (-s,c), so
    // (U⊗U)|01> = (c,s)⊗(-s,c) = (-sc, c^2, -s^2, sc) with c=cos(pi/6), s=1/2.
    const Unitary2 u = single_qubit_unitary(kPi / 6.0, 0.0, 0.0);
    const TwoQubitState out = collective_apply(u, TwoQubitState::basis_state(0, 1));
    const double sc = 0.43301270189221935;  // sin(pi/6) cos(pi/6)
    CHECK(complex_close(out.amp()[0], Complex(-sc), 1e-12));
    CHECK(complex_close(out.amp()[1], Complex(0.75), 1e-12));
    CHECK(complex_close(out.amp()[2], Complex(-0.25), 1e-12));
    CHECK(complex_close(out.amp()[3], Complex(sc), 1e-12));
}

TEST_CASE("collective noise multiplies the singlet by det(U) only") {
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double delta = rng.uniform(0.0, 2.0 * kPi);
        const Unitary2 u = single_qubit_unitary(theta, phi, delta);
        const TwoQubitState out = collective_apply(u, TwoQubitState::psi_minus());
        const Complex det = u.det();
        CHECK(complex_close(det, std::polar(1.0, delta), 1e-12));
        for (int k = 0; k < 4; ++k)
            CHECK(complex_close(out.amp()[k], det * TwoQubitState::psi_minus().amp()[k], 1e-12));
        CHECK(close(fidelity(out, TwoQubitState::psi_minus()), 1.0, 1e-12));
    }
}

TEST_CASE("collective_apply preserves the norm") {
    Rng rng(14);
    for (int i = 0; i < 1000; ++i) {
        const TwoQubitState out = collective_apply(random_unitary(rng), random_state(rng));
        CHECK(close(out.norm_sq(), 1.0, 1e-9));
    }
}

TEST_CASE("no collective unitary couples psi+ to psi-") {
    Rng rng(15);
    for (int i = 0; i < 2000; ++i) {
        const TwoQubitState out = collective_apply(random_unitary(rng), TwoQubitState::psi_plus());
        CHECK(std::abs(inner_product(TwoQubitState::psi_minus(), out)) < 1e-9);
    }
}

TEST_CASE("bell_decompose on Bell and product states") {
    const BellDistribution d1 = bell_decompose(TwoQubitState::psi_plus());
    CHECK(close(d1.psi_plus, 1.0, 1e-12));
    CHECK(close(d1.psi_minus, 0.0, 1e-12));
    CHECK(close(d1.phi_plus, 0.0, 1e-12));
    CHECK(close(d1.phi_minus, 0.0, 1e-12));

    const BellDistribution d2 = bell_decompose(TwoQubitState::basis_state(0, 1));
    CHECK(close(d2.psi_plus, 0.5, 1e-12));
    CHECK(close(d2.psi_minus, 0.5, 1e-12));
    CHECK(close(d2.phi_plus, 0.0, 1e-12));
    CHECK(close(d2.phi_minus, 0.0, 1e-12));

    const TwoQubitState evolved =
        collective_apply(single_qubit_unitary(kPi / 6.0, 0.9, 0.4), TwoQubitState::psi_plus());
    CHECK(bell_decompose(evolved).psi_minus < 1e-12);
}

TEST_CASE("bell_decompose sums to one on random states") {
    Rng rng(16);
    for (int i = 0; i < 200; ++i) {
        const BellDistribution d = bell_decompose(random_state(rng));
        CHECK(close(d.psi_plus + d.psi_minus + d.phi_plus + d.phi_minus, 1.0, 1e-9));
    }
}

TEST_CASE("bell_decompose of prepare_code is the indicator distribution") {
    const auto check_indicator = [](CodeLabel label, int which) {
        const BellDistribution d = bell_decompose(prepare_code(label));
        const std::array<double, 4> p = {d.psi_plus, d.psi_minus, d.phi_plus, d.phi_minus};
        for (int i = 0; i < 4; ++i) CHECK(close(p[i], i == which ? 1.0 : 0.0, 1e-12));
    };
    // |01> and |10> split evenly between psi+ and psi-
    const BellDistribution z0 = bell_decompose(prepare_code({PrepBasis::Z, 0}));
    CHECK(close(z0.psi_plus, 0.5, 1e-12));
    CHECK(close(z0.psi_minus, 0.5, 1e-12));
    check_indicator({PrepBasis::X, 0}, 0);
    check_indicator({PrepBasis::X, 1}, 1);
}

TEST_CASE("prepare_code amplitudes") {
    CHECK(prepare_code({PrepBasis::Z, 0}) == TwoQubitState::basis_state(0, 1));
    CHECK(prepare_code({PrepBasis::Z, 1}) == TwoQubitState::basis_state(1, 0));
    const TwoQubitState x1 = prepare_code({PrepBasis::X, 1});
    CHECK(x1.amp()[0] == Complex(0.0));
    CHECK(x1.amp()[1] == Complex(kInvSqrt2));
    CHECK(x1.amp()[2] == Complex(-kInvSqrt2));
    CHECK(x1.amp()[3] == Complex(0.0));
}

TEST_CASE("measure_pair on |01> in Z is deterministic") {
    const TwoQubitState s = TwoQubitState::basis_state(0, 1);
    for (double u : {0.0, 0.25, 0.5, 0.9999}) {
        const OutcomePair o = measure_pair(s, LocalBasis::Z, u);
        CHECK(o.bit1 == 0);
        CHECK(o.bit2 == 1);
    }
}

TEST_CASE("measure_pair outcome ordering follows the cumulative rule") {
    // psi+ in X has probability 1/2 on (0,0) and 1/2 on (1,1).
    const TwoQubitState s = TwoQubitState::psi_plus();
    const OutcomePair lo = measure_pair(s, LocalBasis::X, 0.0);
    CHECK(lo.bit1 == 0);
    CHECK(lo.bit2 == 0);
    const OutcomePair hi = measure_pair(s, LocalBasis::X, 0.6);
    CHECK(hi.bit1 == 1);
    CHECK(hi.bit2 == 1);
}

TEST_CASE("psi+ in X gives equal bits, half-and-half") {
    Rng rng(17);
    const TwoQubitState s = TwoQubitState::psi_plus();
    std::uint64_t zeros = 0;
    const std::uint64_t n = 100000;
    for (std::uint64_t i = 0; i < n; ++i) {
        const OutcomePair o = measure_pair(s, LocalBasis::X, rng.uniform());
        REQUIRE(o.bit1 == o.bit2);
        zeros += o.bit1 == 0;
    }
    CHECK(within_4sigma(0.5, zeros, n));
}

TEST_CASE("psi- in Y always gives differing bits") {
    Rng rng(18);
    const TwoQubitState s = TwoQubitState::psi_minus();
    for (int i = 0; i < 20000; ++i) {
        const OutcomePair o = measure_pair(s, LocalBasis::Y, rng.uniform());
        REQUIRE(o.bit1 != o.bit2);
    }
}

TEST_CASE("Born sampling frequencies match squared amplitudes") {
    Rng state_rng(19);
    const TwoQubitState s = random_state(state_rng);

    SUBCASE("Z basis") {
        Rng rng(20);
        std::map<int, std::uint64_t> counts;
        const std::uint64_t n = 100000;
        for (std::uint64_t i = 0; i < n; ++i) {
            const OutcomePair o = measure_pair(s, LocalBasis::Z, rng.uniform());
            ++counts[2 * o.bit1 + o.bit2];
        }
        for (int idx = 0; idx < 4; ++idx)
            CHECK(within_4sigma(std::norm(s.amp()[idx]), counts[idx], n));
    }

    SUBCASE("X basis") {
        // Oracle: Hadamard-transform the amplitudes in the test itself.
        std::array<Complex, 4> h{};
        for (int o1 = 0; o1 < 2; ++o1)
            for (int o2 = 0; o2 < 2; ++o2) {
                Complex acc(0.0);
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) {
                        const double sign = ((o1 && k) ? -1.0 : 1.0) * ((o2 && l) ? -1.0 : 1.0);
                        acc += 0.5 * sign * s.amp()[2 * k + l];
                    }
                h[2 * o1 + o2] = acc;
            }
        Rng rng(21);
        std::map<int, std::uint64_t> counts;
        const std::uint64_t n = 100000;
        for (std::uint64_t i = 0; i < n; ++i) {
            const OutcomePair o = measure_pair(s, LocalBasis::X, rng.uniform());
            ++counts[2 * o.bit1 + o.bit2];
        }
        for (int idx = 0; idx < 4; ++idx) CHECK(within_4sigma(std::norm(h[idx]), counts[idx], n));
    }
}

TEST_CASE("mixed-basis product sampling separates the protocol-3 codewords") {
    // (|0+> - |1->)/sqrt2: qubit-1-in-Z, qubit-2-in-X outcomes always XOR to 0.
    const TwoQubitState plus_prime(
        {Complex(0.5), Complex(0.5), Complex(-0.5), Complex(0.5)});
    Rng rng(22);
    for (int i = 0; i < 5000; ++i) {
        const auto [b1, b2] =
            sample_product_outcome(plus_prime, LocalBasis::Z, LocalBasis::X, rng.uniform());
        REQUIRE((b1 ^ b2) == 0);
    }
}

TEST_CASE("measure_single on eigenstates and superpositions") {
    for (double u : {0.0, 0.3, 0.99})
        CHECK(measure_single(SingleQubitState::plus(), LocalBasis::X, u) == 0);
    Rng rng(23);
    std::uint64_t zeros = 0;
    const std::uint64_t n = 50000;
    for (std::uint64_t i = 0; i < n; ++i)
        zeros += measure_single(SingleQubitState::ket0(), LocalBasis::X, rng.uniform()) == 0;
    CHECK(within_4sigma(0.5, zeros, n));
}
