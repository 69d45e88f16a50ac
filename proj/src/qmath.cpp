#include "qkdsim/qmath.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdsim {

namespace {

constexpr double kNormTol = 1e-9;

bool finite(const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

// Eigenvectors of a local basis over the computational components.
std::array<std::array<Complex, 2>, 2> eigenvectors(LocalBasis b) {
    switch (b) {
        case LocalBasis::Z:
            return {{{Complex(1.0), Complex(0.0)}, {Complex(0.0), Complex(1.0)}}};
        case LocalBasis::X:
            return {{{Complex(kInvSqrt2), Complex(kInvSqrt2)},
                     {Complex(kInvSqrt2), Complex(-kInvSqrt2)}}};
        case LocalBasis::Y:
            return {{{Complex(kInvSqrt2), Complex(0.0, kInvSqrt2)},
                     {Complex(kInvSqrt2), Complex(0.0, -kInvSqrt2)}}};
    }
    throw std::logic_error("eigenvectors: bad basis");
}

}  // namespace

TwoQubitState::TwoQubitState(const std::array<Complex, 4>& amp) : amp_(amp) {
    double n = 0.0;
    for (const Complex& a : amp_) {
        if (!finite(a)) throw std::invalid_argument("TwoQubitState: non-finite amplitude");
        n += std::norm(a);
    }
    if (std::abs(n - 1.0) > kNormTol)
        throw std::invalid_argument("TwoQubitState: amplitudes are not normalized");
}

TwoQubitState TwoQubitState::normalized(std::array<Complex, 4> amp) {
    double n = 0.0;
    for (const Complex& a : amp) n += std::norm(a);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("TwoQubitState::normalized: zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(n);
    for (Complex& a : amp) a *= inv;
    return TwoQubitState(amp);
}

TwoQubitState TwoQubitState::basis_state(int b1, int b2) {
    std::array<Complex, 4> a{};
    a[2 * b1 + b2] = Complex(1.0);
    return TwoQubitState(a);
}

TwoQubitState TwoQubitState::psi_plus() {
    return TwoQubitState({Complex(0.0), Complex(kInvSqrt2), Complex(kInvSqrt2), Complex(0.0)});
}

TwoQubitState TwoQubitState::psi_minus() {
    return TwoQubitState({Complex(0.0), Complex(kInvSqrt2), Complex(-kInvSqrt2), Complex(0.0)});
}

TwoQubitState TwoQubitState::phi_plus() {
    return TwoQubitState({Complex(kInvSqrt2), Complex(0.0), Complex(0.0), Complex(kInvSqrt2)});
}

TwoQubitState TwoQubitState::phi_minus() {
    return TwoQubitState({Complex(kInvSqrt2), Complex(0.0), Complex(0.0), Complex(-kInvSqrt2)});
}

double TwoQubitState::norm_sq() const {
    double n = 0.0;
    for (const Complex& a : amp_) n += std::norm(a);
    return n;
}

Complex inner_product(const TwoQubitState& a, const TwoQubitState& b) {
    Complex acc(0.0);
    for (int i = 0; i < 4; ++i) acc += std::conj(a.amp()[i]) * b.amp()[i];
    return acc;
}

double fidelity(const TwoQubitState& a, const TwoQubitState& b) {
    return std::norm(inner_product(a, b));
}

Unitary2::Unitary2(const std::array<Complex, 4>& m) : m_(m) {
    for (const Complex& c : m_)
        if (!finite(c)) throw std::invalid_argument("Unitary2: non-finite entry");
    // U†U = I elementwise
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            Complex g(0.0);
            for (int k = 0; k < 2; ++k) g += std::conj(m_[2 * k + r]) * m_[2 * k + c];
            const Complex expect = (r == c) ? Complex(1.0) : Complex(0.0);
            if (std::abs(g - expect) > kNormTol)
                throw std::invalid_argument("Unitary2: matrix is not unitary");
        }
    }
}

Unitary2 Unitary2::identity() {
    return Unitary2({Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)});
}

SingleQubitState Unitary2::apply(const SingleQubitState& s) const {
    return {{m_[0] * s.amp[0] + m_[1] * s.amp[1], m_[2] * s.amp[0] + m_[3] * s.amp[1]}};
}

Unitary2 single_qubit_unitary(double theta, double phi, double delta) {
    if (!std::isfinite(theta) || !std::isfinite(phi) || !std::isfinite(delta))
        throw std::invalid_argument("single_qubit_unitary: parameters must be finite");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex eip = std::polar(1.0, phi);
    const Complex eid = std::polar(1.0, delta);
    // Columns are the images of |0> and |1>.
    return Unitary2({Complex(c), -eid * std::conj(eip) * s,  //
                     eip * s, eid * c});
}

TwoQubitState collective_apply(const Unitary2& u, const TwoQubitState& s) {
    return local_apply(u, u, s);
}

TwoQubitState local_apply(const Unitary2& u1, const Unitary2& u2, const TwoQubitState& s) {
    std::array<Complex, 4> out{};
    for (int k1 = 0; k1 < 2; ++k1)
        for (int k2 = 0; k2 < 2; ++k2) {
            Complex acc(0.0);
            for (int l1 = 0; l1 < 2; ++l1)
                for (int l2 = 0; l2 < 2; ++l2)
                    acc += u1.at(k1, l1) * u2.at(k2, l2) * s.amp()[2 * l1 + l2];
            out[2 * k1 + k2] = acc;
        }
    return TwoQubitState(out);
}

BellDistribution bell_decompose(const TwoQubitState& s) {
    const auto& a = s.amp();
    const Complex psi_p = (a[1] + a[2]) * kInvSqrt2;
    const Complex psi_m = (a[1] - a[2]) * kInvSqrt2;
    const Complex phi_p = (a[0] + a[3]) * kInvSqrt2;
    const Complex phi_m = (a[0] - a[3]) * kInvSqrt2;
    return {std::norm(psi_p), std::norm(psi_m), std::norm(phi_p), std::norm(phi_m)};
}

std::pair<int, int> sample_product_outcome(const TwoQubitState& s, LocalBasis b1, LocalBasis b2,
                                           double randomness) {
    const auto e = eigenvectors(b1);
    const auto f = eigenvectors(b2);
    double cum = 0.0;
    for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2) {
            Complex overlap(0.0);
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    overlap += std::conj(e[o1][k] * f[o2][l]) * s.amp()[2 * k + l];
            cum += std::norm(overlap);
            if (randomness < cum) return {o1, o2};
        }
    return {1, 1};  // randomness hit the rounding slack at the top of the CDF
}

OutcomePair measure_pair(const TwoQubitState& s, LocalBasis basis, double randomness) {
    const auto [b1, b2] = sample_product_outcome(s, basis, basis, randomness);
    return {basis, b1, b2};
}

int measure_single(const SingleQubitState& s, LocalBasis basis, double randomness) {
    const auto e = eigenvectors(basis);
    const Complex overlap0 = std::conj(e[0][0]) * s.amp[0] + std::conj(e[0][1]) * s.amp[1];
    return randomness < std::norm(overlap0) ? 0 : 1;
}

SingleQubitState apply(const Unitary2& u, const SingleQubitState& s) { return u.apply(s); }

TwoQubitState prepare_code(CodeLabel label) {
    if (label.basis == PrepBasis::Z)
        return label.bit ? TwoQubitState::basis_state(1, 0) : TwoQubitState::basis_state(0, 1);
    return label.bit ? TwoQubitState::psi_minus() : TwoQubitState::psi_plus();
}

}  // namespace qkdsim
