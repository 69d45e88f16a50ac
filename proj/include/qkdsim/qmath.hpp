#pragma once

#include <array>
#include <complex>
#include <utility>

namespace qkdsim {

using Complex = std::complex<double>;

// 1/sqrt(2), shared by every state construction so that states that are equal
// on paper compare equal amplitude-for-amplitude.
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Local single-qubit measurement bases. Eigenvector index 0 is |0>, |+>, |y+>
// and index 1 is |1>, |->, |y->, with |y+-> = (|0> +- i|1>)/sqrt(2).
enum class LocalBasis { Z, X, Y };

enum class PrepBasis { Z, X };

// Alice's preparation record. Z/0 -> |01>, Z/1 -> |10>, X/0 -> |psi+>,
// X/1 -> |psi->; bit 0 states are |01> and |psi+>.
struct CodeLabel {
    PrepBasis basis = PrepBasis::Z;
    int bit = 0;

    bool operator==(const CodeLabel&) const = default;
};

// Result of measuring both qubits of a code in the same local basis.
struct OutcomePair {
    LocalBasis basis = LocalBasis::Z;
    int bit1 = 0;
    int bit2 = 0;

    bool operator==(const OutcomePair&) const = default;
};

// Probabilities of a two-qubit state over the Bell basis
// |psi+->=(|01>+-|10>)/sqrt2, |phi+->=(|00>+-|11>)/sqrt2. Sums to 1.
struct BellDistribution {
    double psi_plus = 0.0;
    double psi_minus = 0.0;
    double phi_plus = 0.0;
    double phi_minus = 0.0;
};

struct SingleQubitState {
    std::array<Complex, 2> amp{};

    static SingleQubitState ket0() { return {{Complex(1.0), Complex(0.0)}}; }
    static SingleQubitState ket1() { return {{Complex(0.0), Complex(1.0)}}; }
    static SingleQubitState plus() { return {{Complex(kInvSqrt2), Complex(kInvSqrt2)}}; }
    static SingleQubitState minus() { return {{Complex(kInvSqrt2), Complex(-kInvSqrt2)}}; }

    double norm_sq() const { return std::norm(amp[0]) + std::norm(amp[1]); }

    bool operator==(const SingleQubitState&) const = default;
};

// Pure state of the two-photon code. Amplitudes are indexed 2*b1 + b2 for the
// basis ket |b1 b2>, qubit 1 being the first-transmitted photon. Construction
// enforces unit norm (within 1e-9) and finite amplitudes.
class TwoQubitState {
  public:
    explicit TwoQubitState(const std::array<Complex, 4>& amp);

    // Rescales an arbitrary nonzero vector to unit norm.
    static TwoQubitState normalized(std::array<Complex, 4> amp);

    static TwoQubitState basis_state(int b1, int b2);
    static TwoQubitState psi_plus();
    static TwoQubitState psi_minus();
    static TwoQubitState phi_plus();
    static TwoQubitState phi_minus();

    const std::array<Complex, 4>& amp() const { return amp_; }
    Complex amp(int b1, int b2) const { return amp_[2 * b1 + b2]; }
    double norm_sq() const;

    bool operator==(const TwoQubitState&) const = default;

  private:
    std::array<Complex, 4> amp_{};
};

// <a|b>
Complex inner_product(const TwoQubitState& a, const TwoQubitState& b);

// |<a|b>|^2; global phases are never normalized away, comparisons go through this.
double fidelity(const TwoQubitState& a, const TwoQubitState& b);

// 2x2 unitary, row-major. Construction checks U†U = I within 1e-9 elementwise.
class Unitary2 {
  public:
    explicit Unitary2(const std::array<Complex, 4>& m);

    static Unitary2 identity();

    Complex at(int row, int col) const { return m_[2 * row + col]; }
    Complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    SingleQubitState apply(const SingleQubitState& s) const;

    bool operator==(const Unitary2&) const = default;

  private:
    std::array<Complex, 4> m_{};
};

/// Channel unitary from its rotation angle, phase and dispersion:
/// U|0> = cos(theta)|0> + e^{i phi} sin(theta)|1>,
/// U|1> = e^{i delta}(-e^{-i phi} sin(theta)|0> + cos(theta)|1>).
/// Rejects non-finite parameters.
Unitary2 single_qubit_unitary(double theta, double phi, double delta);

/// (u ⊗ u) · s — the same unitary on both qubits. Norm-preserving.
TwoQubitState collective_apply(const Unitary2& u, const TwoQubitState& s);

/// (u1 ⊗ u2) · s — independent unitaries per qubit.
TwoQubitState local_apply(const Unitary2& u1, const Unitary2& u2, const TwoQubitState& s);

/// Squared overlaps with the four Bell states.
BellDistribution bell_decompose(const TwoQubitState& s);

/// Samples a product measurement outcome with qubit 1 in basis b1 and qubit 2
/// in basis b2. Inverse-CDF on the single uniform draw `randomness`, outcome
/// order (0,0),(0,1),(1,0),(1,1), so results are reproducible from seeds.
std::pair<int, int> sample_product_outcome(const TwoQubitState& s, LocalBasis b1, LocalBasis b2,
                                           double randomness);

/// Both qubits measured in the same local basis.
OutcomePair measure_pair(const TwoQubitState& s, LocalBasis basis, double randomness);

/// Single-qubit Born sampling in a local basis; returns the eigenvector index.
int measure_single(const SingleQubitState& s, LocalBasis basis, double randomness);

SingleQubitState apply(const Unitary2& u, const SingleQubitState& s);

/// Code state for a preparation label: |01>, |10>, |psi+> or |psi->.
TwoQubitState prepare_code(CodeLabel label);

}  // namespace qkdsim
