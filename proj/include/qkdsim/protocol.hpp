#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkdsim/channel.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/distill.hpp"
#include "qkdsim/qmath.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

// One code after Bob's measurement and the public sifting step.
// Acceptance: key-basis (Z) codes are kept only when measured in Z with
// differing bits (the post-selection subspace); phase-test (X) codes are kept
// in all three bases since they only feed the error statistics.
struct SiftedRecord {
    std::uint64_t index = 0;
    CodeLabel label;
    OutcomePair meas;
    bool accepted = false;
    std::optional<int> bob_bit;  // set iff accepted Z-label code measured in Z
    bool revealed = false;       // announced for the error test (consumed from the key)
};

// Empirical wrong-outcome counts for one (code state, measurement basis) category.
struct CategoryCount {
    std::uint64_t n = 0;
    std::uint64_t wrong = 0;

    double rate() const { return n ? static_cast<double>(wrong) / static_cast<double>(n) : 0.0; }
    // Wald standard error of the rate.
    double se() const {
        if (n == 0) return 0.0;
        const double p = rate();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
};

// Error rates deduced from the revealed records.
//
// For psi-minus codes a wrong outcome is equal bits in Z, X and Y; for
// psi-plus codes it is equal bits in Z but differing bits in X and Y. The net
// flip rates are
//   t(psi- -> psi+) = (eps_x + eps_y - eps_z) / (2 (1 - eps_z))
// and the same form in the primed rates for t(psi+ -> psi-); t_p is their mean.
struct ErrorEstimate {
    CategoryCount minus_z, minus_x, minus_y;  // psi- codes per measurement basis
    CategoryCount plus_z, plus_x, plus_y;     // psi+ codes
    CategoryCount z_test;                     // revealed accepted Z codes; wrong = bit flip

    std::uint64_t z_matched = 0;   // Z-label codes Bob measured in Z
    std::uint64_t z_accepted = 0;  // of those, outcomes inside the subspace

    double t_minus = 0.0, t_minus_se = 0.0;
    double t_plus = 0.0, t_plus_se = 0.0;
    double t_p = 0.0, t_p_se = 0.0;
    double r_b = 0.0, r_b_se = 0.0;
    double acceptance_fraction = 0.0;
    bool out_of_range = false;  // a computed t fell outside [0,1]; reported raw, not clamped

    double eps_z() const { return minus_z.rate(); }
    double eps_x() const { return minus_x.rate(); }
    double eps_y() const { return minus_y.rate(); }
    double epsp_z() const { return plus_z.rate(); }
    double epsp_x() const { return plus_x.rate(); }
    double epsp_y() const { return plus_y.rate(); }
};

struct PipelineTotals {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t basis_matched = 0;
    std::uint64_t accepted = 0;
};

// Key-basis bookkeeping for the report.
struct ZKeyStats {
    std::uint64_t matched = 0;
    std::uint64_t accepted = 0;
    std::uint64_t revealed = 0;
    std::uint64_t key_bits = 0;
};

struct RunReport {
    ExperimentConfig config;
    std::uint64_t seed = 0;
    PipelineTotals totals;
    ZKeyStats z;
    std::optional<ErrorEstimate> estimate;  // full estimator output (protocol2 only)
    double r_b = 0.0, r_b_se = 0.0;
    double t_p = 0.0, t_p_se = 0.0;  // protocol3 / bb84 report their X-side error rate here
    bool aborted = false;
    KeyRateReport key;
    std::vector<std::uint8_t> raw_key;                    // Alice's unrevealed accepted key bits
    std::optional<std::vector<std::uint8_t>> final_key;   // after block inversion + hashing
};

// Runner result: the report plus both parties' raw key strings, which the
// harness needs for classical post-processing.
struct RunOutcome {
    RunReport report;
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;
};

/// n preparation labels: Z basis with probability z_bias, bit uniform. n >= 1.
std::vector<CodeLabel> alice_prepare(std::uint64_t n, double z_bias, Rng& rng);

/// Basis drawn from the (normalized) weights, then measure_pair.
OutcomePair bob_choose_and_measure(const TwoQubitState& s, const BasisWeights& weights, Rng& rng);

/// Applies the acceptance rule and assigns bob_bit for accepted key codes.
SiftedRecord sift(std::uint64_t index, CodeLabel label, OutcomePair meas);

/// Wrong-outcome classification for phase-test (X-label) codes.
bool wrong_outcome(CodeLabel label, const OutcomePair& meas);

/// (eps_x + eps_y - eps_z) / (2 (1 - eps_z))
double flip_rate_from_epsilons(double eps_x, double eps_y, double eps_z);

/// Builds the full estimate from sifted records. Revealed X-label records feed
/// the epsilon categories; revealed accepted Z records feed r_b. Throws
/// insufficient_data_error when any needed category is empty.
ErrorEstimate estimate_errors(std::span<const SiftedRecord> records);

/// CNOT-encodes a BB84 qubit with a |0> ancilla into a two-qubit code:
/// |0> -> |01>, |1> -> |10>, |+> -> |psi+>, |-> -> |psi->.
TwoQubitState protocol1_encode(const SingleQubitState& bb84_state);

struct DecodeResult {
    bool accepted = false;
    std::optional<SingleQubitState> state;
};

/// Applies the same CNOT and measures the ancilla in Z; on |0> returns the
/// normalized post-measurement qubit-1 state, on |1> rejects.
DecodeResult protocol1_decode_accept(const TwoQubitState& s, Rng& rng);

/// Encode -> channel -> error-rejection/decode -> BB84 measurement pipeline.
RunOutcome run_protocol1(const ExperimentConfig& cfg);

/// Prepare -> transmit -> measure -> sift -> estimate pipeline over n codes.
RunOutcome run_protocol2(const ExperimentConfig& cfg);

/// Rotation-invariant encoding {|phi+>, |psi->} and superpositions; no
/// error-rejection step. The X-side decode error rate is reported as t_p.
RunOutcome run_protocol3(const ExperimentConfig& cfg);

/// Single-qubit BB84 over the same sampled rotations; Z-basis QBER in r_b.
RunOutcome run_bb84_baseline(const ExperimentConfig& cfg);

}  // namespace qkdsim
