#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qkdsim/rng.hpp"

namespace qkdsim {

// Asymptotic key-rate summary. rate_per_accepted_bit = max(0, 1 - H(r_b) - H(t_p));
// rate_per_sent_code is filled by the harness from the run's pipeline fractions.
struct KeyRateReport {
    double r_b = 0.0;
    double t_p = 0.0;
    double rate_per_accepted_bit = 0.0;
    double rate_per_sent_code = 0.0;
    bool no_key = false;
};

// Raw-key bits treated as one channel-fluctuation block for inversion.
struct BlockSpec {
    std::uint64_t block_size = 1;
};

struct BlockInvertResult {
    std::vector<std::uint8_t> corrected;       // bob's bits after block flips
    std::vector<std::uint8_t> consumed;        // 1 = revealed for estimation, excluded from key
    std::vector<std::uint8_t> flipped_blocks;  // 1 = block estimate exceeded 1/2
};

/// -p log2 p - (1-p) log2(1-p), with H(0) = H(1) = 0. Rejects p outside [0,1].
double binary_entropy(double p);

/// Key rate per accepted bit at the given bit- and phase-flip rates.
KeyRateReport key_rate(double r_b, double t_p);

/// Per block, estimates the error rate from a revealed sample and flips every
/// bit of blocks whose estimate exceeds 1/2. Blocks with no revealed positions
/// are left untouched.
BlockInvertResult block_invert(std::span<const std::uint8_t> alice_bits,
                               std::span<const std::uint8_t> bob_bits, BlockSpec spec,
                               double reveal_fraction, Rng& rng);

/// Seed-derived binary Toeplitz hash over GF(2). Deterministic given
/// (bits, out_len, hash_seed); linear in the input.
std::vector<std::uint8_t> privacy_amplify(std::span<const std::uint8_t> bits,
                                          std::size_t out_len, std::uint64_t hash_seed);

}  // namespace qkdsim
