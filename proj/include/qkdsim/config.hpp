#pragma once

#include <cstdint>
#include <string>

#include "qkdsim/channel.hpp"

namespace qkdsim {

enum class Protocol { Protocol1, Protocol2, Protocol3, Bb84 };

// Relative probabilities of Bob's measurement bases. Protocols with a
// two-way choice (protocol1, protocol3, bb84) use z and x renormalized.
struct BasisWeights {
    double z = 1.0;
    double x = 1.0;
    double y = 1.0;

    bool operator==(const BasisWeights&) const = default;
};

enum class ReportFormat { Structured, Csv };

struct OutputSpec {
    std::string path;  // empty = no file output
    ReportFormat format = ReportFormat::Structured;

    bool operator==(const OutputSpec&) const = default;
};

// Classical post-processing applied to the raw key when `apply` is set:
// block-wise inversion followed by Toeplitz privacy amplification at the
// asymptotic rate.
struct DistillSpec {
    bool apply = false;
    std::uint64_t block_size = 1024;
    double reveal_fraction = 0.5;

    bool operator==(const DistillSpec&) const = default;
};

struct ExperimentConfig {
    Protocol protocol = Protocol::Protocol2;
    std::uint64_t n_codes = 0;
    std::uint64_t seed = 0;
    double z_bias = 0.5;  // probability that Alice prepares in the key (Z) basis
    BasisWeights basis_weights;
    ChannelConfig channel;
    double z_test_fraction = 0.1;  // accepted key-basis codes revealed for the error test
    double x_test_fraction = 0.5;  // phase-test codes revealed for the error test
    DistillSpec distill;
    double abort_if_tp_above = 0.11;
    OutputSpec output;

    bool operator==(const ExperimentConfig&) const = default;
};

}  // namespace qkdsim
