#pragma once

#include <cstdint>
#include <optional>

#include "qkdsim/qmath.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim {

// Distribution descriptor for one rotation parameter, in radians.
struct Dist {
    enum class Kind { Fixed, Uniform, Gaussian };

    Kind kind = Kind::Fixed;
    double a = 0.0;  // Fixed: value; Uniform: lo; Gaussian: mean
    double b = 0.0;  // Uniform: hi; Gaussian: sigma

    static Dist fixed(double value) { return {Kind::Fixed, value, 0.0}; }
    static Dist uniform_range(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static Dist gaussian(double mean, double sigma) { return {Kind::Gaussian, mean, sigma}; }

    double sample(Rng& rng) const;

    // Throws std::invalid_argument naming `field` on bad parameters.
    void validate(const char* field) const;

    bool operator==(const Dist&) const = default;
};

struct RotationSpec {
    Dist theta;
    Dist phi;
    Dist delta;

    bool operator==(const RotationSpec&) const = default;
};

// Stand-in adversary: measures both qubits in Z mid-channel and forwards the
// collapsed product state.
enum class EveMode { None, InterceptResendZ };

struct ChannelConfig {
    RotationSpec rotation;
    double loss_prob = 0.0;          // per photon; a code is lost if either photon is lost
    bool real_rotation_only = false; // forces phi = delta = 0 (dispersion-free channel)
    EveMode eve = EveMode::None;
    std::uint64_t block_size = 1;    // consecutive codes sharing one rotation draw

    bool operator==(const ChannelConfig&) const = default;
};

struct RotationSample {
    double theta = 0.0;
    double phi = 0.0;
    double delta = 0.0;
};

// Outcome of sending one code. `rotation` always carries the sampled channel
// parameters, delivered or not, so tests can verify that both qubits saw the
// identical unitary.
struct TransmitResult {
    std::optional<TwoQubitState> state;
    RotationSample rotation;

    bool delivered() const { return state.has_value(); }
};

/// One independent draw of (theta, phi, delta).
RotationSample sample_rotation(const RotationSpec& spec, Rng& rng);

/// sample_rotation with the config's real_rotation_only policy applied.
RotationSample sample_channel_rotation(const ChannelConfig& cfg, Rng& rng);

/// Samples a rotation, then runs transmit_with.
TransmitResult transmit(const TwoQubitState& s, const ChannelConfig& cfg, Rng& rng);

/// Sends one code through the channel under a given rotation: per-photon loss
/// first (two draws, state-independent), then U⊗U, then Eve if configured.
TransmitResult transmit_with(const TwoQubitState& s, const RotationSample& rot,
                             const ChannelConfig& cfg, Rng& rng);

/// Measures both qubits in Z and re-prepares the observed product state.
TwoQubitState intercept_resend_z(const TwoQubitState& s, Rng& rng);

}  // namespace qkdsim
