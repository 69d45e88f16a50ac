#include "qkdsim/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdsim {

double Dist::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Fixed:
            return a;
        case Kind::Uniform:
            return rng.uniform(a, b);
        case Kind::Gaussian:
            return rng.gaussian(a, b);
    }
    throw std::logic_error("Dist::sample: bad kind");
}

void Dist::validate(const char* field) const {
    const std::string name(field);
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument(name + ": distribution parameters must be finite");
    if (kind == Kind::Uniform && a > b)
        throw std::invalid_argument(name + ": uniform range needs lo <= hi");
    if (kind == Kind::Gaussian && b < 0.0)
        throw std::invalid_argument(name + ": gaussian sigma must be >= 0");
}

RotationSample sample_rotation(const RotationSpec& spec, Rng& rng) {
    // Fixed draw order (theta, phi, delta) keeps streams reproducible.
    RotationSample out;
    out.theta = spec.theta.sample(rng);
    out.phi = spec.phi.sample(rng);
    out.delta = spec.delta.sample(rng);
    return out;
}

RotationSample sample_channel_rotation(const ChannelConfig& cfg, Rng& rng) {
    RotationSample rot = sample_rotation(cfg.rotation, rng);
    if (cfg.real_rotation_only) {
        rot.phi = 0.0;
        rot.delta = 0.0;
    }
    return rot;
}

TransmitResult transmit(const TwoQubitState& s, const ChannelConfig& cfg, Rng& rng) {
    return transmit_with(s, sample_channel_rotation(cfg, rng), cfg, rng);
}

TransmitResult transmit_with(const TwoQubitState& s, const RotationSample& rot,
                             const ChannelConfig& cfg, Rng& rng) {
    // Loss draws happen unconditionally and before any state work, so the
    // decision cannot depend on the state content.
    const bool lost1 = rng.uniform() < cfg.loss_prob;
    const bool lost2 = rng.uniform() < cfg.loss_prob;
    if (lost1 || lost2) return {std::nullopt, rot};

    TwoQubitState out =
        collective_apply(single_qubit_unitary(rot.theta, rot.phi, rot.delta), s);
    if (cfg.eve == EveMode::InterceptResendZ) out = intercept_resend_z(out, rng);
    return {out, rot};
}

TwoQubitState intercept_resend_z(const TwoQubitState& s, Rng& rng) {
    const OutcomePair o = measure_pair(s, LocalBasis::Z, rng.uniform());
    return TwoQubitState::basis_state(o.bit1, o.bit2);
}

}  // namespace qkdsim
