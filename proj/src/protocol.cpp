#include "qkdsim/protocol.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "qkdsim/errors.hpp"

namespace qkdsim {

namespace {

LocalBasis draw_basis_zxy(const BasisWeights& w, Rng& rng) {
    const double total = w.z + w.x + w.y;
    const double u = rng.uniform() * total;
    if (u < w.z) return LocalBasis::Z;
    if (u < w.z + w.x) return LocalBasis::X;
    return LocalBasis::Y;
}

// Two-way basis choice for the protocols without a Y measurement.
LocalBasis draw_basis_zx(const BasisWeights& w, Rng& rng) {
    return rng.uniform() * (w.z + w.x) < w.z ? LocalBasis::Z : LocalBasis::X;
}

SingleQubitState bb84_state(CodeLabel label) {
    if (label.basis == PrepBasis::Z)
        return label.bit ? SingleQubitState::ket1() : SingleQubitState::ket0();
    return label.bit ? SingleQubitState::minus() : SingleQubitState::plus();
}

// Protocol 3 code states. |0bar> = |phi+>, |1bar> = |psi->,
// |+'> = (|0bar>+|1bar>)/sqrt2 = (|0>|+> - |1>|->)/sqrt2,
// |-'> = (|0bar>-|1bar>)/sqrt2 = (|0>|-> + |1>|+>)/sqrt2.
TwoQubitState protocol3_state(CodeLabel label) {
    if (label.basis == PrepBasis::Z)
        return label.bit ? TwoQubitState::psi_minus() : TwoQubitState::phi_plus();
    if (label.bit == 0)
        return TwoQubitState({Complex(0.5), Complex(0.5), Complex(-0.5), Complex(0.5)});
    return TwoQubitState({Complex(0.5), Complex(-0.5), Complex(0.5), Complex(0.5)});
}

// Channel hop for one code, honoring block-correlated rotation draws: with
// block_size > 1 the rotation stream is keyed by the block's first code index,
// so every code of the block sees the identical unitary.
TransmitResult transmit_code(const TwoQubitState& s, const ExperimentConfig& cfg,
                             std::uint64_t index) {
    Rng ch(derive_seed(cfg.seed, Lane::Channel, index));
    if (cfg.channel.block_size <= 1) return transmit(s, cfg.channel, ch);
    const std::uint64_t block_start = index - index % cfg.channel.block_size;
    Rng rot_rng(derive_seed(cfg.seed, Lane::Rotation, block_start));
    return transmit_with(s, sample_channel_rotation(cfg.channel, rot_rng), cfg.channel, ch);
}

// Delta-method standard error of flip_rate_from_epsilons at the observed rates.
double flip_rate_se(const CategoryCount& x, const CategoryCount& y, const CategoryCount& z) {
    const double ex = x.rate(), ey = y.rate(), ez = z.rate();
    const double dz = 1.0 - ez;
    if (dz <= 0.0) return 0.0;
    const double dx = 1.0 / (2.0 * dz);
    const double dzp = (ex + ey - 1.0) / (2.0 * dz * dz);
    const double var = dx * dx * x.se() * x.se() + dx * dx * y.se() * y.se() +
                       dzp * dzp * z.se() * z.se();
    return std::sqrt(var);
}

}  // namespace

std::vector<CodeLabel> alice_prepare(std::uint64_t n, double z_bias, Rng& rng) {
    if (n == 0) throw std::invalid_argument("alice_prepare: n must be >= 1");
    std::vector<CodeLabel> labels;
    labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        CodeLabel label;
        label.basis = rng.uniform() < z_bias ? PrepBasis::Z : PrepBasis::X;
        label.bit = rng.uniform() < 0.5 ? 0 : 1;
        labels.push_back(label);
    }
    return labels;
}

OutcomePair bob_choose_and_measure(const TwoQubitState& s, const BasisWeights& weights,
                                   Rng& rng) {
    const LocalBasis basis = draw_basis_zxy(weights, rng);
    return measure_pair(s, basis, rng.uniform());
}

SiftedRecord sift(std::uint64_t index, CodeLabel label, OutcomePair meas) {
    SiftedRecord rec;
    rec.index = index;
    rec.label = label;
    rec.meas = meas;
    if (label.basis == PrepBasis::Z) {
        if (meas.basis == LocalBasis::Z && meas.bit1 != meas.bit2) {
            rec.accepted = true;
            rec.bob_bit = meas.bit1;  // (0,1) -> 0, (1,0) -> 1
        }
    } else {
        rec.accepted = true;  // phase-test codes are kept in every basis
    }
    return rec;
}

bool wrong_outcome(CodeLabel label, const OutcomePair& meas) {
    if (label.basis != PrepBasis::X)
        throw std::invalid_argument("wrong_outcome: only phase-test codes have one");
    const bool equal = meas.bit1 == meas.bit2;
    if (label.bit == 1) return equal;  // psi-: anti-correlated in Z, X and Y
    // psi+: anti-correlated in Z, correlated in X and Y
    return meas.basis == LocalBasis::Z ? equal : !equal;
}

double flip_rate_from_epsilons(double eps_x, double eps_y, double eps_z) {
    return (eps_x + eps_y - eps_z) / (2.0 * (1.0 - eps_z));
}

ErrorEstimate estimate_errors(std::span<const SiftedRecord> records) {
    ErrorEstimate est;
    for (const SiftedRecord& rec : records) {
        if (rec.label.basis == PrepBasis::Z) {
            if (rec.meas.basis != LocalBasis::Z) continue;
            ++est.z_matched;
            if (!rec.accepted) continue;
            ++est.z_accepted;
            if (!rec.revealed) continue;
            ++est.z_test.n;
            est.z_test.wrong += *rec.bob_bit != rec.label.bit;
        } else {
            if (!rec.revealed) continue;
            const bool minus = rec.label.bit == 1;
            CategoryCount& cat = [&]() -> CategoryCount& {
                switch (rec.meas.basis) {
                    case LocalBasis::Z: return minus ? est.minus_z : est.plus_z;
                    case LocalBasis::X: return minus ? est.minus_x : est.plus_x;
                    case LocalBasis::Y: return minus ? est.minus_y : est.plus_y;
                }
                throw std::logic_error("estimate_errors: bad basis");
            }();
            ++cat.n;
            cat.wrong += wrong_outcome(rec.label, rec.meas);
        }
    }

    const auto require = [](const CategoryCount& c, const char* what) {
        if (c.n == 0)
            throw insufficient_data_error(std::string("estimate_errors: no samples for ") + what);
    };
    require(est.minus_z, "psi- codes measured in Z");
    require(est.minus_x, "psi- codes measured in X");
    require(est.minus_y, "psi- codes measured in Y");
    require(est.plus_z, "psi+ codes measured in Z");
    require(est.plus_x, "psi+ codes measured in X");
    require(est.plus_y, "psi+ codes measured in Y");
    require(est.z_test, "revealed accepted key-basis codes");
    if (est.z_matched == 0)
        throw insufficient_data_error("estimate_errors: no key-basis codes measured in Z");

    est.t_minus = flip_rate_from_epsilons(est.eps_x(), est.eps_y(), est.eps_z());
    est.t_plus = flip_rate_from_epsilons(est.epsp_x(), est.epsp_y(), est.epsp_z());
    est.t_minus_se = flip_rate_se(est.minus_x, est.minus_y, est.minus_z);
    est.t_plus_se = flip_rate_se(est.plus_x, est.plus_y, est.plus_z);
    est.t_p = (est.t_minus + est.t_plus) / 2.0;
    est.t_p_se = std::sqrt(est.t_minus_se * est.t_minus_se + est.t_plus_se * est.t_plus_se) / 2.0;
    est.r_b = est.z_test.rate();
    est.r_b_se = est.z_test.se();
    est.acceptance_fraction =
        static_cast<double>(est.z_accepted) / static_cast<double>(est.z_matched);
    est.out_of_range = !(est.t_minus >= 0.0 && est.t_minus <= 1.0) ||
                       !(est.t_plus >= 0.0 && est.t_plus <= 1.0);
    return est;
}

TwoQubitState protocol1_encode(const SingleQubitState& bb84_state) {
    // bb84_state ⊗ |0>, then the encoding CNOT, which swaps |00> and |01>
    // and fixes |10>, |11>.
    std::array<Complex, 4> a{};
    a[1] = bb84_state.amp[0];
    a[2] = bb84_state.amp[1];
    return TwoQubitState(a);
}

DecodeResult protocol1_decode_accept(const TwoQubitState& s, Rng& rng) {
    std::array<Complex, 4> a = s.amp();
    std::swap(a[0], a[1]);  // same CNOT; it is an involution
    const double p0 = std::norm(a[0]) + std::norm(a[2]);
    if (rng.uniform() < p0) {
        const double inv = 1.0 / std::sqrt(p0);
        return {true, SingleQubitState{{a[0] * inv, a[2] * inv}}};
    }
    return {false, std::nullopt};
}

RunOutcome run_protocol2(const ExperimentConfig& cfg) {
    Rng alice_rng(derive_seed(cfg.seed, Lane::Alice, 0));
    const std::vector<CodeLabel> labels = alice_prepare(cfg.n_codes, cfg.z_bias, alice_rng);

    std::vector<SiftedRecord> records;
    records.reserve(cfg.n_codes);
    RunOutcome out;
    RunReport& rep = out.report;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.totals.sent = cfg.n_codes;

    for (std::uint64_t i = 0; i < cfg.n_codes; ++i) {
        const CodeLabel label = labels[i];
        const TransmitResult tr = transmit_code(prepare_code(label), cfg, i);
        if (!tr.delivered()) continue;
        ++rep.totals.delivered;

        Rng bob(derive_seed(cfg.seed, Lane::Bob, i));
        SiftedRecord rec = sift(i, label, bob_choose_and_measure(*tr.state, cfg.basis_weights, bob));

        const bool z_label = label.basis == PrepBasis::Z;
        const bool matched = !z_label || rec.meas.basis == LocalBasis::Z;
        if (matched) ++rep.totals.basis_matched;
        if (rec.accepted) ++rep.totals.accepted;
        if (z_label && matched) ++rep.z.matched;

        Rng reveal(derive_seed(cfg.seed, Lane::Reveal, i));
        if (z_label && rec.accepted) {
            ++rep.z.accepted;
            rec.revealed = reveal.uniform() < cfg.z_test_fraction;
            if (rec.revealed) {
                ++rep.z.revealed;
            } else {
                out.alice_key.push_back(static_cast<std::uint8_t>(label.bit));
                out.bob_key.push_back(static_cast<std::uint8_t>(*rec.bob_bit));
            }
        } else if (!z_label) {
            rec.revealed = reveal.uniform() < cfg.x_test_fraction;
        }
        records.push_back(rec);
    }

    const ErrorEstimate est = estimate_errors(records);
    rep.estimate = est;
    rep.r_b = est.r_b;
    rep.r_b_se = est.r_b_se;
    rep.t_p = est.t_p;
    rep.t_p_se = est.t_p_se;
    rep.z.key_bits = out.alice_key.size();
    rep.raw_key = out.alice_key;
    return out;
}

RunOutcome run_protocol1(const ExperimentConfig& cfg) {
    Rng alice_rng(derive_seed(cfg.seed, Lane::Alice, 0));
    const std::vector<CodeLabel> labels = alice_prepare(cfg.n_codes, cfg.z_bias, alice_rng);

    RunOutcome out;
    RunReport& rep = out.report;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.totals.sent = cfg.n_codes;
    CategoryCount z_test, x_test;

    for (std::uint64_t i = 0; i < cfg.n_codes; ++i) {
        const CodeLabel label = labels[i];
        const TransmitResult tr = transmit_code(protocol1_encode(bb84_state(label)), cfg, i);
        if (!tr.delivered()) continue;
        ++rep.totals.delivered;

        Rng bob(derive_seed(cfg.seed, Lane::Bob, i));
        const DecodeResult dec = protocol1_decode_accept(*tr.state, bob);
        const LocalBasis basis = draw_basis_zx(cfg.basis_weights, bob);
        const bool z_label = label.basis == PrepBasis::Z;
        const bool matched = (basis == LocalBasis::Z) == z_label;
        if (!matched) continue;
        ++rep.totals.basis_matched;
        if (z_label) ++rep.z.matched;
        if (!dec.accepted) continue;
        ++rep.totals.accepted;

        const int bob_bit = measure_single(*dec.state, basis, bob.uniform());
        Rng reveal(derive_seed(cfg.seed, Lane::Reveal, i));
        if (z_label) {
            ++rep.z.accepted;
            if (reveal.uniform() < cfg.z_test_fraction) {
                ++rep.z.revealed;
                ++z_test.n;
                z_test.wrong += bob_bit != label.bit;
            } else {
                out.alice_key.push_back(static_cast<std::uint8_t>(label.bit));
                out.bob_key.push_back(static_cast<std::uint8_t>(bob_bit));
            }
        } else if (reveal.uniform() < cfg.x_test_fraction) {
            ++x_test.n;
            x_test.wrong += bob_bit != label.bit;
        }
    }

    if (z_test.n == 0)
        throw insufficient_data_error("run_protocol1: no revealed key-basis codes");
    if (x_test.n == 0)
        throw insufficient_data_error("run_protocol1: no revealed phase-test codes");
    rep.r_b = z_test.rate();
    rep.r_b_se = z_test.se();
    rep.t_p = x_test.rate();
    rep.t_p_se = x_test.se();
    rep.z.key_bits = out.alice_key.size();
    rep.raw_key = out.alice_key;
    return out;
}

RunOutcome run_protocol3(const ExperimentConfig& cfg) {
    Rng alice_rng(derive_seed(cfg.seed, Lane::Alice, 0));
    const std::vector<CodeLabel> labels = alice_prepare(cfg.n_codes, cfg.z_bias, alice_rng);

    RunOutcome out;
    RunReport& rep = out.report;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.totals.sent = cfg.n_codes;
    CategoryCount z_test, x_test;

    for (std::uint64_t i = 0; i < cfg.n_codes; ++i) {
        const CodeLabel label = labels[i];
        const TransmitResult tr = transmit_code(protocol3_state(label), cfg, i);
        if (!tr.delivered()) continue;
        ++rep.totals.delivered;

        Rng bob(derive_seed(cfg.seed, Lane::Bob, i));
        const LocalBasis mode = draw_basis_zx(cfg.basis_weights, bob);
        const bool z_label = label.basis == PrepBasis::Z;
        const bool matched = (mode == LocalBasis::Z) == z_label;
        if (!matched) continue;
        ++rep.totals.basis_matched;
        ++rep.totals.accepted;  // no error-rejection step
        if (z_label) {
            ++rep.z.matched;
            ++rep.z.accepted;
        }

        // "Z" decode: both qubits in Z, equal bits -> 0. "X" decode: qubit 1
        // in Z and qubit 2 in X, |0+>/|1-> -> 0. Both reduce to the XOR.
        const auto [b1, b2] =
            mode == LocalBasis::Z
                ? sample_product_outcome(*tr.state, LocalBasis::Z, LocalBasis::Z, bob.uniform())
                : sample_product_outcome(*tr.state, LocalBasis::Z, LocalBasis::X, bob.uniform());
        const int bob_bit = b1 ^ b2;

        Rng reveal(derive_seed(cfg.seed, Lane::Reveal, i));
        if (z_label) {
            if (reveal.uniform() < cfg.z_test_fraction) {
                ++rep.z.revealed;
                ++z_test.n;
                z_test.wrong += bob_bit != label.bit;
            } else {
                out.alice_key.push_back(static_cast<std::uint8_t>(label.bit));
                out.bob_key.push_back(static_cast<std::uint8_t>(bob_bit));
            }
        } else if (reveal.uniform() < cfg.x_test_fraction) {
            ++x_test.n;
            x_test.wrong += bob_bit != label.bit;
        }
    }

    if (z_test.n == 0)
        throw insufficient_data_error("run_protocol3: no revealed key-basis codes");
    if (x_test.n == 0)
        throw insufficient_data_error("run_protocol3: no revealed phase-test codes");
    rep.r_b = z_test.rate();
    rep.r_b_se = z_test.se();
    rep.t_p = x_test.rate();
    rep.t_p_se = x_test.se();
    rep.z.key_bits = out.alice_key.size();
    rep.raw_key = out.alice_key;
    return out;
}

RunOutcome run_bb84_baseline(const ExperimentConfig& cfg) {
    Rng alice_rng(derive_seed(cfg.seed, Lane::Alice, 0));
    const std::vector<CodeLabel> labels = alice_prepare(cfg.n_codes, cfg.z_bias, alice_rng);

    RunOutcome out;
    RunReport& rep = out.report;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.totals.sent = cfg.n_codes;
    CategoryCount z_test, x_test;

    for (std::uint64_t i = 0; i < cfg.n_codes; ++i) {
        const CodeLabel label = labels[i];
        Rng ch(derive_seed(cfg.seed, Lane::Channel, i));
        const RotationSample rot = sample_channel_rotation(cfg.channel, ch);
        if (ch.uniform() < cfg.channel.loss_prob) continue;  // single photon
        ++rep.totals.delivered;

        SingleQubitState q = apply(single_qubit_unitary(rot.theta, rot.phi, rot.delta),
                                   bb84_state(label));
        if (cfg.channel.eve == EveMode::InterceptResendZ) {
            const int b = measure_single(q, LocalBasis::Z, ch.uniform());
            q = b ? SingleQubitState::ket1() : SingleQubitState::ket0();
        }

        Rng bob(derive_seed(cfg.seed, Lane::Bob, i));
        const LocalBasis basis = draw_basis_zx(cfg.basis_weights, bob);
        const bool z_label = label.basis == PrepBasis::Z;
        if ((basis == LocalBasis::Z) != z_label) continue;
        ++rep.totals.basis_matched;
        ++rep.totals.accepted;  // plain BB84 has no rejection step
        if (z_label) {
            ++rep.z.matched;
            ++rep.z.accepted;
        }

        const int bob_bit = measure_single(q, basis, bob.uniform());
        Rng reveal(derive_seed(cfg.seed, Lane::Reveal, i));
        if (z_label) {
            if (reveal.uniform() < cfg.z_test_fraction) {
                ++rep.z.revealed;
                ++z_test.n;
                z_test.wrong += bob_bit != label.bit;
            } else {
                out.alice_key.push_back(static_cast<std::uint8_t>(label.bit));
                out.bob_key.push_back(static_cast<std::uint8_t>(bob_bit));
            }
        } else if (reveal.uniform() < cfg.x_test_fraction) {
            ++x_test.n;
            x_test.wrong += bob_bit != label.bit;
        }
    }

    if (z_test.n == 0)
        throw insufficient_data_error("run_bb84_baseline: no revealed key-basis codes");
    if (x_test.n == 0)
        throw insufficient_data_error("run_bb84_baseline: no revealed phase-test codes");
    rep.r_b = z_test.rate();
    rep.r_b_se = z_test.se();
    rep.t_p = x_test.rate();
    rep.t_p_se = x_test.se();
    rep.z.key_bits = out.alice_key.size();
    rep.raw_key = out.alice_key;
    return out;
}

}  // namespace qkdsim
