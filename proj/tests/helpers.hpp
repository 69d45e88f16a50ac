#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "qkdsim/qmath.hpp"
#include "qkdsim/rng.hpp"

namespace test_helpers {

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool complex_close(qkdsim::Complex a, qkdsim::Complex b, double tol) {
    return std::abs(a - b) <= tol;
}

// |k/n - p| within 4 binomial standard deviations.
inline bool within_4sigma(double p, std::uint64_t k, std::uint64_t n) {
    const double phat = static_cast<double>(k) / static_cast<double>(n);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return std::abs(phat - p) <= 4.0 * sigma;
}

inline qkdsim::Unitary2 random_unitary(qkdsim::Rng& rng) {
    const double two_pi = 2.0 * std::numbers::pi;
    return qkdsim::single_qubit_unitary(rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi),
                                        rng.uniform(0.0, two_pi));
}

inline qkdsim::TwoQubitState random_state(qkdsim::Rng& rng) {
    std::array<qkdsim::Complex, 4> amp;
    for (auto& a : amp) a = qkdsim::Complex(rng.gaussian(0.0, 1.0), rng.gaussian(0.0, 1.0));
    return qkdsim::TwoQubitState::normalized(amp);
}

}  // namespace test_helpers
