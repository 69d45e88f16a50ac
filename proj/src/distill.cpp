#include "qkdsim/distill.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qkdsim {

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("binary_entropy: p must be in [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

KeyRateReport key_rate(double r_b, double t_p) {
    if (!(r_b >= 0.0 && r_b <= 1.0))
        throw std::invalid_argument("key_rate: r_b must be in [0,1]");
    if (!(t_p >= 0.0 && t_p <= 1.0))
        throw std::invalid_argument("key_rate: t_p must be in [0,1]");
    const double rate = 1.0 - binary_entropy(r_b) - binary_entropy(t_p);
    KeyRateReport out;
    out.r_b = r_b;
    out.t_p = t_p;
    out.rate_per_accepted_bit = std::max(0.0, rate);
    out.no_key = !(rate > 0.0);
    return out;
}

BlockInvertResult block_invert(std::span<const std::uint8_t> alice_bits,
                               std::span<const std::uint8_t> bob_bits, BlockSpec spec,
                               double reveal_fraction, Rng& rng) {
    const std::size_t n = alice_bits.size();
    if (bob_bits.size() != n)
        throw std::invalid_argument("block_invert: sequences must have equal length");
    if (spec.block_size == 0) throw std::invalid_argument("block_invert: block_size must be >= 1");
    if (spec.block_size > n)
        throw std::invalid_argument("block_invert: block_size exceeds sequence length");
    if (!(reveal_fraction > 0.0 && reveal_fraction <= 1.0))
        throw std::invalid_argument("block_invert: reveal_fraction must be in (0,1]");

    BlockInvertResult out;
    out.corrected.assign(bob_bits.begin(), bob_bits.end());
    out.consumed.assign(n, 0);
    out.flipped_blocks.assign((n + spec.block_size - 1) / spec.block_size, 0);

    for (std::size_t block = 0; block * spec.block_size < n; ++block) {
        const std::size_t lo = block * spec.block_size;
        const std::size_t hi = std::min(n, lo + spec.block_size);
        std::uint64_t revealed = 0;
        std::uint64_t wrong = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            if (rng.uniform() < reveal_fraction) {
                out.consumed[i] = 1;
                ++revealed;
                wrong += alice_bits[i] != bob_bits[i];
            }
        }
        if (revealed == 0) continue;
        if (2 * wrong > revealed) {  // estimated error rate > 1/2
            out.flipped_blocks[block] = 1;
            for (std::size_t i = lo; i < hi; ++i) out.corrected[i] ^= 1;
        }
    }
    return out;
}

std::vector<std::uint8_t> privacy_amplify(std::span<const std::uint8_t> bits,
                                          std::size_t out_len, std::uint64_t hash_seed) {
    const std::size_t in_len = bits.size();
    if (out_len > in_len)
        throw std::invalid_argument("privacy_amplify: out_len exceeds input length");
    if (out_len == 0) return {};

    // Toeplitz matrix T[i][j] = d[i - j + in_len - 1] from out_len + in_len - 1
    // seed-derived bits. With g = reverse(d), row i is the contiguous window
    // g[out_len - 1 - i ..], so each output bit is a word-packed AND/parity.
    const std::size_t d_len = out_len + in_len - 1;
    Rng rng(hash_seed);
    std::vector<std::uint64_t> d_words((d_len + 63) / 64);
    for (auto& w : d_words) w = rng.next();

    std::vector<std::uint64_t> g(d_words.size() + 1, 0);  // one zero sentinel word
    for (std::size_t t = 0; t < d_len; ++t) {
        const std::size_t u = d_len - 1 - t;
        if ((d_words[t >> 6] >> (t & 63)) & 1) g[u >> 6] |= std::uint64_t(1) << (u & 63);
    }

    std::vector<std::uint64_t> x((in_len + 63) / 64, 0);
    for (std::size_t j = 0; j < in_len; ++j)
        if (bits[j]) x[j >> 6] |= std::uint64_t(1) << (j & 63);

    std::vector<std::uint8_t> out(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::size_t off = out_len - 1 - i;
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < x.size(); ++w) {
            const std::size_t pos = off + 64 * w;
            const std::size_t q = pos >> 6;
            const unsigned r = static_cast<unsigned>(pos & 63);
            std::uint64_t window = g[q] >> r;
            if (r != 0) window |= g[q + 1] << (64 - r);
            acc ^= window & x[w];
        }
        out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
}

}  // namespace qkdsim
