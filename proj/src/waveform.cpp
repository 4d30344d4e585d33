#include "isac/waveform.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "isac/fft.hpp"

namespace isac {
namespace {

int bits_per_point(int order) {
    switch (order) {
        case 4: return 2;
        case 16: return 4;
        case 64: return 6;
        default: throw std::invalid_argument("unsupported constellation order (use 4, 16 or 64)");
    }
}

// TS 38.211-style Gray mapping. Bits alternate between the I and Q axes;
// per-axis amplitudes come out of the nested (1-2b) expressions below.
std::complex<double> map_word(unsigned w, int order) {
    auto bit = [w](int pos, int nbits) { return static_cast<int>((w >> (nbits - 1 - pos)) & 1u); };
    switch (order) {
        case 4: {
            const double re = 1 - 2 * bit(0, 2);
            const double im = 1 - 2 * bit(1, 2);
            return std::complex<double>(re, im) / std::sqrt(2.0);
        }
        case 16: {
            const double re = (1 - 2 * bit(0, 4)) * (2 - (1 - 2 * bit(2, 4)));
            const double im = (1 - 2 * bit(1, 4)) * (2 - (1 - 2 * bit(3, 4)));
            return std::complex<double>(re, im) / std::sqrt(10.0);
        }
        case 64: {
            const double re =
                (1 - 2 * bit(0, 6)) * (4 - (1 - 2 * bit(2, 6)) * (2 - (1 - 2 * bit(4, 6))));
            const double im =
                (1 - 2 * bit(1, 6)) * (4 - (1 - 2 * bit(3, 6)) * (2 - (1 - 2 * bit(5, 6))));
            return std::complex<double>(re, im) / std::sqrt(42.0);
        }
        default: throw std::invalid_argument("unsupported constellation order");
    }
}

}  // namespace

const std::vector<std::complex<double>>& constellation_table(int order) {
    static const std::vector<std::complex<double>> qpsk = [] {
        std::vector<std::complex<double>> t(4);
        for (unsigned w = 0; w < 4; ++w) t[w] = map_word(w, 4);
        return t;
    }();
    static const std::vector<std::complex<double>> qam16 = [] {
        std::vector<std::complex<double>> t(16);
        for (unsigned w = 0; w < 16; ++w) t[w] = map_word(w, 16);
        return t;
    }();
    static const std::vector<std::complex<double>> qam64 = [] {
        std::vector<std::complex<double>> t(64);
        for (unsigned w = 0; w < 64; ++w) t[w] = map_word(w, 64);
        return t;
    }();
    switch (order) {
        case 4: return qpsk;
        case 16: return qam16;
        case 64: return qam64;
        default: throw std::invalid_argument("unsupported constellation order (use 4, 16 or 64)");
    }
}

double constellation_inverse_power(int order) {
    const auto& table = constellation_table(order);
    double acc = 0.0;
    for (const auto& s : table) acc += 1.0 / std::norm(s);
    return acc / static_cast<double>(table.size());
}

std::vector<std::complex<double>> qam_map(std::span<const std::uint8_t> bits, int order) {
    const int nbits = bits_per_point(order);
    if (bits.size() % nbits != 0)
        throw std::invalid_argument("bit count not divisible by bits per constellation point");
    const auto& table = constellation_table(order);
    std::vector<std::complex<double>> out;
    out.reserve(bits.size() / nbits);
    for (size_t i = 0; i < bits.size(); i += nbits) {
        unsigned w = 0;
        for (int b = 0; b < nbits; ++b) w = (w << 1) | (bits[i + b] & 1u);
        out.push_back(table[w]);
    }
    return out;
}

double ModGrid::mean_power() const {
    double acc = 0.0;
    for (const auto& s : symbols.data) acc += std::norm(s);
    return acc / static_cast<double>(symbols.data.size());
}

ModGrid generate_payload(const NumerologyConfig& cfg, std::uint64_t seed, int order) {
    cfg.validate();
    const auto& table = constellation_table(order);
    const unsigned mask = static_cast<unsigned>(order - 1);  // order is a power of two
    std::mt19937_64 rng(seed);
    ModGrid grid;
    grid.symbols = ComplexMatrix(cfg.n_symbols, cfg.n_subcarriers);
    for (auto& s : grid.symbols.data) s = table[static_cast<unsigned>(rng()) & mask];
    return grid;
}

TimeFrame ofdm_modulate(const ModGrid& grid, const NumerologyConfig& cfg) {
    cfg.validate();
    if (grid.n_symbols() != cfg.n_symbols || grid.n_subcarriers() != cfg.n_subcarriers)
        throw std::invalid_argument("payload grid dimensions do not match numerology");

    const int nc = cfg.n_subcarriers;
    const int ncp = cfg.cp_samples();
    const int sym = cfg.symbol_samples();
    const double scale = 1.0 / std::sqrt(static_cast<double>(nc));

    TimeFrame frame;
    frame.samples.resize(static_cast<size_t>(cfg.frame_samples()));
    frame.sample_interval_s = cfg.sample_interval_s();
    frame.origin = ncp;

    std::vector<std::complex<double>> body(static_cast<size_t>(nc));
    for (int m = 0; m < cfg.n_symbols; ++m) {
        auto row = grid.symbols.row(m);
        std::copy(row.begin(), row.end(), body.begin());
        fft::inverse(body);
        for (auto& v : body) v *= scale;
        auto* out = frame.samples.data() + static_cast<size_t>(m) * sym;
        for (int j = 0; j < ncp; ++j) out[j] = body[nc - ncp + j];
        for (int i = 0; i < nc; ++i) out[ncp + i] = body[i];
    }
    return frame;
}

}  // namespace isac
