#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "isac/matrix.hpp"
#include "isac/numerology.hpp"

namespace isac {

/// Frequency-domain payload: n_symbols x n_subcarriers matrix of
/// unit-average-power constellation points.
struct ModGrid {
    ComplexMatrix symbols;

    int n_symbols() const { return symbols.rows; }
    int n_subcarriers() const { return symbols.cols; }
    double mean_power() const;
};

/// Complex baseband sample sequence. `origin` is the index of the sample at
/// t = 0; a transmit frame starts with the CP of symbol 0, so origin equals
/// the CP length in samples.
struct TimeFrame {
    std::vector<std::complex<double>> samples;
    double sample_interval_s = 0.0;
    int origin = 0;
};

/// Square-QAM constellation for a given order (4, 16 or 64), Gray-coded with
/// the 3GPP bit-to-axis convention, scaled to unit average power. Index is
/// the bit word read MSB-first.
const std::vector<std::complex<double>>& constellation_table(int order);

/// Average of 1/|s|^2 over the constellation, i.e. the noise enhancement
/// factor of point-wise division by a random data symbol.
double constellation_inverse_power(int order);

/// Map a bit sequence (one bit per byte, values 0/1) onto constellation
/// points. Bit count must be divisible by log2(order).
std::vector<std::complex<double>> qam_map(std::span<const std::uint8_t> bits, int order);

/// Uniformly random payload grid, deterministic for a given seed.
ModGrid generate_payload(const NumerologyConfig& cfg, std::uint64_t seed, int order = 16);

/// OFDM-modulate a payload grid: per symbol, inverse DFT scaled by
/// 1/sqrt(N_c), prefixed with its last N_cp samples as cyclic prefix.
TimeFrame ofdm_modulate(const ModGrid& grid, const NumerologyConfig& cfg);

}  // namespace isac
