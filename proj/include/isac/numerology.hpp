#pragma once

#include <cmath>
#include <stdexcept>

namespace isac {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// OFDM waveform constants. All derived quantities are computed from
/// (n_subcarriers, subcarrier_spacing_hz, cp_duration_s) so they cannot
/// drift out of sync with each other.
struct NumerologyConfig {
    int n_subcarriers = 4096;          // N_c, must be a power of two
    double subcarrier_spacing_hz = 120e3;
    int n_symbols = 160;               // M, symbols per frame
    double carrier_freq_hz = 28e9;
    double cp_duration_s = 0.59e-6;

    double bandwidth_hz() const { return n_subcarriers * subcarrier_spacing_hz; }
    double sample_interval_s() const { return 1.0 / bandwidth_hz(); }
    double elementary_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
    double symbol_duration_s() const { return cp_duration_s + elementary_duration_s(); }

    /// CP length in samples, round-to-nearest of T_CP / T_s.
    int cp_samples() const {
        return static_cast<int>(std::llround(cp_duration_s / sample_interval_s()));
    }
    /// Samples per full OFDM symbol (CP + elementary interval).
    int symbol_samples() const { return n_subcarriers + cp_samples(); }
    /// Samples in a transmit frame of n_symbols OFDM symbols.
    long frame_samples() const {
        return static_cast<long>(n_symbols) * symbol_samples();
    }
    /// Samples in the sensing receive window: one extra symbol duration so
    /// that the samples following the last elementary interval exist.
    long receive_window_samples() const {
        return static_cast<long>(n_symbols + 1) * symbol_samples();
    }

    void validate() const {
        if (n_subcarriers < 2 || (n_subcarriers & (n_subcarriers - 1)) != 0)
            throw std::invalid_argument("n_subcarriers must be a power of two >= 2");
        if (!(subcarrier_spacing_hz > 0))
            throw std::invalid_argument("subcarrier_spacing_hz must be positive");
        if (n_symbols < 1)
            throw std::invalid_argument("n_symbols must be >= 1");
        if (!(carrier_freq_hz > 0))
            throw std::invalid_argument("carrier_freq_hz must be positive");
        if (!(cp_duration_s > 0))
            throw std::invalid_argument("cp_duration_s must be positive");
        if (cp_samples() >= n_subcarriers)
            throw std::invalid_argument("cp_samples must be smaller than n_subcarriers");
    }

    /// 3GPP FR2 numerology (120 kHz SCS, 4096 subcarriers, 28 GHz).
    static NumerologyConfig fr2_120khz() {
        return NumerologyConfig{4096, 120e3, 160, 28e9, 0.59e-6};
    }
    /// Reduced copy of the FR2 numerology for fast test runs. Same spacing
    /// and durations, so physical thresholds (d0, ISI-free range) match.
    static NumerologyConfig fr2_120khz_small() {
        return NumerologyConfig{512, 120e3, 32, 28e9, 0.59e-6};
    }
};

}  // namespace isac
