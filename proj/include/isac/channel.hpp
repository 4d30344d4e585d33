#pragma once

#include <complex>
#include <cstdint>

#include "isac/numerology.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// One-way LOS path loss, 28.0 + 22 log10(d) + 20 log10(f_c), d in meters,
/// f_c in GHz.
double pathloss_db(double distance_m, double carrier_freq_ghz);

/// Reference point that pins the received-SINR-vs-distance curve.
struct SinrAnchor {
    double distance_m = 500.0;
    double sinr_db = 2.0;
};

/// Received echo SINR at a distance, anchored at (anchor.distance_m,
/// anchor.sinr_db). The radar round trip applies the one-way path-loss
/// delta twice.
double anchored_sinr_db(double distance_m, double carrier_freq_ghz, const SinrAnchor& anchor);

/// Single point-target echo: delay, Doppler, complex gain, noise power.
/// Fields are public so tests can construct exact cases directly; use
/// make_target_scenario for validated physical construction.
struct TargetScenario {
    double distance_m = 0.0;
    double speed_mps = 0.0;
    double delay_s = 0.0;              // tau = 2 d / c0
    double doppler_hz = 0.0;           // f_d = 2 v f_c / c0
    int sample_offset = 0;             // N_s = round(tau / T_s)
    std::complex<double> gain{1.0, 0.0};  // alpha~ = |alpha| e^{-j 2 pi f_c tau}
    double noise_power = 0.0;          // sigma^2, per complex sample
    bool exceeds_cp = false;           // tau > T_CP (beyond the interference-free zone)

    double received_sinr_linear() const;
    double received_sinr_db() const;
};

/// Build a scenario from distance/speed/received SINR. |alpha| is fixed to 1
/// and the noise power set so that |gain|^2 / sigma^2 hits gamma0_db; pass
/// +infinity for a noise-free channel. Throws if tau >= T (out of the
/// supported regime) or if the subcarrier spacing is not at least 10x the
/// Doppler shift.
TargetScenario make_target_scenario(const NumerologyConfig& cfg, double distance_m,
                                    double speed_mps, double gamma0_db);

/// Apply the echo channel: rx[i] = gain * tx[i - N_s] * e^{j 2 pi f_d i T_s}
/// + w[i], with tx zero outside its support and w circularly-symmetric
/// complex Gaussian of total variance sigma^2. The output window spans one
/// extra symbol duration past the transmit frame so that compensation
/// samples for the last symbol exist. Deterministic per seed.
TimeFrame apply_target_channel(const TimeFrame& tx, const TargetScenario& sc,
                               const NumerologyConfig& cfg, std::uint64_t noise_seed);

}  // namespace isac
