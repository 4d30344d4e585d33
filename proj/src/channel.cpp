#include "isac/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

double pathloss_db(double distance_m, double carrier_freq_ghz) {
    if (!(distance_m > 0) || !(carrier_freq_ghz > 0))
        throw std::invalid_argument("pathloss_db requires positive distance and frequency");
    return 28.0 + 22.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_freq_ghz);
}

double anchored_sinr_db(double distance_m, double carrier_freq_ghz, const SinrAnchor& anchor) {
    const double delta = pathloss_db(anchor.distance_m, carrier_freq_ghz) -
                         pathloss_db(distance_m, carrier_freq_ghz);
    return anchor.sinr_db + 2.0 * delta;
}

double TargetScenario::received_sinr_linear() const {
    const double p = std::norm(gain);
    if (noise_power == 0.0) return std::numeric_limits<double>::infinity();
    return p / noise_power;
}

double TargetScenario::received_sinr_db() const {
    return 10.0 * std::log10(received_sinr_linear());
}

TargetScenario make_target_scenario(const NumerologyConfig& cfg, double distance_m,
                                    double speed_mps, double gamma0_db) {
    cfg.validate();
    if (!(distance_m > 0)) throw std::invalid_argument("target distance must be positive");

    TargetScenario sc;
    sc.distance_m = distance_m;
    sc.speed_mps = speed_mps;
    sc.delay_s = 2.0 * distance_m / kSpeedOfLight;
    sc.doppler_hz = 2.0 * speed_mps * cfg.carrier_freq_hz / kSpeedOfLight;

    if (sc.delay_s >= cfg.symbol_duration_s())
        throw std::invalid_argument("echo delay exceeds one OFDM symbol duration (unsupported)");
    if (cfg.subcarrier_spacing_hz <= 10.0 * std::abs(sc.doppler_hz))
        throw std::invalid_argument(
            "subcarrier spacing must exceed 10x the Doppler shift for orthogonality");

    sc.sample_offset = static_cast<int>(std::llround(sc.delay_s / cfg.sample_interval_s()));
    sc.exceeds_cp = sc.delay_s > cfg.cp_duration_s;

    // |alpha| = 1; the carrier phase rotation of the echo.
    const double phase = -2.0 * M_PI * cfg.carrier_freq_hz * sc.delay_s;
    sc.gain = std::polar(1.0, std::remainder(phase, 2.0 * M_PI));
    sc.noise_power = std::isinf(gamma0_db) && gamma0_db > 0
                         ? 0.0
                         : std::pow(10.0, -gamma0_db / 10.0) * std::norm(sc.gain);
    return sc;
}

TimeFrame apply_target_channel(const TimeFrame& tx, const TargetScenario& sc,
                               const NumerologyConfig& cfg, std::uint64_t noise_seed) {
    cfg.validate();
    if (tx.samples.size() != static_cast<size_t>(cfg.frame_samples()))
        throw std::invalid_argument("transmit frame length does not match numerology");
    if (sc.sample_offset < 0)
        throw std::invalid_argument("negative sample offset is not supported");

    const long n_out = cfg.receive_window_samples();
    const double ts = cfg.sample_interval_s();
    const long n_tx = static_cast<long>(tx.samples.size());

    TimeFrame rx;
    rx.samples.assign(static_cast<size_t>(n_out), {0.0, 0.0});
    rx.sample_interval_s = ts;
    rx.origin = tx.origin;

    // Doppler phase runs on the global sample index: continuous across
    // symbol boundaries, never reset per symbol.
    const double phase_step = 2.0 * M_PI * sc.doppler_hz * ts;
    if (sc.gain != std::complex<double>(0.0, 0.0)) {
        const long lo = sc.sample_offset;
        const long hi = std::min(n_out, n_tx + sc.sample_offset);
        for (long i = lo; i < hi; ++i) {
            const std::complex<double> rot = std::polar(1.0, phase_step * static_cast<double>(i));
            rx.samples[static_cast<size_t>(i)] =
                sc.gain * tx.samples[static_cast<size_t>(i - sc.sample_offset)] * rot;
        }
    }
    if (sc.noise_power > 0.0) {
        GaussianGen noise(noise_seed);
        for (auto& v : rx.samples) v += noise.complex_normal(sc.noise_power);
    }
    return rx;
}

}  // namespace isac
