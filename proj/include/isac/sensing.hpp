#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "isac/analytic.hpp"
#include "isac/channel.hpp"
#include "isac/matrix.hpp"
#include "isac/numerology.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// Power map over (delay bin, Doppler bin) plus the metadata needed to turn
/// peak indices into physical range and velocity. Produced by the standard
/// pipeline (n_range = N_c, n_doppler = M) and by the VCP baseline (its own
/// dimensions).
struct RangeDopplerMap {
    int n_range = 0;
    int n_doppler = 0;
    std::vector<double> power;     // row-major, power[k * n_doppler + l]
    double range_bin_m = 0.0;      // c0 / (2 B)
    double velocity_bin_mps = 0.0; // velocity step per Doppler bin
    long vcp_guarded_bins = 0;     // VCP only: spectrum bins excluded from division

    double at(int k, int l) const { return power[static_cast<size_t>(k) * n_doppler + l]; }
};

struct PeakEstimate {
    int range_index = 0;            // k_hat in [0, n_range)
    int doppler_index = 0;          // signed, wraparound-interpreted
    double range_m = 0.0;
    double speed_mps = 0.0;
    double peak_power = 0.0;
    double rdm_sinr_db = std::numeric_limits<double>::quiet_NaN();  // set by pipeline helpers
};

/// Receiver-side segmentation: row n holds the CP-skipped elementary
/// interval of symbol n, aligned to the transmitter clock.
ComplexMatrix segment(const TimeFrame& rx, const NumerologyConfig& cfg);

/// Coherent compensation: add the first plan.n_comp samples after each
/// elementary interval (read from the raw receive frame) onto the front of
/// the corresponding segment row. n_comp = 0 is the identity.
ComplexMatrix compensate(const ComplexMatrix& seg, const TimeFrame& rx,
                         const CompensationPlan& plan, const NumerologyConfig& cfg);

/// Row-wise forward DFT (scaled to invert the modulation), point-wise
/// divided by the known transmit grid.
ComplexMatrix demod_divide(const ComplexMatrix& seg, const ModGrid& grid,
                           const NumerologyConfig& cfg);

/// 2D transform of the channel-information matrix: inverse DFT across
/// subcarriers (range), forward DFT across symbols (Doppler), power output.
RangeDopplerMap make_rdm(const ComplexMatrix& chan, const NumerologyConfig& cfg);

/// Argmax over power cells; ties broken by smallest range index, then
/// smallest Doppler index. Doppler indices above half the axis wrap to
/// negative velocities.
PeakEstimate find_peak(const RangeDopplerMap& rdm);

/// Peak power over mean background power, in dB. The background excludes a
/// (2 guard + 1)^2 block centered on the peak (circular in both axes).
double rdm_sinr_db(const RangeDopplerMap& rdm, const PeakEstimate& peak, int guard = 2);

struct SensingResult {
    PeakEstimate peak;
    RangeDopplerMap rdm;
};

/// Full pipeline with a known compensation plan (pass nullptr for the plain
/// 2D-FFT baseline, i.e. no compensation).
SensingResult sense_with_plan(const TimeFrame& rx, const ModGrid& grid,
                              const NumerologyConfig& cfg, const CompensationPlan* plan);

struct TwoPassResult {
    SensingResult result;
    int estimated_offset = 0;  // N_s taken from the pass-1 range peak
    CompensationPlan plan;
};

/// Two-pass mode: run the uncompensated pipeline, take the range peak index
/// as the sample-offset estimate, build the optimal plan for it and rerun.
/// gamma0_db is the (known) received SINR used by the optimal-length rule.
TwoPassResult estimate_offset_then_compensate(const TimeFrame& rx, const ModGrid& grid,
                                              const NumerologyConfig& cfg, double gamma0_db);

/// Virtual-cyclic-prefix baseline geometry: overlapping sub-blocks of whole
/// OFDM symbols; trailing vcp_samples of each echo sub-block are added onto
/// its front before the block-level DFT and point-wise division.
struct VcpConfig {
    int block_symbols = 12;
    int overlap_symbols = 4;
    int vcp_samples = 0;  // usually the echo sample offset
};

RangeDopplerMap vcp_process(const TimeFrame& rx, const TimeFrame& tx,
                            const NumerologyConfig& cfg, const VcpConfig& vcp);

}  // namespace isac
