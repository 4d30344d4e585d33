#include "isac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isac/fft.hpp"

namespace isac {

ComplexMatrix segment(const TimeFrame& rx, const NumerologyConfig& cfg) {
    cfg.validate();
    const int nc = cfg.n_subcarriers;
    const int ncp = cfg.cp_samples();
    const int sym = cfg.symbol_samples();
    const long needed = static_cast<long>(cfg.n_symbols) * sym;
    if (static_cast<long>(rx.samples.size()) < needed)
        throw std::runtime_error("receive window too short to segment the frame");

    ComplexMatrix out(cfg.n_symbols, nc);
    for (int n = 0; n < cfg.n_symbols; ++n) {
        const auto* src = rx.samples.data() + static_cast<size_t>(n) * sym + ncp;
        std::copy(src, src + nc, out.row(n).begin());
    }
    return out;
}

ComplexMatrix compensate(const ComplexMatrix& seg, const TimeFrame& rx,
                         const CompensationPlan& plan, const NumerologyConfig& cfg) {
    cfg.validate();
    plan.validate();
    if (seg.rows != cfg.n_symbols || seg.cols != cfg.n_subcarriers)
        throw std::invalid_argument("segment matrix dimensions do not match numerology");

    const int nc = cfg.n_subcarriers;
    const int ncp = cfg.cp_samples();
    const int sym = cfg.symbol_samples();
    const long needed = static_cast<long>(cfg.n_symbols - 1) * sym + ncp + nc + plan.n_comp;
    if (static_cast<long>(rx.samples.size()) < needed)
        throw std::runtime_error("compensation samples unavailable: receive window too short");

    ComplexMatrix out = seg;
    for (int n = 0; n < cfg.n_symbols; ++n) {
        const auto* tail = rx.samples.data() + static_cast<size_t>(n) * sym + ncp + nc;
        auto row = out.row(n);
        // When N' exceeds N_c (delays beyond the elementary duration) the
        // extra samples wrap: sample N_c + i is the periodic extension of
        // position i mod N_c, so the combination stays coherent.
        for (int i = 0; i < plan.n_comp; ++i) row[i % nc] += tail[i];
    }
    return out;
}

ComplexMatrix demod_divide(const ComplexMatrix& seg, const ModGrid& grid,
                           const NumerologyConfig& cfg) {
    cfg.validate();
    if (seg.rows != cfg.n_symbols || seg.cols != cfg.n_subcarriers)
        throw std::invalid_argument("segment matrix dimensions do not match numerology");
    if (grid.n_symbols() != seg.rows || grid.n_subcarriers() != seg.cols)
        throw std::invalid_argument("payload grid dimensions do not match segment matrix");

    const int nc = cfg.n_subcarriers;
    const double scale = 1.0 / std::sqrt(static_cast<double>(nc));
    ComplexMatrix out(seg.rows, seg.cols);
    std::vector<std::complex<double>> buf(static_cast<size_t>(nc));
    for (int n = 0; n < seg.rows; ++n) {
        auto row = seg.row(n);
        std::copy(row.begin(), row.end(), buf.begin());
        fft::forward(buf);
        auto dst = out.row(n);
        auto ref = grid.symbols.row(n);
        for (int p = 0; p < nc; ++p) dst[p] = buf[p] * scale / ref[p];
    }
    return out;
}

RangeDopplerMap make_rdm(const ComplexMatrix& chan, const NumerologyConfig& cfg) {
    cfg.validate();
    if (chan.rows != cfg.n_symbols || chan.cols != cfg.n_subcarriers)
        throw std::invalid_argument("channel matrix dimensions do not match numerology");

    const int nc = cfg.n_subcarriers;
    const int m = cfg.n_symbols;

    // Range: inverse DFT across subcarriers (the delay shows up as a phase
    // ramp e^{-j 2 pi p N_s / N_c}, so the inverse transform peaks at +N_s).
    ComplexMatrix tmp(m, nc);
    std::vector<std::complex<double>> buf(static_cast<size_t>(nc));
    for (int n = 0; n < m; ++n) {
        auto row = chan.row(n);
        std::copy(row.begin(), row.end(), buf.begin());
        fft::inverse(buf);
        std::copy(buf.begin(), buf.end(), tmp.row(n).begin());
    }

    RangeDopplerMap rdm;
    rdm.n_range = nc;
    rdm.n_doppler = m;
    rdm.power.resize(static_cast<size_t>(nc) * m);
    rdm.range_bin_m = kSpeedOfLight / (2.0 * cfg.bandwidth_hz());
    rdm.velocity_bin_mps =
        kSpeedOfLight /
        (2.0 * cfg.carrier_freq_hz * m * cfg.symbol_samples() * cfg.sample_interval_s());

    // Doppler: forward DFT across symbols for every range bin.
    std::vector<std::complex<double>> dop(static_cast<size_t>(m));
    for (int k = 0; k < nc; ++k) {
        for (int n = 0; n < m; ++n) dop[static_cast<size_t>(n)] = tmp(n, k);
        fft::forward(dop);
        for (int l = 0; l < m; ++l)
            rdm.power[static_cast<size_t>(k) * m + l] = std::norm(dop[static_cast<size_t>(l)]);
    }
    return rdm;
}

PeakEstimate find_peak(const RangeDopplerMap& rdm) {
    if (rdm.power.empty()) throw std::invalid_argument("empty range-Doppler map");
    int best_k = 0, best_l = 0;
    double best = -1.0;
    for (int k = 0; k < rdm.n_range; ++k) {
        for (int l = 0; l < rdm.n_doppler; ++l) {
            const double p = rdm.at(k, l);
            if (p > best) {
                best = p;
                best_k = k;
                best_l = l;
            }
        }
    }
    PeakEstimate peak;
    peak.range_index = best_k;
    // Doppler wraps: bins above half the axis are negative velocities.
    peak.doppler_index = best_l <= rdm.n_doppler / 2 ? best_l : best_l - rdm.n_doppler;
    peak.range_m = best_k * rdm.range_bin_m;
    peak.speed_mps = peak.doppler_index * rdm.velocity_bin_mps;
    peak.peak_power = best;
    return peak;
}

double rdm_sinr_db(const RangeDopplerMap& rdm, const PeakEstimate& peak, int guard) {
    if (rdm.power.empty()) throw std::invalid_argument("empty range-Doppler map");
    const int peak_l =
        peak.doppler_index >= 0 ? peak.doppler_index : peak.doppler_index + rdm.n_doppler;
    auto circ_dist = [](int a, int b, int n) {
        const int d = std::abs(a - b);
        return std::min(d, n - d);
    };
    double acc = 0.0;
    long count = 0;
    for (int k = 0; k < rdm.n_range; ++k) {
        const bool k_in = circ_dist(k, peak.range_index, rdm.n_range) <= guard;
        for (int l = 0; l < rdm.n_doppler; ++l) {
            if (k_in && circ_dist(l, peak_l, rdm.n_doppler) <= guard) continue;
            acc += rdm.at(k, l);
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("degenerate map: every cell inside the guard block");
    return 10.0 * std::log10(peak.peak_power / (acc / static_cast<double>(count)));
}

SensingResult sense_with_plan(const TimeFrame& rx, const ModGrid& grid,
                              const NumerologyConfig& cfg, const CompensationPlan* plan) {
    ComplexMatrix seg = segment(rx, cfg);
    if (plan != nullptr) seg = compensate(seg, rx, *plan, cfg);
    const ComplexMatrix chan = demod_divide(seg, grid, cfg);
    SensingResult res;
    res.rdm = make_rdm(chan, cfg);
    res.peak = find_peak(res.rdm);
    res.peak.rdm_sinr_db = rdm_sinr_db(res.rdm, res.peak);
    return res;
}

TwoPassResult estimate_offset_then_compensate(const TimeFrame& rx, const ModGrid& grid,
                                              const NumerologyConfig& cfg, double gamma0_db) {
    const SensingResult pass1 = sense_with_plan(rx, grid, cfg, nullptr);
    TwoPassResult out;
    out.estimated_offset = pass1.peak.range_index;
    out.plan.sample_offset = out.estimated_offset;
    out.plan.n_comp = optimal_n_comp(cfg.n_subcarriers, cfg.cp_samples(), out.estimated_offset,
                                     db_to_linear(gamma0_db));
    out.result = sense_with_plan(rx, grid, cfg, &out.plan);
    return out;
}

RangeDopplerMap vcp_process(const TimeFrame& rx, const TimeFrame& tx,
                            const NumerologyConfig& cfg, const VcpConfig& vcp) {
    cfg.validate();
    if (vcp.block_symbols < 1 || vcp.overlap_symbols < 0 ||
        vcp.overlap_symbols >= vcp.block_symbols)
        throw std::invalid_argument("vcp: overlap must be non-negative and below the block size");
    if (vcp.vcp_samples < 0) throw std::invalid_argument("vcp: negative vcp length");
    if (cfg.n_symbols < vcp.block_symbols)
        throw std::invalid_argument("vcp: frame shorter than one sub-block");

    const int sym = cfg.symbol_samples();
    const int stride_symbols = vcp.block_symbols - vcp.overlap_symbols;
    const long block_len = static_cast<long>(vcp.block_symbols) * sym;
    const long stride = static_cast<long>(stride_symbols) * sym;
    const int n_blocks = 1 + static_cast<int>((cfg.n_symbols - vcp.block_symbols) / stride_symbols);

    const long tx_needed = static_cast<long>(n_blocks - 1) * stride + block_len;
    if (static_cast<long>(tx.samples.size()) < tx_needed)
        throw std::runtime_error("vcp: transmit frame too short for the sub-block geometry");
    if (static_cast<long>(rx.samples.size()) < tx_needed + vcp.vcp_samples)
        throw std::runtime_error("vcp: receive window too short for the sub-block geometry");

    // Per block: cyclic-shift construction on the echo, block DFTs, guarded
    // point-wise division. The guard drops transmit-spectrum bins whose
    // magnitude falls below 1e-3 of the RMS bin magnitude; division there
    // would only amplify noise.
    ComplexMatrix chan(n_blocks, static_cast<int>(block_len));
    long guarded = 0;
    std::vector<std::complex<double>> yb(static_cast<size_t>(block_len));
    std::vector<std::complex<double>> xb(static_cast<size_t>(block_len));
    for (int b = 0; b < n_blocks; ++b) {
        const long off = b * stride;
        for (long i = 0; i < block_len; ++i) {
            yb[static_cast<size_t>(i)] = rx.samples[static_cast<size_t>(off + i)];
            xb[static_cast<size_t>(i)] = tx.samples[static_cast<size_t>(off + i)];
        }
        for (int i = 0; i < vcp.vcp_samples; ++i)
            yb[static_cast<size_t>(i)] += rx.samples[static_cast<size_t>(off + block_len + i)];
        fft::forward(yb);
        fft::forward(xb);

        double rms_sq = 0.0;
        for (const auto& v : xb) rms_sq += std::norm(v);
        rms_sq /= static_cast<double>(block_len);
        const double floor_sq = 1e-6 * rms_sq;  // (1e-3 RMS)^2

        auto dst = chan.row(b);
        for (long q = 0; q < block_len; ++q) {
            if (std::norm(xb[static_cast<size_t>(q)]) < floor_sq) {
                dst[q] = {0.0, 0.0};
                ++guarded;
            } else {
                dst[q] = yb[static_cast<size_t>(q)] / xb[static_cast<size_t>(q)];
            }
        }
    }

    RangeDopplerMap rdm;
    rdm.n_range = static_cast<int>(block_len);
    rdm.n_doppler = n_blocks;
    rdm.power.resize(static_cast<size_t>(block_len) * n_blocks);
    rdm.range_bin_m = kSpeedOfLight / (2.0 * cfg.bandwidth_hz());
    rdm.velocity_bin_mps =
        kSpeedOfLight /
        (2.0 * cfg.carrier_freq_hz * n_blocks * stride * cfg.sample_interval_s());
    rdm.vcp_guarded_bins = guarded;

    // Range profile per block, then one Doppler sample per block stride.
    std::vector<std::complex<double>> prof(static_cast<size_t>(block_len));
    ComplexMatrix delay(n_blocks, static_cast<int>(block_len));
    for (int b = 0; b < n_blocks; ++b) {
        auto row = chan.row(b);
        std::copy(row.begin(), row.end(), prof.begin());
        fft::inverse(prof);
        std::copy(prof.begin(), prof.end(), delay.row(b).begin());
    }
    std::vector<std::complex<double>> dop(static_cast<size_t>(n_blocks));
    for (long k = 0; k < block_len; ++k) {
        for (int b = 0; b < n_blocks; ++b) dop[static_cast<size_t>(b)] = delay(b, static_cast<int>(k));
        fft::forward(dop);
        for (int l = 0; l < n_blocks; ++l)
            rdm.power[static_cast<size_t>(k) * n_blocks + l] =
                std::norm(dop[static_cast<size_t>(l)]);
    }
    return rdm;
}

}  // namespace isac
