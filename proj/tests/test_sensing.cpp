#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "isac/sensing.hpp"
#include "test_util.hpp"

using namespace isac;
using std::complex;

namespace {

TargetScenario direct_scenario(int sample_offset, complex<double> gain, double noise_power = 0.0,
                               double doppler_hz = 0.0) {
    TargetScenario sc;
    sc.sample_offset = sample_offset;
    sc.gain = gain;
    sc.noise_power = noise_power;
    sc.doppler_hz = doppler_hz;
    return sc;
}

// Direct transcription of the compensated frequency-domain symbol for an
// integer-sample echo with no Doppler: useful carrier term, the
// previous-symbol window sum, and the two-window current-symbol sum.
complex<double> freq_symbol_oracle(const ModGrid& grid, int n, int p, int nc, int ncp, int ns,
                                   int nq, complex<double> gain) {
    auto sym = [&](int m, int k) -> complex<double> {
        if (m < 0 || m >= grid.n_symbols()) return {0.0, 0.0};
        return grid.symbols(m, k);
    };
    auto w = [](double turns) { return std::polar(1.0, 2.0 * M_PI * turns); };

    const double coeff =
        1.0 - static_cast<double>(ns - ncp) / nc + static_cast<double>(nq) / nc;
    complex<double> y = coeff * gain * sym(n, p) * w(-static_cast<double>(p) * ns / nc);

    for (int k = 0; k < nc; ++k) {
        complex<double> win{0.0, 0.0};
        for (int i = 0; i < ns - ncp; ++i)
            win += w(static_cast<double>((k - p) * i) / nc);
        y += gain * sym(n - 1, k) * w(static_cast<double>(k) * (ncp - ns) / nc) * win /
             static_cast<double>(nc);
    }
    for (int k = 0; k < nc; ++k) {
        if (k == p) continue;
        complex<double> win{0.0, 0.0};
        for (int i = 0; i < nq; ++i) win += w(static_cast<double>((k - p) * i) / nc);
        for (int i = ns - ncp; i < nc; ++i) win += w(static_cast<double>((k - p) * i) / nc);
        y += gain * sym(n, k) * w(-static_cast<double>(k) * ns / nc) * win /
             static_cast<double>(nc);
    }
    return y;
}

}  // namespace

TEST_CASE("segment inverts the synchronized no-channel case") {
    const auto cfg = testutil::micro_cfg(4);
    const ModGrid grid = generate_payload(cfg, 21);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(0, {1.0, 0.0}), cfg, 0);
    const ComplexMatrix seg = segment(rx, cfg);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.n_subcarriers));
    for (int n = 0; n < cfg.n_symbols; ++n) {
        const auto spec = testutil::naive_dft(seg.row(n), -1);
        for (int k = 0; k < cfg.n_subcarriers; ++k)
            CHECK(std::abs(spec[k] * scale - grid.symbols(n, k)) < 1e-10);
    }
}

TEST_CASE("segment rows mix adjacent symbols when the delay exceeds the CP") {
    // Symbol 0 body is all ones, symbol 1 body all twos; after a delay of
    // N_s samples, row 1 starts with the tail of symbol 0.
    auto cfg = testutil::micro_cfg(2);
    const int nc = cfg.n_subcarriers, ncp = cfg.cp_samples();
    ModGrid grid;
    grid.symbols = ComplexMatrix(2, nc);
    grid.symbols(0, 0) = std::sqrt(static_cast<double>(nc));
    grid.symbols(1, 0) = 2.0 * std::sqrt(static_cast<double>(nc));
    const TimeFrame tx = ofdm_modulate(grid, cfg);

    const int ns = 40;
    REQUIRE(ns > ncp);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, {1.0, 0.0}), cfg, 0);
    const ComplexMatrix seg = segment(rx, cfg);
    int ones = 0, twos = 0;
    for (int i = 0; i < nc; ++i) {
        if (std::abs(seg(1, i) - complex<double>(1.0, 0.0)) < 1e-9) ++ones;
        if (std::abs(seg(1, i) - complex<double>(2.0, 0.0)) < 1e-9) ++twos;
    }
    CHECK(ones == ns - ncp);
    CHECK(twos == nc - (ns - ncp));

    // Definitional contract: row n is the CP-skipped slice of the raw frame.
    for (int n = 0; n < 2; ++n)
        for (int i = 0; i < nc; ++i)
            CHECK(seg(n, i) == rx.samples[n * cfg.symbol_samples() + ncp + i]);
}

TEST_CASE("segment rejects a window that is too short") {
    const auto cfg = testutil::micro_cfg(4);
    TimeFrame rx;
    rx.samples.resize(static_cast<size_t>(cfg.frame_samples()) - 1);
    CHECK_THROWS_AS(segment(rx, cfg), std::runtime_error);
}

TEST_CASE("compensate: zero length is the identity, bounds are enforced") {
    const auto cfg = testutil::micro_cfg(4);
    const ModGrid grid = generate_payload(cfg, 31);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(20, {0.5, 0.5}), cfg, 0);
    const ComplexMatrix seg = segment(rx, cfg);

    const ComplexMatrix same = compensate(seg, rx, CompensationPlan{0, 20}, cfg);
    CHECK(same.data == seg.data);

    CHECK_THROWS_AS(compensate(seg, rx, CompensationPlan{21, 20}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(compensate(seg, rx, CompensationPlan{-1, 20}, cfg), std::invalid_argument);

    // A bare transmit-length frame has no tail samples to compensate with.
    TimeFrame short_rx = rx;
    short_rx.samples.resize(static_cast<size_t>(cfg.frame_samples()));
    const ComplexMatrix seg2 = segment(short_rx, cfg);
    CHECK_THROWS_AS(compensate(seg2, short_rx, CompensationPlan{5, 20}, cfg), std::runtime_error);
}

TEST_CASE("compensate doubles the noise variance over the compensated prefix") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 32;
    cfg.cp_duration_s = 0.59e-6;  // 18 samples
    const ModGrid grid = generate_payload(cfg, 1);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(0, {0.0, 0.0}, 1.0), cfg, 5);

    const int nq = 60;
    const ComplexMatrix seg = segment(rx, cfg);
    const ComplexMatrix comp = compensate(seg, rx, CompensationPlan{nq, 100}, cfg);

    double head = 0.0, tail = 0.0;
    for (int n = 0; n < cfg.n_symbols; ++n) {
        for (int i = 0; i < nq; ++i) head += std::norm(comp(n, i));
        for (int i = nq; i < cfg.n_subcarriers; ++i) tail += std::norm(comp(n, i));
    }
    head /= static_cast<double>(cfg.n_symbols) * nq;
    tail /= static_cast<double>(cfg.n_symbols) * (cfg.n_subcarriers - nq);
    CHECK(head == doctest::Approx(2.0).epsilon(0.10));
    CHECK(tail == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("demod_divide: clean synchronized frame gives an all-ones matrix") {
    const auto cfg = testutil::micro_cfg(3);
    const ModGrid grid = generate_payload(cfg, 41);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(0, {1.0, 0.0}), cfg, 0);
    const ComplexMatrix chan = demod_divide(segment(rx, cfg), grid, cfg);
    for (const auto& v : chan.data) CHECK(std::abs(v - complex<double>(1.0, 0.0)) < 1e-10);
}

TEST_CASE("pipeline equals the direct transcription of the frequency-domain model") {
    // The central correctness check: noise-free, no Doppler, random offsets
    // and compensation lengths, every (n, p) entry compared against the
    // triple-sum expression.
    std::mt19937_64 rng(77);
    const auto cfg = testutil::micro_cfg(4);
    const int nc = cfg.n_subcarriers, ncp = cfg.cp_samples();

    for (int trial = 0; trial < 7; ++trial) {
        int ns = ncp + static_cast<int>(rng() % nc);
        int nq = static_cast<int>(rng() % (ns + 1));
        if (trial == 0) nq = 0;            // uncompensated model
        if (trial == 1) nq = ns - ncp;     // full-period compensation
        if (trial == 2) {                  // offset beyond N_c: compensation wraps
            ns = nc + ncp - 1;
            nq = ns;
        }
        const complex<double> gain = std::polar(0.8, 2.0 * M_PI * 1e-3 * (rng() % 1000));

        const ModGrid grid = generate_payload(cfg, 1000 + trial);
        const TimeFrame tx = ofdm_modulate(grid, cfg);
        const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
        const ComplexMatrix seg = segment(rx, cfg);
        const CompensationPlan plan{nq, ns};
        const ComplexMatrix comp = compensate(seg, rx, plan, cfg);
        const ComplexMatrix chan = demod_divide(comp, grid, cfg);

        double err2 = 0.0, ref2 = 0.0;
        for (int n = 0; n < cfg.n_symbols; ++n) {
            for (int p = 0; p < nc; ++p) {
                const complex<double> pipeline = chan(n, p) * grid.symbols(n, p);
                const complex<double> oracle =
                    freq_symbol_oracle(grid, n, p, nc, ncp, ns, nq, gain);
                err2 += std::norm(pipeline - oracle);
                ref2 += std::norm(oracle);
            }
        }
        CHECK(std::sqrt(err2 / ref2) < 1e-8);
    }
}

TEST_CASE("full-period compensation removes inter-carrier leakage entirely") {
    const auto cfg = testutil::micro_cfg(2);
    const int nc = cfg.n_subcarriers, ncp = cfg.cp_samples();
    const int ns = 40, tone = 5;

    ModGrid grid;
    grid.symbols = ComplexMatrix(2, nc);
    grid.symbols(1, tone) = {1.0, 0.0};  // single tone in symbol 1: no ISI into it
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx =
        apply_target_channel(tx, direct_scenario(ns, std::polar(1.0, 0.4)), cfg, 0);
    const ComplexMatrix seg = segment(rx, cfg);
    const CompensationPlan plan{ns - ncp, ns};
    const ComplexMatrix comp = compensate(seg, rx, plan, cfg);

    const auto spec = testutil::naive_dft(comp.row(1), -1);
    double leak = 0.0;
    for (int p = 0; p < nc; ++p)
        if (p != tone) leak = std::max(leak, std::norm(spec[p]));
    CHECK(leak < 1e-16 * std::norm(spec[tone]));
}

TEST_CASE("full-period compensation restores a uniform-magnitude channel") {
    // Single-symbol frame: no previous symbol, so only the carrier term
    // survives and every entry has magnitude |gain|.
    const auto cfg = testutil::micro_cfg(1);
    const int ns = 30;
    const complex<double> gain = std::polar(0.7, -1.1);
    const ModGrid grid = generate_payload(cfg, 8);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
    const CompensationPlan plan{ns - cfg.cp_samples(), ns};
    const ComplexMatrix chan =
        demod_divide(compensate(segment(rx, cfg), rx, plan, cfg), grid, cfg);
    for (const auto& v : chan.data) CHECK(std::abs(v) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("measured power decomposition reproduces the closed forms") {
    const auto cfg = testutil::micro_cfg(4);
    const int nc = cfg.n_subcarriers, ncp = cfg.cp_samples();
    const int ns = 40;
    const complex<double> gain = std::polar(0.9, 0.3);
    const int probe = 2;  // interior symbol

    for (int nq : {0, 20}) {
        const CompensationPlan plan{nq, ns};
        const double scale = 1.0 / std::sqrt(static_cast<double>(nc));

        // The carrier coefficient is deterministic: a single tone through the
        // noise-free pipeline measures it exactly.
        ModGrid tone;
        tone.symbols = ComplexMatrix(cfg.n_symbols, nc);
        tone.symbols(probe, 0) = {1.0, 0.0};
        {
            const TimeFrame tx = ofdm_modulate(tone, cfg);
            const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
            const ComplexMatrix comp = compensate(segment(rx, cfg), rx, plan, cfg);
            const auto spec = testutil::naive_dft(comp.row(probe), -1);
            const double p_u = std::norm(spec[0] * scale);
            const double expected =
                std::norm(gain) * std::pow(1.0 - double(ns - ncp) / nc + double(nq) / nc, 2);
            CHECK(testutil::approx_rel(p_u, expected, 1e-10));
        }

        // ISI and ICI are payload averages; 1e4 Monte Carlo trials.
        std::mt19937_64 seeds(12345);
        double isi_acc = 0.0, ici_acc = 0.0;
        const int trials = 10000;
        const complex<double> carrier_coeff = [&] {
            const TimeFrame tx = ofdm_modulate(tone, cfg);
            const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
            const ComplexMatrix comp = compensate(segment(rx, cfg), rx, plan, cfg);
            return testutil::naive_dft(comp.row(probe), -1)[0] * scale;
        }();
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t seed = seeds();

            // Previous symbol only: everything landing in the probe row is ISI.
            ModGrid prev = generate_payload(cfg, seed);
            for (int m = 0; m < cfg.n_symbols; ++m)
                if (m != probe - 1)
                    for (int k = 0; k < nc; ++k) prev.symbols(m, k) = {0.0, 0.0};
            {
                const TimeFrame tx = ofdm_modulate(prev, cfg);
                const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
                const ComplexMatrix comp = compensate(segment(rx, cfg), rx, plan, cfg);
                const auto spec = testutil::naive_dft(comp.row(probe), -1);
                double acc = 0.0;
                for (int p = 0; p < nc; ++p) acc += std::norm(spec[p] * scale);
                isi_acc += acc / nc;
            }

            // Probe row fully populated: subtracting the known carrier part
            // leaves pure ICI on every subcarrier.
            ModGrid cur = generate_payload(cfg, seed ^ 0xABCDEF);
            for (int m = 0; m < cfg.n_symbols; ++m)
                if (m != probe)
                    for (int k = 0; k < nc; ++k) cur.symbols(m, k) = {0.0, 0.0};
            {
                const TimeFrame tx = ofdm_modulate(cur, cfg);
                const TimeFrame rx = apply_target_channel(tx, direct_scenario(ns, gain), cfg, 0);
                const ComplexMatrix comp = compensate(segment(rx, cfg), rx, plan, cfg);
                const auto spec = testutil::naive_dft(comp.row(probe), -1);
                double acc = 0.0;
                for (int p = 0; p < nc; ++p) {
                    const complex<double> useful =
                        carrier_coeff * cur.symbols(probe, p) *
                        std::polar(1.0, -2.0 * M_PI * p * ns / static_cast<double>(nc));
                    acc += std::norm(spec[p] * scale - useful);
                }
                ici_acc += acc / nc;
            }
        }
        const double g2 = std::norm(gain);
        const double isi_expected = g2 * (ns - ncp) / nc;
        const int delta = std::abs(ns - ncp - nq);
        const double ici_expected = g2 * delta * (nc - delta) / (static_cast<double>(nc) * nc);
        CHECK(isi_acc / trials == doctest::Approx(isi_expected).epsilon(0.01));
        CHECK(ici_acc / trials == doctest::Approx(ici_expected).epsilon(0.01));
    }
}

TEST_CASE("compensated noise power after the DFT matches (N_c + N') / N_c") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 32;
    const int nq = 70;
    const ModGrid grid = generate_payload(cfg, 2);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.n_subcarriers));

    double acc = 0.0;
    long count = 0;
    for (int t = 0; t < 40; ++t) {
        const TimeFrame rx =
            apply_target_channel(tx, direct_scenario(0, {0.0, 0.0}, 1.0), cfg, 100 + t);
        const ComplexMatrix comp =
            compensate(segment(rx, cfg), rx, CompensationPlan{nq, 100}, cfg);
        for (int n = 0; n < cfg.n_symbols; ++n) {
            std::vector<complex<double>> row(comp.row(n).begin(), comp.row(n).end());
            const auto spec = testutil::naive_dft(row, -1);
            for (const auto& v : spec) acc += std::norm(v * scale);
            count += cfg.n_subcarriers;
        }
    }
    const double expected = (cfg.n_subcarriers + nq) / static_cast<double>(cfg.n_subcarriers);
    CHECK(acc / count == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("make_rdm: all-ones channel matrix peaks at the origin") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 32;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 8;
    ComplexMatrix chan(8, 32);
    for (auto& v : chan.data) v = {1.0, 0.0};
    const RangeDopplerMap rdm = make_rdm(chan, cfg);
    CHECK(rdm.n_range == 32);
    CHECK(rdm.n_doppler == 8);
    const PeakEstimate peak = find_peak(rdm);
    CHECK(peak.range_index == 0);
    CHECK(peak.doppler_index == 0);
    CHECK(peak.peak_power == doctest::Approx(32.0 * 32.0 * 8.0 * 8.0).epsilon(1e-9));
}

TEST_CASE("make_rdm matches a direct 2D transform") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 32;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 8;
    std::mt19937_64 rng(5);
    ComplexMatrix chan(8, 32);
    for (auto& v : chan.data)
        v = {static_cast<double>(rng() % 1000) / 500.0 - 1.0,
             static_cast<double>(rng() % 1000) / 500.0 - 1.0};
    const RangeDopplerMap rdm = make_rdm(chan, cfg);
    for (int k = 0; k < 32; ++k) {
        for (int l = 0; l < 8; ++l) {
            complex<double> acc{0.0, 0.0};
            for (int n = 0; n < 8; ++n)
                for (int p = 0; p < 32; ++p)
                    acc += chan(n, p) *
                           std::polar(1.0, 2.0 * M_PI * (static_cast<double>(p) * k / 32.0 -
                                                         static_cast<double>(n) * l / 8.0));
            CHECK(testutil::approx_rel(rdm.at(k, l), std::norm(acc), 1e-9));
        }
    }
}

TEST_CASE("noise-free target lands on the predicted range and Doppler bins") {
    const auto cfg = testutil::micro_cfg(8);
    const int ns = 30;
    const double bin_hz =
        1.0 / (cfg.n_symbols * cfg.symbol_samples() * cfg.sample_interval_s());

    for (int target_bin : {3, -2}) {
        const double fd = target_bin * bin_hz;
        const ModGrid grid = generate_payload(cfg, 9);
        const TimeFrame tx = ofdm_modulate(grid, cfg);
        const TimeFrame rx =
            apply_target_channel(tx, direct_scenario(ns, {1.0, 0.0}, 0.0, fd), cfg, 0);
        const SensingResult res = sense_with_plan(rx, grid, cfg, nullptr);
        CHECK(res.peak.range_index == ns);
        CHECK(res.peak.doppler_index == target_bin);
        CHECK(res.peak.range_m ==
              doctest::Approx(ns * kSpeedOfLight / (2.0 * cfg.bandwidth_hz())).epsilon(1e-12));
        const double expected_v =
            kSpeedOfLight * target_bin /
            (2.0 * cfg.carrier_freq_hz * cfg.n_symbols * cfg.symbol_samples() *
             cfg.sample_interval_s());
        CHECK(res.peak.speed_mps == doctest::Approx(expected_v).epsilon(1e-12));
    }
}

TEST_CASE("find_peak breaks ties toward the smallest indices") {
    RangeDopplerMap rdm;
    rdm.n_range = 6;
    rdm.n_doppler = 5;
    rdm.power.assign(30, 1.0);
    rdm.range_bin_m = 1.0;
    rdm.velocity_bin_mps = 1.0;
    const PeakEstimate peak = find_peak(rdm);
    CHECK(peak.range_index == 0);
    CHECK(peak.doppler_index == 0);
}

TEST_CASE("rdm_sinr_db on a constructed map") {
    RangeDopplerMap rdm;
    rdm.n_range = 16;
    rdm.n_doppler = 16;
    rdm.power.assign(256, 2.0);
    rdm.range_bin_m = 1.0;
    rdm.velocity_bin_mps = 1.0;
    rdm.power[3 * 16 + 4] = 100.0;
    const PeakEstimate peak = find_peak(rdm);
    CHECK(peak.range_index == 3);
    CHECK(rdm_sinr_db(rdm, peak) == doctest::Approx(10.0 * std::log10(100.0 / 2.0)).epsilon(1e-9));

    RangeDopplerMap tiny;
    tiny.n_range = 4;
    tiny.n_doppler = 4;
    tiny.power.assign(16, 1.0);
    CHECK_THROWS_AS(rdm_sinr_db(tiny, find_peak(tiny)), std::runtime_error);
}

TEST_CASE("noise-free target keeps the metric finite") {
    const auto cfg = testutil::micro_cfg(4);
    const ModGrid grid = generate_payload(cfg, 10);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(40, {1.0, 0.0}), cfg, 0);
    const SensingResult res = sense_with_plan(rx, grid, cfg, nullptr);
    CHECK(std::isfinite(res.peak.rdm_sinr_db));
    CHECK(res.peak.rdm_sinr_db > 10.0);
}

TEST_CASE("RDM SINR is non-decreasing in the compensation length") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 16;
    const double d = 100.0 * cfg.sample_interval_s() * kSpeedOfLight / 2.0;
    const auto sc = make_target_scenario(cfg, d, 0.0, 0.0);
    REQUIRE(sc.sample_offset == 100);
    const int ncp = cfg.cp_samples();
    const std::vector<int> nq_grid = {0, 20, 41, 61, 100 - ncp};

    std::vector<double> mean_db(nq_grid.size(), 0.0);
    const int n_seeds = 50;
    for (int s = 0; s < n_seeds; ++s) {
        const ModGrid grid = generate_payload(cfg, 900 + s);
        const TimeFrame tx = ofdm_modulate(grid, cfg);
        const TimeFrame rx = apply_target_channel(tx, sc, cfg, 5000 + s);
        for (size_t i = 0; i < nq_grid.size(); ++i) {
            const CompensationPlan plan{nq_grid[i], sc.sample_offset};
            mean_db[i] += sense_with_plan(rx, grid, cfg, &plan).peak.rdm_sinr_db / n_seeds;
        }
    }
    for (size_t i = 1; i < mean_db.size(); ++i) CHECK(mean_db[i] >= mean_db[i - 1]);
}

TEST_CASE("peak location is invariant under compensation") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 16;
    const double d = 100.0 * cfg.sample_interval_s() * kSpeedOfLight / 2.0;
    const auto sc = make_target_scenario(cfg, d, 5.0, 5.0);
    for (int s = 0; s < 5; ++s) {
        const ModGrid grid = generate_payload(cfg, 300 + s);
        const TimeFrame tx = ofdm_modulate(grid, cfg);
        const TimeFrame rx = apply_target_channel(tx, sc, cfg, 700 + s);
        const SensingResult base = sense_with_plan(rx, grid, cfg, nullptr);
        for (int nq : {20, 64, 100}) {
            const CompensationPlan plan{nq, sc.sample_offset};
            const SensingResult res = sense_with_plan(rx, grid, cfg, &plan);
            CHECK(res.peak.range_index == base.peak.range_index);
            CHECK(res.peak.doppler_index == base.peak.doppler_index);
        }
    }
}

TEST_CASE("two-pass offset estimation matches the oracle at workable SINR") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 16;
    const double d = 100.0 * cfg.sample_interval_s() * kSpeedOfLight / 2.0;
    const auto sc = make_target_scenario(cfg, d, 0.0, 10.0);
    const ModGrid grid = generate_payload(cfg, 55);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, sc, cfg, 66);

    const TwoPassResult two = estimate_offset_then_compensate(rx, grid, cfg, 10.0);
    CHECK(two.estimated_offset == sc.sample_offset);

    CompensationPlan oracle_plan;
    oracle_plan.sample_offset = sc.sample_offset;
    oracle_plan.n_comp = optimal_n_comp(cfg.n_subcarriers, cfg.cp_samples(), sc.sample_offset,
                                        db_to_linear(10.0));
    const SensingResult oracle = sense_with_plan(rx, grid, cfg, &oracle_plan);
    CHECK(two.plan.n_comp == oracle_plan.n_comp);
    CHECK(two.result.peak.rdm_sinr_db == oracle.peak.rdm_sinr_db);

    // Deep below the detection threshold: degraded but never crashes.
    const auto weak = make_target_scenario(cfg, d, 0.0, -40.0);
    const TimeFrame rx_weak = apply_target_channel(tx, weak, cfg, 67);
    const TwoPassResult junk = estimate_offset_then_compensate(rx_weak, grid, cfg, -40.0);
    CHECK(std::isfinite(junk.result.peak.rdm_sinr_db));
}

TEST_CASE("vcp: sub-block geometry checks") {
    const auto cfg = testutil::micro_cfg(4);  // 4 symbols < 12-symbol block
    const ModGrid grid = generate_payload(cfg, 3);
    const TimeFrame tx = ofdm_modulate(grid, cfg);
    const TimeFrame rx = apply_target_channel(tx, direct_scenario(10, {1.0, 0.0}), cfg, 0);
    CHECK_THROWS_AS(vcp_process(rx, tx, cfg, VcpConfig{12, 4, 10}), std::invalid_argument);
    CHECK_THROWS_AS(vcp_process(rx, tx, cfg, VcpConfig{2, 2, 10}), std::invalid_argument);
}

TEST_CASE("vcp: recovers the target delay bin and trails coherent compensation") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 256;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 32;
    const double d = 100.0 * cfg.sample_interval_s() * kSpeedOfLight / 2.0;
    const auto sc = make_target_scenario(cfg, d, 0.0, 2.0);
    REQUIRE(sc.sample_offset == 100);

    double comp_db = 0.0, vcp_db = 0.0;
    for (int s = 0; s < 5; ++s) {
        const ModGrid grid = generate_payload(cfg, 40 + s);
        const TimeFrame tx = ofdm_modulate(grid, cfg);
        const TimeFrame rx = apply_target_channel(tx, sc, cfg, 80 + s);

        const RangeDopplerMap vmap = vcp_process(rx, tx, cfg, VcpConfig{12, 4, 100});
        const PeakEstimate vpeak = find_peak(vmap);
        CHECK(vpeak.range_index == 100);
        vcp_db += rdm_sinr_db(vmap, vpeak) / 5.0;

        const CompensationPlan plan{100, 100};
        comp_db += sense_with_plan(rx, grid, cfg, &plan).peak.rdm_sinr_db / 5.0;
    }
    CHECK(comp_db > vcp_db);
}

TEST_CASE("vcp division guard drops near-zero transmit-spectrum bins") {
    NumerologyConfig cfg;
    cfg.n_subcarriers = 16;
    cfg.subcarrier_spacing_hz = 120e3;
    cfg.n_symbols = 12;
    const int sym = cfg.symbol_samples();  // 17 samples

    // Hand-crafted transmit frame: two unit pulses, whose 204-point block
    // spectrum has an exact zero at the Nyquist bin.
    TimeFrame tx;
    tx.samples.assign(static_cast<size_t>(cfg.frame_samples()), {0.0, 0.0});
    tx.sample_interval_s = cfg.sample_interval_s();
    tx.origin = cfg.cp_samples();
    tx.samples[0] = {1.0, 0.0};
    tx.samples[1] = {1.0, 0.0};

    TimeFrame rx = tx;
    rx.samples.resize(static_cast<size_t>(cfg.frame_samples() + sym), {0.0, 0.0});

    const RangeDopplerMap map = vcp_process(rx, tx, cfg, VcpConfig{12, 4, 0});
    CHECK(map.vcp_guarded_bins == 1);
    for (double p : map.power) CHECK(std::isfinite(p));
}
