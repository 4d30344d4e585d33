#include "isac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "isac/analytic.hpp"
#include "isac/rng.hpp"
#include "isac/waveform.hpp"

namespace isac {
namespace {

using nlohmann::json;

constexpr std::uint64_t kPayloadTag = 0xA110C8ED;
constexpr std::uint64_t kNoiseTag = 0x5EED0F00;

const char* receiver_name(ReceiverKind k) {
    switch (k) {
        case ReceiverKind::fft2d: return "2dfft";
        case ReceiverKind::compensate: return "compensate";
        case ReceiverKind::vcp: return "vcp";
    }
    return "?";
}

std::string fmt6(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string opt6(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

struct ResolvedPoint {
    double distance_m = 0.0;
    double gamma0_db = 0.0;
};

ResolvedPoint resolve_point(const ExperimentConfig& cfg, const ScenarioSpec& sc,
                            double grid_value) {
    ResolvedPoint p;
    p.distance_m = cfg.axis == SweepAxis::distance_m ? grid_value : sc.distance_m;
    if (cfg.axis == SweepAxis::gamma0_db) {
        p.gamma0_db = grid_value;
    } else if (sc.gamma0_db.has_value()) {
        p.gamma0_db = *sc.gamma0_db;
    } else {
        p.gamma0_db =
            anchored_sinr_db(p.distance_m, cfg.numerology.carrier_freq_hz / 1e9, cfg.anchor);
    }
    return p;
}

// Per-symbol SINR prediction for a compensation length, clamping the sample
// offset into the formula's regime (within-CP delays behave like N_s = N_cp).
double predicted_sinr_db(const NumerologyConfig& num, int sample_offset, int n_comp,
                         double gamma0_db) {
    const int ncp = num.cp_samples();
    const int eff = std::max(sample_offset, ncp);
    const int nq = std::clamp(n_comp, 0, eff);
    return sinr_post(num.n_subcarriers, ncp, eff, nq, db_to_linear(gamma0_db)).sinr_db();
}

struct VariantOutcome {
    long n_comp = 0;
    std::optional<double> rdm_sinr_db, analytic_sinr_db;
    std::optional<double> range_est, range_err, vel_est, vel_err;
};

struct VariantRun {
    VariantOutcome outcome;
    SensingResult result;  // keeps the map alive for profile extraction
    bool has_result = false;
};

VariantRun run_variant(const ExperimentConfig& cfg, const ReceiverVariant& var,
                       const TargetScenario& sc, const ModGrid& payload, const TimeFrame& tx,
                       const TimeFrame& rx, double gamma0_db, double grid_value) {
    const NumerologyConfig& num = cfg.numerology;
    VariantRun run;
    VariantOutcome& out = run.outcome;

    auto fill_estimates = [&](const PeakEstimate& peak) {
        out.rdm_sinr_db = peak.rdm_sinr_db;
        out.range_est = peak.range_m;
        out.range_err = peak.range_m - sc.distance_m;
        out.vel_est = peak.speed_mps;
        out.vel_err = peak.speed_mps - sc.speed_mps;
    };

    switch (var.kind) {
        case ReceiverKind::fft2d: {
            run.result = sense_with_plan(rx, payload, num, nullptr);
            run.has_result = true;
            out.n_comp = 0;
            out.analytic_sinr_db = predicted_sinr_db(num, sc.sample_offset, 0, gamma0_db);
            fill_estimates(run.result.peak);
            break;
        }
        case ReceiverKind::compensate: {
            if (var.source == OffsetSource::two_pass) {
                TwoPassResult two = estimate_offset_then_compensate(rx, payload, num, gamma0_db);
                run.result = std::move(two.result);
                run.has_result = true;
                out.n_comp = two.plan.n_comp;
                out.analytic_sinr_db = predicted_sinr_db(num, sc.sample_offset,
                                                         two.plan.n_comp, gamma0_db);
                fill_estimates(run.result.peak);
                break;
            }
            CompensationPlan plan;
            plan.sample_offset = sc.sample_offset;
            switch (var.rule) {
                case NCompRule::explicit_value: plan.n_comp = var.explicit_n_comp; break;
                case NCompRule::from_grid: plan.n_comp = static_cast<int>(grid_value); break;
                case NCompRule::full_offset: plan.n_comp = sc.sample_offset; break;
                case NCompRule::offset_minus_cp:
                    plan.n_comp = std::max(0, sc.sample_offset - num.cp_samples());
                    break;
                case NCompRule::optimal:
                    plan.n_comp = optimal_n_comp(num.n_subcarriers, num.cp_samples(),
                                                 sc.sample_offset, db_to_linear(gamma0_db));
                    break;
            }
            run.result = sense_with_plan(rx, payload, num, &plan);
            run.has_result = true;
            out.n_comp = plan.n_comp;
            out.analytic_sinr_db = predicted_sinr_db(num, sc.sample_offset, plan.n_comp, gamma0_db);
            fill_estimates(run.result.peak);
            break;
        }
        case ReceiverKind::vcp: {
            VcpConfig v = cfg.vcp;
            if (v.vcp_samples <= 0) v.vcp_samples = sc.sample_offset;
            run.result.rdm = vcp_process(rx, tx, num, v);
            run.result.peak = find_peak(run.result.rdm);
            run.result.peak.rdm_sinr_db = rdm_sinr_db(run.result.rdm, run.result.peak);
            run.has_result = true;
            out.n_comp = v.vcp_samples;
            fill_estimates(run.result.peak);
            break;
        }
    }
    return run;
}

void append_sweep_row(std::string& csv, double sweep_var, int seed_idx, const char* receiver,
                      const VariantOutcome& o) {
    csv += fmt6(sweep_var);
    csv += ',';
    csv += std::to_string(seed_idx);
    csv += ',';
    csv += receiver;
    csv += ',';
    csv += std::to_string(o.n_comp);
    csv += ',';
    csv += opt6(o.rdm_sinr_db);
    csv += ',';
    csv += opt6(o.analytic_sinr_db);
    csv += ',';
    csv += opt6(o.range_est);
    csv += ',';
    csv += opt6(o.range_err);
    csv += ',';
    csv += opt6(o.vel_est);
    csv += ',';
    csv += opt6(o.vel_err);
    csv += '\n';
}

void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned nt = std::min<unsigned>(std::max(hw, 1u), 8u);
    if (nt <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

int offset_for_distance(const NumerologyConfig& num, double distance_m) {
    const double tau = 2.0 * distance_m / kSpeedOfLight;
    return static_cast<int>(std::llround(tau / num.sample_interval_s()));
}

std::string scenario_suffix(const ScenarioSpec& sc) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "_d%gm", sc.distance_m);
    return buf;
}

std::string output_path_for(const ExperimentConfig& cfg, size_t scenario_idx) {
    if (cfg.scenarios.size() <= 1) return cfg.out_path;
    const std::string& p = cfg.out_path;
    const size_t dot = p.rfind('.');
    const std::string suffix = scenario_suffix(cfg.scenarios[scenario_idx]);
    if (dot == std::string::npos || p.find('/', dot) != std::string::npos)
        return p + suffix;
    return p.substr(0, dot) + suffix + p.substr(dot);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace

const char* const kSweepCsvHeader =
    "sweep_var,seed,receiver,n_comp,rdm_sinr_db,analytic_sinr_db,"
    "range_est_m,range_err_m,vel_est_mps,vel_err_mps";
const char* const kAnalyticCsvHeader =
    "sweep_var,seed,receiver,n_comp,rdm_sinr_db,analytic_sinr_db,"
    "range_est_m,range_err_m,vel_est_mps,vel_err_mps,d0_m,gamma_db,isi_free_range_m";

void ExperimentConfig::validate() const {
    numerology.validate();
    if (constellation_order != 4 && constellation_order != 16 && constellation_order != 64)
        throw std::invalid_argument("config: constellation_order must be 4, 16 or 64");
    if (scenarios.empty()) throw std::invalid_argument("config: scenarios must not be empty");
    if (receivers.empty()) throw std::invalid_argument("config: receivers must not be empty");
    if (n_seeds < 1) throw std::invalid_argument("config: n_seeds must be >= 1");
    if (axis != SweepAxis::n_comp && axis != SweepAxis::range_profile && grid.empty())
        throw std::invalid_argument("config: sweep.grid must not be empty for this axis");
    if (vcp.block_symbols < 1 || vcp.overlap_symbols < 0 ||
        vcp.overlap_symbols >= vcp.block_symbols)
        throw std::invalid_argument("config: vcp geometry invalid (need 0 <= overlap < block)");
    for (const auto& sc : scenarios)
        if (!(sc.distance_m > 0))
            throw std::invalid_argument("config: scenario distance_m must be positive");
    for (const auto& v : receivers) {
        if (v.kind == ReceiverKind::compensate && v.rule == NCompRule::from_grid &&
            axis != SweepAxis::n_comp)
            throw std::invalid_argument(
                "config: receivers[].n_comp = \"grid\" requires sweep.axis = n_comp");
        if (v.kind == ReceiverKind::vcp && axis == SweepAxis::range_profile)
            throw std::invalid_argument(
                "config: the vcp receiver is not supported on the range_profile axis");
    }
}

std::vector<double> resolve_grid(const ExperimentConfig& cfg, const ScenarioSpec& scenario) {
    if (cfg.axis == SweepAxis::range_profile) return {};
    if (!cfg.grid.empty() || cfg.axis != SweepAxis::n_comp) return cfg.grid;

    // Default N' grid: even coverage of [0, N_s] plus the two candidate
    // optima and their half-CP-width neighbors.
    const int ns = offset_for_distance(cfg.numerology, scenario.distance_m);
    const int ncp = cfg.numerology.cp_samples();
    std::set<int> pts;
    const int steps = 12;
    for (int j = 0; j <= steps; ++j)
        pts.insert(static_cast<int>(std::llround(static_cast<double>(j) * ns / steps)));
    for (int c : {ns - ncp, ns - ncp - ncp / 2, ns - ncp + ncp / 2, ns - ncp / 2})
        if (c >= 0 && c <= ns) pts.insert(c);
    std::vector<double> grid(pts.begin(), pts.end());
    return grid;
}

std::string sweep_csv_for_scenario(const ExperimentConfig& cfg, size_t scenario_idx,
                                   std::ostream* progress) {
    cfg.validate();
    const ScenarioSpec& scenario = cfg.scenarios.at(scenario_idx);
    const NumerologyConfig& num = cfg.numerology;

    if (cfg.axis == SweepAxis::range_profile) {
        // One task per seed; rows are (range bin, seed, receiver)-ordered.
        struct ProfileSlot {
            std::vector<std::vector<double>> bin_db;  // per variant, per range bin
            std::vector<long> n_comp;
        };
        std::vector<ProfileSlot> slots(static_cast<size_t>(cfg.n_seeds));
        parallel_for(slots.size(), [&](size_t s) {
            const auto point = resolve_point(cfg, scenario, 0.0);
            const TargetScenario sc =
                make_target_scenario(num, point.distance_m, cfg.speed_mps, point.gamma0_db);
            const std::uint64_t pay =
                mix_seed(cfg.base_seed, {kPayloadTag, scenario_idx, 0, s});
            const std::uint64_t noi = mix_seed(cfg.base_seed, {kNoiseTag, scenario_idx, 0, s});
            const ModGrid payload = generate_payload(num, pay, cfg.constellation_order);
            const TimeFrame tx = ofdm_modulate(payload, num);
            const TimeFrame rx = apply_target_channel(tx, sc, num, noi);
            ProfileSlot& slot = slots[s];
            for (const auto& var : cfg.receivers) {
                VariantRun run =
                    run_variant(cfg, var, sc, payload, tx, rx, point.gamma0_db, 0.0);
                const RangeDopplerMap& rdm = run.result.rdm;
                const PeakEstimate& peak = run.result.peak;
                const double bg =
                    peak.peak_power / std::pow(10.0, peak.rdm_sinr_db / 10.0);
                const int l = peak.doppler_index >= 0 ? peak.doppler_index
                                                      : peak.doppler_index + rdm.n_doppler;
                std::vector<double> prof(static_cast<size_t>(rdm.n_range));
                for (int k = 0; k < rdm.n_range; ++k)
                    prof[static_cast<size_t>(k)] = 10.0 * std::log10(rdm.at(k, l) / bg);
                slot.bin_db.push_back(std::move(prof));
                slot.n_comp.push_back(run.outcome.n_comp);
            }
        });

        std::string csv(kSweepCsvHeader);
        csv += '\n';
        const int n_bins = slots.empty() || slots[0].bin_db.empty()
                               ? 0
                               : static_cast<int>(slots[0].bin_db[0].size());
        const double bin_m = kSpeedOfLight / (2.0 * num.bandwidth_hz());
        for (int k = 0; k < n_bins; ++k) {
            for (int s = 0; s < cfg.n_seeds; ++s) {
                for (size_t v = 0; v < cfg.receivers.size(); ++v) {
                    VariantOutcome o;
                    o.n_comp = slots[static_cast<size_t>(s)].n_comp[v];
                    o.rdm_sinr_db = slots[static_cast<size_t>(s)].bin_db[v][static_cast<size_t>(k)];
                    append_sweep_row(csv, k * bin_m, s, receiver_name(cfg.receivers[v].kind), o);
                }
            }
        }
        if (progress)
            (*progress) << "# profile d=" << scenario.distance_m << "m seeds=" << cfg.n_seeds
                        << " done\n";
        return csv;
    }

    const std::vector<double> grid = resolve_grid(cfg, scenario);
    const size_t n_tasks = grid.size() * static_cast<size_t>(cfg.n_seeds);
    std::vector<std::vector<std::pair<const char*, VariantOutcome>>> results(n_tasks);

    parallel_for(n_tasks, [&](size_t t) {
        const size_t g = t / static_cast<size_t>(cfg.n_seeds);
        const size_t s = t % static_cast<size_t>(cfg.n_seeds);
        const double gv = grid[g];
        const auto point = resolve_point(cfg, scenario, gv);
        const TargetScenario sc =
            make_target_scenario(num, point.distance_m, cfg.speed_mps, point.gamma0_db);
        const std::uint64_t pay = mix_seed(cfg.base_seed, {kPayloadTag, scenario_idx, g, s});
        const std::uint64_t noi = mix_seed(cfg.base_seed, {kNoiseTag, scenario_idx, g, s});
        const ModGrid payload = generate_payload(num, pay, cfg.constellation_order);
        const TimeFrame tx = ofdm_modulate(payload, num);
        const TimeFrame rx = apply_target_channel(tx, sc, num, noi);
        auto& rows = results[t];
        for (const auto& var : cfg.receivers) {
            VariantRun run = run_variant(cfg, var, sc, payload, tx, rx, point.gamma0_db, gv);
            rows.emplace_back(receiver_name(var.kind), run.outcome);
        }
    });

    std::string csv(kSweepCsvHeader);
    csv += '\n';
    for (size_t g = 0; g < grid.size(); ++g) {
        for (int s = 0; s < cfg.n_seeds; ++s) {
            const size_t t = g * static_cast<size_t>(cfg.n_seeds) + static_cast<size_t>(s);
            for (const auto& [name, outcome] : results[t])
                append_sweep_row(csv, grid[g], s, name, outcome);
        }
        if (progress)
            (*progress) << "# d=" << scenario.distance_m << "m grid[" << (g + 1) << "/"
                        << grid.size() << "]=" << grid[g] << " seeds=" << cfg.n_seeds << "\n";
    }
    return csv;
}

std::string analytic_csv_for_scenario(const ExperimentConfig& cfg, size_t scenario_idx) {
    cfg.validate();
    const ScenarioSpec& scenario = cfg.scenarios.at(scenario_idx);
    const NumerologyConfig& num = cfg.numerology;
    const int nc = num.n_subcarriers;
    const int ncp = num.cp_samples();
    const double d0 = d0_threshold_m(num);
    const double isi_free = kSpeedOfLight * num.cp_duration_s / 2.0;

    std::vector<double> grid = resolve_grid(cfg, scenario);
    if (cfg.axis == SweepAxis::range_profile) grid = {scenario.distance_m};

    std::string csv(kAnalyticCsvHeader);
    csv += '\n';
    for (double gv : grid) {
        const auto point = resolve_point(cfg, scenario, gv);
        const int ns = offset_for_distance(num, point.distance_m);
        const int eff = std::max(ns, ncp);
        const auto gamma = gamma_threshold_linear(nc, ncp, eff);
        for (const auto& var : cfg.receivers) {
            if (var.kind == ReceiverKind::vcp) continue;  // no closed form for the VCP chain
            long n_comp = 0;
            if (var.kind == ReceiverKind::compensate) {
                switch (var.rule) {
                    case NCompRule::explicit_value: n_comp = var.explicit_n_comp; break;
                    case NCompRule::from_grid: n_comp = static_cast<long>(gv); break;
                    case NCompRule::full_offset: n_comp = ns; break;
                    case NCompRule::offset_minus_cp: n_comp = std::max(0, ns - ncp); break;
                    case NCompRule::optimal:
                        n_comp = optimal_n_comp(nc, ncp, ns, db_to_linear(point.gamma0_db));
                        break;
                }
            }
            const double sinr =
                predicted_sinr_db(num, ns, static_cast<int>(n_comp), point.gamma0_db);
            // sweep_var, seed (empty), receiver, n_comp, rdm_sinr_db (empty),
            // analytic_sinr_db, estimate columns (empty), then theory columns.
            csv += fmt6(gv);
            csv += ",,";
            csv += receiver_name(var.kind);
            csv += ',';
            csv += std::to_string(n_comp);
            csv += ",,";
            csv += fmt6(sinr);
            csv += ",,,,,";
            csv += fmt6(d0);
            csv += ',';
            csv += gamma ? fmt6(linear_to_db(*gamma)) : std::string();
            csv += ',';
            csv += fmt6(isi_free);
            csv += '\n';
        }
    }
    return csv;
}

std::vector<std::string> run_sweep(const ExperimentConfig& cfg, std::ostream& progress) {
    cfg.validate();
    if (cfg.out_path.empty()) throw std::invalid_argument("config: out path must be set");
    std::vector<std::string> paths;
    for (size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const std::string csv = sweep_csv_for_scenario(cfg, i, &progress);
        const std::string path = output_path_for(cfg, i);
        write_file(path, csv);
        progress << "# wrote " << path << "\n";
        paths.push_back(path);
    }
    write_file(cfg.out_path + ".config.json", config_to_json(cfg));
    return paths;
}

std::vector<std::string> run_analytic(const ExperimentConfig& cfg, std::ostream& progress) {
    cfg.validate();
    if (cfg.out_path.empty()) throw std::invalid_argument("config: out path must be set");
    std::vector<std::string> paths;
    for (size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const std::string csv = analytic_csv_for_scenario(cfg, i);
        const std::string path = output_path_for(cfg, i);
        write_file(path, csv);
        progress << "# wrote " << path << " (analytic)\n";
        paths.push_back(path);
    }
    write_file(cfg.out_path + ".config.json", config_to_json(cfg));
    return paths;
}

// ---------------------------------------------------------------------------
// Presets

ExperimentConfig make_preset(const std::string& name, const std::string& scale) {
    ExperimentConfig cfg;
    if (scale == "paper")
        cfg.numerology = NumerologyConfig::fr2_120khz();
    else if (scale == "small")
        cfg.numerology = NumerologyConfig::fr2_120khz_small();
    else
        throw std::invalid_argument("unknown scale: " + scale + " (use paper or small)");
    cfg.preset_name = name;

    auto comp = [](NCompRule rule) {
        ReceiverVariant v;
        v.kind = ReceiverKind::compensate;
        v.rule = rule;
        return v;
    };
    ReceiverVariant fft2d;
    fft2d.kind = ReceiverKind::fft2d;
    ReceiverVariant vcp;
    vcp.kind = ReceiverKind::vcp;

    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> g(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
        return g;
    };

    if (name == "fig3") {
        cfg.scenarios = {{300.0, std::nullopt}, {500.0, 2.0}};
        cfg.axis = SweepAxis::n_comp;
        cfg.receivers = {comp(NCompRule::from_grid)};
    } else if (name == "fig4") {
        cfg.scenarios = {{800.0, std::nullopt}};
        cfg.axis = SweepAxis::gamma0_db;
        cfg.grid = linspace(-10.0, 20.0, 13);
        cfg.receivers = {comp(NCompRule::offset_minus_cp), comp(NCompRule::full_offset)};
    } else if (name == "fig5") {
        cfg.scenarios = {{500.0, std::nullopt}};
        cfg.axis = SweepAxis::distance_m;
        cfg.grid = linspace(100.0, 1300.0, 25);
        cfg.receivers = {fft2d, comp(NCompRule::offset_minus_cp), comp(NCompRule::full_offset)};
    } else if (name == "fig6") {
        cfg.scenarios = {{500.0, std::nullopt}};
        cfg.axis = SweepAxis::gamma0_db;
        cfg.grid = linspace(-5.0, 10.0, 11);
        cfg.receivers = {fft2d, vcp, comp(NCompRule::optimal)};
    } else if (name == "fig7") {
        cfg.scenarios = {{500.0, std::nullopt}};
        cfg.axis = SweepAxis::range_profile;
        cfg.receivers = {fft2d, comp(NCompRule::optimal)};
        cfg.n_seeds = 5;
    } else {
        throw std::invalid_argument("unknown preset: " + name +
                                    " (use fig3, fig4, fig5, fig6 or fig7)");
    }
    cfg.out_path = name + ".csv";
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON config I/O

namespace {

SweepAxis axis_from_string(const std::string& s) {
    if (s == "n_comp") return SweepAxis::n_comp;
    if (s == "gamma0_db") return SweepAxis::gamma0_db;
    if (s == "distance_m") return SweepAxis::distance_m;
    if (s == "range_profile") return SweepAxis::range_profile;
    throw std::invalid_argument("config: sweep.axis must be one of "
                                "n_comp|gamma0_db|distance_m|range_profile, got: " + s);
}

const char* axis_to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::n_comp: return "n_comp";
        case SweepAxis::gamma0_db: return "gamma0_db";
        case SweepAxis::distance_m: return "distance_m";
        case SweepAxis::range_profile: return "range_profile";
    }
    return "?";
}

ReceiverVariant variant_from_json(const json& j) {
    ReceiverVariant v;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "2dfft") {
            v.kind = ReceiverKind::fft2d;
        } else if (s == "vcp") {
            v.kind = ReceiverKind::vcp;
        } else if (s == "compensate") {
            v.kind = ReceiverKind::compensate;
            v.rule = NCompRule::optimal;
        } else {
            throw std::invalid_argument("config: receivers[]: unknown receiver: " + s);
        }
        return v;
    }
    if (!j.is_object())
        throw std::invalid_argument("config: receivers[] entries must be strings or objects");
    const std::string type = j.value("type", "compensate");
    if (type == "2dfft") {
        v.kind = ReceiverKind::fft2d;
        return v;
    }
    if (type == "vcp") {
        v.kind = ReceiverKind::vcp;
        return v;
    }
    if (type != "compensate")
        throw std::invalid_argument("config: receivers[].type unknown: " + type);
    v.kind = ReceiverKind::compensate;
    if (j.value("offset", "oracle") == std::string("two-pass")) v.source = OffsetSource::two_pass;
    if (j.contains("n_comp")) {
        const json& n = j.at("n_comp");
        if (n.is_number_integer()) {
            v.rule = NCompRule::explicit_value;
            v.explicit_n_comp = n.get<int>();
        } else if (n.is_string()) {
            const std::string s = n.get<std::string>();
            if (s == "optimal") v.rule = NCompRule::optimal;
            else if (s == "ns") v.rule = NCompRule::full_offset;
            else if (s == "ns-ncp") v.rule = NCompRule::offset_minus_cp;
            else if (s == "grid") v.rule = NCompRule::from_grid;
            else
                throw std::invalid_argument(
                    "config: receivers[].n_comp must be an integer or one of "
                    "optimal|ns|ns-ncp|grid, got: " + s);
        } else {
            throw std::invalid_argument("config: receivers[].n_comp has invalid type");
        }
    }
    return v;
}

json variant_to_json(const ReceiverVariant& v) {
    if (v.kind == ReceiverKind::fft2d) return "2dfft";
    if (v.kind == ReceiverKind::vcp) return "vcp";
    json j;
    j["type"] = "compensate";
    if (v.source == OffsetSource::two_pass) j["offset"] = "two-pass";
    switch (v.rule) {
        case NCompRule::explicit_value: j["n_comp"] = v.explicit_n_comp; break;
        case NCompRule::from_grid: j["n_comp"] = "grid"; break;
        case NCompRule::full_offset: j["n_comp"] = "ns"; break;
        case NCompRule::offset_minus_cp: j["n_comp"] = "ns-ncp"; break;
        case NCompRule::optimal: j["n_comp"] = "optimal"; break;
    }
    return j;
}

template <typename T>
T field(const json& j, const char* name, const T& fallback) {
    if (!j.contains(name)) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: field '") + name + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const ExperimentConfig& base, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");

    static const std::set<std::string> known = {
        "numerology", "constellation_order", "speed_mps", "anchor",   "scenarios", "receivers",
        "sweep",      "n_seeds",             "base_seed", "out",      "vcp",       "preset"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("config: unknown field '" + key + "'");

    ExperimentConfig cfg = base;
    if (j.contains("numerology")) {
        const json& n = j.at("numerology");
        cfg.numerology.n_subcarriers = field(n, "n_subcarriers", cfg.numerology.n_subcarriers);
        cfg.numerology.subcarrier_spacing_hz =
            field(n, "subcarrier_spacing_hz", cfg.numerology.subcarrier_spacing_hz);
        cfg.numerology.n_symbols = field(n, "n_symbols", cfg.numerology.n_symbols);
        cfg.numerology.carrier_freq_hz = field(n, "carrier_freq_hz", cfg.numerology.carrier_freq_hz);
        cfg.numerology.cp_duration_s = field(n, "cp_duration_s", cfg.numerology.cp_duration_s);
    }
    cfg.constellation_order = field(j, "constellation_order", cfg.constellation_order);
    cfg.speed_mps = field(j, "speed_mps", cfg.speed_mps);
    if (j.contains("anchor")) {
        const json& a = j.at("anchor");
        cfg.anchor.distance_m = field(a, "distance_m", cfg.anchor.distance_m);
        cfg.anchor.sinr_db = field(a, "sinr_db", cfg.anchor.sinr_db);
    }
    if (j.contains("scenarios")) {
        if (!j.at("scenarios").is_array())
            throw std::invalid_argument("config: scenarios must be an array");
        cfg.scenarios.clear();
        for (const json& s : j.at("scenarios")) {
            ScenarioSpec spec;
            spec.distance_m = field(s, "distance_m", 500.0);
            if (s.contains("gamma0_db")) spec.gamma0_db = field(s, "gamma0_db", 0.0);
            cfg.scenarios.push_back(spec);
        }
    }
    if (j.contains("receivers")) {
        if (!j.at("receivers").is_array())
            throw std::invalid_argument("config: receivers must be an array");
        cfg.receivers.clear();
        for (const json& r : j.at("receivers")) cfg.receivers.push_back(variant_from_json(r));
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        cfg.axis = axis_from_string(field<std::string>(s, "axis", axis_to_string(cfg.axis)));
        if (s.contains("grid")) cfg.grid = field(s, "grid", cfg.grid);
    }
    cfg.n_seeds = field(j, "n_seeds", cfg.n_seeds);
    cfg.base_seed = field(j, "base_seed", cfg.base_seed);
    cfg.out_path = field(j, "out", cfg.out_path);
    if (j.contains("vcp")) {
        const json& v = j.at("vcp");
        cfg.vcp.block_symbols = field(v, "block_symbols", cfg.vcp.block_symbols);
        cfg.vcp.overlap_symbols = field(v, "overlap_symbols", cfg.vcp.overlap_symbols);
        cfg.vcp.vcp_samples = field(v, "vcp_samples", cfg.vcp.vcp_samples);
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["preset"] = cfg.preset_name;
    j["numerology"] = {{"n_subcarriers", cfg.numerology.n_subcarriers},
                       {"subcarrier_spacing_hz", cfg.numerology.subcarrier_spacing_hz},
                       {"n_symbols", cfg.numerology.n_symbols},
                       {"carrier_freq_hz", cfg.numerology.carrier_freq_hz},
                       {"cp_duration_s", cfg.numerology.cp_duration_s}};
    j["constellation_order"] = cfg.constellation_order;
    j["speed_mps"] = cfg.speed_mps;
    j["anchor"] = {{"distance_m", cfg.anchor.distance_m}, {"sinr_db", cfg.anchor.sinr_db}};
    j["scenarios"] = json::array();
    for (const auto& s : cfg.scenarios) {
        json e = {{"distance_m", s.distance_m}};
        if (s.gamma0_db) e["gamma0_db"] = *s.gamma0_db;
        j["scenarios"].push_back(e);
    }
    j["receivers"] = json::array();
    for (const auto& v : cfg.receivers) j["receivers"].push_back(variant_to_json(v));
    j["sweep"] = {{"axis", axis_to_string(cfg.axis)}, {"grid", cfg.grid}};
    j["n_seeds"] = cfg.n_seeds;
    j["base_seed"] = cfg.base_seed;
    j["out"] = cfg.out_path;
    j["vcp"] = {{"block_symbols", cfg.vcp.block_symbols},
                {"overlap_symbols", cfg.vcp.overlap_symbols},
                {"vcp_samples", cfg.vcp.vcp_samples}};
    return j.dump(2) + "\n";
}

}  // namespace isac
