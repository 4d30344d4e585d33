#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/numerology.hpp"
#include "isac/sensing.hpp"

namespace isac {

enum class ReceiverKind { fft2d, compensate, vcp };

/// Where the compensation plan's sample offset comes from.
enum class OffsetSource { oracle, two_pass };

/// How the number of compensated samples is chosen.
enum class NCompRule { explicit_value, from_grid, full_offset, offset_minus_cp, optimal };

struct ReceiverVariant {
    ReceiverKind kind = ReceiverKind::compensate;
    OffsetSource source = OffsetSource::oracle;
    NCompRule rule = NCompRule::optimal;
    int explicit_n_comp = 0;
};

enum class SweepAxis { n_comp, gamma0_db, distance_m, range_profile };

struct ScenarioSpec {
    double distance_m = 500.0;
    std::optional<double> gamma0_db;  // anchored path-loss value when empty
};

struct ExperimentConfig {
    NumerologyConfig numerology = NumerologyConfig::fr2_120khz_small();
    int constellation_order = 16;
    double speed_mps = 20.0;
    SinrAnchor anchor;
    std::vector<ScenarioSpec> scenarios;
    std::vector<ReceiverVariant> receivers;
    SweepAxis axis = SweepAxis::gamma0_db;
    std::vector<double> grid;  // empty n_comp grid: derived per scenario
    int n_seeds = 50;
    std::uint64_t base_seed = 1;
    std::string out_path;
    VcpConfig vcp{12, 4, 0};  // vcp_samples 0: use the scenario sample offset
    std::string preset_name;

    void validate() const;
};

/// Named experiment presets (fig3..fig7); scale is "small" or "paper".
ExperimentConfig make_preset(const std::string& name, const std::string& scale);

/// Apply fields present in a JSON document on top of a base config.
/// Errors identify the offending field.
ExperimentConfig config_from_json(const ExperimentConfig& base, const std::string& json_text);

/// Resolved config as JSON (written as a sidecar next to each CSV).
std::string config_to_json(const ExperimentConfig& cfg);

/// The n_comp grid used for a scenario: the configured grid, or the derived
/// default covering [0, N_s] with the candidate optima and their
/// half-CP-width neighbors inserted.
std::vector<double> resolve_grid(const ExperimentConfig& cfg, const ScenarioSpec& scenario);

extern const char* const kSweepCsvHeader;
extern const char* const kAnalyticCsvHeader;

/// Render the simulated sweep for one scenario as a CSV string.
std::string sweep_csv_for_scenario(const ExperimentConfig& cfg, size_t scenario_idx,
                                   std::ostream* progress);

/// Render the pure-theory table for one scenario as a CSV string.
std::string analytic_csv_for_scenario(const ExperimentConfig& cfg, size_t scenario_idx);

/// Run the full sweep and write one CSV per scenario (plus a .config.json
/// sidecar). Returns the written CSV paths.
std::vector<std::string> run_sweep(const ExperimentConfig& cfg, std::ostream& progress);

/// Same, emitting analytic tables only (no simulation).
std::vector<std::string> run_analytic(const ExperimentConfig& cfg, std::ostream& progress);

}  // namespace isac
