#pragma once

#include <optional>

#include "isac/numerology.hpp"

namespace isac {

/// Closed-form power decomposition of the demodulated frequency-domain
/// symbol. Signal-path powers (p_useful, p_isi, p_ici) are in units of
/// |gain|^2; p_noise is in units of sigma^2. sinr_linear combines them
/// through the received SINR gamma0.
struct SinrBreakdown {
    double p_useful = 0.0;
    double p_isi = 0.0;
    double p_ici = 0.0;
    double p_noise = 0.0;
    double sinr_linear = 0.0;

    double sinr_db() const;
};

/// Compensation choice for the sensing receiver: add the first n_comp
/// samples following each elementary OFDM interval onto its front.
/// n_comp beyond sample_offset only adds next-symbol interference, so it is
/// rejected.
struct CompensationPlan {
    int n_comp = 0;         // N'
    int sample_offset = 0;  // N_s

    void validate() const {
        if (n_comp < 0 || n_comp > sample_offset)
            throw std::invalid_argument("n_comp must lie in [0, sample_offset]");
    }
};

/// Per-symbol frequency-domain SINR without compensation. Valid for
/// n_cp <= n_offset < n_sub + n_cp (the boundary is the no-interference
/// limit). gamma0 is linear; +infinity means noise-free.
SinrBreakdown sinr_pre(int n_sub, int n_cp, int n_offset, double gamma0_linear);

/// Per-symbol frequency-domain SINR after compensating n_comp samples.
/// Reduces to sinr_pre at n_comp = 0.
SinrBreakdown sinr_post(int n_sub, int n_cp, int n_offset, int n_comp, double gamma0_linear);

/// Distance threshold beyond which full compensation (N' = N_s) is optimal
/// regardless of the received SINR.
double d0_threshold_m(const NumerologyConfig& cfg);

/// Received-SINR threshold separating the two optimal compensation lengths
/// for d < d0. Empty when the denominator is non-positive, which signals
/// the d >= d0 regime (full compensation always wins there).
std::optional<double> gamma_threshold_linear(int n_sub, int n_cp, int n_offset);

/// Optimal compensation length in sample terms: n_offset samples when the
/// target is beyond d0 or the received SINR is below the gamma threshold,
/// n_offset - n_cp otherwise. n_offset <= n_cp maps to 0 (nothing to
/// compensate).
int optimal_n_comp(int n_sub, int n_cp, int n_offset, double gamma0_linear);

/// Physical-domain wrapper: derive the sample offset from the distance and
/// apply the rule above.
CompensationPlan optimal_compensation(double distance_m, double gamma0_db,
                                      const NumerologyConfig& cfg);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace isac
