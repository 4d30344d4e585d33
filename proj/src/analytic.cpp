#include "isac/analytic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {
namespace {

void check_regime(int n_sub, int n_cp, int n_offset) {
    if (n_sub < 2) throw std::invalid_argument("n_sub must be >= 2");
    if (n_cp < 0 || n_cp >= n_sub) throw std::invalid_argument("n_cp must lie in [0, n_sub)");
    if (n_offset < n_cp || n_offset >= n_sub + n_cp)
        throw std::invalid_argument("sample offset outside the supported regime [n_cp, n_sub+n_cp)");
}

}  // namespace

double SinrBreakdown::sinr_db() const { return 10.0 * std::log10(sinr_linear); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

SinrBreakdown sinr_post(int n_sub, int n_cp, int n_offset, int n_comp, double gamma0_linear) {
    check_regime(n_sub, n_cp, n_offset);
    if (n_comp < 0 || n_comp > n_offset)
        throw std::invalid_argument("n_comp must lie in [0, n_offset]");
    if (!(gamma0_linear > 0))
        throw std::invalid_argument("gamma0 must be positive");

    // Normalized variables keep the large-N_c evaluation well conditioned.
    const long double nc = n_sub;
    const long double ne = static_cast<long double>(n_offset - n_cp) / nc;
    const long double na = static_cast<long double>(n_comp) / nc;
    const int delta = std::abs(n_offset - n_cp - n_comp);
    const long double dd = static_cast<long double>(delta) / nc;

    const long double useful = (1.0L - ne + na) * (1.0L - ne + na);
    const long double isi = ne;
    const long double ici = dd * (1.0L - dd);
    const long double noise_units = 1.0L + na;  // times sigma^2
    const long double inv_gamma = std::isinf(gamma0_linear)
                                      ? 0.0L
                                      : 1.0L / static_cast<long double>(gamma0_linear);

    SinrBreakdown out;
    out.p_useful = static_cast<double>(useful);
    out.p_isi = static_cast<double>(isi);
    out.p_ici = static_cast<double>(ici);
    out.p_noise = static_cast<double>(noise_units);
    out.sinr_linear = static_cast<double>(useful / (isi + ici + noise_units * inv_gamma));
    return out;
}

SinrBreakdown sinr_pre(int n_sub, int n_cp, int n_offset, double gamma0_linear) {
    return sinr_post(n_sub, n_cp, n_offset, 0, gamma0_linear);
}

double d0_threshold_m(const NumerologyConfig& cfg) {
    cfg.validate();
    const long double td = cfg.elementary_duration_s();
    const long double tcp = cfg.cp_duration_s;
    const long double tau0 = (td * td + td * tcp + tcp * tcp) / (2.0L * td + tcp);
    return static_cast<double>(tau0 * kSpeedOfLight / 2.0L);
}

std::optional<double> gamma_threshold_linear(int n_sub, int n_cp, int n_offset) {
    check_regime(n_sub, n_cp, n_offset);
    const long long nc = n_sub, ncp = n_cp, ns = n_offset;
    const long long num = (nc + ncp) * (nc + ns - ncp) + nc * (ns - ncp);
    const long long den = (nc + ncp) * (nc + ncp) - ns * (nc + ncp) - nc * (ns + ncp);
    if (den <= 0) return std::nullopt;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

int optimal_n_comp(int n_sub, int n_cp, int n_offset, double gamma0_linear) {
    if (n_offset <= n_cp) return 0;
    check_regime(n_sub, n_cp, n_offset);
    const auto gamma = gamma_threshold_linear(n_sub, n_cp, n_offset);
    if (!gamma.has_value()) return n_offset;  // d >= d0: full compensation always wins
    return gamma0_linear < *gamma ? n_offset : n_offset - n_cp;
}

CompensationPlan optimal_compensation(double distance_m, double gamma0_db,
                                      const NumerologyConfig& cfg) {
    cfg.validate();
    if (!(distance_m > 0)) throw std::invalid_argument("distance must be positive");
    const double tau = 2.0 * distance_m / kSpeedOfLight;
    if (tau >= cfg.symbol_duration_s())
        throw std::invalid_argument("echo delay exceeds one OFDM symbol duration (unsupported)");
    const int n_offset = static_cast<int>(std::llround(tau / cfg.sample_interval_s()));
    CompensationPlan plan;
    plan.sample_offset = n_offset;
    plan.n_comp =
        optimal_n_comp(cfg.n_subcarriers, cfg.cp_samples(), n_offset, db_to_linear(gamma0_db));
    return plan;
}

}  // namespace isac
