#include "hrv/catalog.hpp"

namespace hrv {

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> FeatureCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.name);
    return out;
}

FeatureCatalog FeatureCatalog::from_names(const std::vector<std::string>& names) {
    FeatureCatalog c;
    c.entries.reserve(names.size());
    for (const auto& n : names) c.entries.push_back({n, ""});
    return c;
}

const FeatureCatalog& hrv_catalog() {
    static const FeatureCatalog catalog{{
        {"Mean.rate", "mean heart rate in beats per minute"},
        {"Coefficient.of.variation", "standard deviation divided by the mean"},
        {"Poincar..SD1", "Poincare plot spread perpendicular to the identity line"},
        {"Poincar..SD2", "Poincare plot spread along the identity line"},
        {"LF.HF.ratio.LS", "low-frequency to high-frequency power ratio"},
        {"LF.Power.LS", "low-frequency band power"},
        {"HF.Power.LS", "high-frequency band power"},
        {"DFA.Alpha.1", "detrended fluctuation analysis, short-term exponent"},
        {"DFA.Alpha.2", "detrended fluctuation analysis, long-term exponent"},
        {"Largest.Lyapunov.exponent", "sensitivity of the nonlinear system to initial conditions"},
        {"Correlation.dimension", "estimated number of degrees of freedom"},
        {"Power.Law.Slope.LS", "frequency-domain power-law slope"},
        {"Power.Law.Y.Intercept.LS", "frequency-domain power-law intercept"},
        {"DFA.AUC", "area under the detrended fluctuation curve"},
        {"Multiscale.Entropy", "regularity and complexity across time scales"},
        {"VLF.Power.LS", "very-low-frequency band power"},
        {"Complexity", "Hjorth complexity parameter"},
        {"eScaleE", "embedding scaling exponent"},
        {"pR", "recurrence analysis, percentage of recurrences"},
        {"pD", "recurrence analysis, percentage of determinism"},
        {"dlmax", "recurrence analysis, longest diagonal line"},
        {"sedl", "recurrence analysis, entropy of diagonal lines"},
        {"pDpR", "recurrence analysis, determinism over recurrences"},
        {"pL", "recurrence analysis, percentage of laminarity"},
        {"vlmax", "recurrence analysis, longest vertical line"},
        {"sevl", "recurrence analysis, entropy of vertical lines"},
        {"shannEn", "Shannon entropy of the interval distribution"},
        {"PSeo", "Plotkin-Swamy energy operator average"},
        {"Teo", "Teager energy operator average"},
        {"SymDp0_2", "symbolic dynamics, share of 0-variation words (non-uniform)"},
        {"SymDp1_2", "symbolic dynamics, share of 1-variation words (non-uniform)"},
        {"SymDp2_2", "symbolic dynamics, share of 2-variation words (non-uniform)"},
        {"SymDfw_2", "symbolic dynamics, forbidden words (non-uniform)"},
        {"SymDse_2", "symbolic dynamics, Shannon entropy (non-uniform)"},
        {"SymDce_2", "symbolic dynamics, conditional entropy (non-uniform)"},
        {"formF", "form factor"},
        {"gcount", "grid transform, occupied cell count"},
        {"sgridAND", "grid transform, AND similarity index"},
        {"sgridTAU", "grid transform, time-delay similarity index"},
        {"sgridWGT", "grid transform, weighted similarity index"},
        {"aFdP", "Allan factor distance from a Poisson process"},
        {"fFdP", "Fano factor distance from a Poisson process"},
        {"IoV", "index of variability distance from a Poisson process"},
        {"KLPE", "Kullback-Leibler permutation entropy"},
        {"AsymI", "multiscale time-irreversibility asymmetry index"},
        {"CSI", "Poincare plot cardiac sympathetic index"},
        {"CVI", "Poincare plot cardiac vagal index"},
        {"ARerr", "autoregressive model prediction error"},
        {"histSI", "histogram similarity index"},
        {"MultiFractal_c1", "multifractal spectrum, first-order cumulant"},
        {"MultiFractal_c2", "multifractal spectrum, second-order cumulant"},
        {"SDLEalpha", "scale-dependent Lyapunov exponent slope"},
        {"SDLEmean", "scale-dependent Lyapunov exponent mean"},
        {"QSE", "quadratic sample entropy"},
        {"Hurst.exponent", "autocorrelation decay rate over increasing lags"},
        {"mean", "mean interval value"},
        {"median", "median interval value"},
    }};
    return catalog;
}

}  // namespace hrv
