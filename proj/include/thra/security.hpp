#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "thra/spectrum.hpp"

namespace thra {

inline constexpr double kPlanckJs = 6.62607015e-34;
inline constexpr double kLightSpeedMps = 299792458.0;

// How the photon energy entering the budget is chosen: per probe wavelength,
// or pinned to 1550 nm for comparison with single-number estimates.
enum class PhotonEnergyMode { kPerWavelength, kFixed1550 };

// Adversary-side probe assumptions. The power cap is the fiber-fuse damage
// threshold; budgets above it are flagged, not rejected, so what-if runs
// stay possible.
struct ProbeBudget {
    double input_power_w = 10.0;
    double sideband_ratio = 0.1;   // fraction of the return the attack encodes on
    double rep_rate_hz = 1e8;
    PhotonEnergyMode mode = PhotonEnergyMode::kPerWavelength;

    void validate() const;
    bool exceeds_power_cap() const { return input_power_w > kFiberFuseCapW; }
    static constexpr double kFiberFuseCapW = 10.0;
};

struct SecurityThresholds {
    double chi_max = 1e-2;        // tolerable leaked information, bits per pulse
    double t_secure_db = -140.0;  // single-number attenuation target
    void validate() const;
};

double photon_energy_j(double lambda_nm);

// log10 of P / (E_ph * f_rep): the photons-per-pulse exponent before the
// attenuation term. Around 11.89 for 10 W, 100 MHz at 1550 nm.
double budget_exponent(const ProbeBudget& budget, double lambda_nm);

// Mean photon number of the back-reflected probe per pulse:
// mu = ratio * P * 10^(t_db/10) / (E_ph * f_rep), evaluated in log space.
double mean_photon_number(double t_db, double lambda_nm, const ProbeBudget& budget);

double binary_entropy(double x);  // bits; x in [0, 1]

// Holevo bound for two equiprobable coherent states with mean photon number
// mu in the attack mode: chi = h((1 - e^(-2 mu)) / 2).
double holevo_two_state(double mu);

// Holevo bound for a pure-state ensemble given its Gram matrix and priors.
// Validates hermiticity, unit diagonal, positive semidefiniteness, and that
// the priors form a distribution.
double holevo_general(const std::vector<std::vector<std::complex<double>>>& gram,
                      const std::vector<double>& probs);

struct LoopholeInterval {
    double lo_nm = 0.0;
    double hi_nm = 0.0;  // lo == hi for a single grid point
};

// Wavelength-resolved leak assessment of one composite spectrum.
struct InfoBoundCurve {
    WavelengthGrid grid;
    std::vector<double> t_db;
    std::vector<double> mu_p;
    std::vector<double> chi;
    std::vector<LoopholeInterval> loopholes;  // contiguous runs with chi > chi_max
    std::size_t worst_index = 0;              // highest chi (ties: higher mu, then lower lambda)
    std::size_t t_max_index = 0;
    std::size_t t_min_index = 0;

    bool has_loopholes() const { return !loopholes.empty(); }
};

InfoBoundCurve evaluate(const TransmittanceSpectrum& composite, const ProbeBudget& budget,
                        const SecurityThresholds& thresholds);

// CSV with header `wavelength_nm,t_db,mu_p,chi`.
void save_curve_csv(const std::string& path, const InfoBoundCurve& curve);

// Serialized JSON report for one evaluated scheme.
std::string report_json(const std::string& scheme_name, const InfoBoundCurve& curve,
                        const ProbeBudget& budget, const SecurityThresholds& thresholds);

}  // namespace thra
