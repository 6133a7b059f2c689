#include "thra/security.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"
#include "thra/util.hpp"

namespace thra {

void ProbeBudget::validate() const {
    if (!std::isfinite(input_power_w) || input_power_w <= 0.0)
        throw Error(cat("probe power must be positive (got ", input_power_w, " W)"));
    if (!std::isfinite(sideband_ratio) || sideband_ratio < 0.0 || sideband_ratio > 1.0)
        throw Error(cat("sideband ratio must lie in [0, 1] (got ", sideband_ratio, ")"));
    if (!std::isfinite(rep_rate_hz) || rep_rate_hz <= 0.0)
        throw Error(cat("repetition rate must be positive (got ", rep_rate_hz, " Hz)"));
}

void SecurityThresholds::validate() const {
    if (!std::isfinite(chi_max) || chi_max <= 0.0 || chi_max >= 1.0)
        throw Error(cat("chi_max must lie in (0, 1) (got ", chi_max, ")"));
    if (!std::isfinite(t_secure_db) || t_secure_db >= 0.0)
        throw Error(cat("secure attenuation target must be negative dB (got ", t_secure_db, ")"));
}

double photon_energy_j(double lambda_nm) {
    if (!std::isfinite(lambda_nm) || lambda_nm <= 0.0)
        throw Error(cat("wavelength must be positive (got ", lambda_nm, " nm)"));
    return kPlanckJs * kLightSpeedMps / (lambda_nm * 1e-9);
}

double budget_exponent(const ProbeBudget& budget, double lambda_nm) {
    budget.validate();
    const double lambda_eff =
        budget.mode == PhotonEnergyMode::kFixed1550 ? 1550.0 : lambda_nm;
    return std::log10(budget.input_power_w / (photon_energy_j(lambda_eff) * budget.rep_rate_hz));
}

double mean_photon_number(double t_db, double lambda_nm, const ProbeBudget& budget) {
    if (!std::isfinite(t_db)) throw Error("transmittance must be finite");
    if (budget.sideband_ratio == 0.0) {
        budget.validate();
        return 0.0;
    }
    return budget.sideband_ratio * std::pow(10.0, t_db / 10.0 + budget_exponent(budget, lambda_nm));
}

double binary_entropy(double x) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0)
        throw Error(cat("binary entropy argument must lie in [0, 1] (got ", x, ")"));
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

double holevo_two_state(double mu) {
    if (!std::isfinite(mu) || mu < 0.0)
        throw Error(cat("mean photon number must be >= 0 (got ", mu, ")"));
    const double overlap = std::exp(-2.0 * mu);  // |<alpha|-alpha>| for coherent states
    return binary_entropy((1.0 - overlap) / 2.0);
}

double holevo_general(const std::vector<std::vector<std::complex<double>>>& gram,
                      const std::vector<double>& probs) {
    const std::size_t n = gram.size();
    if (n == 0) throw Error("Gram matrix must not be empty");
    if (probs.size() != n)
        throw Error(cat("got ", probs.size(), " priors for ", n, " states"));
    constexpr double kTol = 1e-9;
    double psum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(probs[i]) || probs[i] < -kTol)
            throw Error(cat("prior ", i, " must be >= 0 (got ", probs[i], ")"));
        psum += probs[i];
    }
    if (std::abs(psum - 1.0) > 1e-6)
        throw Error(cat("priors must sum to 1 (got ", psum, ")"));

    Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (gram[i].size() != n) throw Error("Gram matrix must be square");
        if (std::abs(gram[i][i] - std::complex<double>(1.0, 0.0)) > kTol)
            throw Error(cat("Gram matrix diagonal entry ", i, " must be 1 (states are normalized)"));
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(gram[i][j] - std::conj(gram[j][i])) > kTol)
                throw Error(cat("Gram matrix is not Hermitian at (", i, ", ", j, ")"));
            const double w = std::sqrt(std::max(0.0, probs[i]) * std::max(0.0, probs[j]));
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w * gram[i][j];
        }
    }

    // The ensemble state's eigenvalues equal those of D^(1/2) G D^(1/2),
    // so the Holevo bound for pure states is this matrix's eigen-entropy.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    double chi = 0.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        const double ev = solver.eigenvalues()[k];
        if (ev < -1e-8) throw Error(cat("Gram matrix is not positive semidefinite (eigenvalue ", ev, ")"));
        const double lam = std::clamp(ev, 0.0, 1.0);
        if (lam > 0.0) chi -= lam * std::log2(lam);
    }
    return std::clamp(chi, 0.0, std::log2(static_cast<double>(n)));
}

InfoBoundCurve evaluate(const TransmittanceSpectrum& composite, const ProbeBudget& budget,
                        const SecurityThresholds& thresholds) {
    budget.validate();
    thresholds.validate();
    if (composite.size() == 0) throw Error("composite spectrum is empty");

    InfoBoundCurve curve;
    curve.grid = composite.grid;
    curve.t_db = composite.values_db;
    curve.mu_p.resize(composite.size());
    curve.chi.resize(composite.size());

    for (std::size_t i = 0; i < composite.size(); ++i) {
        curve.mu_p[i] = mean_photon_number(composite.values_db[i], composite.grid[i], budget);
        curve.chi[i] = std::clamp(holevo_two_state(curve.mu_p[i]), 0.0, 1.0);
    }

    for (std::size_t i = 0; i < composite.size(); ++i) {
        if (curve.chi[i] > curve.chi[curve.worst_index] ||
            (curve.chi[i] == curve.chi[curve.worst_index] && curve.mu_p[i] > curve.mu_p[curve.worst_index]))
            curve.worst_index = i;
        if (curve.t_db[i] > curve.t_db[curve.t_max_index]) curve.t_max_index = i;
        if (curve.t_db[i] < curve.t_db[curve.t_min_index]) curve.t_min_index = i;
    }

    for (std::size_t i = 0; i < composite.size();) {
        if (curve.chi[i] <= thresholds.chi_max) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < composite.size() && curve.chi[j + 1] > thresholds.chi_max) ++j;
        curve.loopholes.push_back({curve.grid[i], curve.grid[j]});
        i = j + 1;
    }
    return curve;
}

void save_curve_csv(const std::string& path, const InfoBoundCurve& curve) {
    std::string out = "wavelength_nm,t_db,mu_p,chi\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        out += format_g10(curve.grid[i]);
        out += ',';
        out += format_g6(curve.t_db[i]);
        out += ',';
        out += format_g6(curve.mu_p[i]);
        out += ',';
        out += format_g6(curve.chi[i]);
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::string report_json(const std::string& scheme_name, const InfoBoundCurve& curve,
                        const ProbeBudget& budget, const SecurityThresholds& thresholds) {
    nlohmann::ordered_json j;
    j["scheme"] = scheme_name;
    j["band_nm"] = {curve.grid.front(), curve.grid.back()};
    j["grid_points"] = curve.grid.size();
    j["budget"] = {
        {"input_power_w", budget.input_power_w},
        {"sideband_ratio", budget.sideband_ratio},
        {"rep_rate_hz", budget.rep_rate_hz},
        {"photon_energy", budget.mode == PhotonEnergyMode::kFixed1550 ? "fixed_1550" : "per_wavelength"},
        {"exceeds_power_cap", budget.exceeds_power_cap()},
    };
    j["thresholds"] = {
        {"chi_max", thresholds.chi_max},
        {"t_secure_db", thresholds.t_secure_db},
    };

    const auto point = [&](std::size_t i) {
        return nlohmann::ordered_json{
            {"wavelength_nm", curve.grid[i]},
            {"t_db", round_g6(curve.t_db[i])},
            {"mu_p", round_g6(curve.mu_p[i])},
            {"chi", round_g6(curve.chi[i])},
        };
    };
    j["worst_case"] = point(curve.worst_index);
    j["t_max"] = point(curve.t_max_index);
    j["t_min"] = point(curve.t_min_index);

    j["loopholes"] = nlohmann::ordered_json::array();
    for (const auto& l : curve.loopholes)
        j["loopholes"].push_back({{"lo_nm", l.lo_nm}, {"hi_nm", l.hi_nm}});
    j["pass"] = !curve.has_loopholes();
    return j.dump(2) + "\n";
}

}  // namespace thra
