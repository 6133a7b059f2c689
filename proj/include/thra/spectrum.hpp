#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "thra/errors.hpp"

namespace thra {

// Wavelengths in nanometers: finite, positive, strictly increasing.
class WavelengthGrid {
public:
    WavelengthGrid() = default;
    explicit WavelengthGrid(std::vector<double> points_nm);

    static WavelengthGrid uniform(double lo_nm, double hi_nm, double step_nm);
    // 1500-2100 nm at 1 nm pitch, the band the analysis tools default to.
    static WavelengthGrid analysis_default();

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }
    bool contains(double lambda_nm) const;

    friend bool operator==(const WavelengthGrid&, const WavelengthGrid&) = default;

private:
    std::vector<double> points_;
};

// Transmittance in dB on a wavelength grid, optionally with a 1-sigma
// uncertainty per point. dB is the canonical unit throughout the library;
// conversion to linear happens only where photon numbers are computed.
struct TransmittanceSpectrum {
    TransmittanceSpectrum() = default;
    TransmittanceSpectrum(WavelengthGrid grid, std::vector<double> values_db,
                          std::optional<std::vector<double>> uncertainty_db = std::nullopt);

    static TransmittanceSpectrum flat(const WavelengthGrid& grid, double level_db);

    std::size_t size() const { return values_db.size(); }

    WavelengthGrid grid;
    std::vector<double> values_db;
    std::optional<std::vector<double>> uncertainty_db;

    friend bool operator==(const TransmittanceSpectrum&, const TransmittanceSpectrum&) = default;
};

// One monochromator sweep of a device under test: reference arm intensity,
// measured intensity behind the device, and the neutral filter transmission
// used to keep the detector in range. All linear, all strictly positive.
struct RawScan {
    RawScan(WavelengthGrid grid, std::vector<double> i_ref, std::vector<double> i_mes,
            std::vector<double> t_f);

    WavelengthGrid grid;
    std::vector<double> i_ref;
    std::vector<double> i_mes;
    std::vector<double> t_f;
};

double db_to_linear(double value_db);
double linear_to_db(double ratio);

// Per point: t_db = -10*log10(i_ref*t_f/i_mes). A device that attenuates
// yields negative dB; apparent gain comes out positive and is not clamped.
TransmittanceSpectrum reduce_raw_scan(const RawScan& raw);

struct ResamplePolicy {
    enum class OutOfRange { kError, kClampToEdge, kFill };
    OutOfRange mode = OutOfRange::kError;
    double fill_db = 0.0;
    static ResamplePolicy error() { return {}; }
    static ResamplePolicy clamp_to_edge() { return {OutOfRange::kClampToEdge, 0.0}; }
    static ResamplePolicy fill(double level_db) { return {OutOfRange::kFill, level_db}; }
};

// Linear interpolation onto a target grid. Points that coincide with source
// points are copied bitwise; out-of-span points follow the policy.
TransmittanceSpectrum resample(const TransmittanceSpectrum& s, const WavelengthGrid& target,
                               const ResamplePolicy& policy = {});

// Pointwise dB sum (cascade of elements). Grids must match exactly;
// uncertainties combine in quadrature when both operands carry them.
TransmittanceSpectrum add_db(const TransmittanceSpectrum& a, const TransmittanceSpectrum& b);

// CSV with header `wavelength_nm,transmittance_db[,uncertainty_db]`.
// Lines starting with '#' are comments. Positive dB values are rejected
// unless allow_gain is set, to catch sign slips in measured data.
TransmittanceSpectrum load_spectrum_csv(const std::string& path, bool allow_gain = false);
void save_spectrum_csv(const std::string& path, const TransmittanceSpectrum& s);

// CSV with header `wavelength_nm,i_ref,i_mes,t_f`.
RawScan load_raw_scan_csv(const std::string& path);

}  // namespace thra
