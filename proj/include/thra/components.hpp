#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "thra/spectrum.hpp"

namespace thra {

// Which way a probe traverses a component: one of the two directions of a
// two-port element, or an ordered port pair of a multi-port element.
class Leg {
public:
    enum class Kind { kForward, kBackward, kPortPair };

    static Leg forward() { return Leg(Kind::kForward, 0, 0); }
    static Leg backward() { return Leg(Kind::kBackward, 0, 0); }
    static Leg port_pair(int from, int to);
    // Accepts "forward", "backward", or a two-digit pair such as "23".
    static Leg parse(const std::string& text);

    Kind kind() const { return kind_; }
    int from() const { return from_; }
    int to() const { return to_; }

    // forward <-> backward; port pair i->j becomes j->i.
    Leg mirrored() const;
    std::string str() const;

    friend bool operator==(const Leg&, const Leg&) = default;

private:
    Leg(Kind k, int f, int t) : kind_(k), from_(f), to_(t) {}
    Kind kind_ = Kind::kForward;
    int from_ = 0;
    int to_ = 0;
};

struct DirectionalSpectra {
    TransmittanceSpectrum forward;
    TransmittanceSpectrum backward;
    friend bool operator==(const DirectionalSpectra&, const DirectionalSpectra&) = default;
};

struct PortPairSpectra {
    // Keyed by Leg::str() of the pair, e.g. "12", "23", "31".
    std::map<std::string, TransmittanceSpectrum> pairs;
    friend bool operator==(const PortPairSpectra&, const PortPairSpectra&) = default;
};

enum class ComponentKind { kTwoPort, kMultiPort };
enum class Provenance { kMeasured, kSynthetic };

struct Component {
    std::string id;
    ComponentKind kind = ComponentKind::kTwoPort;
    std::variant<DirectionalSpectra, PortPairSpectra> spectra;
    Provenance provenance = Provenance::kMeasured;
    std::string model;  // synthetic model name, empty for measured data

    bool has_leg(const Leg& leg) const;
    const TransmittanceSpectrum& leg(const Leg& leg) const;  // throws if absent

    friend bool operator==(const Component&, const Component&) = default;
};

// Builds a two-port component from per-direction spectra. Spectra on
// different grids are resampled onto the forward grid (error policy).
Component make_two_port(const std::string& id, TransmittanceSpectrum forward,
                        TransmittanceSpectrum backward);
Component make_multi_port(const std::string& id,
                          std::map<std::string, TransmittanceSpectrum> pairs);

class Catalog {
public:
    void add(Component c);  // rejects duplicate ids
    bool contains(const std::string& id) const;
    const Component& at(const std::string& id) const;
    std::vector<std::string> ids() const;
    std::size_t size() const { return components_.size(); }

private:
    std::map<std::string, Component> components_;
};

// ---- synthetic models ----
// All synthetic spectra are generated as loss (values <= 0) on the given
// grid, with identical forward and backward legs unless noted.

Component synth_attenuator(const std::string& id, double loss_db, const WavelengthGrid& grid);

struct IsolatorParams {
    double forward_loss_db = 1.0;      // flat insertion loss
    double isolation_db = 50.0;        // reverse isolation at band center
    double rate_db_per_nm = 0.05;      // linear isolation decay away from center
    double band_center_nm = 1550.0;
    void validate() const;
};

// Forward: flat -forward_loss_db. Backward: isolation degrades linearly with
// wavelength above the band center, capped so it never beats the forward leg.
Component synth_isolator(const std::string& id, const IsolatorParams& params,
                         const WavelengthGrid& grid);

struct SpectralWindow {
    double lo_nm = 0.0;
    double hi_nm = 0.0;
    double level_db = 0.0;  // loss magnitude inside the window, >= 0
};

struct WdmParams {
    std::vector<SpectralWindow> passbands;     // level_db = passband insertion loss
    double stop_floor_db = 40.0;               // rejection outside all windows
    std::vector<SpectralWindow> leak_windows;   // level_db = residual rejection
    void validate(const WavelengthGrid& grid) const;
};

// Piecewise-flat add/drop filter: -level_db inside passbands and leak
// windows, -stop_floor_db elsewhere. Overlapping windows of the same kind
// take the more transparent value; a passband overlapping a leak window is
// rejected. Intervals are closed.
Component synth_wdm(const std::string& id, const WdmParams& params, const WavelengthGrid& grid);

struct BendLossParams {
    double radius_mm = 12.0;
    double length_m = 1.0;
    // loss per metre: min(cap, floor + amplitude * exp(rate * (lambda - knee)))
    double amplitude_db_per_m = 31.0;
    double rate_per_nm = 0.02;
    double knee_nm = 1830.0;
    double floor_db_per_m = 0.05;
    double cap_db_per_m = 60.0;

    // Shipped calibration for 12 mm radius windings; other radii need
    // user-supplied curve parameters.
    static BendLossParams radius_12mm(double length_m = 1.0);
    void validate() const;
};

// Positive loss magnitude in dB at one wavelength for the whole length.
double bend_loss_db(double lambda_nm, const BendLossParams& params);

Component synth_bend_filter(const std::string& id, const BendLossParams& params,
                            const WavelengthGrid& grid);

// ---- manifests ----
// A component manifest is JSON: {"id", "kind": "two_port"|"multi_port",
// and either "legs" (file paths or inline levels) or "model" (synthetic)}.
Component load_component_manifest(const std::string& path, const WavelengthGrid& synth_grid);

// Same schema from an in-memory JSON document; base_dir anchors relative
// CSV paths and ctx names the source in error messages.
Component parse_component_manifest(const std::string& json_text, const std::string& base_dir,
                                   const WavelengthGrid& synth_grid, const std::string& ctx);

// A component set is JSON {"components": [...]} where each entry is a
// manifest path (resolved relative to the set file) or an inline manifest.
Catalog load_component_set(const std::string& path, const WavelengthGrid& synth_grid);

}  // namespace thra
