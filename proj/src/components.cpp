#include "thra/components.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "thra/util.hpp"

namespace thra {

namespace fs = std::filesystem;
using nlohmann::json;

Leg Leg::port_pair(int from, int to) {
    if (from < 1 || from > 9 || to < 1 || to > 9)
        throw Error(cat("port numbers must lie in 1..9 (got ", from, "->", to, ")"));
    if (from == to) throw Error(cat("port pair must connect distinct ports (got ", from, "->", to, ")"));
    return Leg(Kind::kPortPair, from, to);
}

Leg Leg::parse(const std::string& text) {
    if (text == "forward") return forward();
    if (text == "backward") return backward();
    if (text.size() == 2 && std::isdigit(static_cast<unsigned char>(text[0])) &&
        std::isdigit(static_cast<unsigned char>(text[1])))
        return port_pair(text[0] - '0', text[1] - '0');
    throw Error(cat("cannot parse leg '", text, "' (want \"forward\", \"backward\", or a port pair like \"23\")"));
}

Leg Leg::mirrored() const {
    switch (kind_) {
        case Kind::kForward: return backward();
        case Kind::kBackward: return forward();
        case Kind::kPortPair: return port_pair(to_, from_);
    }
    throw Error("unreachable leg kind");
}

std::string Leg::str() const {
    switch (kind_) {
        case Kind::kForward: return "forward";
        case Kind::kBackward: return "backward";
        case Kind::kPortPair: return cat(from_, to_);
    }
    throw Error("unreachable leg kind");
}

bool Component::has_leg(const Leg& l) const {
    if (kind == ComponentKind::kTwoPort) {
        return std::holds_alternative<DirectionalSpectra>(spectra) && l.kind() != Leg::Kind::kPortPair;
    }
    const auto* pp = std::get_if<PortPairSpectra>(&spectra);
    return pp && l.kind() == Leg::Kind::kPortPair && pp->pairs.count(l.str()) > 0;
}

const TransmittanceSpectrum& Component::leg(const Leg& l) const {
    if (kind == ComponentKind::kTwoPort) {
        if (l.kind() == Leg::Kind::kPortPair)
            throw Error(cat("component '", id, "' is two-port and has no spectrum for port pair ", l.str()));
        const auto& d = std::get<DirectionalSpectra>(spectra);
        return l.kind() == Leg::Kind::kForward ? d.forward : d.backward;
    }
    if (l.kind() != Leg::Kind::kPortPair)
        throw Error(cat("component '", id, "' is multi-port; address it by port pair, not '", l.str(), "'"));
    const auto& pp = std::get<PortPairSpectra>(spectra);
    const auto it = pp.pairs.find(l.str());
    if (it == pp.pairs.end())
        throw Error(cat("component '", id, "' has no spectrum for port pair ", l.str()));
    return it->second;
}

Component make_two_port(const std::string& id, TransmittanceSpectrum forward,
                        TransmittanceSpectrum backward) {
    if (id.empty()) throw Error("component id must not be empty");
    if (!(backward.grid == forward.grid)) {
        try {
            backward = resample(backward, forward.grid);
        } catch (const Error& e) {
            throw Error(cat("component '", id, "': cannot align backward leg with forward grid: ", e.what()));
        }
    }
    Component c;
    c.id = id;
    c.kind = ComponentKind::kTwoPort;
    c.spectra = DirectionalSpectra{std::move(forward), std::move(backward)};
    return c;
}

Component make_multi_port(const std::string& id, std::map<std::string, TransmittanceSpectrum> pairs) {
    if (id.empty()) throw Error("component id must not be empty");
    if (pairs.empty()) throw Error(cat("component '", id, "': multi-port component needs at least one port pair"));
    const WavelengthGrid& ref_grid = pairs.begin()->second.grid;
    for (auto& [key, spec] : pairs) {
        Leg::parse(key);  // validates the pair key
        if (!(spec.grid == ref_grid)) {
            try {
                spec = resample(spec, ref_grid);
            } catch (const Error& e) {
                throw Error(cat("component '", id, "': cannot align pair ", key, " with common grid: ", e.what()));
            }
        }
    }
    Component c;
    c.id = id;
    c.kind = ComponentKind::kMultiPort;
    c.spectra = PortPairSpectra{std::move(pairs)};
    return c;
}

void Catalog::add(Component c) {
    if (c.id.empty()) throw Error("component id must not be empty");
    if (components_.count(c.id)) throw Error(cat("duplicate component id '", c.id, "'"));
    components_.emplace(c.id, std::move(c));
}

bool Catalog::contains(const std::string& id) const { return components_.count(id) > 0; }

const Component& Catalog::at(const std::string& id) const {
    const auto it = components_.find(id);
    if (it == components_.end()) throw Error(cat("unknown component id '", id, "'"));
    return it->second;
}

std::vector<std::string> Catalog::ids() const {
    std::vector<std::string> out;
    out.reserve(components_.size());
    for (const auto& [id, c] : components_) out.push_back(id);
    return out;
}

// ---- synthetic models ----

namespace {

Component finish_synthetic(const std::string& id, const std::string& model,
                           const WavelengthGrid& grid, std::vector<double> values) {
    TransmittanceSpectrum forward(grid, values);
    TransmittanceSpectrum backward(grid, std::move(values));
    Component c = make_two_port(id, std::move(forward), std::move(backward));
    c.provenance = Provenance::kSynthetic;
    c.model = model;
    return c;
}

}  // namespace

Component synth_attenuator(const std::string& id, double loss_db, const WavelengthGrid& grid) {
    if (!std::isfinite(loss_db) || loss_db < 0.0)
        throw Error(cat("attenuator loss must be >= 0 dB (got ", loss_db, ")"));
    std::vector<double> v(grid.size(), -loss_db);
    return finish_synthetic(id, "attenuator", grid, std::move(v));
}

void IsolatorParams::validate() const {
    if (!std::isfinite(forward_loss_db) || forward_loss_db < 0.0)
        throw Error(cat("isolator forward loss must be >= 0 dB (got ", forward_loss_db, ")"));
    if (!std::isfinite(isolation_db) || isolation_db < 0.0)
        throw Error(cat("isolator isolation must be >= 0 dB (got ", isolation_db, ")"));
    if (!std::isfinite(rate_db_per_nm) || rate_db_per_nm < 0.0)
        throw Error(cat("isolator degradation rate must be >= 0 dB/nm (got ", rate_db_per_nm, ")"));
    if (!std::isfinite(band_center_nm) || band_center_nm <= 0.0)
        throw Error("isolator band center must be a positive wavelength");
}

Component synth_isolator(const std::string& id, const IsolatorParams& p, const WavelengthGrid& grid) {
    p.validate();
    std::vector<double> fwd(grid.size(), -p.forward_loss_db);
    std::vector<double> bwd(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double degraded = -p.isolation_db + p.rate_db_per_nm * std::abs(grid[i] - p.band_center_nm);
        bwd[i] = std::min(-p.forward_loss_db, degraded);
    }
    Component c = make_two_port(id, TransmittanceSpectrum(grid, std::move(fwd)),
                                TransmittanceSpectrum(grid, std::move(bwd)));
    c.provenance = Provenance::kSynthetic;
    c.model = "isolator";
    return c;
}

namespace {

bool windows_overlap(const SpectralWindow& a, const SpectralWindow& b) {
    return a.lo_nm <= b.hi_nm && b.lo_nm <= a.hi_nm;
}

void validate_window(const SpectralWindow& w, const WavelengthGrid& grid, const char* what) {
    if (!std::isfinite(w.lo_nm) || !std::isfinite(w.hi_nm) || w.lo_nm > w.hi_nm)
        throw Error(cat(what, " [", w.lo_nm, ", ", w.hi_nm, "] nm is not a valid interval"));
    if (w.lo_nm < grid.front() || w.hi_nm > grid.back())
        throw Error(cat(what, " [", w.lo_nm, ", ", w.hi_nm, "] nm extends outside the grid span [",
                        grid.front(), ", ", grid.back(), "] nm"));
    if (!std::isfinite(w.level_db) || w.level_db < 0.0)
        throw Error(cat(what, " level must be >= 0 dB (got ", w.level_db, ")"));
}

}  // namespace

void WdmParams::validate(const WavelengthGrid& grid) const {
    if (!std::isfinite(stop_floor_db) || stop_floor_db < 0.0)
        throw Error(cat("wdm stop floor must be >= 0 dB (got ", stop_floor_db, ")"));
    for (const auto& pb : passbands) {
        validate_window(pb, grid, "wdm passband");
        if (pb.level_db >= stop_floor_db)
            throw Error(cat("wdm passband loss ", pb.level_db, " dB must be below the stop floor ",
                            stop_floor_db, " dB"));
    }
    for (const auto& lw : leak_windows) {
        validate_window(lw, grid, "wdm leak window");
        if (lw.level_db > stop_floor_db)
            throw Error(cat("wdm leak window rejection ", lw.level_db,
                            " dB exceeds the stop floor ", stop_floor_db, " dB"));
    }
    for (const auto& pb : passbands)
        for (const auto& lw : leak_windows)
            if (windows_overlap(pb, lw))
                throw Error(cat("wdm passband [", pb.lo_nm, ", ", pb.hi_nm,
                                "] nm overlaps leak window [", lw.lo_nm, ", ", lw.hi_nm, "] nm"));
}

Component synth_wdm(const std::string& id, const WdmParams& p, const WavelengthGrid& grid) {
    p.validate(grid);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        double best = -p.stop_floor_db;
        for (const auto& pb : p.passbands)
            if (x >= pb.lo_nm && x <= pb.hi_nm) best = std::max(best, -pb.level_db);
        for (const auto& lw : p.leak_windows)
            if (x >= lw.lo_nm && x <= lw.hi_nm) best = std::max(best, -lw.level_db);
        v[i] = best;
    }
    return finish_synthetic(id, "wdm", grid, std::move(v));
}

BendLossParams BendLossParams::radius_12mm(double length_m) {
    BendLossParams p;
    p.length_m = length_m;
    return p;
}

void BendLossParams::validate() const {
    if (!std::isfinite(radius_mm) || radius_mm <= 0.0)
        throw Error(cat("bend radius must be positive (got ", radius_mm, " mm)"));
    if (!std::isfinite(length_m) || length_m < 0.0)
        throw Error(cat("bend length must be >= 0 m (got ", length_m, ")"));
    if (!std::isfinite(amplitude_db_per_m) || amplitude_db_per_m < 0.0)
        throw Error("bend loss amplitude must be >= 0 dB/m");
    if (!std::isfinite(rate_per_nm) || rate_per_nm < 0.0)
        throw Error("bend loss rate must be >= 0 per nm");
    if (!std::isfinite(knee_nm) || knee_nm <= 0.0)
        throw Error("bend loss knee must be a positive wavelength");
    if (!std::isfinite(floor_db_per_m) || floor_db_per_m < 0.0)
        throw Error("bend loss floor must be >= 0 dB/m");
    if (!std::isfinite(cap_db_per_m) || cap_db_per_m < floor_db_per_m)
        throw Error("bend loss cap must be >= the floor");
}

double bend_loss_db(double lambda_nm, const BendLossParams& p) {
    p.validate();
    if (!std::isfinite(lambda_nm) || lambda_nm <= 0.0)
        throw Error(cat("bend loss wavelength must be positive (got ", lambda_nm, " nm)"));
    const double per_m = std::min(
        p.cap_db_per_m,
        p.floor_db_per_m + p.amplitude_db_per_m * std::exp(p.rate_per_nm * (lambda_nm - p.knee_nm)));
    return p.length_m * per_m;
}

Component synth_bend_filter(const std::string& id, const BendLossParams& p, const WavelengthGrid& grid) {
    p.validate();
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = -bend_loss_db(grid[i], p);
    return finish_synthetic(id, "bend_filter", grid, std::move(v));
}

// ---- manifests ----

namespace {

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(cat("cannot open '", path, "'"));
    try {
        return json::parse(in, nullptr, true, true);  // allow comments
    } catch (const json::exception& e) {
        throw Error(cat(path, ": invalid JSON: ", e.what()));
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute() || base_dir.empty()) return rel;
    return (fs::path(base_dir) / p).string();
}

double require_number(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw Error(cat(ctx, ": missing required field '", key, "'"));
    if (!j.at(key).is_number()) throw Error(cat(ctx, ": field '", key, "' must be a number"));
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw Error(cat(ctx, ": field '", key, "' must be a number"));
    return j.at(key).get<double>();
}

TransmittanceSpectrum leg_from_json(const json& v, const std::string& base_dir, bool allow_gain,
                                    const WavelengthGrid& synth_grid, const std::string& ctx) {
    if (v.is_string()) return load_spectrum_csv(resolve_path(base_dir, v.get<std::string>()), allow_gain);
    if (v.is_number()) {
        const double level = v.get<double>();
        if (level > 0.0 && !allow_gain)
            throw Error(cat(ctx, ": inline level ", level, " dB is positive; passive data must be <= 0 dB"));
        return TransmittanceSpectrum::flat(synth_grid, level);
    }
    throw Error(cat(ctx, ": leg entries must be a CSV path or a flat dB level"));
}

Component synthesize_from_model(const std::string& id, const json& model,
                                const WavelengthGrid& grid, const std::string& ctx) {
    if (!model.contains("name") || !model.at("name").is_string())
        throw Error(cat(ctx, ": model needs a string 'name'"));
    const std::string name = model.at("name").get<std::string>();
    const json params = model.contains("params") ? model.at("params") : json::object();
    if (!params.is_object()) throw Error(cat(ctx, ": model 'params' must be an object"));

    if (name == "attenuator") {
        return synth_attenuator(id, require_number(params, "loss_db", ctx), grid);
    }
    if (name == "isolator") {
        IsolatorParams p;
        p.forward_loss_db = number_or(params, "forward_loss_db", p.forward_loss_db, ctx);
        p.isolation_db = number_or(params, "isolation_db", p.isolation_db, ctx);
        p.rate_db_per_nm = number_or(params, "rate_db_per_nm", p.rate_db_per_nm, ctx);
        p.band_center_nm = number_or(params, "band_center_nm", p.band_center_nm, ctx);
        return synth_isolator(id, p, grid);
    }
    if (name == "wdm") {
        WdmParams p;
        p.stop_floor_db = number_or(params, "stop_floor_db", p.stop_floor_db, ctx);
        auto read_windows = [&](const char* key, const char* level_key) {
            std::vector<SpectralWindow> out;
            if (!params.contains(key)) return out;
            if (!params.at(key).is_array()) throw Error(cat(ctx, ": '", key, "' must be an array"));
            for (const auto& w : params.at(key)) {
                if (!w.is_object()) throw Error(cat(ctx, ": entries of '", key, "' must be objects"));
                SpectralWindow win;
                win.lo_nm = require_number(w, "lo_nm", ctx);
                win.hi_nm = require_number(w, "hi_nm", ctx);
                win.level_db = require_number(w, level_key, ctx);
                out.push_back(win);
            }
            return out;
        };
        p.passbands = read_windows("passbands", "loss_db");
        p.leak_windows = read_windows("leak_windows", "leak_db");
        return synth_wdm(id, p, grid);
    }
    if (name == "bend_filter") {
        const double radius = number_or(params, "radius_mm", 12.0, ctx);
        BendLossParams p;
        if (radius == 12.0) {
            p = BendLossParams::radius_12mm(number_or(params, "length_m", 1.0, ctx));
            p.amplitude_db_per_m = number_or(params, "amplitude_db_per_m", p.amplitude_db_per_m, ctx);
            p.rate_per_nm = number_or(params, "rate_per_nm", p.rate_per_nm, ctx);
            p.knee_nm = number_or(params, "knee_nm", p.knee_nm, ctx);
            p.floor_db_per_m = number_or(params, "floor_db_per_m", p.floor_db_per_m, ctx);
        } else {
            const char* needed[] = {"amplitude_db_per_m", "rate_per_nm", "knee_nm", "floor_db_per_m"};
            for (const char* key : needed)
                if (!params.contains(key))
                    throw Error(cat(ctx, ": bend radius ", radius,
                                    " mm has no shipped calibration; supply '", key, "' explicitly"));
            p.radius_mm = radius;
            p.length_m = number_or(params, "length_m", 1.0, ctx);
            p.amplitude_db_per_m = require_number(params, "amplitude_db_per_m", ctx);
            p.rate_per_nm = require_number(params, "rate_per_nm", ctx);
            p.knee_nm = require_number(params, "knee_nm", ctx);
            p.floor_db_per_m = require_number(params, "floor_db_per_m", ctx);
        }
        p.cap_db_per_m = number_or(params, "cap_db_per_m", p.cap_db_per_m, ctx);
        return synth_bend_filter(id, p, grid);
    }
    throw Error(cat(ctx, ": unknown model '", name,
                    "' (known: attenuator, isolator, wdm, bend_filter)"));
}

Component component_from_json(const json& j, const std::string& base_dir,
                              const WavelengthGrid& synth_grid, const std::string& ctx) {
    if (!j.is_object()) throw Error(cat(ctx, ": component manifest must be a JSON object"));
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
        throw Error(cat(ctx, ": component manifest needs a non-empty string 'id'"));
    const std::string id = j.at("id").get<std::string>();
    const bool has_legs = j.contains("legs");
    const bool has_model = j.contains("model");
    if (has_legs == has_model)
        throw Error(cat(ctx, ": component '", id, "' must define exactly one of 'legs' or 'model'"));
    const bool allow_gain = j.value("gain_allowed", false);

    Component c;
    if (has_model) {
        c = synthesize_from_model(id, j.at("model"), synth_grid, ctx);
    } else {
        const json& legs = j.at("legs");
        if (!legs.is_object()) throw Error(cat(ctx, ": 'legs' must be an object"));
        if (legs.contains("pairs")) {
            const json& pairs = legs.at("pairs");
            if (!pairs.is_object() || pairs.empty())
                throw Error(cat(ctx, ": component '", id, "' needs a non-empty 'pairs' object"));
            std::map<std::string, TransmittanceSpectrum> loaded;
            for (const auto& [key, v] : pairs.items()) {
                Leg::parse(key);
                loaded.emplace(key, leg_from_json(v, base_dir, allow_gain, synth_grid,
                                                  cat(ctx, ": component '", id, "' pair ", key)));
            }
            c = make_multi_port(id, std::move(loaded));
        } else {
            if (!legs.contains("forward"))
                throw Error(cat(ctx, ": component '", id, "': forward spectrum missing"));
            if (!legs.contains("backward"))
                throw Error(cat(ctx, ": component '", id, "': backward spectrum missing"));
            auto fwd = leg_from_json(legs.at("forward"), base_dir, allow_gain, synth_grid,
                                     cat(ctx, ": component '", id, "' forward leg"));
            auto bwd = leg_from_json(legs.at("backward"), base_dir, allow_gain, synth_grid,
                                     cat(ctx, ": component '", id, "' backward leg"));
            c = make_two_port(id, std::move(fwd), std::move(bwd));
        }
    }

    if (j.contains("kind")) {
        const std::string kind = j.at("kind").get<std::string>();
        const bool want_multi = (kind == "multi_port");
        if (!want_multi && kind != "two_port")
            throw Error(cat(ctx, ": component '", id, "': unknown kind '", kind, "'"));
        if (want_multi != (c.kind == ComponentKind::kMultiPort))
            throw Error(cat(ctx, ": component '", id, "': declared kind '", kind,
                            "' does not match its legs"));
    }
    if (j.contains("provenance")) {
        const std::string prov = j.at("provenance").get<std::string>();
        if (prov == "measured") c.provenance = Provenance::kMeasured;
        else if (prov == "synthetic") c.provenance = Provenance::kSynthetic;
        else throw Error(cat(ctx, ": component '", id, "': unknown provenance '", prov, "'"));
        if (has_model && c.provenance != Provenance::kSynthetic)
            throw Error(cat(ctx, ": component '", id, "': model-generated data must be marked synthetic"));
    }
    return c;
}

}  // namespace

Component load_component_manifest(const std::string& path, const WavelengthGrid& synth_grid) {
    const json j = parse_json_file(path);
    const std::string base_dir = fs::path(path).parent_path().string();
    return component_from_json(j, base_dir, synth_grid, path);
}

Component parse_component_manifest(const std::string& json_text, const std::string& base_dir,
                                   const WavelengthGrid& synth_grid, const std::string& ctx) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw Error(cat(ctx, ": invalid JSON: ", e.what()));
    }
    return component_from_json(j, base_dir, synth_grid, ctx);
}

Catalog load_component_set(const std::string& path, const WavelengthGrid& synth_grid) {
    const json j = parse_json_file(path);
    if (!j.is_object() || !j.contains("components") || !j.at("components").is_array())
        throw Error(cat(path, ": component set must be an object with a 'components' array"));
    const std::string base_dir = fs::path(path).parent_path().string();
    Catalog catalog;
    for (const auto& entry : j.at("components")) {
        if (entry.is_string()) {
            catalog.add(load_component_manifest(resolve_path(base_dir, entry.get<std::string>()), synth_grid));
        } else {
            catalog.add(component_from_json(entry, base_dir, synth_grid, path));
        }
    }
    if (catalog.size() == 0) throw Error(cat(path, ": component set is empty"));
    return catalog;
}

}  // namespace thra
