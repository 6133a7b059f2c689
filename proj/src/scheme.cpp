#include "thra/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "thra/util.hpp"

namespace thra {

using nlohmann::json;

ReflectionPoint ReflectionPoint::flat(double level_db) {
    if (!std::isfinite(level_db)) throw Error("reflection level must be finite");
    ReflectionPoint r;
    r.flat_db = level_db;
    return r;
}

ReflectionPoint ReflectionPoint::spectral(SchemeElement e) {
    ReflectionPoint r;
    r.element = std::move(e);
    return r;
}

namespace {

// Resolves an element against the catalog, surfacing which element failed.
const TransmittanceSpectrum& resolve_leg(const Catalog& catalog, const SchemeElement& e) {
    return catalog.at(e.component_id).leg(e.leg);
}

}  // namespace

ProbePath build_double_pass(const Catalog& catalog, std::vector<SchemeElement> outbound,
                            ReflectionPoint reflection, const std::vector<MirrorOverride>& overrides) {
    for (const auto& e : outbound) resolve_leg(catalog, e);  // outbound legs must exist
    if (reflection.flat_db.has_value() == reflection.element.has_value())
        throw Error("reflection must be either a flat level or a spectral element");
    if (reflection.element) resolve_leg(catalog, *reflection.element);

    std::vector<SchemeElement> inbound(outbound.size());
    std::vector<bool> overridden(outbound.size(), false);
    for (const auto& ov : overrides) {
        if (ov.outbound_index >= outbound.size())
            throw Error(cat("override index ", ov.outbound_index, " out of range for ",
                            outbound.size(), " outbound elements"));
        if (overridden[ov.outbound_index])
            throw Error(cat("duplicate override for outbound index ", ov.outbound_index));
        overridden[ov.outbound_index] = true;
    }
    std::fill(overridden.begin(), overridden.end(), false);
    for (const auto& ov : overrides) {
        overridden[ov.outbound_index] = true;
        SchemeElement e;
        e.component_id = ov.component_id ? *ov.component_id : outbound[ov.outbound_index].component_id;
        e.leg = ov.leg;
        resolve_leg(catalog, e);
        inbound[outbound.size() - 1 - ov.outbound_index] = std::move(e);
    }
    for (std::size_t i = 0; i < outbound.size(); ++i) {
        if (overridden[i]) continue;
        SchemeElement e;
        e.component_id = outbound[i].component_id;
        e.leg = outbound[i].leg.mirrored();
        try {
            resolve_leg(catalog, e);
        } catch (const Error& err) {
            throw Error(cat("outbound element ", i, " has no usable return leg: ", err.what()));
        }
        inbound[outbound.size() - 1 - i] = std::move(e);
    }

    ProbePath path;
    path.outbound = std::move(outbound);
    path.reflection = std::move(reflection);
    path.inbound = std::move(inbound);
    return path;
}

TransmittanceSpectrum composite_transmittance(const Scheme& scheme, const WavelengthGrid& grid) {
    const auto& path = scheme.path;
    if (path.reflection.flat_db.has_value() == path.reflection.element.has_value())
        throw Error("reflection must be either a flat level or a spectral element");

    std::vector<std::vector<double>> terms;
    std::vector<std::optional<std::vector<double>>> term_uncs;
    auto add_element = [&](const SchemeElement& e) {
        try {
            const TransmittanceSpectrum r = resample(resolve_leg(scheme.catalog, e), grid);
            terms.push_back(r.values_db);
            term_uncs.push_back(r.uncertainty_db);
        } catch (const Error& err) {
            throw Error(cat("component '", e.component_id, "' leg ", e.leg.str(), ": ", err.what()));
        }
    };
    for (const auto& e : path.outbound) add_element(e);
    if (path.reflection.element) {
        add_element(*path.reflection.element);
    } else {
        terms.push_back(std::vector<double>(grid.size(), *path.reflection.flat_db));
        term_uncs.push_back(std::nullopt);
    }
    for (const auto& e : path.inbound) add_element(e);

    const bool with_unc =
        std::all_of(term_uncs.begin(), term_uncs.end(), [](const auto& u) { return u.has_value(); });

    std::vector<double> values(grid.size());
    std::optional<std::vector<double>> unc;
    if (with_unc) unc = std::vector<double>(grid.size());
    std::vector<double> scratch(terms.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t t = 0; t < terms.size(); ++t) scratch[t] = terms[t][i];
        // Canonical (sorted) summation makes the result independent of the
        // order elements were listed in, bit for bit.
        std::sort(scratch.begin(), scratch.end());
        double sum = 0.0;
        for (const double v : scratch) sum += v;
        values[i] = sum;
        if (with_unc) {
            double q = 0.0;
            std::vector<double> squares(terms.size());
            for (std::size_t t = 0; t < terms.size(); ++t) {
                const double u = (*term_uncs[t])[i];
                squares[t] = u * u;
            }
            std::sort(squares.begin(), squares.end());
            for (const double s : squares) q += s;
            (*unc)[i] = std::sqrt(q);
        }
    }
    return TransmittanceSpectrum(grid, std::move(values), std::move(unc));
}

Scheme apply_countermeasure(const Scheme& scheme, const Component& countermeasure,
                            std::size_t position) {
    if (countermeasure.kind != ComponentKind::kTwoPort)
        throw Error(cat("countermeasure '", countermeasure.id,
                        "' must be a two-port component"));
    if (position > scheme.path.outbound.size())
        throw Error(cat("countermeasure position ", position, " out of range for ",
                        scheme.path.outbound.size(), " outbound elements"));

    Scheme out = scheme;
    if (!out.catalog.contains(countermeasure.id)) {
        out.catalog.add(countermeasure);
    } else if (!(out.catalog.at(countermeasure.id) == countermeasure)) {
        throw Error(cat("scheme already contains a different component with id '",
                        countermeasure.id, "'"));
    }

    SchemeElement fwd{countermeasure.id, Leg::forward()};
    SchemeElement bwd{countermeasure.id, Leg::backward()};
    out.path.outbound.insert(out.path.outbound.begin() + static_cast<std::ptrdiff_t>(position),
                             std::move(fwd));
    const std::size_t in_pos = out.path.inbound.size() - std::min(position, out.path.inbound.size());
    out.path.inbound.insert(out.path.inbound.begin() + static_cast<std::ptrdiff_t>(in_pos),
                            std::move(bwd));
    return out;
}

namespace {

SchemeElement element_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("component") || !j.contains("leg"))
        throw Error(cat(ctx, ": path elements need 'component' and 'leg' fields"));
    SchemeElement e;
    e.component_id = j.at("component").get<std::string>();
    e.leg = Leg::parse(j.at("leg").get<std::string>());
    return e;
}

}  // namespace

Scheme load_scheme(const std::string& path, Catalog catalog, std::optional<double> ref_db_override) {
    std::ifstream in(path);
    if (!in) throw Error(cat("cannot open '", path, "'"));
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw Error(cat(path, ": invalid JSON: ", e.what()));
    }
    if (!j.is_object()) throw Error(cat(path, ": scheme must be a JSON object"));
    if (!j.contains("name") || !j.at("name").is_string())
        throw Error(cat(path, ": scheme needs a string 'name'"));

    std::vector<SchemeElement> outbound;
    if (j.contains("outbound")) {
        if (!j.at("outbound").is_array()) throw Error(cat(path, ": 'outbound' must be an array"));
        for (const auto& e : j.at("outbound")) outbound.push_back(element_from_json(e, path));
    }

    ReflectionPoint reflection = ReflectionPoint::flat(kDefaultReflectionDb);
    if (j.contains("reflection")) {
        const json& r = j.at("reflection");
        if (r.is_object() && r.contains("flat_db")) {
            reflection = ReflectionPoint::flat(r.at("flat_db").get<double>());
        } else if (r.is_object() && r.contains("component")) {
            reflection = ReflectionPoint::spectral(element_from_json(r, path));
        } else {
            throw Error(cat(path, ": 'reflection' must carry 'flat_db' or a component/leg pair"));
        }
    }
    if (ref_db_override) reflection = ReflectionPoint::flat(*ref_db_override);

    std::vector<MirrorOverride> overrides;
    if (j.contains("overrides")) {
        if (!j.at("overrides").is_array()) throw Error(cat(path, ": 'overrides' must be an array"));
        for (const auto& o : j.at("overrides")) {
            MirrorOverride ov;
            if (!o.is_object() || !o.contains("outbound_index") || !o.contains("leg"))
                throw Error(cat(path, ": overrides need 'outbound_index' and 'leg'"));
            ov.outbound_index = o.at("outbound_index").get<std::size_t>();
            if (o.contains("component")) ov.component_id = o.at("component").get<std::string>();
            ov.leg = Leg::parse(o.at("leg").get<std::string>());
            overrides.push_back(std::move(ov));
        }
    }

    Scheme scheme;
    scheme.name = j.at("name").get<std::string>();

    const bool mirror = !j.contains("inbound") ||
                        (j.at("inbound").is_string() && j.at("inbound").get<std::string>() == "mirror");
    try {
        if (mirror) {
            scheme.path = build_double_pass(catalog, std::move(outbound), reflection, overrides);
        } else {
            if (!overrides.empty())
                throw Error("'overrides' only apply when 'inbound' is \"mirror\"");
            if (!j.at("inbound").is_array())
                throw Error("'inbound' must be an array or the string \"mirror\"");
            ProbePath p;
            p.outbound = std::move(outbound);
            p.reflection = reflection;
            for (const auto& e : j.at("inbound")) p.inbound.push_back(element_from_json(e, path));
            for (const auto& e : p.outbound) catalog.at(e.component_id).leg(e.leg);
            for (const auto& e : p.inbound) catalog.at(e.component_id).leg(e.leg);
            if (p.reflection.element) catalog.at(p.reflection.element->component_id).leg(p.reflection.element->leg);
            scheme.path = std::move(p);
        }
    } catch (const Error& e) {
        throw Error(cat(path, ": ", e.what()));
    }
    scheme.catalog = std::move(catalog);
    return scheme;
}

}  // namespace thra
