#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "thra/components.hpp"

namespace thra {

// One element traversal in a probe path.
struct SchemeElement {
    std::string component_id;
    Leg leg = Leg::forward();
    friend bool operator==(const SchemeElement&, const SchemeElement&) = default;
};

// The dominant back-reflection that closes the double pass: either a flat
// worst-case level or a measured spectrum standing in for it.
struct ReflectionPoint {
    std::optional<double> flat_db;
    std::optional<SchemeElement> element;

    static ReflectionPoint flat(double level_db);
    static ReflectionPoint spectral(SchemeElement e);
    friend bool operator==(const ReflectionPoint&, const ReflectionPoint&) = default;
};

// Conservative default for an unknown reflection point.
inline constexpr double kDefaultReflectionDb = -40.0;

struct ProbePath {
    std::vector<SchemeElement> outbound;  // channel side first
    ReflectionPoint reflection = ReflectionPoint::flat(kDefaultReflectionDb);
    std::vector<SchemeElement> inbound;   // reflection side first
    friend bool operator==(const ProbePath&, const ProbePath&) = default;
};

// A named optical layout plus the component data it references.
struct Scheme {
    std::string name;
    ProbePath path;
    Catalog catalog;
};

// Replaces the mirror-derived return leg of one outbound element, for
// layouts where the probe returns through a different element or port pair
// (e.g. a polarizing splitter routing the return through another port).
struct MirrorOverride {
    std::size_t outbound_index = 0;
    std::optional<std::string> component_id;  // defaults to the outbound element's
    Leg leg = Leg::backward();
};

// Derives the inbound pass by reversing the outbound pass and mirroring each
// leg, applying any overrides. Every derived leg must exist in the catalog.
ProbePath build_double_pass(const Catalog& catalog, std::vector<SchemeElement> outbound,
                            ReflectionPoint reflection,
                            const std::vector<MirrorOverride>& overrides = {});

// Total double-pass transmittance: the dB sum of every outbound leg, the
// reflection, and every inbound leg, each resampled onto the target grid.
// Per-point terms are summed in a canonical order so any permutation of the
// elements within a pass yields bitwise-identical results.
TransmittanceSpectrum composite_transmittance(const Scheme& scheme, const WavelengthGrid& grid);

// Returns a copy of the scheme with a two-port countermeasure spliced in:
// forward leg at `position` in the outbound pass and backward leg at the
// matching position in the inbound pass. position == 0 is channel-facing.
Scheme apply_countermeasure(const Scheme& scheme, const Component& countermeasure,
                            std::size_t position);

// Scheme JSON: {"name", "outbound": [{"component", "leg"}...],
// "reflection": {"flat_db": x} | {"component", "leg"} (optional, defaults to
// the flat worst case), "inbound": [...] | "mirror",
// "overrides": [{"outbound_index", "component"?, "leg"}...]}.
// ref_db_override replaces the reflection with a flat level when set.
Scheme load_scheme(const std::string& path, Catalog catalog,
                   std::optional<double> ref_db_override = std::nullopt);

}  // namespace thra
