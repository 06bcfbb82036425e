#pragma once

// JSON encoding of potentials, correctors and reports.

#include <json.hpp>

#include "homlab/correctors.hpp"
#include "homlab/pdesolve.hpp"
#include "homlab/potential.hpp"
#include "homlab/regimes.hpp"

namespace homlab {

using Json = nlohmann::ordered_json;

/// Reads a mode list [{"m": [..], "n": int, "re": x, "im": y}, ...]. The
/// dimension comes from `dim` when positive, otherwise from the first mode
/// (1 for an empty list). Hermitian partners are completed.
TrigField parse_modes(const Json& modes, int dim = 0);

Json to_json(const TrigField& f);
Json to_json(const ScalarSeries& s);
Json to_json(const SpatialField& f);
Json to_json(const RegimeSpec& r);
Json to_json(const EffectivePotential& e);
Json to_json(const IdentityReport& r);
Json to_json(const GridSpec& g);
Json to_json(const SourceDescriptor& f);
Json to_json(const InitialDescriptor& g);

}  // namespace homlab
