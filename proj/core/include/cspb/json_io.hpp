#pragma once

#include <string>

#include "json.hpp"

#include "cspb/canonical.hpp"
#include "cspb/datalog.hpp"
#include "cspb/pathscape.hpp"
#include "cspb/succ_ro.hpp"

namespace cspb {

using Json = nlohmann::json;

// Shared machine format: every document carries format = 1 and a kind tag.
Json envelope(const std::string& kind);
void check_envelope(const Json& doc, const std::string& kind);

Json derivation_to_json(const Derivation& d);
Derivation derivation_from_json(const Json& doc);

Json mnbp_to_json(const Mnbp& h);
Mnbp mnbp_from_json(const Json& doc);

Json zigzag_to_json(const ZigzagResult& z);

// The subscript sets behind a canonical program's IDB names.
Json canonical_signature_to_json(const CanonicalProgram& cp);

} // namespace cspb
