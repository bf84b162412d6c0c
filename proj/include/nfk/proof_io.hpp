#pragma once

#include "json.hpp"
#include "nfk/calculus.hpp"

namespace nfk {

// Derivation files: {"system", "axiom_set", "hypotheses": [text],
// "lines": [{"formula": text, "just": {"hyp":i} | {"axiom":{...}} | {"an":{...}} | {"mp":[j,k]}}]}.
// Scheme instances are {"scheme": name, "witnesses": {role: text}, "foralls": ["x0", ...]}.
nlohmann::json to_json(const SchemeInstance& inst);
SchemeInstance scheme_instance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Derivation& d);
// Throws CalculusError on malformed input.
Derivation derivation_from_json(const nlohmann::json& j);

}  // namespace nfk
