#include "nfk/proof_io.hpp"

namespace nfk {

using nlohmann::json;

namespace {

uint32_t var_from_text(const std::string& s) {
  Formula f = parse(s);
  if (f.op() != Op::Var) throw CalculusError("expected a variable, got '" + s + "'");
  return f.var_index();
}

Formula formula_from(const json& j) {
  if (!j.is_string()) throw CalculusError("formula must be a string");
  try {
    return parse(j.get<std::string>());
  } catch (const ParseError& e) {
    throw CalculusError(std::string("bad formula: ") + e.what());
  }
}

}  // namespace

json to_json(const SchemeInstance& inst) {
  json w = json::object();
  for (const auto& [role, f] : inst.witnesses) w[role] = render(f);
  json fa = json::array();
  for (uint32_t x : inst.foralls) fa.push_back(render(Formula::var(x)));
  return {{"scheme", scheme_name(inst.scheme)}, {"witnesses", w}, {"foralls", fa}};
}

SchemeInstance scheme_instance_from_json(const json& j) {
  if (!j.is_object()) throw CalculusError("scheme instance must be an object");
  SchemeInstance inst;
  inst.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  if (j.contains("witnesses")) {
    const json& w = j.at("witnesses");
    if (!w.is_object()) throw CalculusError("witnesses must be an object of role: formula");
    for (const auto& [role, f] : w.items()) inst.witnesses[role] = formula_from(f);
  }
  if (j.contains("foralls"))
    for (const auto& x : j.at("foralls")) inst.foralls.push_back(var_from_text(x.get<std::string>()));
  return inst;
}

json to_json(const Derivation& d) {
  json hyps = json::array();
  for (const auto& h : d.hypotheses) hyps.push_back(render(h));
  json lines = json::array();
  for (const auto& ln : d.lines) {
    json just;
    switch (ln.just.kind) {
      case Justification::Kind::Hyp: just = {{"hyp", ln.just.hyp}}; break;
      case Justification::Kind::Axiom: just = {{"axiom", to_json(ln.just.inst)}}; break;
      case Justification::Kind::AN: just = {{"an", to_json(ln.just.inst)}}; break;
      case Justification::Kind::MP: just = {{"mp", {ln.just.j, ln.just.k}}}; break;
    }
    lines.push_back({{"formula", render(ln.formula)}, {"just", just}});
  }
  return {{"system", d.system}, {"axiom_set", to_string(d.axioms)}, {"hypotheses", hyps}, {"lines", lines}};
}

Derivation derivation_from_json(const json& j) {
  Derivation d;
  try {
    d.system = j.at("system").get<int>();
    if (d.system < 3 || d.system > 5) throw CalculusError("system must be 3, 4 or 5");
    d.axioms = axiom_set_from_name(j.value("axiom_set", std::string("full")));
    for (const auto& h : j.value("hypotheses", json::array())) d.hypotheses.push_back(formula_from(h));
    for (const auto& ln : j.at("lines")) {
      Line line;
      line.formula = formula_from(ln.at("formula"));
      const json& just = ln.at("just");
      if (!just.is_object() || just.size() != 1) throw CalculusError("just must have exactly one key");
      if (just.contains("hyp")) {
        line.just = Justification::hypothesis(just["hyp"].get<int>());
      } else if (just.contains("axiom")) {
        line.just = Justification::axiom(scheme_instance_from_json(just["axiom"]));
      } else if (just.contains("an")) {
        line.just = Justification::an(scheme_instance_from_json(just["an"]));
      } else if (just.contains("mp")) {
        const json& mp = just["mp"];
        if (!mp.is_array() || mp.size() != 2) throw CalculusError("mp takes [j, k]");
        line.just = Justification::mp(mp[0].get<int>(), mp[1].get<int>());
      } else {
        throw CalculusError("unknown justification " + just.begin().key());
      }
      d.lines.push_back(std::move(line));
    }
  } catch (const json::exception& e) {
    throw CalculusError(std::string("malformed derivation file: ") + e.what());
  }
  return d;
}

}  // namespace nfk
