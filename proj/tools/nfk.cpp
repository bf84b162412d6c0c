#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nfk/calculus.hpp"
#include "nfk/formula.hpp"
#include "nfk/kripke.hpp"
#include "nfk/model.hpp"
#include "nfk/prealgebra.hpp"
#include "nfk/proof_io.hpp"
#include "nfk/substitution.hpp"

using nlohmann::json;
using namespace nfk;

namespace {

struct RunConfig {
  int system = 3;
  std::string axioms = "full";
  int nmax = 3;
  int depth = 3;
  int arity = 2;
  int samples = 500;
  uint64_t seed = 1;
  std::string format = "human";
  bool dedupe = false;
  std::string output;
};

// Failure of the checked object (exit 1), as opposed to bad input (exit 2).
struct Outcome {
  std::vector<json> records;
  bool ok = true;
  void add(json r) { records.push_back(std::move(r)); }
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Inline JSON text or a path to a JSON file.
json json_arg(const std::string& s) {
  if (s.empty()) return json::object();
  if (s.front() == '{' || s.front() == '[') {
    try {
      return json::parse(s);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("bad inline JSON: ") + e.what());
    }
  }
  return read_json_file(s);
}

void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void print_human(const json& r, std::ostream& os) {
  os << r.value("kind", std::string("record")) << ":";
  for (const auto& [k, v] : r.items()) {
    if (k == "kind") continue;
    os << "\n  " << k << ": ";
    if (v.is_string()) os << v.get<std::string>();
    else os << v.dump();
  }
  os << "\n";
}

void emit(const Outcome& out, const RunConfig& cfg) {
  for (const auto& r : out.records) {
    if (cfg.format == "json") std::cout << r.dump() << "\n";
    else print_human(r, std::cout);
  }
}

Assignment assignment_arg(const std::string& s) {
  return s.empty() ? Assignment{} : assignment_from_json(json_arg(s));
}

json report_json(const char* kind, const ValidationReport& r) {
  return {{"kind", kind}, {"ok", r.ok}, {"violated", r.violated}, {"notes", r.notes}};
}

json model_report_json(const ModelReport& r) {
  json j = report_json("model-validation", r);
  j["normal"] = r.normal;
  j["arity"] = r.arity;
  j["definable_unary"] = r.definable_unary;
  return j;
}

json derivation_record(const Derivation& d) {
  CheckReport c = check_derivation(d);
  return {{"kind", "derivation"},
          {"ok", c.ok},
          {"lines", d.lines.size()},
          {"conclusion", d.lines.empty() ? std::string() : render(d.conclusion())},
          {"derivation", to_json(d)}};
}

// --axioms and --system fill in fields the file leaves out.
std::vector<Derivation> read_derivations(const std::string& path, const RunConfig& cfg) {
  json j = read_json_file(path);
  if (!j.is_array()) j = json::array({j});
  std::vector<Derivation> out;
  for (auto& e : j) {
    if (e.is_object() && !e.contains("axiom_set")) e["axiom_set"] = cfg.axioms;
    if (e.is_object() && !e.contains("system")) e["system"] = cfg.system;
    out.push_back(derivation_from_json(e));
  }
  return out;
}

int64_t budget_ms() {
  const char* s = std::getenv("NFK_BUDGET_MS");
  if (!s || !*s) return -1;
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw UsageError("NFK_BUDGET_MS must be an integer");
  }
}

std::string expect_name(Expect e) { return e == Expect::Theorem ? "theorem" : "non-theorem"; }

std::vector<CorpusItem> default_corpus(int system) {
  auto item = [](const char* text, Expect e) { return CorpusItem{parse(text), e}; };
  std::vector<CorpusItem> c{
      item("[]x0 -> x0", Expect::Theorem),
      item("[](x0 -> x1) -> ([]x0 -> []x1)", Expect::Theorem),
      item("[](x0 -> x1) -> []([]x0 -> []x1)", Expect::Theorem),
  };
  c.push_back(item("[]x0 -> [][]x0", system >= 4 ? Expect::Theorem : Expect::NonTheorem));
  c.push_back(item("~[]x0 -> []~[]x0", system == 5 ? Expect::Theorem : Expect::NonTheorem));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfk: non-Fregean modal logic toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--system", cfg.system, "modal system")->check(CLI::IsMember({3, 4, 5}));
  app.add_option("--axioms", cfg.axioms, "axiom set")->check(CLI::IsMember({"full", "minus"}));
  app.add_option("--nmax", cfg.nmax, "largest structure size")->check(CLI::Range(1, 8));
  app.add_option("--depth", cfg.depth, "formula depth bound")->check(CLI::Range(0, 8));
  app.add_option("--arity", cfg.arity, "definable-function arity bound")->check(CLI::Range(1, 4));
  app.add_option("--samples", cfg.samples, "random samples")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("--dedupe", cfg.dedupe, "remove isomorphic duplicates");
  app.add_option("-o,--output", cfg.output, "write the produced object to this file");

  std::function<Outcome()> action;

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "parse and analyse formulas");
  std::vector<std::string> parse_texts;
  parse_cmd->add_option("formulas", parse_texts)->required();
  parse_cmd->callback([&] {
    action = [&] {
      Outcome out;
      for (const auto& t : parse_texts) {
        Formula f = parse(t);
        Analysis a = analyze(f);
        json vars = json::array(), fvars = json::array();
        for (uint32_t x : a.vars) vars.push_back(render(Formula::var(x)));
        for (uint32_t x : a.fvars) fvars.push_back(render(Formula::var(x)));
        out.add({{"kind", "formula"},
                 {"input", t},
                 {"formula", render(f)},
                 {"depth", f.depth()},
                 {"qrank", a.qrank},
                 {"fragment", to_string(a.fragment)},
                 {"vars", vars},
                 {"fvars", fvars},
                 {"constants", a.cons}});
      }
      return out;
    };
  });

  // check
  auto* check_cmd = app.add_subcommand("check", "check a derivation file");
  std::string check_path;
  check_cmd->add_option("file", check_path)->required();
  check_cmd->callback([&] {
    action = [&] {
      Outcome out;
      for (const Derivation& d : read_derivations(check_path, cfg)) {
        CheckReport r = check_derivation(d);
        json schemes = json::array();
        for (SchemeId s : schemes_used(d)) schemes.push_back(scheme_name(s));
        out.add({{"kind", "check"},
                 {"ok", r.ok},
                 {"system", d.system},
                 {"axiom_set", to_string(d.axioms)},
                 {"lines", d.lines.size()},
                 {"first_failure", r.first_failure},
                 {"message", r.message},
                 {"conclusion", d.lines.empty() ? std::string() : render(d.conclusion())},
                 {"schemes", schemes}});
        out.ok = out.ok && r.ok;
      }
      return out;
    };
  });

  // transform
  auto* tr_cmd = app.add_subcommand("transform", "transform a derivation");
  std::string tr_mode, tr_path, tr_phi, tr_var, tr_const;
  tr_cmd->add_option("mode", tr_mode)->required()->check(CLI::IsMember({"deduction", "generalize", "necessitate", "elimconst"}));
  tr_cmd->add_option("file", tr_path)->required();
  tr_cmd->add_option("--phi", tr_phi, "hypothesis to discharge (deduction)");
  tr_cmd->add_option("--var", tr_var, "variable (generalize, elimconst)");
  tr_cmd->add_option("--const", tr_const, "constant name without '#' (elimconst)");
  tr_cmd->callback([&] {
    action = [&] {
      auto ds = read_derivations(tr_path, cfg);
      if (ds.size() != 1) throw UsageError("transform takes a single derivation");
      const Derivation& d = ds.front();
      CheckReport in = check_derivation(d);
      if (!in.ok) throw CalculusError("input derivation fails at line " + std::to_string(in.first_failure) + ": " + in.message);
      auto var = [&] {
        if (tr_var.empty()) throw UsageError(tr_mode + " needs --var");
        Formula v = parse(tr_var);
        if (v.op() != Op::Var) throw UsageError("--var must be a variable");
        return v.var_index();
      };
      Derivation r;
      if (tr_mode == "deduction") {
        if (tr_phi.empty()) throw UsageError("deduction needs --phi");
        r = deduction(d, parse(tr_phi));
      } else if (tr_mode == "generalize") {
        r = generalize(d, var());
      } else if (tr_mode == "necessitate") {
        r = necessitate(d);
      } else {
        if (tr_const.empty()) throw UsageError("elimconst needs --const");
        std::string name = tr_const.front() == '#' ? tr_const.substr(1) : tr_const;
        r = eliminate_constant(d, intern_constant(name), var());
      }
      Outcome out;
      json rec = derivation_record(r);
      out.ok = rec["ok"].get<bool>();
      out.add(rec);
      if (!cfg.output.empty()) write_file(cfg.output, to_json(r));
      return out;
    };
  });

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate derivations");
  std::string gen_what;
  std::vector<std::string> gen_args;
  gen_cmd->add_option("what", gen_what)->required()->check(CLI::IsMember({"rigidity", "t740"}));
  gen_cmd->add_option("formulas", gen_args)->required();
  gen_cmd->callback([&] {
    action = [&] {
      std::vector<Formula> fs;
      for (const auto& s : gen_args) fs.push_back(parse(s));
      std::vector<Derivation> ds;
      if (gen_what == "rigidity") {
        if (fs.size() != 2) throw UsageError("rigidity takes two formulas");
        ds.push_back(generate_rigidity(fs[0], fs[1]));
      } else {
        if (fs.size() != 4) throw UsageError("t740 takes four formulas");
        ds = generate_strict_identity_library(fs[0], fs[1], fs[2], fs[3]);
      }
      Outcome out;
      json files = json::array();
      for (const auto& d : ds) {
        json rec = derivation_record(d);
        out.ok = out.ok && rec["ok"].get<bool>();
        files.push_back(rec["derivation"]);
        out.add(std::move(rec));
      }
      if (!cfg.output.empty()) write_file(cfg.output, ds.size() == 1 ? files[0] : files);
      return out;
    };
  });

  // model
  auto* model_cmd = app.add_subcommand("model", "modal models");
  model_cmd->require_subcommand(1);
  std::string model_path, model_formula, model_assign;
  auto* mv = model_cmd->add_subcommand("validate", "validate a model");
  mv->add_option("file", model_path)->required();
  mv->callback([&] {
    action = [&] {
      ModalModel m = modal_model_from_json(read_json_file(model_path));
      ModelReport r = validate_modal_model(m, cfg.system, cfg.arity);
      Outcome out;
      out.ok = r.ok;
      out.add(model_report_json(r));
      return out;
    };
  });
  auto* me = model_cmd->add_subcommand("eval", "evaluate a formula");
  me->add_option("file", model_path)->required();
  me->add_option("formula", model_formula)->required();
  me->add_option("--assign", model_assign, "assignment: inline JSON or file");
  me->callback([&] {
    action = [&] {
      ModalModel m = modal_model_from_json(read_json_file(model_path));
      check_model_shape(m);
      Formula f = parse(model_formula);
      Assignment g = assignment_arg(model_assign);
      Outcome out;
      out.add({{"kind", "eval"}, {"formula", render(f)}, {"value", eval(m, g, f)}, {"satisfied", satisfies(m, g, f)}});
      return out;
    };
  });
  auto* mc = model_cmd->add_subcommand("collapse", "collapse diagnostics");
  mc->add_option("file", model_path)->required();
  mc->callback([&] {
    action = [&] {
      ModalModel m = modal_model_from_json(read_json_file(model_path));
      CollapseReport c = collapse_diagnostics(m);
      Outcome out;
      bool all = c.boolean_algebra && c.collapse_axiom && c.leq_antisymmetric && c.strict_equals_identity;
      out.add({{"kind", "collapse"},
               {"boolean_algebra", c.boolean_algebra},
               {"collapse_axiom", c.collapse_axiom},
               {"leq_antisymmetric", c.leq_antisymmetric},
               {"strict_equals_identity", c.strict_equals_identity},
               {"all_equivalent", c.all_equivalent},
               {"all_true", all}});
      return out;
    };
  });
  auto* ma = model_cmd->add_subcommand("admissible", "check the simple-model contract");
  ma->add_option("file", model_path)->required();
  ma->callback([&] {
    action = [&] {
      ModalModel m = modal_model_from_json(read_json_file(model_path));
      AdmissibleReport r = check_admissible_simple(m, cfg.depth, cfg.samples, cfg.seed, cfg.arity);
      Outcome out;
      out.ok = r.ok;
      out.add({{"kind", "admissible"},
               {"ok", r.ok},
               {"normal", r.normal},
               {"instances", r.instances},
               {"triples", r.triples},
               {"counterexamples", r.counterexamples}});
      return out;
    };
  });
  auto* men = model_cmd->add_subcommand("enumerate", "enumerate valid models");
  bool en_nec2 = false, en_nonbool = false, en_nonnormal = false;
  size_t en_limit = 0;
  men->add_flag("--nec-at-least-two", en_nec2, "only models with |NEC| >= 2");
  men->add_flag("--non-boolean", en_nonbool, "only models whose tables are not a Boolean algebra");
  men->add_flag("--non-normal", en_nonnormal, "only models with NEC empty");
  men->add_option("--limit", en_limit, "stop after this many models (0 = no limit)");
  men->callback([&] {
    action = [&] {
      EnumConstraints c;
      c.nec_at_least_two = en_nec2;
      c.non_boolean = en_nonbool;
      c.non_normal = en_nonnormal;
      c.dedupe = cfg.dedupe;
      c.arity = cfg.arity;
      c.budget_ms = budget_ms();
      Outcome out;
      json models = json::array();
      EnumStats st = enumerate_models(cfg.nmax, cfg.system, c, [&](const ModalModel& m, const ModelReport& r) {
        json mj = to_json(m);
        out.add({{"kind", "model"}, {"n", m.n()}, {"normal", r.normal}, {"model", mj}});
        models.push_back(mj);
        return en_limit == 0 || models.size() < en_limit;
      });
      out.add({{"kind", "enumeration"},
               {"system", cfg.system},
               {"nmax", cfg.nmax},
               {"count", st.yielded},
               {"candidates", st.candidates},
               {"truncated", st.truncated}});
      if (!cfg.output.empty()) write_file(cfg.output, models);
      return out;
    };
  });

  // prealg
  auto* pre_cmd = app.add_subcommand("prealg", "prealgebras and SCI models");
  pre_cmd->require_subcommand(1);
  std::string pre_path;
  int pre_ultra = 0;
  auto* pv = pre_cmd->add_subcommand("validate", "validate a prealgebra");
  pv->add_option("file", pre_path)->required();
  pv->callback([&] {
    action = [&] {
      ValidationReport r = validate_prealgebra(prealgebra_from_json(read_json_file(pre_path)));
      Outcome out;
      out.ok = r.ok;
      out.add(report_json("prealgebra-validation", r));
      return out;
    };
  });
  auto* pf = pre_cmd->add_subcommand("filters", "filters and ultrafilters");
  pf->add_option("file", pre_path)->required();
  pf->callback([&] {
    action = [&] {
      PreAlgebra p = prealgebra_from_json(read_json_file(pre_path));
      ValidationReport r = validate_prealgebra(p);
      if (!r.ok) throw ModelError("invalid prealgebra: " + r.violated);
      FilterReport f = filters(p);
      json all = json::array(), ultra = json::array();
      for (Subset s : f.all) all.push_back(subset_json(s, p.n()));
      for (Subset s : f.ultra) ultra.push_back(subset_json(s, p.n()));
      Outcome out;
      out.add({{"kind", "filters"},
               {"filters", all},
               {"ultrafilters", ultra},
               {"smallest", subset_json(f.smallest, p.n())},
               {"characterizations_agree", f.characterizations_agree}});
      out.ok = f.characterizations_agree;
      return out;
    };
  });
  auto* pts = pre_cmd->add_subcommand("to-sci", "SCI model from a prealgebra and an ultrafilter");
  pts->add_option("file", pre_path)->required();
  pts->add_option("--ultra", pre_ultra, "ultrafilter index");
  pts->callback([&] {
    action = [&] {
      PreAlgebra p = prealgebra_from_json(read_json_file(pre_path));
      ValidationReport r = validate_prealgebra(p);
      if (!r.ok) throw ModelError("invalid prealgebra: " + r.violated);
      SciModel s = sci_from_prealgebra(p, pre_ultra);
      ValidationReport v = validate_sci(s);
      Outcome out;
      out.ok = v.ok;
      out.add({{"kind", "sci"}, {"ok", v.ok}, {"violated", v.violated}, {"sci", to_json(s)}});
      if (!cfg.output.empty()) write_file(cfg.output, to_json(s));
      return out;
    };
  });
  auto* pfs = pre_cmd->add_subcommand("from-sci", "prealgebra from an SCI model");
  pfs->add_option("file", pre_path)->required();
  pfs->callback([&] {
    action = [&] {
      SciModel s = sci_from_json(read_json_file(pre_path));
      ValidationReport v = validate_sci(s);
      if (!v.ok) throw ModelError("invalid SCI model: " + v.violated);
      SciToPre r = prealgebra_from_sci(s);
      json adm = json::array();
      for (Subset t : r.admissible) adm.push_back(subset_json(t, s.n()));
      Outcome out;
      out.ok = r.ts_are_ultrafilters && r.f_is_smallest;
      out.add({{"kind", "prealgebra"},
               {"prealgebra", to_json(r.p)},
               {"F", subset_json(r.F, s.n())},
               {"admissible_truth_sets", adm},
               {"truth_sets_are_ultrafilters", r.ts_are_ultrafilters},
               {"F_is_smallest_filter", r.f_is_smallest}});
      if (!cfg.output.empty()) write_file(cfg.output, to_json(r.p));
      return out;
    };
  });

  // kripke
  auto* kr_cmd = app.add_subcommand("kripke", "frames and the cross-semantics constructions");
  kr_cmd->require_subcommand(1);
  std::string kr_path, kr_world, kr_formula, kr_val, kr_assign, kr_corpus;
  bool kr_enriched = false;
  int kr_model_nmax = 3;
  auto world_index = [](const KripkeFrame& fr, const std::string& w) {
    for (int i = 0; i < fr.size(); ++i)
      if (fr.worlds[static_cast<size_t>(i)] == w) return i;
    throw UsageError("unknown world " + w);
  };
  auto* kv = kr_cmd->add_subcommand("validate", "validate a frame");
  kv->add_option("file", kr_path)->required();
  kv->callback([&] {
    action = [&] {
      ValidationReport r = validate_frame(frame_from_json(read_json_file(kr_path)));
      Outcome out;
      out.ok = r.ok;
      out.add(report_json("frame-validation", r));
      return out;
    };
  });
  auto* ks = kr_cmd->add_subcommand("sat", "satisfaction at a world");
  ks->add_option("file", kr_path)->required();
  ks->add_option("world", kr_world)->required();
  ks->add_option("formula", kr_formula)->required();
  ks->add_option("--valuation", kr_val, "valuation: inline JSON or file");
  ks->callback([&] {
    action = [&] {
      KripkeFrame fr = frame_from_json(read_json_file(kr_path));
      int w = world_index(fr, kr_world);
      Valuation g = valuation_from_json(fr, json_arg(kr_val));
      Formula f = parse(kr_formula);
      Subset s = denote(fr, g, f);
      json ws = json::array();
      for (int i = 0; i < fr.size(); ++i)
        if (contains(s, i)) ws.push_back(fr.worlds[static_cast<size_t>(i)]);
      Outcome out;
      out.add({{"kind", "sat"}, {"formula", render(f)}, {"world", kr_world}, {"satisfied", contains(s, w)}, {"worlds", ws}});
      return out;
    };
  });
  auto* ktm = kr_cmd->add_subcommand("to-model", "model of a world");
  ktm->add_option("file", kr_path)->required();
  ktm->add_option("world", kr_world)->required();
  ktm->add_option("--valuation", kr_val, "valuation: inline JSON or file");
  ktm->add_flag("--enriched", kr_enriched, "name every proposition p<i>");
  ktm->callback([&] {
    action = [&] {
      json fj = read_json_file(kr_path);
      KripkeFrame fr = frame_from_json(fj);
      ValidationReport fv = validate_frame(fr);
      if (!fv.ok) throw ModelError("invalid frame: " + fv.violated);
      int w = world_index(fr, kr_world);
      json vj = json_arg(kr_val);
      WorldModel wm = world_to_model(fr, w, valuation_from_json(fr, vj), kr_enriched);
      ModelReport r = validate_modal_model(wm.m, fr.kind, cfg.arity);
      json uni = json::array();
      for (Subset s : wm.universe) {
        json e = json::array();
        for (int i = 0; i < fr.size(); ++i)
          if (contains(s, i)) e.push_back(fr.worlds[static_cast<size_t>(i)]);
        uni.push_back(e);
      }
      Outcome out;
      out.ok = r.ok;
      json pair = {{"model", to_json(wm.m)}, {"assignment", to_json(wm.gamma)}, {"frame", fj},
                   {"world", kr_world}, {"valuation", vj}};
      out.add({{"kind", "world-model"}, {"valid", r.ok}, {"violated", r.violated}, {"universe", uni},
               {"rho", wm.rho}, {"pair", pair}});
      if (!cfg.output.empty()) write_file(cfg.output, pair);
      return out;
    };
  });
  auto* kfm = kr_cmd->add_subcommand("from-model", "ultrafilter frame of a model");
  kfm->add_option("file", kr_path)->required();
  kfm->add_option("--assign", kr_assign, "assignment: inline JSON or file");
  kfm->callback([&] {
    action = [&] {
      ModalModel m = modal_model_from_json(read_json_file(kr_path));
      Assignment g = assignment_arg(kr_assign);
      UltrafilterFrame uf = model_to_kripke(m, g, cfg.system);
      json fj = to_json(uf.fr);
      json vj = valuation_json(uf.fr, uf.g);
      json pair = {{"model", to_json(m)}, {"assignment", to_json(g)}, {"frame", fj},
                   {"world", uf.fr.worlds[static_cast<size_t>(uf.w0)]}, {"valuation", vj}};
      Outcome out;
      out.ok = uf.reflexive && uf.transitive && uf.all_normal && (cfg.system != 5 || uf.equivalence);
      out.add({{"kind", "ultrafilter-frame"},
               {"worlds", uf.fr.size()},
               {"w0", uf.fr.worlds[static_cast<size_t>(uf.w0)]},
               {"reflexive", uf.reflexive},
               {"transitive", uf.transitive},
               {"all_normal", uf.all_normal},
               {"equivalence", uf.equivalence},
               {"frame_closed", validate_frame(uf.fr).ok},
               {"pair", pair}});
      if (!cfg.output.empty()) write_file(cfg.output, pair);
      return out;
    };
  });
  auto* ka = kr_cmd->add_subcommand("agree", "compare a model and a world on all formulas up to --depth");
  std::string kr_frag = "full";
  bool kr_strict = false;
  ka->add_option("pair", kr_path, "file with model, assignment, frame, world, valuation")->required();
  ka->add_option("--fragment", kr_frag)->check(CLI::IsMember({"full", "m", "p"}));
  ka->add_flag("--strict-identity", kr_strict, "also check identity implies strict equivalence");
  ka->callback([&] {
    action = [&] {
      json pj = read_json_file(kr_path);
      ModalModel m;
      KripkeFrame fr;
      Assignment g;
      Valuation v;
      int w = 0;
      try {
        m = modal_model_from_json(pj.at("model"));
        fr = frame_from_json(pj.at("frame"));
        g = pj.contains("assignment") ? assignment_from_json(pj["assignment"]) : Assignment{};
        v = valuation_from_json(fr, pj.value("valuation", json::object()));
        w = world_index(fr, pj.at("world").get<std::string>());
      } catch (const json::exception& e) {
        throw UsageError(std::string("malformed pair file: ") + e.what());
      }
      Fragment frag = kr_frag == "full" ? Fragment::Full : kr_frag == "m" ? Fragment::Fm_m : Fragment::Fm_p;
      AgreementReport r = agreement_check(m, g, fr, w, v, cfg.depth, frag, kr_strict);
      Outcome out;
      out.ok = r.ok;
      out.add({{"kind", "agreement"},
               {"ok", r.ok},
               {"depth", cfg.depth},
               {"fragment", to_string(frag)},
               {"classes", r.classes},
               {"checks", r.checks},
               {"discrepancies", r.discrepancies}});
      return out;
    };
  });
  auto* kc = kr_cmd->add_subcommand("conserve", "conservativity probe over frames and models");
  kc->add_option("--corpus", kr_corpus, "JSON list of {formula, expect: theorem|non-theorem}");
  kc->add_option("--model-nmax", kr_model_nmax, "largest enumerated model")->check(CLI::Range(0, 4));
  kc->callback([&] {
    action = [&] {
      std::vector<CorpusItem> corpus;
      if (kr_corpus.empty()) {
        corpus = default_corpus(cfg.system);
      } else {
        json cj = json_arg(kr_corpus);
        if (!cj.is_array()) throw UsageError("corpus must be a list");
        for (const auto& e : cj) {
          std::string ex = e.value("expect", std::string("theorem"));
          if (ex != "theorem" && ex != "non-theorem") throw UsageError("expect must be theorem or non-theorem");
          corpus.push_back({parse(e.at("formula").get<std::string>()), ex == "theorem" ? Expect::Theorem : Expect::NonTheorem});
        }
      }
      ProbeReport r = conservativity_probe(cfg.system, corpus, cfg.nmax, kr_model_nmax);
      Outcome out;
      out.ok = r.ok;
      for (const auto& p : r.results)
        out.add({{"kind", "probe"},
                 {"formula", render(p.f)},
                 {"expect", expect_name(p.expect)},
                 {"status", p.status},
                 {"as_expected", p.as_expected},
                 {"witness", p.witness}});
      out.add({{"kind", "conservativity"}, {"ok", r.ok}, {"system", cfg.system}, {"frames", r.frames}, {"models", r.models}});
      return out;
    };
  });

  // Global flags are accepted after the subcommand as well.
  std::function<void(CLI::App*)> fall = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands({})) {
      sub->fallthrough();
      fall(sub);
    }
  };
  fall(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    Outcome out = action();
    emit(out, cfg);
    return out.ok ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "nfk: " << e.what() << "\n";
  } catch (const ParseError& e) {
    std::cerr << "nfk: parse error: " << e.what() << "\n";
  } catch (const ModelError& e) {
    std::cerr << "nfk: " << e.what() << "\n";
  } catch (const CalculusError& e) {
    std::cerr << "nfk: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "nfk: " << e.what() << "\n";
  }
  return 2;
}
