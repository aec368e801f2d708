#include "ffj/derivation.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "ffj/errors.hpp"
#include "ffj/pl_typing.hpp"

namespace ffj {

std::string to_string(const Selection& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + s[i];
  return out + "}";
}

std::string to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Pass:
      return "PASS";
    case Verdict::Kind::Counterexample:
      return "FAIL";
    case Verdict::Kind::NotApplicable:
      return "N/A";
  }
  return {};
}

namespace {

Selection checked_selection(const FeatureModel& fm, const Selection& fs) {
  std::set<std::string> chosen;
  Assignment a;
  for (const auto& f : fm.features) a[f] = false;
  for (const auto& f : fs) {
    if (!fm.declares(f)) throw InvalidSelection("feature '" + f + "' is not declared");
    if (!chosen.insert(f).second) throw InvalidSelection("feature '" + f + "' selected twice");
    a[f] = true;
  }
  if (!evaluate(*fm.constraint, a)) {
    throw InvalidSelection("selection " + to_string(fs) + " violates the feature model");
  }
  Selection ordered;
  for (const auto& f : fm.features) {
    if (chosen.count(f)) ordered.push_back(f);
  }
  return ordered;
}

}  // namespace

std::vector<FeatureDeclaration> derive_declarations(const ProductLine& pl, const Selection& fs) {
  Selection ordered = checked_selection(pl.feature_model, fs);
  std::set<std::string> keep(ordered.begin(), ordered.end());
  std::vector<FeatureDeclaration> out;
  for (const auto& d : pl.declarations) {
    if (keep.count(d.feature)) out.push_back(d);
  }
  return out;
}

FfjProgram derive(const ProductLine& pl, const Selection& fs) {
  Selection ordered = checked_selection(pl.feature_model, fs);
  FeatureModel variant_model;
  variant_model.features = ordered;
  FfjProgram p;
  p.tables = build_tables(derive_declarations(pl, ordered), variant_model, TableMode::Program);
  bool has_main = std::find(ordered.begin(), ordered.end(), pl.main_context) != ordered.end();
  p.main_term = has_main ? pl.main_term : make_new(kObject, {});
  return p;
}

SelectionList enumerate_valid_selections(const FeatureModel& fm, std::size_t cap) {
  SelectionList out;
  const std::size_t n = fm.features.size();
  std::vector<FormulaPtr> fixed;
  Selection current;
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    if (out.truncated) return;
    if (!satisfiable(fm, f_and_all(fixed))) return;
    if (i == n) {
      if (out.selections.size() >= cap) {
        out.truncated = true;
        return;
      }
      out.selections.push_back(current);
      return;
    }
    const FormulaPtr atom = f_atom(fm.features[i]);
    fixed.push_back(f_not(atom));
    walk(i + 1);
    fixed.back() = atom;
    current.push_back(fm.features[i]);
    walk(i + 1);
    current.pop_back();
    fixed.pop_back();
  };
  walk(0);
  return out;
}

OracleRun run_oracle(const ProductLine& pl, Reasoner& reasoner, std::size_t cap) {
  OracleRun run;
  run.pl_diagnostics = typecheck_product_line(pl, reasoner);
  SelectionList sels = enumerate_valid_selections(pl.feature_model, cap);
  run.truncated = sels.truncated;
  bool all_variants_ok = true;
  std::vector<Selection> ill_typed;
  for (const auto& s : sels.selections) {
    VariantResult v;
    v.selection = s;
    try {
      v.diagnostics = typecheck_program(derive(pl, s));
    } catch (const SanityViolation& e) {
      v.diagnostics.push_back({"inheritance-cycle", e.what(), {}, Severity::Error, s});
    }
    if (!v.well_typed()) {
      all_variants_ok = false;
      ill_typed.push_back(s);
    }
    run.variants.push_back(std::move(v));
  }
  bool pl_ok = !has_errors(run.pl_diagnostics);

  run.correctness.diagnostics = run.pl_diagnostics;
  if (!pl_ok) {
    run.correctness.kind = Verdict::Kind::NotApplicable;
  } else if (!ill_typed.empty()) {
    run.correctness.kind = Verdict::Kind::Counterexample;
    run.correctness.counterexamples = ill_typed;
  } else {
    run.correctness.kind = Verdict::Kind::Pass;
  }

  run.completeness.diagnostics = run.pl_diagnostics;
  if (!all_variants_ok) {
    run.completeness.kind = Verdict::Kind::NotApplicable;
  } else if (!pl_ok) {
    run.completeness.kind = Verdict::Kind::Counterexample;
  } else {
    run.completeness.kind = Verdict::Kind::Pass;
  }
  return run;
}

Verdict check_correctness(const ProductLine& pl, std::size_t cap) {
  Reasoner reasoner(pl.feature_model);
  return run_oracle(pl, reasoner, cap).correctness;
}

Verdict check_completeness(const ProductLine& pl, std::size_t cap) {
  Reasoner reasoner(pl.feature_model);
  return run_oracle(pl, reasoner, cap).completeness;
}

std::string format_report(const OracleRun& run) {
  std::ostringstream os;
  for (const auto& v : run.variants) {
    auto first = std::find_if(v.diagnostics.begin(), v.diagnostics.end(),
                              [](const Diagnostic& d) { return d.severity == Severity::Error; });
    if (first == v.diagnostics.end()) {
      os << "PASS " << to_string(v.selection) << " - -\n";
    } else {
      os << "FAIL " << to_string(v.selection) << ' ' << first->code << ' '
         << (first->location.line > 0 ? to_string(first->location) : "-") << '\n';
    }
  }
  os << "product-line: " << (has_errors(run.pl_diagnostics) ? "REJECT" : "ACCEPT") << '\n';
  os << "correctness: " << to_string(run.correctness.kind) << '\n';
  os << "completeness: " << to_string(run.completeness.kind) << '\n';
  return os.str();
}

}  // namespace ffj
