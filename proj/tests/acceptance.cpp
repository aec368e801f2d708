#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "checks.hpp"
#include "ffj/derivation.hpp"
#include "ffj/parser.hpp"
#include "ffj/pl_typing.hpp"
#include "generators.hpp"
#include "harness.hpp"
#include "oracles.hpp"

using namespace ffj;
using namespace ffj::testgen;
using ffj::testing::codes_of;
using ffj::testing::load_fixture;

namespace {

constexpr double kFixtureSeconds = 1.0;
constexpr double kProgramSeconds = 300.0;
constexpr double kProductLineSeconds = 600.0;
constexpr int kPrograms = 1000;
constexpr int kProductLines = 1000;
constexpr int kMandatoryOnly = 100;
constexpr std::size_t kFuel = 10000;
constexpr int kMaxSatFeatures = 12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

int failures = 0;

void report(int n, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s%s%s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.empty() ? "" : ": ",
              o.detail.c_str());
  std::fflush(stdout);
}

Outcome fixture_fidelity() {
  Outcome o;
  auto t0 = Clock::now();
  ProductLine pl = load_fixture("email");
  auto ds = typecheck_product_line(pl);
  double took = seconds_since(t0);
  if (!ds.empty()) o.fail("email: " + format_diagnostic(ds.front()));
  if (took >= kFixtureSeconds) o.fail("email took " + std::to_string(took) + " s");

  auto u = typecheck_product_line(load_fixture("email-unamended"));
  bool found = false;
  for (const auto& d : u) {
    found |= d.code == "refine-missing-target" && d.location.file == "Mozilla/mozilla.ffj" &&
             d.location.line == 5;
  }
  if (!found) o.fail("no reachability diagnostic on Mozilla's refinement of Display");
  std::ostringstream os;
  os << "email " << took * 1000 << " ms";
  if (o.pass) o.detail = os.str();
  return o;
}

Outcome table_oracles() {
  Outcome o;
  ProductLine pl = load_fixture("email");
  using Names = std::vector<std::string>;
  if (pl.tables.rt.of("Trans") != Names{"EmailClient", "SSL", "Text"}) o.fail("RT(Trans)");
  if (pl.tables.it.of_field("Display", "renderer") != Names{"Mozilla", "Safari"}) {
    o.fail("IT(Display.renderer)");
  }
  return o;
}

Outcome lookup_oracles() {
  Outcome o;
  ProductLine pl = load_fixture("alt-super");
  Reasoner r(pl.feature_model);
  PlChecker checker(pl, r);
  std::string fields = to_string(checker.fields_pl({"Phi1"}, last(pl.tables.rt, "FooBar")));
  if (fields != "A a, D d, E e || B b, D d, E e") o.fail("fields_pl gave " + fields);
  std::string sigs;
  for (const auto& s : checker.mtype_pl({"Phi1"}, "m", {"Phi1", "FooBar"})) {
    sigs += (sigs.empty() ? "" : ", ") + to_string(s);
  }
  if (sigs != "D -> A, B -> B") o.fail("mtype_pl gave " + sigs);
  return o;
}

Outcome metatheory() {
  Outcome o;
  Rng rng(1001);
  Shape shape;
  shape.max_features = 4;
  shape.max_classes = 6;
  shape.max_refinements = 3;
  shape.term_depth = 4;
  auto t0 = Clock::now();
  int values = 0;
  for (int i = 0; i < kPrograms; ++i) {
    FfjProgram p = generate_program(rng, shape);
    if (has_errors(typecheck_program(p))) {
      o.fail("generated program " + std::to_string(i) + " is ill-typed");
      continue;
    }
    if (auto v = ffj::testing::check_trace(p, kFuel)) o.fail("program " + std::to_string(i) + ": " + *v);
    if (auto v = ffj::testing::check_lookups(p.tables)) o.fail("program " + std::to_string(i) + ": " + *v);
    if (eval(p.tables, p.main_term, kFuel).kind == EvalResult::Kind::Value) ++values;
  }
  double took = seconds_since(t0);
  if (took >= kProgramSeconds) o.fail("took " + std::to_string(took) + " s");
  if (o.pass) {
    o.detail = std::to_string(kPrograms) + " programs, " + std::to_string(values) + " values, " +
               std::to_string(took) + " s";
  }
  return o;
}

Outcome theorems() {
  Outcome o;
  Rng rng(2002);
  Shape shape;
  auto t0 = Clock::now();
  int faulty = 0;
  for (int i = 0; i < kProductLines; ++i) {
    GeneratedPl g = generate_pl(rng, shape);
    Fault fault = Fault::None;
    if (i % 2 == 1) {
      Fault want = all_faults()[static_cast<std::size_t>(i / 2) % all_faults().size()];
      if (inject_fault(rng, g, want)) fault = want;
    }
    auto out = ffj::testing::check_generated(g.product_line(), kFuel);
    std::string tag = "instance " + std::to_string(i) + " (" + fault_name(fault) + ")";
    if (out.run.correctness.kind == Verdict::Kind::Counterexample) o.fail(tag + ": correctness counterexample");
    if (out.run.completeness.kind == Verdict::Kind::Counterexample) {
      o.fail(tag + ": completeness counterexample");
    }
    if (out.trace_violation) o.fail(tag + ": " + *out.trace_violation);
    if (fault != Fault::None) {
      ++faulty;
      if (out.pl_accepts) o.fail(tag + ": fault missed by the product-line checker");
      if (!out.some_variant_fails) o.fail(tag + ": fault missed by every variant");
    }
  }
  double took = seconds_since(t0);
  if (took >= kProductLineSeconds) o.fail("took " + std::to_string(took) + " s");
  if (faulty < kProductLines / 4) o.fail("only " + std::to_string(faulty) + " faults injected");
  if (o.pass) {
    o.detail = std::to_string(kProductLines) + " product lines, " + std::to_string(faulty) + " faulty, " +
               std::to_string(took) + " s";
  }
  return o;
}

std::string queries(Reasoner& r, Rng& rng, const FeatureModel& fm, int count) {
  Rng local = rng;
  std::ostringstream os;
  for (int q = 0; q < count; ++q) {
    Context ctx{local.pick(fm.features)};
    std::string f = local.pick(fm.features);
    std::vector<std::string> cands{local.pick(fm.features), local.pick(fm.features), local.pick(fm.features)};
    os << r.never(ctx, f) << r.sometimes(ctx, f) << to_string(r.always(ctx, f, cands))
       << r.satisfiable(f_atom(f)) << r.valid_selection(ctx) << '\n';
  }
  return os.str();
}

Outcome sat_backend() {
  Outcome o;
  std::vector<FormulaPtr> level{f_true(), f_false(), f_atom("A"), f_atom("B")};
  for (int d = 0; d < 2; ++d) {
    std::vector<FormulaPtr> next = level;
    for (const auto& a : level) {
      next.push_back(f_not(a));
      for (const auto& b : level) {
        next.push_back(f_and(a, b));
        next.push_back(f_or(a, b));
        next.push_back(f_implies(a, b));
      }
    }
    level = std::move(next);
  }
  FeatureModel two;
  two.features = {"A", "B"};
  for (const auto& f : level) {
    if (satisfiable(two, f) != oracle::satisfiable(two, f)) o.fail("satisfiable on " + print_formula(*f));
  }

  Rng rng(3003);
  int queries_run = 0;
  for (int n = 1; n <= kMaxSatFeatures; ++n) {
    for (int i = 0; i < 12; ++i) {
      FeatureModel fm = random_feature_model(rng, n, false);
      if (i % 2) fm.constraint = f_and(fm.constraint, random_formula(rng, fm.features, 3));
      Reasoner r(fm);
      for (const auto& f : fm.features) {
        for (const auto& g : fm.features) {
          Context ctx{g};
          ++queries_run;
          if (r.never(ctx, f) != oracle::never(fm, ctx, f)) o.fail("never");
          if (r.sometimes(ctx, f) != oracle::sometimes(fm, ctx, f)) o.fail("sometimes");
          std::vector<std::string> cands;
          for (const auto& h : fm.features) {
            if (cands.size() < 6 && rng.chance(0.5)) cands.push_back(h);
          }
          if (!(r.always(ctx, f, cands) == oracle::always(fm, ctx, f, cands))) o.fail("always");
        }
      }
      for (int q = 0; q < 20; ++q) {
        FormulaPtr extra = random_formula(rng, fm.features, 4);
        if (satisfiable(fm, extra) != oracle::satisfiable(fm, extra)) o.fail("satisfiable");
        std::vector<std::string> sel;
        for (const auto& h : fm.features) {
          if (rng.chance(0.5)) sel.push_back(h);
        }
        if (r.valid_selection(sel) != oracle::valid_selection(fm, sel)) o.fail("valid_selection");
      }
      Reasoner on(fm, true);
      Reasoner off(fm, false);
      if (queries(on, rng, fm, 100) != queries(off, rng, fm, 100)) o.fail("cache on and off differ");
    }
  }
  if (o.pass) o.detail = std::to_string(queries_run) + " presence queries up to 12 features";
  return o;
}

Outcome degeneration() {
  Outcome o;
  Rng rng(4004);
  Shape shape;
  shape.mandatory_only = true;
  int rejected = 0;
  for (int i = 0; i < kMandatoryOnly; ++i) {
    GeneratedPl g = generate_pl(rng, shape);
    if (i % 2) inject_fault(rng, g, rng.pick(all_faults()));
    ProductLine pl = g.product_line();
    auto pl_ds = typecheck_product_line(pl);
    auto ffj_ds = typecheck_program(derive(pl, pl.feature_model.features));
    if (has_errors(pl_ds) != has_errors(ffj_ds)) o.fail("verdicts differ on instance " + std::to_string(i));
    if (codes_of(pl_ds) != codes_of(ffj_ds)) o.fail("codes differ on instance " + std::to_string(i));
    rejected += has_errors(ffj_ds);
  }
  if (o.pass) o.detail = std::to_string(kMandatoryOnly) + " product lines, " + std::to_string(rejected) + " rejected";
  return o;
}

Outcome negative_corpus() {
  Outcome o;
  for (const char* code : {"duplicate-field", "method-occludes", "refine-missing-target", "optional-field",
                           "unreachable-method"}) {
    auto ds = typecheck_product_line(load_fixture(std::string("negative/") + code));
    if (codes_of(ds) != std::vector<std::string>{code}) o.fail(std::string(code) + " fixture");
  }
  return o;
}

}  // namespace

int main() {
  report(1, "fixture fidelity", fixture_fidelity);
  report(2, "table oracles", table_oracles);
  report(3, "lookup oracles", lookup_oracles);
  report(4, "preservation and progress", metatheory);
  report(5, "correctness and completeness", theorems);
  report(6, "feature-model reasoning", sat_backend);
  report(7, "degeneration to single programs", degeneration);
  report(8, "negative corpus", negative_corpus);
  return failures == 0 ? 0 : 1;
}
