#include <doctest.h>

#include "checks.hpp"
#include "ffj/core.hpp"
#include "ffj/derivation.hpp"
#include "ffj/errors.hpp"
#include "ffj/parser.hpp"
#include "generators.hpp"
#include "harness.hpp"

using namespace ffj;
using ffj::testing::codes_of;
using ffj::testing::load_fixture;
using Codes = std::vector<std::string>;

namespace {

FfjProgram whole(const std::string& fixture) {
  ProductLine pl = load_fixture(fixture);
  return derive(pl, pl.feature_model.features);
}

/// A single program assembled from per-feature sources, all features present.
FfjProgram program(const std::vector<std::pair<std::string, std::string>>& modules,
                   const std::string& main = "new Object()") {
  FeatureModel fm;
  std::vector<FeatureDeclaration> ds;
  for (const auto& [feature, src] : modules) {
    fm.features.push_back(feature);
    for (auto& d : parse_program(src, feature + ".ffj")) ds.push_back({feature, std::move(d), feature + ".ffj"});
  }
  return {parse_term(main), build_tables(ds, fm, TableMode::Program)};
}

const std::string kSlice = R"(
class Bool extends Object { }
class Msg extends Object { }
class Key extends Object { }
class Trans extends Object { Bool send(Msg m) { return new Bool(); } }
)";

const std::string kSsl = R"(
class SSL extends Object {
  Trans trans;
  Bool send(Msg m) { return new Bool(); }
}
refines class Trans {
  Key key;
  overrides Bool send(Msg m) { return new SSL(this).send(m); }
}
)";

std::string step(const Tables& t, const std::string& term) {
  StepResult r = eval_step(t, parse_term(term));
  REQUIRE(r.kind == StepResult::Kind::Stepped);
  return print_term(*r.term);
}

}  // namespace

TEST_CASE("refinement chain navigation") {
  FfjProgram p = whole("email-slice");
  const auto& rt = p.tables.rt;
  CHECK(last(rt, "Trans") == QualifiedType{"SSL", "Trans"});
  CHECK(last(rt, "Object") == terminator());
  CHECK(last(rt, "SSL") == QualifiedType{"SSL", "SSL"});
  CHECK(pred(rt, {"SSL", "Trans"}) == QualifiedType{"EmailClient", "Trans"});
  CHECK(pred(rt, {"EmailClient", "Trans"}) == terminator());
  CHECK_THROWS_AS(last(rt, "Nope"), UnknownClass);
  CHECK_THROWS_AS(pred(rt, {"Nope", "Trans"}), FeatureNotInChain);

  FfjProgram chain = program({{"P1", "class C extends Object { }"},
                              {"P2", "refines class C { }"},
                              {"P3", "refines class C { }"},
                              {"P4", "refines class C { }"}});
  CHECK(pred(chain.tables.rt, {"P4", "C"}) == QualifiedType{"P3", "C"});
}

TEST_CASE("subtyping") {
  FfjProgram p = whole("email-slice");
  CHECK(subtype(p.tables, "Msg", "Msg"));
  CHECK(subtype(p.tables, "SSL", "Object"));
  CHECK_FALSE(subtype(p.tables, "Msg", "Trans"));
  CHECK(subtype(p.tables, "Object", "Object"));
  CHECK_FALSE(subtype(p.tables, "Object", "Msg"));
  FfjProgram deep = program({{"F", "class A extends Object { } class B extends A { } class C extends B { }"}});
  CHECK(subtype(deep.tables, "C", "A"));
  CHECK_FALSE(subtype(deep.tables, "A", "C"));
}

TEST_CASE("field lookup") {
  FfjProgram p = whole("email-slice");
  CHECK(fields(p.tables, terminator()).empty());
  CHECK(fields(p.tables, last(p.tables.rt, "Trans")) == std::vector<TypedName>{{"Key", "key"}});
  CHECK(fields(p.tables, last(p.tables.rt, "SSL")) == std::vector<TypedName>{{"Trans", "trans"}});
  CHECK(fields(p.tables, {"EmailClient", "Trans"}).empty());

  FfjProgram order = program({{"F", "class A extends Object { Object a; } class B extends A { Object b; }"},
                              {"G", "refines class B { Object c; } refines class A { Object d; }"}});
  std::vector<TypedName> expected{{"Object", "a"}, {"Object", "d"}, {"Object", "b"}, {"Object", "c"}};
  CHECK(fields(order.tables, last(order.tables.rt, "B")) == expected);
}

TEST_CASE("method lookup") {
  FfjProgram p = whole("email-slice");
  auto body = mbody(p.tables, "send", last(p.tables.rt, "Trans"));
  REQUIRE(body);
  CHECK(print_term(*body->body) == "new SSL(this).send(m)");
  CHECK(body->owner == QualifiedType{"SSL", "Trans"});
  CHECK(body->params == std::vector<std::string>{"m"});
  CHECK_FALSE(mbody(p.tables, "send", terminator()));
  auto sig = mtype(p.tables, "send", last(p.tables.rt, "Trans"));
  REQUIRE(sig);
  CHECK(to_string(*sig) == "Msg -> Bool");
  CHECK_FALSE(mtype(p.tables, "send", terminator()));

  FfjProgram pair = whole("pair");
  auto setfst = mbody(pair.tables, "setfst", last(pair.tables.rt, "Pair"));
  REQUIRE(setfst);
  CHECK(setfst->owner == QualifiedType{"Core", "Pair"});
  CHECK(mbody(pair.tables, "swap", last(pair.tables.rt, "Pair"))->owner == QualifiedType{"Swap", "Pair"});
  CHECK_FALSE(mbody(pair.tables, "swap", {"Core", "Pair"}));
}

TEST_CASE("well-formedness predicates") {
  FfjProgram p = whole("email-slice");
  const Tables& t = p.tables;
  CHECK(introduce(t, {"EmailClient", "Trans"}));
  CHECK(introduce_field(t, pred(t.rt, {"SSL", "Trans"}), "key"));
  CHECK_FALSE(introduce_field(t, {"SSL", "Trans"}, "key"));
  CHECK(override_method(t, "send", pred(t.rt, {"SSL", "Trans"}), {{"Msg"}, "Bool"}));
  CHECK_FALSE(override_method(t, "send", pred(t.rt, {"SSL", "Trans"}), {{"Msg"}, "Msg"}));
  CHECK_FALSE(introduce_method(t, pred(t.rt, {"SSL", "Trans"}), "send"));
  CHECK(refine(t, {"SSL", "Trans"}));
  CHECK_FALSE(refine(t, {"EmailClient", "Trans"}));
}

TEST_CASE("single evaluation steps") {
  FfjProgram p = whole("email-slice");
  CHECK(step(p.tables, "(Object) new Object()") == "new Object()");
  CHECK(step(p.tables, "new SSL(new Trans(new Key())).trans") == "new Trans(new Key())");
  CHECK(step(p.tables, "new Trans(new Key()).send(new Msg())") ==
        "new SSL(new Trans(new Key())).send(new Msg())");

  FfjProgram pair = whole("pair");
  CHECK(step(pair.tables, "new Pair(new A(), new B()).setfst(new C())") ==
        "new Pair(new C(), new Pair(new A(), new B()).snd)");
  CHECK(step(pair.tables, "new Pair((Object) new A(), (Object) new B())") ==
        "new Pair(new A(), (Object) new B())");
  CHECK(step(pair.tables, "new Pair(new A(), new B()).swap().fst") ==
        "new Pair(new Pair(new A(), new B()).snd, new Pair(new A(), new B()).fst).fst");

  StepResult normal = eval_step(pair.tables, parse_term("new A()"));
  CHECK(normal.kind == StepResult::Kind::Normal);
  StepResult stuck = eval_step(pair.tables, parse_term("new Pair((A) new B(), new C())"));
  REQUIRE(stuck.kind == StepResult::Kind::Stuck);
  CHECK(print_term(*stuck.stuck) == "(A) new B()");
}

TEST_CASE("evaluation to completion") {
  FfjProgram pair = whole("pair");
  EvalResult r = eval(pair.tables, pair.main_term);
  REQUIRE(r.kind == EvalResult::Kind::Value);
  CHECK(print_term(*r.term) == "new Pair(new C(), new B())");
  CHECK(r.steps == 2);

  FfjProgram email = whole("email-slice");
  EvalResult s = eval(email.tables, parse_term("new Trans(new Key()).send(new Msg())"));
  REQUIRE(s.kind == EvalResult::Kind::Value);
  CHECK(print_term(*s.term) == "new Bool()");

  EvalResult cast = eval(pair.tables, parse_term("(A) (Object) new B()"));
  CHECK(cast.kind == EvalResult::Kind::Stuck);

  FfjProgram loop = program({{"F", "class L extends Object { L go() { return this.go(); } }"}});
  EvalResult diverge = eval(loop.tables, parse_term("new L().go()"), 50);
  CHECK(diverge.kind == EvalResult::Kind::OutOfFuel);
  CHECK(diverge.steps == 50);
}

TEST_CASE("substitution replaces free variables only") {
  auto t = substitute(parse_term("x.m(y, this)"), {{"x", parse_term("new A()")}, {"this", parse_term("z")}});
  CHECK(print_term(*t) == "new A().m(y, z)");
}

TEST_CASE("term typing") {
  FfjProgram p = whole("email-slice");
  std::vector<Diagnostic> ds;
  CHECK(typecheck_term(p.tables, {{"m", "Msg"}, {"this", "Trans"}}, *parse_term("new SSL(this).send(m)"), ds) == "Bool");
  CHECK(ds.empty());
  CHECK(typecheck_term(p.tables, {{"x", "Key"}}, *parse_term("x"), ds) == "Key");

  ds.clear();
  CHECK(typecheck_term(p.tables, {}, *parse_term("(Msg) new Trans(new Key())"), ds) == "Msg");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "stupid-cast");
  CHECK(ds[0].severity == Severity::Warning);

  auto code = [&](const std::string& term, TypeEnv env = {}) {
    std::vector<Diagnostic> out;
    auto ty = typecheck_term(p.tables, env, *parse_term(term), out);
    CHECK_FALSE(ty);
    return out.empty() ? std::string() : out.front().code;
  };
  CHECK(code("y") == "unknown-variable");
  CHECK(code("new Nope()") == "unknown-class");
  CHECK(code("new Msg().nope") == "unknown-field");
  CHECK(code("new Msg().nope()") == "unknown-method");
  CHECK(code("new Trans()") == "arity-mismatch");
  CHECK(code("new Trans(new Msg())") == "argument-type");
  CHECK(code("new Trans(new Key()).send()") == "arity-mismatch");
  CHECK(code("new Trans(new Key()).send(new Key())") == "argument-type");
}

TEST_CASE("program typing") {
  CHECK(typecheck_program(whole("email-slice")).empty());
  CHECK(typecheck_program(whole("pair")).empty());

  std::string occluding = kSsl;
  occluding.replace(occluding.find("overrides "), 10, "");
  auto ds = typecheck_program(program({{"EmailClient", kSlice}, {"SSL", occluding}}));
  CHECK(codes_of(ds) == Codes{"method-occludes"});
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].location.file == "SSL.ffj");

  ds = typecheck_program(program({{"EmailClient", kSlice}, {"SSL", kSsl}, {"Logging", "refines class Trans { Key key; }"}}));
  CHECK(codes_of(ds) == Codes{"duplicate-field"});

  ds = typecheck_program(program({{"EmailClient", kSlice}, {"Extra", "refines class Trans { overrides Bool recv(Msg m) { return new Bool(); } }"}}));
  CHECK(codes_of(ds) == Codes{"override-missing"});

  ds = typecheck_program(program({{"EmailClient", kSlice}, {"Extra", "refines class Trans { overrides Msg send(Msg m) { return m; } }"}}));
  CHECK(codes_of(ds) == Codes{"override-signature"});

  ds = typecheck_program(program({{"F", "class A extends Object { A m() { return new Object(); } }"}}));
  CHECK(codes_of(ds) == Codes{"return-type"});

  ds = typecheck_program(program({{"F", "class A extends Nope { }"}}));
  CHECK(codes_of(ds) == Codes{"unknown-class"});

  ds = typecheck_program(program({{"F", "class A extends Object { Nope n; }"}}));
  CHECK(codes_of(ds) == Codes{"unknown-class"});

  ds = typecheck_program(program({{"F", "refines class A { }"}}));
  CHECK(codes_of(ds) == Codes{"refine-missing-target"});

  ds = typecheck_program(program({{"F", "class A extends Object { }"}}, "new A().x"));
  CHECK(codes_of(ds) == Codes{"unknown-field"});
}

TEST_CASE("diagnostic formatting and ordering") {
  Diagnostic d{"unknown-field", "no field x", {"A/a.ffj", 3, 7}, Severity::Error, {"A", "B"}};
  CHECK(format_diagnostic(d) == "A/a.ffj:3:7: error unknown-field: no field x [A and B]");
  d.context.clear();
  d.severity = Severity::Warning;
  CHECK(format_diagnostic(d) == "A/a.ffj:3:7: warning unknown-field: no field x [true]");
  std::vector<Diagnostic> ds{d, d, {"b", "m", {"A/a.ffj", 1, 1}, Severity::Error, {}}};
  sort_diagnostics(ds);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].code == "b");
  CHECK(has_errors(ds));
}

TEST_CASE("generated programs satisfy lookup invariants") {
  testgen::Rng rng(31);
  testgen::Shape shape;
  shape.max_features = 4;
  shape.max_classes = 6;
  shape.max_refinements = 3;
  for (int i = 0; i < 100; ++i) {
    FfjProgram p = testgen::generate_program(rng, shape);
    REQUIRE_FALSE(has_errors(typecheck_program(p)));
    auto bad = ffj::testing::check_lookups(p.tables);
    CHECK_MESSAGE(!bad, bad.value_or(""));
  }
}
