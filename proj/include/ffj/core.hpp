#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ffj/ast.hpp"
#include "ffj/tables.hpp"

namespace ffj {

// Refinement-chain navigation. Both throw UnknownClass; pred also throws
// FeatureNotInChain.
QualifiedType last(const RefinementTable& rt, const std::string& c);
QualifiedType pred(const RefinementTable& rt, const QualifiedType& qt);

/// The superclass declared by the most refined class declaration of C, or
/// nullopt for Object and for classes that are only ever refined.
std::optional<std::string> superclass(const Tables& t, const std::string& c);

/// Reflexive-transitive closure of `extends`. Throws UnknownClass.
bool subtype(const Tables& t, const std::string& c, const std::string& d);

/// Superclass fields first, then the introduction, then each refinement in
/// composition order. Throws UnknownClass.
std::vector<TypedName> fields(const Tables& t, const QualifiedType& qt);

struct MethodSignature {
  std::vector<std::string> params;
  std::string return_type;

  friend bool operator==(const MethodSignature&, const MethodSignature&) = default;
};

std::string to_string(const MethodSignature& sig);
MethodSignature signature_of(const MethodDecl& m);

struct MethodBody {
  std::vector<std::string> params;
  TermPtr body;
  QualifiedType owner;
};

/// Nullopt when no declaration of m is found (Base.Object included).
std::optional<MethodBody> mbody(const Tables& t, const std::string& m, const QualifiedType& qt);
std::optional<MethodSignature> mtype(const Tables& t, const std::string& m,
                                     const QualifiedType& qt);

bool introduce(const Tables& t, const QualifiedType& qt);
bool introduce_field(const Tables& t, const QualifiedType& base, const std::string& f);
bool introduce_method(const Tables& t, const QualifiedType& base, const std::string& m);
bool refine(const Tables& t, const QualifiedType& qt);
bool override_method(const Tables& t, const std::string& m, const QualifiedType& base,
                     const MethodSignature& sig);

struct StepResult {
  enum class Kind { Stepped, Normal, Stuck };
  Kind kind = Kind::Normal;
  TermPtr term;   // successor when Stepped, the input otherwise
  TermPtr stuck;  // the redex that no rule applies to
};

StepResult eval_step(const Tables& t, const TermPtr& term);

struct EvalResult {
  enum class Kind { Value, Stuck, OutOfFuel };
  Kind kind = Kind::Value;
  TermPtr term;
  TermPtr stuck;
  std::size_t steps = 0;
};

inline constexpr std::size_t kDefaultFuel = 100000;

EvalResult eval(const Tables& t, const TermPtr& term, std::size_t fuel = kDefaultFuel);

TermPtr substitute(const TermPtr& term, const std::map<std::string, TermPtr>& subst);

enum class Severity { Error, Warning };

struct Diagnostic {
  std::string code;
  std::string message;
  SourceLocation location;
  Severity severity = Severity::Error;
  std::vector<std::string> context;  // features the diagnostic is conditioned on

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// `<file>:<line>:<col>: <severity> <code>: <message> [<context>]`
std::string format_diagnostic(const Diagnostic& d);
void sort_diagnostics(std::vector<Diagnostic>& ds);
bool has_errors(const std::vector<Diagnostic>& ds);

using TypeEnv = std::map<std::string, std::string>;

/// Nullopt when the term is ill-typed; the reason is appended to `out`.
std::optional<std::string> typecheck_term(const Tables& t, const TypeEnv& env, const Term& term,
                                          std::vector<Diagnostic>& out);

struct FfjProgram {
  TermPtr main_term;
  Tables tables;
};

std::vector<Diagnostic> typecheck_program(const FfjProgram& program);

}  // namespace ffj
