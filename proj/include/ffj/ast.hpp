#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ffj {

struct SourceLocation {
  std::string file;
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
  friend auto operator<=>(const SourceLocation&, const SourceLocation&) = default;
};

std::string to_string(const SourceLocation& loc);

inline const std::string kObject = "Object";
inline const std::string kBaseFeature = "Base";
inline const std::string kThis = "this";

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Var {
  std::string name;
};

struct FieldAccess {
  TermPtr receiver;
  std::string field;
};

struct Invoke {
  TermPtr receiver;
  std::string method;
  std::vector<TermPtr> args;
};

struct New {
  std::string cls;
  std::vector<TermPtr> args;
};

struct Cast {
  std::string target;
  TermPtr operand;
};

// Terms are immutable and shared; evaluation and substitution build new
// nodes around unchanged subterms.
struct Term {
  std::variant<Var, FieldAccess, Invoke, New, Cast> node;
  SourceLocation location;
};

TermPtr make_var(std::string name, SourceLocation loc = {});
TermPtr make_field(TermPtr receiver, std::string field, SourceLocation loc = {});
TermPtr make_invoke(TermPtr receiver, std::string method, std::vector<TermPtr> args,
                    SourceLocation loc = {});
TermPtr make_new(std::string cls, std::vector<TermPtr> args, SourceLocation loc = {});
TermPtr make_cast(std::string target, TermPtr operand, SourceLocation loc = {});

/// A value is `new C(v...)` whose arguments are all values.
bool is_value(const Term& t);

/// Structural equality, ignoring source locations.
bool same_term(const Term& a, const Term& b);

std::size_t term_size(const Term& t);

struct TypedName {
  std::string type;
  std::string name;

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct MethodDecl {
  bool overrides = false;
  std::string return_type;
  std::string name;
  std::vector<TypedName> params;
  TermPtr body;
  SourceLocation location;
};

struct ClassDecl {
  std::string name;
  std::string superclass;
  std::vector<TypedName> fields;
  std::vector<MethodDecl> methods;
  SourceLocation location;
};

struct RefinementDecl {
  std::string name;
  std::vector<TypedName> fields;
  std::vector<MethodDecl> methods;
  SourceLocation location;
};

using Declaration = std::variant<ClassDecl, RefinementDecl>;

const std::string& decl_name(const Declaration& d);
const std::vector<TypedName>& decl_fields(const Declaration& d);
const std::vector<MethodDecl>& decl_methods(const Declaration& d);
const SourceLocation& decl_location(const Declaration& d);
bool is_class(const Declaration& d);
const MethodDecl* find_method(const Declaration& d, const std::string& name);

/// Structural equality of declarations, ignoring source locations.
bool same_declaration(const Declaration& a, const Declaration& b);

// Propositional formulas over feature names.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { True, Atom, Not, And, Or, Implies };
  Kind kind = Kind::True;
  std::string atom;
  FormulaPtr lhs;
  FormulaPtr rhs;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(std::string name);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);
FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs);

void collect_atoms(const Formula& f, std::vector<std::string>& out);

struct FeatureModel {
  std::vector<std::string> features;
  FormulaPtr constraint = f_true();

  /// Position in the composition order, or nullopt for undeclared names.
  std::optional<std::size_t> index_of(const std::string& feature) const;
  bool declares(const std::string& feature) const { return index_of(feature).has_value(); }
};

}  // namespace ffj
