#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ffj/core.hpp"
#include "ffj/feature_model.hpp"
#include "ffj/tables.hpp"

namespace ffj {

struct FieldEntry {
  std::string type;
  std::string name;
  bool optional = false;  // the @ marker: presence not guaranteed in the context
  QualifiedType origin;

  friend bool operator==(const FieldEntry&, const FieldEntry&) = default;
};

/// Outer list: alternative paths through the combined hierarchy.
using FieldAlternatives = std::vector<std::vector<FieldEntry>>;
using TypeSet = std::vector<std::string>;

std::string to_string(const FieldAlternatives& alts);

enum class Presence { Always, Sometimes, Never };

class PlChecker {
 public:
  /// `normalize` removes duplicate types and signatures from results.
  PlChecker(const ProductLine& pl, Reasoner& reasoner, bool normalize = true);

  Presence class_presence(const Context& ctx, const std::string& c);
  /// Members count as present when declared in C or inherited through any
  /// introduction of C whose superclass provides them. A scope restricts the
  /// features of C's own chain that may supply the member.
  Presence field_presence(const Context& ctx, const std::string& c, const std::string& f);
  Presence method_presence(const Context& ctx, const std::string& c, const std::string& m,
                           const std::optional<std::vector<std::string>>& scope = std::nullopt);

  bool reachable(const Context& ctx, const std::string& c) {
    return class_presence(ctx, c) == Presence::Always;
  }

  bool subtype_pl(const Context& ctx, const std::string& c, const std::string& e);
  FieldAlternatives fields_pl(const Context& ctx, const QualifiedType& qt);
  std::vector<MethodSignature> mtype_pl(const Context& ctx, const std::string& m,
                                        const QualifiedType& qt);

  bool introduce_pl(const QualifiedType& qt);
  bool introduce_pl_field(const QualifiedType& qt, const std::string& f);
  bool introduce_pl_method(const QualifiedType& qt, const std::string& m);
  bool refine_pl(const QualifiedType& qt);
  bool override_pl(const std::string& m, const QualifiedType& qt, const MethodSignature& sig);

  std::optional<TypeSet> typecheck_term_pl(const TypeEnv& env, const Term& t,
                                           const std::string& phi, std::vector<Diagnostic>& out);

  std::vector<Diagnostic> check();

 private:
  class TermRules;

  FormulaPtr member_formula(const std::string& c, const std::string& name, bool is_method,
                            const std::optional<std::vector<std::string>>& scope,
                            std::vector<std::string>& visiting);
  Presence presence_of(const Context& ctx, const FormulaPtr& f);
  /// The qualified type member lookups of a declaration start from.
  std::optional<QualifiedType> lookup_base(const QualifiedType& qt);
  FieldAlternatives fields_at(const Context& ctx, const QualifiedType& qt, int depth);
  void mtype_at(const Context& ctx, const std::string& m, const QualifiedType& qt, int depth,
                std::vector<MethodSignature>& out);
  bool subtype_at(const Context& ctx, const std::string& c, const std::string& e,
                  std::vector<std::string>& visiting);
  void check_declaration(const QualifiedType& qt, const Declaration& decl,
                         std::vector<Diagnostic>& out);
  void check_method(const QualifiedType& qt, const std::optional<QualifiedType>& base,
                    const MethodDecl& m, std::vector<Diagnostic>& out);
  void type_reference(const Context& ctx, const std::string& type, const std::string& what,
                      const SourceLocation& loc, std::vector<Diagnostic>& out);

  const ProductLine& pl_;
  const Tables& t_;
  Reasoner& reasoner_;
  bool normalize_;
};

std::vector<Diagnostic> typecheck_product_line(const ProductLine& pl, Reasoner& reasoner);
std::vector<Diagnostic> typecheck_product_line(const ProductLine& pl, bool cache = true);

}  // namespace ffj
