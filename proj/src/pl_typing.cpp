#include "ffj/pl_typing.hpp"

#include <algorithm>

#include "ffj/errors.hpp"

namespace ffj {

namespace {

constexpr int kMaxDepth = 512;

void check_depth(int depth, const QualifiedType& qt) {
  if (depth > kMaxDepth) {
    throw SanityViolation("cycle", "lookup through " + to_string(qt) + " does not terminate");
  }
}

Context extended(const Context& ctx, const std::string& feature) {
  Context out = ctx;
  if (std::find(out.begin(), out.end(), feature) == out.end()) out.push_back(feature);
  return out;
}

template <class T>
void dedupe(std::vector<T>& v) {
  std::vector<T> out;
  for (auto& x : v) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(std::move(x));
  }
  v = std::move(out);
}

std::vector<std::string> preceding(const std::vector<std::string>& chain, const std::string& f) {
  auto it = std::find(chain.begin(), chain.end(), f);
  return {chain.begin(), it};
}

}  // namespace

std::string to_string(const FieldAlternatives& alts) {
  std::string s;
  for (std::size_t i = 0; i < alts.size(); ++i) {
    if (i) s += " || ";
    for (std::size_t j = 0; j < alts[i].size(); ++j) {
      const auto& e = alts[i][j];
      s += (j ? ", " : "") + e.type + " " + e.name + (e.optional ? "@" : "");
    }
  }
  return s;
}

PlChecker::PlChecker(const ProductLine& pl, Reasoner& reasoner, bool normalize)
    : pl_(pl), t_(pl.tables), reasoner_(reasoner), normalize_(normalize) {}

Presence PlChecker::presence_of(const Context& ctx, const FormulaPtr& f) {
  if (reasoner_.implies(ctx, f)) return Presence::Always;
  std::vector<FormulaPtr> parts{f};
  for (const auto& c : ctx) parts.push_back(f_atom(c));
  return reasoner_.satisfiable(f_and_all(parts)) ? Presence::Sometimes : Presence::Never;
}

Presence PlChecker::class_presence(const Context& ctx, const std::string& c) {
  if (c == kObject) return Presence::Always;
  std::vector<FormulaPtr> atoms;
  for (const auto& f : t_.it.of_class(c)) atoms.push_back(f_atom(f));
  return presence_of(ctx, f_or_all(atoms));
}

FormulaPtr PlChecker::member_formula(const std::string& c, const std::string& name,
                                     bool is_method,
                                     const std::optional<std::vector<std::string>>& scope,
                                     std::vector<std::string>& visiting) {
  if (c == kObject || std::find(visiting.begin(), visiting.end(), c) != visiting.end()) {
    return f_false();
  }
  auto in_scope = [&](const std::string& f) {
    return !scope || std::find(scope->begin(), scope->end(), f) != scope->end();
  };
  std::vector<FormulaPtr> parts;
  const auto& direct = is_method ? t_.it.of_method(c, name) : t_.it.of_field(c, name);
  for (const auto& f : direct) {
    if (in_scope(f)) parts.push_back(f_atom(f));
  }
  visiting.push_back(c);
  for (const auto& f : t_.it.of_class(c)) {
    if (!in_scope(f)) continue;
    const auto& decl = std::get<ClassDecl>(*t_.ct.find({f, c}));
    FormulaPtr inherited = member_formula(decl.superclass, name, is_method, std::nullopt, visiting);
    if (inherited->kind == Formula::Kind::Not && inherited->lhs->kind == Formula::Kind::True) {
      continue;
    }
    parts.push_back(f_and(f_atom(f), inherited));
  }
  visiting.pop_back();
  return f_or_all(parts);
}

Presence PlChecker::field_presence(const Context& ctx, const std::string& c,
                                   const std::string& f) {
  std::vector<std::string> visiting;
  return presence_of(ctx, member_formula(c, f, false, std::nullopt, visiting));
}

Presence PlChecker::method_presence(const Context& ctx, const std::string& c,
                                    const std::string& m,
                                    const std::optional<std::vector<std::string>>& scope) {
  std::vector<std::string> visiting;
  return presence_of(ctx, member_formula(c, m, true, scope, visiting));
}

bool PlChecker::subtype_pl(const Context& ctx, const std::string& c, const std::string& e) {
  std::vector<std::string> visiting;
  return subtype_at(ctx, c, e, visiting);
}

bool PlChecker::subtype_at(const Context& ctx, const std::string& c, const std::string& e,
                           std::vector<std::string>& visiting) {
  if (c == e) return true;
  if (c == kObject) return false;
  if (std::find(visiting.begin(), visiting.end(), c) != visiting.end()) return false;
  if (!reachable(ctx, c)) return false;
  visiting.push_back(c);
  bool ok = true;
  for (const auto& f : t_.it.of_class(c)) {
    if (!reasoner_.sometimes(ctx, f)) continue;
    const auto& decl = std::get<ClassDecl>(*t_.ct.find({f, c}));
    Context next = extended(ctx, f);
    if (!reachable(next, decl.superclass) || !subtype_at(next, decl.superclass, e, visiting)) {
      ok = false;
      break;
    }
  }
  visiting.pop_back();
  return ok;
}

FieldAlternatives PlChecker::fields_pl(const Context& ctx, const QualifiedType& qt) {
  return fields_at(ctx, qt, 0);
}

FieldAlternatives PlChecker::fields_at(const Context& ctx, const QualifiedType& qt, int depth) {
  check_depth(depth, qt);
  if (is_terminator(qt)) return {{}};
  const Declaration* decl = t_.ct.find(qt);
  if (decl == nullptr) throw UnknownClass(qt.cls);
  const std::string& phi = qt.feature;
  if (reasoner_.never(ctx, phi)) return fields_at(ctx, pred(t_.rt, qt), depth + 1);

  PresenceVerdict v = reasoner_.always(ctx, phi, t_.rt.of(qt.cls));
  if (v.kind == PresenceVerdict::Kind::AlwaysInGroup) {
    FieldAlternatives out;
    for (const auto& g : v.group) {
      auto part = fields_at(extended(ctx, g), qt, depth + 1);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  bool optional = v.kind == PresenceVerdict::Kind::NeverForced;
  FieldAlternatives out;
  if (const auto* c = std::get_if<ClassDecl>(decl)) {
    out = fields_at(extended(ctx, phi), last(t_.rt, c->superclass), depth + 1);
    if (optional) {
      for (auto& inner : out) {
        for (auto& e : inner) e.optional = true;
      }
    }
  } else {
    out = fields_at(ctx, pred(t_.rt, qt), depth + 1);
  }
  for (auto& inner : out) {
    for (const auto& f : decl_fields(*decl)) inner.push_back({f.type, f.name, optional, qt});
  }
  return out;
}

std::vector<MethodSignature> PlChecker::mtype_pl(const Context& ctx, const std::string& m,
                                                 const QualifiedType& qt) {
  std::vector<MethodSignature> out;
  mtype_at(ctx, m, qt, 0, out);
  if (normalize_) dedupe(out);
  return out;
}

void PlChecker::mtype_at(const Context& ctx, const std::string& m, const QualifiedType& qt,
                         int depth, std::vector<MethodSignature>& out) {
  check_depth(depth, qt);
  if (is_terminator(qt)) return;
  const Declaration* decl = t_.ct.find(qt);
  if (decl == nullptr) throw UnknownClass(qt.cls);
  if (!reasoner_.sometimes(ctx, qt.feature)) {
    mtype_at(ctx, m, pred(t_.rt, qt), depth + 1, out);
    return;
  }
  if (const MethodDecl* md = find_method(*decl, m)) out.push_back(signature_of(*md));
  mtype_at(ctx, m, pred(t_.rt, qt), depth + 1, out);
  if (const auto* c = std::get_if<ClassDecl>(decl)) {
    mtype_at(extended(ctx, qt.feature), m, last(t_.rt, c->superclass), depth + 1, out);
  }
}

std::optional<QualifiedType> PlChecker::lookup_base(const QualifiedType& qt) {
  const Declaration* decl = t_.ct.find(qt);
  if (decl == nullptr) throw UnknownClass(qt.cls);
  if (const auto* c = std::get_if<ClassDecl>(decl)) {
    if (!reachable({qt.feature}, c->superclass)) return std::nullopt;
    return last(t_.rt, c->superclass);
  }
  return pred(t_.rt, qt);
}

bool PlChecker::introduce_pl(const QualifiedType& qt) {
  for (const auto& f : t_.it.of_class(qt.cls)) {
    if (f != qt.feature && reasoner_.sometimes({qt.feature}, f)) return false;
  }
  return true;
}

bool PlChecker::introduce_pl_field(const QualifiedType& qt, const std::string& f) {
  auto base = lookup_base(qt);
  if (!base) return true;
  for (const auto& inner : fields_pl({qt.feature}, *base)) {
    for (const auto& e : inner) {
      if (e.name == f) return false;
    }
  }
  return true;
}

bool PlChecker::introduce_pl_method(const QualifiedType& qt, const std::string& m) {
  auto base = lookup_base(qt);
  return !base || mtype_pl({qt.feature}, m, *base).empty();
}

bool PlChecker::refine_pl(const QualifiedType& qt) {
  auto scope = preceding(t_.rt.of(qt.cls), qt.feature);
  return reasoner_.reachable({qt.feature}, t_.it.of_class(qt.cls), scope);
}

bool PlChecker::override_pl(const std::string& m, const QualifiedType& qt,
                            const MethodSignature& sig) {
  auto base = lookup_base(qt);
  if (!base) return false;
  Presence present;
  if (const auto* c = std::get_if<ClassDecl>(t_.ct.find(qt))) {
    present = method_presence({qt.feature}, c->superclass, m);
  } else {
    present = method_presence({qt.feature}, qt.cls, m, preceding(t_.rt.of(qt.cls), qt.feature));
  }
  if (present != Presence::Always) return false;
  auto sigs = mtype_pl({qt.feature}, m, *base);
  return std::all_of(sigs.begin(), sigs.end(), [&](const auto& s) { return s == sig; });
}

class PlChecker::TermRules {
 public:
  TermRules(PlChecker& c, const std::string& phi, std::vector<Diagnostic>& out)
      : c_(c), phi_(phi), ctx_{phi}, out_(out) {}

  std::optional<TypeSet> type(const TypeEnv& env, const Term& term) {
    auto r = std::visit([&](const auto& x) { return rule(env, term, x); }, term.node);
    if (r && c_.normalize_) dedupe(*r);
    return r;
  }

 private:
  std::nullopt_t error(const std::string& code, const std::string& msg,
                       const SourceLocation& loc) {
    out_.push_back({code, msg, loc, Severity::Error, ctx_});
    return std::nullopt;
  }

  std::nullopt_t missing(Presence p, const std::string& kind, const std::string& what,
                         const SourceLocation& loc) {
    if (p == Presence::Never) {
      return error("unknown-" + kind, what + " does not exist in any variant with " + phi_, loc);
    }
    return error("unreachable-" + kind, what + " is not present in every variant with " + phi_,
                 loc);
  }

  bool subtype(const std::string& a, const std::string& b) { return c_.subtype_pl(ctx_, a, b); }

  std::optional<TypeSet> rule(const TypeEnv& env, const Term& term, const Var& x) {
    auto it = env.find(x.name);
    if (it == env.end()) return error("unknown-variable", "unbound variable " + x.name, term.location);
    return TypeSet{it->second};
  }

  std::optional<TypeSet> rule(const TypeEnv& env, const Term& term, const FieldAccess& x) {
    auto recv = type(env, *x.receiver);
    if (!recv) return std::nullopt;
    for (const auto& e : *recv) {
      Presence p = c_.field_presence(ctx_, e, x.field);
      if (p != Presence::Always) return missing(p, "field", "field " + e + "." + x.field, term.location);
    }
    TypeSet out;
    for (const auto& e : *recv) {
      FieldAlternatives alts;
      try {
        alts = c_.fields_pl(ctx_, last(c_.t_.rt, e));
      } catch (const Error&) {
        return error("unknown-field", "class " + e + " has no field " + x.field, term.location);
      }
      for (const auto& inner : alts) {
        auto it = std::find_if(inner.begin(), inner.end(),
                               [&](const FieldEntry& f) { return f.name == x.field; });
        if (it == inner.end()) {
          return error("unknown-field", "class " + e + " lacks field " + x.field +
                                            " along one inheritance path",
                       term.location);
        }
        out.push_back(it->type);
      }
    }
    return out;
  }

  bool type_args(const TypeEnv& env, const std::vector<TermPtr>& args,
                 std::vector<TypeSet>& types) {
    bool ok = true;
    for (const auto& a : args) {
      auto ty = type(env, *a);
      if (!ty) ok = false;
      types.push_back(ty.value_or(TypeSet{}));
    }
    return ok;
  }

  bool check_args(const std::vector<TypeSet>& actual, const std::vector<std::string>& formal,
                  const std::vector<TermPtr>& args, const std::string& what,
                  const SourceLocation& loc) {
    if (actual.size() != formal.size()) {
      error("arity-mismatch",
            what + " expects " + std::to_string(formal.size()) + " arguments, got " +
                std::to_string(actual.size()),
            loc);
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      for (const auto& a : actual[i]) {
        if (!subtype(a, formal[i])) {
          error("argument-type",
                "argument " + std::to_string(i + 1) + " of " + what + " may have type " + a +
                    ", not a subtype of " + formal[i],
                args[i]->location);
          ok = false;
        }
      }
    }
    return ok;
  }

  std::optional<TypeSet> rule(const TypeEnv& env, const Term& term, const Invoke& x) {
    auto recv = type(env, *x.receiver);
    if (!recv) return std::nullopt;
    std::vector<TypeSet> actual;
    if (!type_args(env, x.args, actual)) return std::nullopt;
    std::vector<std::pair<std::string, MethodSignature>> sigs;
    for (const auto& e : *recv) {
      Presence p = c_.method_presence(ctx_, e, x.method);
      if (p != Presence::Always) {
        return missing(p, "method", "method " + e + "." + x.method, term.location);
      }
      try {
        for (auto& s : c_.mtype_pl(ctx_, x.method, last(c_.t_.rt, e))) sigs.emplace_back(e, s);
      } catch (const Error&) {
      }
    }
    if (sigs.empty()) {
      return error("unknown-method", "no declaration of " + x.method + " is visible",
                   term.location);
    }
    bool ok = true;
    TypeSet out;
    for (const auto& [e, s] : sigs) {
      ok = check_args(actual, s.params, x.args, "method " + e + "." + x.method, term.location) &&
           ok;
      out.push_back(s.return_type);
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<TypeSet> rule(const TypeEnv& env, const Term& term, const New& x) {
    Presence p = c_.class_presence(ctx_, x.cls);
    if (p != Presence::Always) return missing(p, "class", "class " + x.cls, term.location);
    std::vector<TypeSet> actual;
    if (!type_args(env, x.args, actual)) return std::nullopt;
    FieldAlternatives alts;
    try {
      alts = c_.fields_pl(ctx_, last(c_.t_.rt, x.cls));
    } catch (const Error&) {
      return error("unknown-class", "the hierarchy of " + x.cls + " is incomplete", term.location);
    }
    bool ok = true;
    for (const auto& inner : alts) {
      auto opt = std::find_if(inner.begin(), inner.end(), [](const auto& f) { return f.optional; });
      if (opt != inner.end()) {
        error("optional-field",
              "field " + opt->name + " of " + x.cls + " (from " + to_string(opt->origin) +
                  ") is not present in every variant",
              term.location);
        ok = false;
        continue;
      }
      std::vector<std::string> formal;
      for (const auto& f : inner) formal.push_back(f.type);
      ok = check_args(actual, formal, x.args, "new " + x.cls, term.location) && ok;
    }
    if (!ok) return std::nullopt;
    return TypeSet{x.cls};
  }

  std::optional<TypeSet> rule(const TypeEnv& env, const Term& term, const Cast& x) {
    Presence p = c_.class_presence(ctx_, x.target);
    if (p != Presence::Always) return missing(p, "class", "class " + x.target, term.location);
    auto operand = type(env, *x.operand);
    if (!operand) return std::nullopt;
    for (const auto& e : *operand) {
      if (!subtype(e, x.target) && !subtype(x.target, e)) {
        out_.push_back({"stupid-cast", "cast from " + e + " to unrelated class " + x.target,
                        term.location, Severity::Warning, ctx_});
      }
    }
    return TypeSet{x.target};
  }

  PlChecker& c_;
  std::string phi_;
  Context ctx_;
  std::vector<Diagnostic>& out_;
};

std::optional<TypeSet> PlChecker::typecheck_term_pl(const TypeEnv& env, const Term& t,
                                                    const std::string& phi,
                                                    std::vector<Diagnostic>& out) {
  return TermRules(*this, phi, out).type(env, t);
}

void PlChecker::type_reference(const Context& ctx, const std::string& type,
                               const std::string& what, const SourceLocation& loc,
                               std::vector<Diagnostic>& out) {
  Presence p = class_presence(ctx, type);
  if (p == Presence::Always) return;
  bool never = p == Presence::Never;
  out.push_back({never ? "unknown-class" : "unreachable-class",
                 what + " " + type + (never ? " does not exist in any variant with "
                                            : " is not present in every variant with ") +
                     ctx.front(),
                 loc, Severity::Error, ctx});
}

void PlChecker::check_method(const QualifiedType& qt, const std::optional<QualifiedType>& base,
                             const MethodDecl& m, std::vector<Diagnostic>& out) {
  Context ctx{qt.feature};
  type_reference(ctx, m.return_type, "return type of " + m.name, m.location, out);
  TypeEnv env;
  for (const auto& p : m.params) {
    type_reference(ctx, p.type, "type of parameter " + p.name, m.location, out);
    env[p.name] = p.type;
  }
  env[kThis] = qt.cls;
  if (auto body = typecheck_term_pl(env, *m.body, qt.feature, out)) {
    for (const auto& ty : *body) {
      if (!subtype_pl(ctx, ty, m.return_type)) {
        out.push_back({"return-type",
                       "body of " + m.name + " may have type " + ty + ", not a subtype of " +
                           m.return_type,
                       m.body->location, Severity::Error, ctx});
      }
    }
  }
  if (!base) return;
  MethodSignature sig = signature_of(m);
  try {
    if (!m.overrides) {
      auto found = mtype_pl(ctx, m.name, *base);
      if (!found.empty()) {
        out.push_back({"method-occludes",
                       "method " + m.name + " occludes an existing method " + to_string(found[0]),
                       m.location, Severity::Error, ctx});
      }
      return;
    }
    Presence present;
    if (const auto* c = std::get_if<ClassDecl>(t_.ct.find(qt))) {
      present = method_presence(ctx, c->superclass, m.name);
    } else {
      present = method_presence(ctx, qt.cls, m.name, preceding(t_.rt.of(qt.cls), qt.feature));
    }
    if (present != Presence::Always) {
      out.push_back({"override-missing",
                     "method " + m.name + " does not override a declaration present in every " +
                         "variant with " + qt.feature,
                     m.location, Severity::Error, ctx});
      return;
    }
    for (const auto& s : mtype_pl(ctx, m.name, *base)) {
      if (!(s == sig)) {
        out.push_back({"override-signature",
                       "method " + m.name + " has signature " + to_string(sig) +
                           " but may override " + to_string(s),
                       m.location, Severity::Error, ctx});
        return;
      }
    }
  } catch (const UnknownClass&) {
  }
}

void PlChecker::check_declaration(const QualifiedType& qt, const Declaration& decl,
                                  std::vector<Diagnostic>& out) {
  const SourceLocation& loc = decl_location(decl);
  Context ctx{qt.feature};
  std::optional<QualifiedType> base;
  if (const auto* c = std::get_if<ClassDecl>(&decl)) {
    if (!introduce_pl(qt)) {
      out.push_back({"duplicate-class",
                     "class " + qt.cls + " is also introduced by a feature that can coexist with " +
                         qt.feature,
                     loc, Severity::Error, ctx});
    }
    type_reference(ctx, c->superclass, "superclass of " + qt.cls, loc, out);
    if (reachable(ctx, c->superclass)) base = last(t_.rt, c->superclass);
  } else {
    if (!refine_pl(qt)) {
      out.push_back({"refine-missing-target",
                     "refined class " + qt.cls + " is not introduced before " + qt.feature +
                         " in every variant with " + qt.feature,
                     loc, Severity::Error, ctx});
    }
    base = pred(t_.rt, qt);
  }
  for (const auto& f : decl_fields(decl)) {
    type_reference(ctx, f.type, "type of field " + f.name, loc, out);
    bool fresh = true;
    if (base) {
      try {
        fresh = introduce_pl_field(qt, f.name);
      } catch (const UnknownClass&) {
      }
    }
    if (!fresh) {
      out.push_back({"duplicate-field",
                     "field " + qt.cls + "." + f.name + " may already be declared", loc,
                     Severity::Error, ctx});
    }
  }
  for (const auto& m : decl_methods(decl)) check_method(qt, base, m, out);
}

std::vector<Diagnostic> PlChecker::check() {
  std::vector<Diagnostic> out;
  // Features no valid selection contains cannot affect any variant.
  if (pl_.main_term && !pl_.main_context.empty() && reasoner_.consistent({pl_.main_context})) {
    typecheck_term_pl({}, *pl_.main_term, pl_.main_context, out);
  }
  for (const auto& [qt, decl] : t_.ct.entries) {
    if (!reasoner_.consistent({qt.feature})) continue;
    check_declaration(qt, decl, out);
  }
  sort_diagnostics(out);
  return out;
}

std::vector<Diagnostic> typecheck_product_line(const ProductLine& pl, Reasoner& reasoner) {
  return PlChecker(pl, reasoner).check();
}

std::vector<Diagnostic> typecheck_product_line(const ProductLine& pl, bool cache) {
  Reasoner reasoner(pl.feature_model, cache);
  return typecheck_product_line(pl, reasoner);
}

}  // namespace ffj
