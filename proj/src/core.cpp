#include "ffj/core.hpp"

#include <algorithm>
#include <set>

#include "ffj/errors.hpp"
#include "ffj/parser.hpp"

namespace ffj {

QualifiedType last(const RefinementTable& rt, const std::string& c) {
  if (c == kObject) return terminator();
  const auto& chain = rt.of(c);
  if (chain.empty()) throw UnknownClass(c);
  return {chain.back(), c};
}

QualifiedType pred(const RefinementTable& rt, const QualifiedType& qt) {
  const auto& chain = rt.of(qt.cls);
  if (chain.empty()) throw UnknownClass(qt.cls);
  auto it = std::find(chain.begin(), chain.end(), qt.feature);
  if (it == chain.end()) throw FeatureNotInChain(qt.feature, qt.cls);
  if (it == chain.begin()) return terminator();
  return {*(it - 1), qt.cls};
}

std::optional<std::string> superclass(const Tables& t, const std::string& c) {
  if (c == kObject) return std::nullopt;
  const auto& chain = t.rt.of(c);
  if (chain.empty()) throw UnknownClass(c);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (const auto* decl = std::get_if<ClassDecl>(t.ct.find({*it, c}))) return decl->superclass;
  }
  return std::nullopt;
}

bool subtype(const Tables& t, const std::string& c, const std::string& d) {
  if (!t.rt.has_class(c)) throw UnknownClass(c);
  std::string cur = c;
  for (std::size_t guard = 0; guard <= t.rt.chains.size() + 1; ++guard) {
    if (cur == d) return true;
    if (!t.rt.has_class(cur)) return false;
    auto next = superclass(t, cur);
    if (!next) return false;
    cur = *next;
  }
  return false;
}

std::vector<TypedName> fields(const Tables& t, const QualifiedType& qt) {
  if (is_terminator(qt)) return {};
  const Declaration* decl = t.ct.find(qt);
  if (decl == nullptr) throw UnknownClass(qt.cls);
  std::vector<TypedName> out;
  if (const auto* c = std::get_if<ClassDecl>(decl)) {
    out = fields(t, last(t.rt, c->superclass));
  } else {
    out = fields(t, pred(t.rt, qt));
  }
  const auto& own = decl_fields(*decl);
  out.insert(out.end(), own.begin(), own.end());
  return out;
}

std::string to_string(const MethodSignature& sig) {
  std::string s;
  for (std::size_t i = 0; i < sig.params.size(); ++i) s += (i ? ", " : "") + sig.params[i];
  return (sig.params.empty() ? "()" : s) + " -> " + sig.return_type;
}

MethodSignature signature_of(const MethodDecl& m) {
  MethodSignature sig;
  for (const auto& p : m.params) sig.params.push_back(p.type);
  sig.return_type = m.return_type;
  return sig;
}

std::optional<MethodBody> mbody(const Tables& t, const std::string& m, const QualifiedType& qt) {
  if (is_terminator(qt)) return std::nullopt;
  const Declaration* decl = t.ct.find(qt);
  if (decl == nullptr) throw UnknownClass(qt.cls);
  if (const MethodDecl* md = find_method(*decl, m)) {
    MethodBody b;
    for (const auto& p : md->params) b.params.push_back(p.name);
    b.body = md->body;
    b.owner = qt;
    return b;
  }
  if (const auto* c = std::get_if<ClassDecl>(decl)) return mbody(t, m, last(t.rt, c->superclass));
  return mbody(t, m, pred(t.rt, qt));
}

std::optional<MethodSignature> mtype(const Tables& t, const std::string& m,
                                     const QualifiedType& qt) {
  auto b = mbody(t, m, qt);
  if (!b) return std::nullopt;
  return signature_of(*find_method(*t.ct.find(b->owner), m));
}

bool introduce(const Tables& t, const QualifiedType& qt) {
  const auto& introducers = t.it.of_class(qt.cls);
  return std::all_of(introducers.begin(), introducers.end(),
                     [&](const std::string& f) { return f == qt.feature; });
}

bool introduce_field(const Tables& t, const QualifiedType& base, const std::string& f) {
  auto fs = fields(t, base);
  return std::none_of(fs.begin(), fs.end(), [&](const TypedName& x) { return x.name == f; });
}

bool introduce_method(const Tables& t, const QualifiedType& base, const std::string& m) {
  return !mtype(t, m, base).has_value();
}

bool refine(const Tables& t, const QualifiedType& qt) {
  for (const auto& f : t.rt.of(qt.cls)) {
    if (f == qt.feature) return false;
    if (is_class(*t.ct.find({f, qt.cls}))) return true;
  }
  return false;
}

bool override_method(const Tables& t, const std::string& m, const QualifiedType& base,
                     const MethodSignature& sig) {
  auto found = mtype(t, m, base);
  return found && *found == sig;
}

TermPtr substitute(const TermPtr& term, const std::map<std::string, TermPtr>& subst) {
  return std::visit(
      [&](const auto& x) -> TermPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Var>) {
          auto it = subst.find(x.name);
          return it == subst.end() ? term : it->second;
        } else if constexpr (std::is_same_v<T, FieldAccess>) {
          return make_field(substitute(x.receiver, subst), x.field, term->location);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          std::vector<TermPtr> args;
          for (const auto& a : x.args) args.push_back(substitute(a, subst));
          return make_invoke(substitute(x.receiver, subst), x.method, std::move(args),
                             term->location);
        } else if constexpr (std::is_same_v<T, New>) {
          std::vector<TermPtr> args;
          for (const auto& a : x.args) args.push_back(substitute(a, subst));
          return make_new(x.cls, std::move(args), term->location);
        } else {
          return make_cast(x.target, substitute(x.operand, subst), term->location);
        }
      },
      term->node);
}

namespace {

StepResult stuck(const TermPtr& at, const TermPtr& whole) {
  return {StepResult::Kind::Stuck, whole, at};
}

// Steps the first non-value among `args`; returns nullopt if all are values.
std::optional<StepResult> step_args(const Tables& t, const std::vector<TermPtr>& args,
                                    std::vector<TermPtr>& rebuilt) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (is_value(*args[i])) continue;
    StepResult r = eval_step(t, args[i]);
    if (r.kind != StepResult::Kind::Stepped) return r;
    rebuilt = args;
    rebuilt[i] = r.term;
    return r;
  }
  return std::nullopt;
}

}  // namespace

StepResult eval_step(const Tables& t, const TermPtr& term) {
  if (is_value(*term)) return {StepResult::Kind::Normal, term, nullptr};
  return std::visit(
      [&](const auto& x) -> StepResult {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Var>) {
          return stuck(term, term);
        } else if constexpr (std::is_same_v<T, FieldAccess>) {
          if (!is_value(*x.receiver)) {
            StepResult r = eval_step(t, x.receiver);
            if (r.kind != StepResult::Kind::Stepped) return stuck(r.stuck, term);
            return {StepResult::Kind::Stepped, make_field(r.term, x.field, term->location), {}};
          }
          const auto& obj = std::get<New>(x.receiver->node);
          try {
            auto fs = fields(t, last(t.rt, obj.cls));
            if (fs.size() != obj.args.size()) return stuck(term, term);
            for (std::size_t i = 0; i < fs.size(); ++i) {
              if (fs[i].name == x.field) return {StepResult::Kind::Stepped, obj.args[i], {}};
            }
          } catch (const Error&) {
          }
          return stuck(term, term);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          if (!is_value(*x.receiver)) {
            StepResult r = eval_step(t, x.receiver);
            if (r.kind != StepResult::Kind::Stepped) return stuck(r.stuck, term);
            return {StepResult::Kind::Stepped,
                    make_invoke(r.term, x.method, x.args, term->location),
                    {}};
          }
          std::vector<TermPtr> args;
          if (auto r = step_args(t, x.args, args)) {
            if (r->kind != StepResult::Kind::Stepped) return stuck(r->stuck, term);
            return {StepResult::Kind::Stepped,
                    make_invoke(x.receiver, x.method, std::move(args), term->location),
                    {}};
          }
          const auto& obj = std::get<New>(x.receiver->node);
          try {
            auto body = mbody(t, x.method, last(t.rt, obj.cls));
            if (!body || body->params.size() != x.args.size()) return stuck(term, term);
            std::map<std::string, TermPtr> subst;
            for (std::size_t i = 0; i < x.args.size(); ++i) subst[body->params[i]] = x.args[i];
            subst[kThis] = x.receiver;
            return {StepResult::Kind::Stepped, substitute(body->body, subst), {}};
          } catch (const Error&) {
            return stuck(term, term);
          }
        } else if constexpr (std::is_same_v<T, New>) {
          std::vector<TermPtr> args;
          auto r = step_args(t, x.args, args);
          if (r->kind != StepResult::Kind::Stepped) return stuck(r->stuck, term);
          return {StepResult::Kind::Stepped, make_new(x.cls, std::move(args), term->location), {}};
        } else {
          if (!is_value(*x.operand)) {
            StepResult r = eval_step(t, x.operand);
            if (r.kind != StepResult::Kind::Stepped) return stuck(r.stuck, term);
            return {StepResult::Kind::Stepped, make_cast(x.target, r.term, term->location), {}};
          }
          const auto& obj = std::get<New>(x.operand->node);
          try {
            if (subtype(t, obj.cls, x.target)) return {StepResult::Kind::Stepped, x.operand, {}};
          } catch (const Error&) {
          }
          return stuck(term, term);
        }
      },
      term->node);
}

EvalResult eval(const Tables& t, const TermPtr& term, std::size_t fuel) {
  EvalResult r;
  r.term = term;
  while (true) {
    if (is_value(*r.term)) {
      r.kind = EvalResult::Kind::Value;
      return r;
    }
    if (r.steps >= fuel) {
      r.kind = EvalResult::Kind::OutOfFuel;
      return r;
    }
    StepResult s = eval_step(t, r.term);
    if (s.kind == StepResult::Kind::Stuck) {
      r.kind = EvalResult::Kind::Stuck;
      r.stuck = s.stuck;
      return r;
    }
    r.term = s.term;
    ++r.steps;
  }
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string ctx;
  for (std::size_t i = 0; i < d.context.size(); ++i) ctx += (i ? " and " : "") + d.context[i];
  return to_string(d.location) + ": " + (d.severity == Severity::Error ? "error" : "warning") +
         " " + d.code + ": " + d.message + " [" + (ctx.empty() ? "true" : ctx) + "]";
}

void sort_diagnostics(std::vector<Diagnostic>& ds) {
  auto key = [](const Diagnostic& d) {
    return std::tie(d.location, d.code, d.message, d.context, d.severity);
  };
  std::sort(ds.begin(), ds.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
}

bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

class ProgramChecker {
 public:
  ProgramChecker(const Tables& t, std::vector<Diagnostic>& out) : t_(t), out_(out) {}

  std::optional<std::string> type(const TypeEnv& env, const Term& term) {
    return std::visit([&](const auto& x) { return rule(env, term, x); }, term.node);
  }

  void check_declaration(const QualifiedType& qt, const Declaration& decl) {
    const SourceLocation& loc = decl_location(decl);
    std::optional<QualifiedType> base;
    if (const auto* c = std::get_if<ClassDecl>(&decl)) {
      if (!introduce(t_, qt)) {
        error("duplicate-class", "class " + qt.cls + " is introduced by more than one feature",
              loc);
      }
      if (!t_.rt.has_class(c->superclass)) {
        error("unknown-class", "superclass " + c->superclass + " of " + qt.cls + " is not declared",
              loc);
      } else {
        base = last(t_.rt, c->superclass);
      }
    } else {
      if (!refine(t_, qt)) {
        error("refine-missing-target",
              "no class declaration of " + qt.cls + " precedes the refinement in " + qt.feature,
              loc);
      }
      base = pred(t_.rt, qt);
    }
    for (const auto& f : decl_fields(decl)) {
      if (!t_.rt.has_class(f.type)) {
        error("unknown-class", "type " + f.type + " of field " + f.name + " is not declared", loc);
      }
      if (base && !guarded([&] { return introduce_field(t_, *base, f.name); })) {
        error("duplicate-field", "field " + qt.cls + "." + f.name + " is already declared", loc);
      }
    }
    for (const auto& m : decl_methods(decl)) check_method(qt, base, m);
  }

 private:
  template <class F>
  bool guarded(F f) {
    try {
      return f();
    } catch (const Error&) {
      return true;
    }
  }

  void check_method(const QualifiedType& qt, const std::optional<QualifiedType>& base,
                    const MethodDecl& m) {
    if (!t_.rt.has_class(m.return_type)) {
      error("unknown-class", "return type " + m.return_type + " of " + m.name + " is not declared",
            m.location);
    }
    TypeEnv env;
    for (const auto& p : m.params) {
      if (!t_.rt.has_class(p.type)) {
        error("unknown-class", "type " + p.type + " of parameter " + p.name + " is not declared",
              m.location);
        }
      env[p.name] = p.type;
    }
    env[kThis] = qt.cls;
    auto body = type(env, *m.body);
    if (body && !subtype_or_false(*body, m.return_type)) {
      error("return-type",
            "body of " + m.name + " has type " + *body + ", not a subtype of " + m.return_type,
            m.body->location);
    }
    if (!base) return;
    std::optional<MethodSignature> found;
    try {
      found = mtype(t_, m.name, *base);
    } catch (const Error&) {
      return;
    }
    MethodSignature sig = signature_of(m);
    if (!m.overrides) {
      if (found) {
        error("method-occludes",
              "method " + m.name + " occludes an existing method " + to_string(*found),
              m.location);
      }
    } else if (!found) {
      error("override-missing", "method " + m.name + " overrides nothing", m.location);
    } else if (!(*found == sig)) {
      error("override-signature",
            "method " + m.name + " has signature " + to_string(sig) + " but overrides " +
                to_string(*found),
            m.location);
    }
  }

  bool subtype_or_false(const std::string& c, const std::string& d) {
    if (c == d) return true;
    try {
      return subtype(t_, c, d);
    } catch (const Error&) {
      return false;
    }
  }

  std::nullopt_t error(const std::string& code, const std::string& msg,
                       const SourceLocation& loc) {
    out_.push_back({code, msg, loc, Severity::Error, {}});
    return std::nullopt;
  }

  std::optional<std::string> rule(const TypeEnv& env, const Term& term, const Var& x) {
    auto it = env.find(x.name);
    if (it == env.end()) return error("unknown-variable", "unbound variable " + x.name, term.location);
    return it->second;
  }

  std::optional<std::string> rule(const TypeEnv& env, const Term& term, const FieldAccess& x) {
    auto recv = type(env, *x.receiver);
    if (!recv) return std::nullopt;
    try {
      for (const auto& f : fields(t_, last(t_.rt, *recv))) {
        if (f.name == x.field) return f.type;
      }
    } catch (const Error&) {
    }
    return error("unknown-field", "class " + *recv + " has no field " + x.field, term.location);
  }

  bool type_args(const TypeEnv& env, const std::vector<TermPtr>& args,
                 std::vector<std::string>& types) {
    bool ok = true;
    for (const auto& a : args) {
      auto ty = type(env, *a);
      if (!ty) ok = false;
      types.push_back(ty.value_or(""));
    }
    return ok;
  }

  bool check_args(const std::vector<std::string>& actual, const std::vector<std::string>& formal,
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
      if (!subtype_or_false(actual[i], formal[i])) {
        error("argument-type",
              "argument " + std::to_string(i + 1) + " of " + what + " has type " + actual[i] +
                  ", not a subtype of " + formal[i],
              args[i]->location);
        ok = false;
      }
    }
    return ok;
  }

  std::optional<std::string> rule(const TypeEnv& env, const Term& term, const Invoke& x) {
    auto recv = type(env, *x.receiver);
    if (!recv) return std::nullopt;
    std::vector<std::string> actual;
    if (!type_args(env, x.args, actual)) return std::nullopt;
    std::optional<MethodSignature> sig;
    try {
      sig = mtype(t_, x.method, last(t_.rt, *recv));
    } catch (const Error&) {
    }
    if (!sig) {
      return error("unknown-method", "class " + *recv + " has no method " + x.method,
                   term.location);
    }
    if (!check_args(actual, sig->params, x.args, "method " + *recv + "." + x.method,
                    term.location)) {
      return std::nullopt;
    }
    return sig->return_type;
  }

  std::optional<std::string> rule(const TypeEnv& env, const Term& term, const New& x) {
    if (!t_.rt.has_class(x.cls)) {
      return error("unknown-class", "class " + x.cls + " is not declared", term.location);
    }
    std::vector<std::string> actual;
    if (!type_args(env, x.args, actual)) return std::nullopt;
    std::vector<TypedName> fs;
    try {
      fs = fields(t_, last(t_.rt, x.cls));
    } catch (const Error&) {
      return error("unknown-class", "the hierarchy of " + x.cls + " is incomplete", term.location);
    }
    std::vector<std::string> formal;
    for (const auto& f : fs) formal.push_back(f.type);
    if (!check_args(actual, formal, x.args, "new " + x.cls, term.location)) return std::nullopt;
    return x.cls;
  }

  std::optional<std::string> rule(const TypeEnv& env, const Term& term, const Cast& x) {
    if (!t_.rt.has_class(x.target)) {
      return error("unknown-class", "class " + x.target + " is not declared", term.location);
    }
    auto operand = type(env, *x.operand);
    if (!operand) return std::nullopt;
    if (!subtype_or_false(*operand, x.target) && !subtype_or_false(x.target, *operand)) {
      out_.push_back({"stupid-cast",
                      "cast from " + *operand + " to unrelated class " + x.target,
                      term.location,
                      Severity::Warning,
                      {}});
    }
    return x.target;
  }

  const Tables& t_;
  std::vector<Diagnostic>& out_;
};

}  // namespace

std::optional<std::string> typecheck_term(const Tables& t, const TypeEnv& env, const Term& term,
                                          std::vector<Diagnostic>& out) {
  return ProgramChecker(t, out).type(env, term);
}

std::vector<Diagnostic> typecheck_program(const FfjProgram& program) {
  std::vector<Diagnostic> out;
  ProgramChecker checker(program.tables, out);
  if (program.main_term) checker.type({}, *program.main_term);
  for (const auto& [qt, decl] : program.tables.ct.entries) checker.check_declaration(qt, decl);
  sort_diagnostics(out);
  return out;
}

}  // namespace ffj
