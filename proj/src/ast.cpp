#include "ffj/ast.hpp"

#include <algorithm>

namespace ffj {

std::string to_string(const SourceLocation& loc) {
  return (loc.file.empty() ? std::string("<input>") : loc.file) + ":" + std::to_string(loc.line) +
         ":" + std::to_string(loc.column);
}

TermPtr make_var(std::string name, SourceLocation loc) {
  return std::make_shared<const Term>(Term{Var{std::move(name)}, std::move(loc)});
}

TermPtr make_field(TermPtr receiver, std::string field, SourceLocation loc) {
  return std::make_shared<const Term>(
      Term{FieldAccess{std::move(receiver), std::move(field)}, std::move(loc)});
}

TermPtr make_invoke(TermPtr receiver, std::string method, std::vector<TermPtr> args,
                    SourceLocation loc) {
  return std::make_shared<const Term>(
      Term{Invoke{std::move(receiver), std::move(method), std::move(args)}, std::move(loc)});
}

TermPtr make_new(std::string cls, std::vector<TermPtr> args, SourceLocation loc) {
  return std::make_shared<const Term>(Term{New{std::move(cls), std::move(args)}, std::move(loc)});
}

TermPtr make_cast(std::string target, TermPtr operand, SourceLocation loc) {
  return std::make_shared<const Term>(
      Term{Cast{std::move(target), std::move(operand)}, std::move(loc)});
}

bool is_value(const Term& t) {
  const auto* n = std::get_if<New>(&t.node);
  if (n == nullptr) return false;
  return std::all_of(n->args.begin(), n->args.end(), [](const TermPtr& a) { return is_value(*a); });
}

namespace {

bool same_args(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_term(*a[i], *b[i])) return false;
  }
  return true;
}

bool same_methods(const std::vector<MethodDecl>& a, const std::vector<MethodDecl>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].overrides != b[i].overrides || a[i].return_type != b[i].return_type ||
        a[i].name != b[i].name || a[i].params != b[i].params ||
        !same_term(*a[i].body, *b[i].body)) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool same_term(const Term& a, const Term& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Var>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, FieldAccess>) {
          return x.field == y.field && same_term(*x.receiver, *y.receiver);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          return x.method == y.method && same_term(*x.receiver, *y.receiver) &&
                 same_args(x.args, y.args);
        } else if constexpr (std::is_same_v<T, New>) {
          return x.cls == y.cls && same_args(x.args, y.args);
        } else {
          return x.target == y.target && same_term(*x.operand, *y.operand);
        }
      },
      a.node);
}

std::size_t term_size(const Term& t) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Var>) {
          return 1;
        } else if constexpr (std::is_same_v<T, FieldAccess>) {
          return 1 + term_size(*x.receiver);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          std::size_t n = 1 + term_size(*x.receiver);
          for (const auto& a : x.args) n += term_size(*a);
          return n;
        } else if constexpr (std::is_same_v<T, New>) {
          std::size_t n = 1;
          for (const auto& a : x.args) n += term_size(*a);
          return n;
        } else {
          return 1 + term_size(*x.operand);
        }
      },
      t.node);
}

const std::string& decl_name(const Declaration& d) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, d);
}

const std::vector<TypedName>& decl_fields(const Declaration& d) {
  return std::visit([](const auto& x) -> const std::vector<TypedName>& { return x.fields; }, d);
}

const std::vector<MethodDecl>& decl_methods(const Declaration& d) {
  return std::visit([](const auto& x) -> const std::vector<MethodDecl>& { return x.methods; }, d);
}

const SourceLocation& decl_location(const Declaration& d) {
  return std::visit([](const auto& x) -> const SourceLocation& { return x.location; }, d);
}

bool is_class(const Declaration& d) { return std::holds_alternative<ClassDecl>(d); }

const MethodDecl* find_method(const Declaration& d, const std::string& name) {
  for (const auto& m : decl_methods(d)) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

bool same_declaration(const Declaration& a, const Declaration& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<ClassDecl>(&a)) {
    const auto& cb = std::get<ClassDecl>(b);
    if (ca->superclass != cb.superclass) return false;
  }
  return decl_name(a) == decl_name(b) && decl_fields(a) == decl_fields(b) &&
         same_methods(decl_methods(a), decl_methods(b));
}

FormulaPtr f_true() {
  static const auto t = std::make_shared<const Formula>(Formula{});
  return t;
}

FormulaPtr f_false() { return f_not(f_true()); }

FormulaPtr f_atom(std::string name) {
  return std::make_shared<const Formula>(Formula{Formula::Kind::Atom, std::move(name), {}, {}});
}

FormulaPtr f_not(FormulaPtr f) {
  return std::make_shared<const Formula>(Formula{Formula::Kind::Not, {}, std::move(f), {}});
}

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(
      Formula{Formula::Kind::And, {}, std::move(a), std::move(b)});
}

FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(Formula{Formula::Kind::Or, {}, std::move(a), std::move(b)});
}

FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(
      Formula{Formula::Kind::Implies, {}, std::move(a), std::move(b)});
}

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_true();
  FormulaPtr acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_false();
  FormulaPtr acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
  return acc;
}

void collect_atoms(const Formula& f, std::vector<std::string>& out) {
  if (f.kind == Formula::Kind::Atom) {
    out.push_back(f.atom);
    return;
  }
  if (f.lhs) collect_atoms(*f.lhs, out);
  if (f.rhs) collect_atoms(*f.rhs, out);
}

std::optional<std::size_t> FeatureModel::index_of(const std::string& feature) const {
  auto it = std::find(features.begin(), features.end(), feature);
  if (it == features.end()) return std::nullopt;
  return static_cast<std::size_t>(it - features.begin());
}

}  // namespace ffj
