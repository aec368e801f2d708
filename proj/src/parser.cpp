#include "ffj/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>

#include "ffj/errors.hpp"

namespace ffj {

namespace {

constexpr std::array<std::string_view, 6> kKeywords = {"class",     "extends", "refines",
                                                       "overrides", "return",  "new"};
constexpr std::array<std::string_view, 8> kModelWords = {"features", "model", "implies", "or",
                                                         "and",      "not",   "true",    "false"};

enum class Tok { Ident, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLocation loc;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      SourceLocation loc{file_, line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", loc});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_')) {
          advance();
        }
        out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), loc});
      } else if (std::string_view("{}();,.:").find(c) != std::string_view::npos) {
        advance();
        out.push_back({Tok::Punct, std::string(1, c), loc});
      } else {
        throw ParseError(loc, "unexpected character '" + printable(c) + "'");
      }
    }
  }

 private:
  static std::string printable(char c) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string(1, c);
    std::ostringstream os;
    os << "\\x" << std::hex << static_cast<int>(u);
    return os.str();
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        SourceLocation start{file_, line_, col_};
        advance();
        advance();
        for (;;) {
          if (pos_ >= src_.size()) throw ParseError(start, "unterminated block comment");
          if (src_[pos_] == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
            advance();
            advance();
            break;
          }
          advance();
        }
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class TokenStream {
 public:
  TokenStream(std::string_view src, const std::string& file) : toks_(Lexer(src, file).run()) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
  }
  bool is_word(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    next();
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) fail("expected '" + std::string(w) + "'");
    next();
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.loc, what + ", found " + found);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Recursion bound for terms and formulas; deeper input is rejected rather
// than exhausting the stack.
constexpr int kMaxNesting = 1000;

class Nesting {
 public:
  Nesting(const TokenStream& ts, int& depth) : depth_(depth) {
    if (++depth_ > kMaxNesting) ts.fail("input nested too deeply");
  }
  ~Nesting() { --depth_; }
  Nesting(const Nesting&) = delete;
  Nesting& operator=(const Nesting&) = delete;

 private:
  int& depth_;
};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

class ProgramParser {
 public:
  ProgramParser(std::string_view src, const std::string& file) : ts_(src, file) {}

  SourceUnit unit() {
    SourceUnit out;
    while (ts_.is_word("class") || ts_.is_word("refines")) {
      out.declarations.push_back(declaration());
    }
    if (!ts_.at_end()) {
      out.main_term = term();
      if (ts_.is_punct(";")) ts_.next();
      if (!ts_.at_end()) ts_.fail("expected end of input after program term");
    }
    return out;
  }

  TermPtr lone_term() {
    TermPtr t = term();
    if (ts_.is_punct(";")) ts_.next();
    if (!ts_.at_end()) ts_.fail("expected end of input after term");
    return t;
  }

 private:
  std::string identifier(const char* what) {
    const Token& t = ts_.peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) ts_.fail(std::string("expected ") + what);
    return ts_.next().text;
  }

  std::string binder(const char* what) {
    SourceLocation loc = ts_.peek().loc;
    std::string name = identifier(what);
    if (name == kThis) throw ParseError(loc, "'this' cannot be declared");
    return name;
  }

  Declaration declaration() {
    SourceLocation loc = ts_.peek().loc;
    if (ts_.is_word("class")) {
      ts_.next();
      ClassDecl c;
      c.location = loc;
      c.name = identifier("class name");
      ts_.expect_word("extends");
      c.superclass = identifier("superclass name");
      body(c.fields, c.methods);
      return c;
    }
    ts_.expect_word("refines");
    ts_.expect_word("class");
    RefinementDecl r;
    r.location = loc;
    r.name = identifier("class name");
    body(r.fields, r.methods);
    return r;
  }

  void body(std::vector<TypedName>& fields, std::vector<MethodDecl>& methods) {
    ts_.expect_punct("{");
    std::set<std::string> field_names;
    std::set<std::string> method_names;
    while (!ts_.is_punct("}")) {
      SourceLocation loc = ts_.peek().loc;
      bool overrides = false;
      if (ts_.is_word("overrides")) {
        ts_.next();
        overrides = true;
      }
      std::string type = identifier("type name");
      std::string name = binder("member name");
      if (!overrides && ts_.is_punct(";")) {
        ts_.next();
        if (!methods.empty()) throw ParseError(loc, "field declarations must precede methods");
        if (!field_names.insert(name).second) {
          throw DuplicateMember(loc, "duplicate field '" + name + "'");
        }
        fields.push_back({std::move(type), std::move(name)});
        continue;
      }
      MethodDecl m;
      m.location = loc;
      m.overrides = overrides;
      m.return_type = std::move(type);
      m.name = std::move(name);
      ts_.expect_punct("(");
      std::set<std::string> param_names;
      if (!ts_.is_punct(")")) {
        for (;;) {
          SourceLocation ploc = ts_.peek().loc;
          std::string ptype = identifier("parameter type");
          std::string pname = binder("parameter name");
          if (!param_names.insert(pname).second) {
            throw DuplicateMember(ploc, "duplicate parameter '" + pname + "'");
          }
          m.params.push_back({std::move(ptype), std::move(pname)});
          if (!ts_.is_punct(",")) break;
          ts_.next();
        }
      }
      ts_.expect_punct(")");
      ts_.expect_punct("{");
      ts_.expect_word("return");
      m.body = term();
      ts_.expect_punct(";");
      ts_.expect_punct("}");
      if (!method_names.insert(m.name).second) {
        throw DuplicateMember(loc, "duplicate method '" + m.name + "'");
      }
      methods.push_back(std::move(m));
    }
    ts_.expect_punct("}");
  }

  bool starts_term(std::size_t ahead) const {
    const Token& t = ts_.peek(ahead);
    if (t.kind == Tok::Ident) return t.text == "new" || !is_keyword(t.text);
    return t.kind == Tok::Punct && t.text == "(";
  }

  TermPtr term() {
    Nesting guard(ts_, depth_);
    // `( C ) t` is a cast when the parenthesised identifier is followed by a
    // token that can start a term; otherwise the parentheses just group.
    if (ts_.is_punct("(") && ts_.peek(1).kind == Tok::Ident && !is_keyword(ts_.peek(1).text) &&
        ts_.is_punct(")", 2) && starts_term(3)) {
      SourceLocation loc = ts_.next().loc;
      std::string target = ts_.next().text;
      ts_.next();
      TermPtr operand = term();
      return make_cast(std::move(target), std::move(operand), loc);
    }
    return postfix();
  }

  std::vector<TermPtr> arguments() {
    std::vector<TermPtr> args;
    ts_.expect_punct("(");
    if (!ts_.is_punct(")")) {
      for (;;) {
        args.push_back(term());
        if (!ts_.is_punct(",")) break;
        ts_.next();
      }
    }
    ts_.expect_punct(")");
    return args;
  }

  TermPtr postfix() {
    TermPtr t = primary();
    int chain = 0;
    while (ts_.is_punct(".")) {
      if (depth_ + ++chain > kMaxNesting) ts_.fail("term nested too deeply");
      ts_.next();
      SourceLocation loc = ts_.peek().loc;
      std::string name = identifier("field or method name");
      if (ts_.is_punct("(")) {
        t = make_invoke(t, std::move(name), arguments(), loc);
      } else {
        t = make_field(t, std::move(name), loc);
      }
    }
    return t;
  }

  TermPtr primary() {
    SourceLocation loc = ts_.peek().loc;
    if (ts_.is_word("new")) {
      ts_.next();
      std::string cls = identifier("class name");
      return make_new(std::move(cls), arguments(), loc);
    }
    if (ts_.is_punct("(")) {
      ts_.next();
      TermPtr inner = term();
      ts_.expect_punct(")");
      return inner;
    }
    return make_var(identifier("term"), loc);
  }

  TokenStream ts_;
  int depth_ = 0;
};

bool is_model_word(std::string_view s) {
  return std::find(kModelWords.begin(), kModelWords.end(), s) != kModelWords.end();
}

class ModelParser {
 public:
  ModelParser(std::string_view src, const std::string& file) : ts_(src, file) {}

  FeatureModel model() {
    FeatureModel fm;
    if (!(ts_.is_word("features") && ts_.is_punct(":", 1))) ts_.fail("expected 'features:'");
    ts_.next();
    ts_.next();
    std::set<std::string> seen;
    while (!(ts_.is_word("model") && ts_.is_punct(":", 1))) {
      const Token& t = ts_.peek();
      if (t.kind != Tok::Ident) ts_.fail("expected feature name or 'model:'");
      if (is_model_word(t.text) || is_keyword(t.text)) {
        throw ParseError(t.loc, "'" + t.text + "' is reserved and cannot name a feature");
      }
      if (t.text == kBaseFeature) {
        throw ParseError(t.loc, "feature name 'Base' is reserved");
      }
      if (!seen.insert(t.text).second) {
        throw DuplicateFeature(t.loc, "duplicate feature '" + t.text + "'");
      }
      fm.features.push_back(ts_.next().text);
    }
    ts_.next();
    ts_.next();
    declared_ = &fm;
    std::vector<FormulaPtr> constraints;
    while (!ts_.at_end()) {
      constraints.push_back(implication());
      ts_.expect_punct(";");
    }
    fm.constraint = f_and_all(constraints);
    return fm;
  }

 private:
  FormulaPtr implication() {
    Nesting guard(ts_, depth_);
    FormulaPtr lhs = disjunction();
    if (ts_.is_word("implies")) {
      ts_.next();
      return f_implies(lhs, implication());
    }
    return lhs;
  }

  FormulaPtr disjunction() {
    FormulaPtr acc = conjunction();
    while (ts_.is_word("or")) {
      ts_.next();
      acc = f_or(acc, conjunction());
    }
    return acc;
  }

  FormulaPtr conjunction() {
    FormulaPtr acc = negation();
    while (ts_.is_word("and")) {
      ts_.next();
      acc = f_and(acc, negation());
    }
    return acc;
  }

  FormulaPtr negation() {
    Nesting guard(ts_, depth_);
    if (ts_.is_word("not")) {
      ts_.next();
      return f_not(negation());
    }
    if (ts_.is_punct("(")) {
      ts_.next();
      FormulaPtr inner = implication();
      ts_.expect_punct(")");
      return inner;
    }
    const Token& t = ts_.peek();
    if (t.kind != Tok::Ident || (is_model_word(t.text) && t.text != "true" && t.text != "false")) {
      ts_.fail("expected feature name");
    }
    if (t.text == "true") {
      ts_.next();
      return f_true();
    }
    if (t.text == "false") {
      ts_.next();
      return f_false();
    }
    if (!declared_->declares(t.text)) {
      throw UnknownFeature(t.loc, "constraint references undeclared feature '" + t.text + "'");
    }
    return f_atom(ts_.next().text);
  }

  TokenStream ts_;
  const FeatureModel* declared_ = nullptr;
  int depth_ = 0;
};

void print_term_to(std::ostream& os, const Term& t);

void print_args(std::ostream& os, const std::vector<TermPtr>& args) {
  os << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    print_term_to(os, *args[i]);
  }
  os << ')';
}

void print_receiver(std::ostream& os, const Term& r) {
  if (std::holds_alternative<Cast>(r.node)) {
    os << '(';
    print_term_to(os, r);
    os << ')';
  } else {
    print_term_to(os, r);
  }
}

void print_term_to(std::ostream& os, const Term& t) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Var>) {
          os << x.name;
        } else if constexpr (std::is_same_v<T, FieldAccess>) {
          print_receiver(os, *x.receiver);
          os << '.' << x.field;
        } else if constexpr (std::is_same_v<T, Invoke>) {
          print_receiver(os, *x.receiver);
          os << '.' << x.method;
          print_args(os, x.args);
        } else if constexpr (std::is_same_v<T, New>) {
          os << "new " << x.cls;
          print_args(os, x.args);
        } else {
          os << '(' << x.target << ") ";
          print_term_to(os, *x.operand);
        }
      },
      t.node);
}

void print_members(std::ostream& os, const std::vector<TypedName>& fields,
                   const std::vector<MethodDecl>& methods) {
  os << " {\n";
  for (const auto& f : fields) os << "  " << f.type << ' ' << f.name << ";\n";
  for (const auto& m : methods) {
    os << "  " << (m.overrides ? "overrides " : "") << m.return_type << ' ' << m.name << '(';
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) os << ", ";
      os << m.params[i].type << ' ' << m.params[i].name;
    }
    os << ") { return ";
    print_term_to(os, *m.body);
    os << "; }\n";
  }
  os << "}\n";
}

bool is_binary(const Formula& f) {
  return f.kind == Formula::Kind::And || f.kind == Formula::Kind::Or ||
         f.kind == Formula::Kind::Implies;
}

void print_formula_to(std::ostream& os, const Formula& f);

void print_operand(std::ostream& os, const Formula& f) {
  if (is_binary(f)) {
    os << '(';
    print_formula_to(os, f);
    os << ')';
  } else {
    print_formula_to(os, f);
  }
}

void print_formula_to(std::ostream& os, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
      os << "true";
      return;
    case Formula::Kind::Atom:
      os << f.atom;
      return;
    case Formula::Kind::Not:
      os << "not ";
      print_operand(os, *f.lhs);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies: {
      const char* op = f.kind == Formula::Kind::And  ? " and "
                       : f.kind == Formula::Kind::Or ? " or "
                                                     : " implies ";
      print_operand(os, *f.lhs);
      os << op;
      print_operand(os, *f.rhs);
      return;
    }
  }
}

void split_conjuncts(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == Formula::Kind::And) {
    split_conjuncts(f->lhs, out);
    split_conjuncts(f->rhs, out);
  } else if (f->kind != Formula::Kind::True) {
    out.push_back(f);
  }
}

}  // namespace

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_reserved_word(std::string_view s) { return is_keyword(s); }

SourceUnit parse_source(std::string_view source, const std::string& file) {
  return ProgramParser(source, file).unit();
}

std::vector<Declaration> parse_program(std::string_view source, const std::string& file) {
  SourceUnit u = parse_source(source, file);
  if (u.main_term) {
    throw ParseError(u.main_term->location, "unexpected program term outside main.ffj");
  }
  return std::move(u.declarations);
}

TermPtr parse_term(std::string_view source, const std::string& file) {
  return ProgramParser(source, file).lone_term();
}

FeatureModel parse_feature_model(std::string_view source, const std::string& file) {
  return ModelParser(source, file).model();
}

std::vector<std::string> parse_selection(std::string_view source, const std::string& file) {
  int line = 1;
  int col = 1;
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t i = 0;
  while (i < source.size()) {
    char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (c == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
      continue;
    }
    SourceLocation loc{file, line, col};
    std::size_t start = i;
    while (i < source.size() && !std::isspace(static_cast<unsigned char>(source[i]))) {
      ++i;
      ++col;
    }
    std::string word(source.substr(start, i - start));
    if (!is_identifier(word)) throw ParseError(loc, "invalid feature name '" + word + "'");
    if (!seen.insert(word).second) {
      throw DuplicateFeature(loc, "feature '" + word + "' selected twice");
    }
    out.push_back(std::move(word));
  }
  return out;
}

std::string print_term(const Term& t) {
  std::ostringstream os;
  print_term_to(os, t);
  return os.str();
}

std::string print_declaration(const Declaration& d) {
  std::ostringstream os;
  if (const auto* c = std::get_if<ClassDecl>(&d)) {
    os << "class " << c->name << " extends " << c->superclass;
    print_members(os, c->fields, c->methods);
  } else {
    const auto& r = std::get<RefinementDecl>(d);
    os << "refines class " << r.name;
    print_members(os, r.fields, r.methods);
  }
  return os.str();
}

std::string print_formula(const Formula& f) {
  std::ostringstream os;
  print_formula_to(os, f);
  return os.str();
}

std::string print_feature_model(const FeatureModel& fm) {
  std::ostringstream os;
  os << "features:\n ";
  for (const auto& f : fm.features) os << ' ' << f;
  os << "\n\nmodel:\n";
  std::vector<FormulaPtr> parts;
  split_conjuncts(fm.constraint, parts);
  for (const auto& p : parts) os << "  " << print_formula(*p) << ";\n";
  return os.str();
}

}  // namespace ffj
