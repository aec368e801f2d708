#include "ffj/tables.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ffj/errors.hpp"
#include "ffj/parser.hpp"

namespace ffj {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kNoFeatures;

void sort_by_model(std::vector<std::string>& features, const FeatureModel& fm) {
  std::stable_sort(features.begin(), features.end(), [&](const auto& a, const auto& b) {
    return fm.index_of(a).value_or(0) < fm.index_of(b).value_or(0);
  });
}

std::string describe_path(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& c : path) s += c + " -> ";
  return s + path.front();
}

void check_program_cycles(const Tables& t) {
  std::map<std::string, std::set<std::string>> supers;
  for (const auto& [qt, decl] : t.ct.entries) {
    if (const auto* c = std::get_if<ClassDecl>(&decl)) supers[qt.cls].insert(c->superclass);
  }
  std::map<std::string, int> state;  // 1 on stack, 2 done
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& c) {
    state[c] = 1;
    stack.push_back(c);
    for (const auto& d : supers[c]) {
      if (state[d] == 1) {
        std::vector<std::string> cycle(std::find(stack.begin(), stack.end(), d), stack.end());
        throw SanityViolation("cycle", "inheritance cycle " + describe_path(cycle));
      }
      if (state[d] == 0 && supers.count(d)) visit(d);
    }
    stack.pop_back();
    state[c] = 2;
  };
  for (const auto& [c, _] : supers) {
    if (state[c] == 0) visit(c);
  }
}

// A closed walk only counts when the features introducing its edges can be
// selected together.
void check_product_line_cycles(const Tables& t, const FeatureModel& fm) {
  Reasoner reasoner(fm);
  std::vector<std::string> path;
  std::function<void(const std::string&, const std::string&, const Context&)> walk =
      [&](const std::string& start, const std::string& c, const Context& ctx) {
        path.push_back(c);
        for (const auto& feature : t.it.of_class(c)) {
          const auto& decl = std::get<ClassDecl>(*t.ct.find({feature, c}));
          Context next = ctx;
          next.push_back(feature);
          if (!reasoner.consistent(next)) continue;
          if (decl.superclass == start) {
            throw SanityViolation("cycle", "inheritance cycle " + describe_path(path) +
                                               " can occur in one variant");
          }
          if (std::find(path.begin(), path.end(), decl.superclass) != path.end()) continue;
          walk(start, decl.superclass, next);
        }
        path.pop_back();
      };
  for (const auto& [c, _] : t.it.classes) walk(c, c, {});
}

}  // namespace

std::string to_string(const QualifiedType& qt) { return qt.feature + "." + qt.cls; }

QualifiedType terminator() { return {kBaseFeature, kObject}; }

bool is_terminator(const QualifiedType& qt) { return qt == terminator(); }

const Declaration* ClassTable::find(const QualifiedType& qt) const {
  auto it = entries.find(qt);
  return it == entries.end() ? nullptr : &it->second;
}

const std::vector<std::string>& IntroductionTable::of_class(const std::string& c) const {
  auto it = classes.find(c);
  return it == classes.end() ? kNoFeatures : it->second;
}

const std::vector<std::string>& IntroductionTable::of_field(const std::string& c,
                                                            const std::string& f) const {
  auto it = fields.find({c, f});
  return it == fields.end() ? kNoFeatures : it->second;
}

const std::vector<std::string>& IntroductionTable::of_method(const std::string& c,
                                                             const std::string& m) const {
  auto it = methods.find({c, m});
  return it == methods.end() ? kNoFeatures : it->second;
}

const std::vector<std::string>& RefinementTable::of(const std::string& c) const {
  auto it = chains.find(c);
  return it == chains.end() ? kNoFeatures : it->second;
}

Tables build_tables(const std::vector<FeatureDeclaration>& decls, const FeatureModel& fm,
                    TableMode mode) {
  Tables t;
  for (const auto& fd : decls) {
    const std::string& name = decl_name(fd.decl);
    const std::string where = to_string(decl_location(fd.decl));
    if (!fm.declares(fd.feature)) {
      throw SanityViolation("unknown-feature",
                            where + ": feature '" + fd.feature + "' is not in the feature model");
    }
    if (name == kObject) {
      throw SanityViolation("object-declared", where + ": class Object cannot be declared");
    }
    QualifiedType qt{fd.feature, name};
    if (const Declaration* prev = t.ct.find(qt)) {
      if (is_class(*prev) != is_class(fd.decl)) {
        throw SanityViolation("introduce-and-refine", where + ": feature " + fd.feature +
                                                          " both introduces and refines " + name);
      }
      throw SanityViolation("duplicate-qualified-type",
                            where + ": " + to_string(qt) + " is declared twice");
    }
    t.ct.entries.emplace(qt, fd.decl);
    t.rt.chains[name].push_back(fd.feature);
    if (is_class(fd.decl)) t.it.classes[name].push_back(fd.feature);
    for (const auto& f : decl_fields(fd.decl)) t.it.fields[{name, f.name}].push_back(fd.feature);
    for (const auto& m : decl_methods(fd.decl)) {
      if (!m.overrides) t.it.methods[{name, m.name}].push_back(fd.feature);
    }
  }
  for (auto& [_, list] : t.rt.chains) sort_by_model(list, fm);
  for (auto& [_, list] : t.it.classes) sort_by_model(list, fm);
  for (auto& [_, list] : t.it.fields) sort_by_model(list, fm);
  for (auto& [_, list] : t.it.methods) sort_by_model(list, fm);

  if (mode == TableMode::Program) {
    check_program_cycles(t);
  } else {
    check_product_line_cycles(t, fm);
  }
  return t;
}

ProductLine make_product_line(std::vector<FeatureDeclaration> decls, FeatureModel fm,
                              TermPtr main_term, std::string main_context) {
  ProductLine pl;
  if (main_context.empty() && !fm.features.empty()) main_context = fm.features.front();
  if (!main_context.empty() && !fm.declares(main_context)) {
    throw SanityViolation("main-context",
                          "main context '" + main_context + "' is not a declared feature");
  }
  pl.main_term = main_term ? std::move(main_term) : make_new(kObject, {});
  pl.main_context = std::move(main_context);
  pl.tables = build_tables(decls, fm, TableMode::ProductLine);
  pl.feature_model = std::move(fm);
  pl.declarations = std::move(decls);
  return pl;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return os.str();
}

ProductLine ingest(const fs::path& root, const FeatureModel& fm) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("not a directory: " + root.string());

  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (!fm.declares(name)) {
      throw SanityViolation("undeclared-feature-directory",
                            "directory '" + name + "' does not name a declared feature");
    }
  }
  if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());

  std::vector<FeatureDeclaration> decls;
  std::vector<std::string> files;
  TermPtr main_term;
  std::string main_context;
  std::string main_file;
  for (const auto& feature : fm.features) {
    fs::path dir = root / feature;
    if (!fs::is_directory(dir, ec)) continue;
    std::vector<std::string> rel_paths;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::end(it);
         it.increment(ec)) {
      if (it->is_regular_file() && it->path().extension() == ".ffj") {
        rel_paths.push_back(fs::relative(it->path(), root).generic_string());
      }
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(rel_paths.begin(), rel_paths.end());
    for (const auto& rel : rel_paths) {
      std::string text = read_file(root / rel);
      files.push_back(rel);
      bool is_main = fs::path(rel).filename() == "main.ffj";
      SourceUnit unit = parse_source(text, rel);
      if (unit.main_term) {
        if (!is_main) {
          throw ParseError(unit.main_term->location,
                           "a program term may only appear in main.ffj");
        }
        if (main_term) {
          throw SanityViolation("multiple-main", rel + ": another main.ffj (" + main_file +
                                                     ") already supplies the program term");
        }
        main_term = unit.main_term;
        main_context = feature;
        main_file = rel;
      }
      for (auto& d : unit.declarations) decls.push_back({feature, std::move(d), rel});
    }
  }
  ProductLine pl = make_product_line(std::move(decls), fm, main_term, main_context);
  pl.main_file = main_file;
  pl.source_files = std::move(files);
  return pl;
}

}  // namespace ffj
