#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ffj/ast.hpp"
#include "ffj/feature_model.hpp"

namespace ffj {

/// Φ.C: the declaration of class C contributed by feature Φ.
struct QualifiedType {
  std::string feature;
  std::string cls;

  friend bool operator==(const QualifiedType&, const QualifiedType&) = default;
  friend auto operator<=>(const QualifiedType&, const QualifiedType&) = default;
};

std::string to_string(const QualifiedType& qt);
QualifiedType terminator();
bool is_terminator(const QualifiedType& qt);

struct ClassTable {
  std::map<QualifiedType, Declaration> entries;

  const Declaration* find(const QualifiedType& qt) const;
};

struct IntroductionTable {
  std::map<std::string, std::vector<std::string>> classes;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> fields;
  // Only declarations without `overrides` introduce a method.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> methods;

  const std::vector<std::string>& of_class(const std::string& c) const;
  const std::vector<std::string>& of_field(const std::string& c, const std::string& f) const;
  const std::vector<std::string>& of_method(const std::string& c, const std::string& m) const;
};

struct RefinementTable {
  std::map<std::string, std::vector<std::string>> chains;

  const std::vector<std::string>& of(const std::string& c) const;
  bool has_class(const std::string& c) const { return c == kObject || chains.count(c) > 0; }
};

struct Tables {
  ClassTable ct;
  IntroductionTable it;
  RefinementTable rt;
};

/// One declaration together with the feature module and file it came from.
struct FeatureDeclaration {
  std::string feature;
  Declaration decl;
  std::string file;  // path relative to the product-line root
};

enum class TableMode {
  Program,      // a single FFJ program: any inheritance cycle is an error
  ProductLine,  // cycles only count if their introducers can coexist
};

/// Builds CT/IT/RT with lists in feature-model order. Throws SanityViolation.
Tables build_tables(const std::vector<FeatureDeclaration>& decls, const FeatureModel& fm,
                    TableMode mode);

struct ProductLine {
  TermPtr main_term;
  std::string main_context;
  std::string main_file;  // relative path of main.ffj, empty when defaulted
  Tables tables;
  FeatureModel feature_model;
  std::vector<FeatureDeclaration> declarations;  // feature, file, position order
  std::vector<std::string> source_files;         // every ingested file, same order
};

ProductLine make_product_line(std::vector<FeatureDeclaration> decls, FeatureModel fm,
                              TermPtr main_term = nullptr, std::string main_context = {});

/// Reads `<root>/<Feature>/**/*.ffj`. Throws IoError, ParseError, SanityViolation.
ProductLine ingest(const std::filesystem::path& root, const FeatureModel& fm);

std::string read_file(const std::filesystem::path& path);

}  // namespace ffj
