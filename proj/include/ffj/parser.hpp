#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ffj/ast.hpp"

namespace ffj {

/// One parsed `.ffj` file: its declarations in source order and an optional
/// trailing program term.
struct SourceUnit {
  std::vector<Declaration> declarations;
  TermPtr main_term;  // null when the file ends after its declarations
};

/// Parses declarations and an optional trailing term. Throws ParseError
/// (or DuplicateMember) with a location on malformed input.
SourceUnit parse_source(std::string_view source, const std::string& file = {});

/// Parses a file that must contain declarations only.
std::vector<Declaration> parse_program(std::string_view source, const std::string& file = {});

/// Parses a single term, e.g. for tests and the REPL-less CLI helpers.
TermPtr parse_term(std::string_view source, const std::string& file = {});

/// `features: A B ... model: c1; c2; ...`
FeatureModel parse_feature_model(std::string_view source, const std::string& file = {});

/// Whitespace-separated feature names; duplicates are rejected.
std::vector<std::string> parse_selection(std::string_view source, const std::string& file = {});

std::string print_term(const Term& t);
std::string print_declaration(const Declaration& d);
std::string print_formula(const Formula& f);
std::string print_feature_model(const FeatureModel& fm);

bool is_identifier(std::string_view s);
bool is_reserved_word(std::string_view s);

}  // namespace ffj
