#pragma once

#include <string>
#include <vector>

#include "ffj/core.hpp"
#include "ffj/feature_model.hpp"
#include "ffj/tables.hpp"

namespace ffj {

using Selection = std::vector<std::string>;

std::string to_string(const Selection& s);  // {A,B}

/// Keeps only the selected feature modules. Throws InvalidSelection.
FfjProgram derive(const ProductLine& pl, const Selection& fs);

/// The derived declarations, for writing a variant back to disk.
std::vector<FeatureDeclaration> derive_declarations(const ProductLine& pl, const Selection& fs);

struct SelectionList {
  std::vector<Selection> selections;
  bool truncated = false;
};

/// Valid selections in feature order; earlier features vary slowest, and a
/// feature is tried absent before present.
SelectionList enumerate_valid_selections(const FeatureModel& fm, std::size_t cap);

struct VariantResult {
  Selection selection;
  std::vector<Diagnostic> diagnostics;  // FFJ diagnostics of the derived program
  bool well_typed() const { return !has_errors(diagnostics); }
};

struct Verdict {
  enum class Kind { Pass, Counterexample, NotApplicable };
  Kind kind = Kind::NotApplicable;
  std::vector<Selection> counterexamples;
  std::vector<Diagnostic> diagnostics;  // the product-line diagnostics
};

std::string to_string(Verdict::Kind k);

struct OracleRun {
  std::vector<Diagnostic> pl_diagnostics;
  std::vector<VariantResult> variants;
  bool truncated = false;
  Verdict correctness;
  Verdict completeness;
};

/// Checks the product line and every valid variant, then judges both theorems.
OracleRun run_oracle(const ProductLine& pl, Reasoner& reasoner, std::size_t cap);

Verdict check_correctness(const ProductLine& pl, std::size_t cap = 1u << 20);
Verdict check_completeness(const ProductLine& pl, std::size_t cap = 1u << 20);

/// One `PASS|FAIL <selection> <code> <location>` line per variant, then the
/// two theorem verdicts.
std::string format_report(const OracleRun& run);

}  // namespace ffj
