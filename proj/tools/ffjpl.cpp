#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "ffj/core.hpp"
#include "ffj/derivation.hpp"
#include "ffj/errors.hpp"
#include "ffj/parser.hpp"
#include "ffj/pl_typing.hpp"
#include "ffj/tables.hpp"

namespace fs = std::filesystem;
using namespace ffj;

namespace {

constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kUsage = 2;

struct Options {
  std::string root;
  std::string model;
  std::string selection;
  std::string out;
  std::size_t max_variants = 4096;
  std::size_t fuel = kDefaultFuel;
  bool no_cache = false;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

fs::path single_file_with(const fs::path& root, const std::string& ext, const char* flag) {
  std::vector<fs::path> found;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root, ec)) {
    if (e.is_regular_file() && e.path().extension() == ext) found.push_back(e.path());
  }
  if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
  if (found.size() != 1) {
    throw UsageError(std::string("expected exactly one ") + ext + " file in " + root.string() +
                     "; pass " + flag);
  }
  return found.front();
}

FeatureModel load_model(const Options& o) {
  fs::path p = o.model.empty() ? single_file_with(o.root, ".features", "--model")
                               : fs::path(o.model);
  return parse_feature_model(read_file(p), p.filename().string());
}

Selection load_selection(const Options& o) {
  fs::path p = o.selection.empty() ? single_file_with(o.root, ".sel", "--selection")
                                   : fs::path(o.selection);
  return parse_selection(read_file(p), p.filename().string());
}

void print(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) std::cout << format_diagnostic(d) << '\n';
}

int cmd_check(const Options& o) {
  ProductLine pl = ingest(o.root, load_model(o));
  Reasoner reasoner(pl.feature_model, !o.no_cache);
  auto ds = typecheck_product_line(pl, reasoner);
  print(ds);
  return has_errors(ds) ? kRejected : kOk;
}

int cmd_derive(const Options& o) {
  if (o.out.empty()) throw UsageError("derive needs --out");
  ProductLine pl = ingest(o.root, load_model(o));
  Selection fs_sel = load_selection(o);
  auto decls = derive_declarations(pl, fs_sel);
  derive(pl, fs_sel);
  std::set<std::string> chosen(fs_sel.begin(), fs_sel.end());

  std::map<std::string, std::string> contents;
  for (const auto& file : pl.source_files) {
    std::string feature = fs::path(file).begin()->string();
    if (chosen.count(feature)) contents[file];
  }
  for (const auto& d : decls) contents[d.file] += print_declaration(d.decl);
  if (!pl.main_file.empty() && chosen.count(pl.main_context)) {
    contents[pl.main_file] += print_term(*pl.main_term) + ";\n";
  }
  for (const auto& [file, text] : contents) {
    fs::path dest = fs::path(o.out) / file;
    std::error_code ec;
    fs::create_directories(dest.parent_path(), ec);
    std::ofstream os(dest, std::ios::binary);
    if (!os || !(os << text)) throw IoError("cannot write " + dest.string());
  }
  FeatureModel variant;
  std::vector<FormulaPtr> all;
  std::string selected;
  for (const auto& f : pl.feature_model.features) {
    if (!chosen.count(f)) continue;
    variant.features.push_back(f);
    all.push_back(f_atom(f));
    selected += (selected.empty() ? "" : " ") + f;
  }
  variant.constraint = f_and_all(all);
  auto write = [&](const std::string& name, const std::string& text) {
    fs::path dest = fs::path(o.out) / name;
    std::ofstream os(dest, std::ios::binary);
    if (!os || !(os << text)) throw IoError("cannot write " + dest.string());
  };
  write("variant.features", print_feature_model(variant));
  write("variant.sel", selected + "\n");
  return kOk;
}

int cmd_eval(const Options& o) {
  ProductLine pl = ingest(o.root, load_model(o));
  FfjProgram program = derive(pl, load_selection(o));
  auto ds = typecheck_program(program);
  if (has_errors(ds)) {
    print(ds);
    return kRejected;
  }
  EvalResult r = eval(program.tables, program.main_term, o.fuel);
  switch (r.kind) {
    case EvalResult::Kind::Value:
      std::cout << print_term(*r.term) << '\n';
      break;
    case EvalResult::Kind::Stuck:
      std::cout << "STUCK at " << to_string(r.stuck->location) << '\n';
      break;
    case EvalResult::Kind::OutOfFuel:
      std::cout << "FUEL EXHAUSTED\n";
      break;
  }
  return kOk;
}

int cmd_oracle(const Options& o) {
  if (o.max_variants == 0) throw UsageError("--max-variants must be positive");
  ProductLine pl = ingest(o.root, load_model(o));
  Reasoner reasoner(pl.feature_model, !o.no_cache);
  OracleRun run = run_oracle(pl, reasoner, o.max_variants);
  if (run.truncated) {
    throw UsageError("more than " + std::to_string(o.max_variants) + " valid variants");
  }
  std::cout << format_report(run);
  bool counterexample = run.correctness.kind == Verdict::Kind::Counterexample ||
                        run.completeness.kind == Verdict::Kind::Counterexample;
  return counterexample ? kRejected : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type checker, interpreter and variant oracle for feature-oriented FFJ"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--root", o.root, "product-line root directory")->required();
    cmd->add_option("--model", o.model, "feature model (default: the single *.features in root)");
  };
  auto* check = app.add_subcommand("check", "type-check the whole product line");
  common(check);
  check->add_flag("--no-cache", o.no_cache, "disable the feature-model query cache");

  auto* derive_cmd = app.add_subcommand("derive", "write the variant of a selection");
  common(derive_cmd);
  derive_cmd->add_option("--selection", o.selection, "selection file");
  derive_cmd->add_option("--out", o.out, "output directory");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate the main term of a variant");
  common(eval_cmd);
  eval_cmd->add_option("--selection", o.selection, "selection file");
  eval_cmd->add_option("--fuel", o.fuel, "maximum number of evaluation steps");

  auto* oracle = app.add_subcommand("oracle", "check every valid variant against the verdict");
  common(oracle);
  oracle->add_option("--max-variants", o.max_variants, "refuse models with more variants");
  oracle->add_flag("--no-cache", o.no_cache, "disable the feature-model query cache");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(o);
    if (*derive_cmd) return cmd_derive(o);
    if (*eval_cmd) return cmd_eval(o);
    return cmd_oracle(o);
  } catch (const InvalidSelection& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRejected;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
