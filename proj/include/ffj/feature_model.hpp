#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ffj/ast.hpp"

namespace ffj {

using Assignment = std::map<std::string, bool>;
using Context = std::vector<std::string>;

/// Evaluates `f` under the assignment; unassigned atoms count as false.
bool evaluate(const Formula& f, const Assignment& a);

/// DPLL over a Tseitin CNF of `fm.constraint and extra`. Fills `witness`
/// (over the model's features only) when satisfiable.
bool satisfiable(const FeatureModel& fm, const FormulaPtr& extra, Assignment* witness = nullptr);

struct PresenceVerdict {
  enum class Kind { AlwaysAlone, AlwaysInGroup, NeverForced };
  Kind kind = Kind::NeverForced;
  std::vector<std::string> group;  // the feature alone, the group, or empty

  friend bool operator==(const PresenceVerdict&, const PresenceVerdict&) = default;
};

std::string to_string(const PresenceVerdict& v);

/// Cached query interface over one immutable feature model. Queries are
/// internally synchronized, so one Reasoner may be shared across threads.
class Reasoner {
 public:
  explicit Reasoner(FeatureModel fm, bool cache = true);

  const FeatureModel& model() const { return fm_; }
  bool cache_enabled() const { return cache_; }

  bool satisfiable(const FormulaPtr& extra);
  /// FM and every context feature hold together.
  bool consistent(const Context& ctx);
  bool never(const Context& ctx, const std::string& feature);
  bool sometimes(const Context& ctx, const std::string& feature);
  /// `candidates` is the pool of alternatives for the element under lookup;
  /// members never co-present with the context are ignored.
  PresenceVerdict always(const Context& ctx, const std::string& feature,
                         const std::vector<std::string>& candidates);
  /// FM and the context imply `f` (vacuously true for a dead context).
  bool implies(const Context& ctx, const FormulaPtr& f);
  /// FM and the context imply that one of `introducers` is present; with a
  /// scope, only introducers inside the scope count.
  bool reachable(const Context& ctx, const std::vector<std::string>& introducers,
                 const std::optional<std::vector<std::string>>& scope = std::nullopt);
  bool valid_selection(const std::vector<std::string>& selection) const;

  /// Sorts by position in the feature model; unknown names go last.
  std::vector<std::string> in_model_order(std::vector<std::string> features) const;

 private:
  bool cached(const std::string& key, const std::function<bool()>& compute);
  FormulaPtr conjunction(const Context& ctx) const;
  static std::string context_key(const Context& ctx);

  FeatureModel fm_;
  bool cache_;
  std::mutex mutex_;
  std::unordered_map<std::string, bool> memo_;
};

}  // namespace ffj
