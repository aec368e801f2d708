#include "ffj/feature_model.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "ffj/parser.hpp"

namespace ffj {

bool evaluate(const Formula& f, const Assignment& a) {
  switch (f.kind) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::Atom: {
      auto it = a.find(f.atom);
      return it != a.end() && it->second;
    }
    case Formula::Kind::Not:
      return !evaluate(*f.lhs, a);
    case Formula::Kind::And:
      return evaluate(*f.lhs, a) && evaluate(*f.rhs, a);
    case Formula::Kind::Or:
      return evaluate(*f.lhs, a) || evaluate(*f.rhs, a);
    case Formula::Kind::Implies:
      return !evaluate(*f.lhs, a) || evaluate(*f.rhs, a);
  }
  return false;
}

namespace {

// Literals are DIMACS-style: variable v > 0 appears as v or -v. Feature i of
// the model is variable i + 1 so the decision order follows the model.
class CnfBuilder {
 public:
  explicit CnfBuilder(const FeatureModel& fm) {
    for (const auto& f : fm.features) var_of(f);
  }

  void assert_formula(const Formula& f) {
    switch (f.kind) {
      case Formula::Kind::True:
        return;
      case Formula::Kind::And:
        assert_formula(*f.lhs);
        assert_formula(*f.rhs);
        return;
      case Formula::Kind::Not:
        if (f.lhs->kind == Formula::Kind::True) {
          clauses_.emplace_back();
          return;
        }
        break;
      default:
        break;
    }
    clauses_.push_back({lit(f)});
  }

  int num_vars() const { return next_var_ - 1; }
  const std::vector<std::vector<int>>& clauses() const { return clauses_; }

 private:
  int var_of(const std::string& atom) {
    auto [it, fresh] = atoms_.emplace(atom, next_var_);
    if (fresh) ++next_var_;
    return it->second;
  }

  int fresh() { return next_var_++; }

  int lit(const Formula& f) {
    switch (f.kind) {
      case Formula::Kind::True: {
        if (true_var_ == 0) {
          true_var_ = fresh();
          clauses_.push_back({true_var_});
        }
        return true_var_;
      }
      case Formula::Kind::Atom:
        return var_of(f.atom);
      case Formula::Kind::Not:
        return -lit(*f.lhs);
      case Formula::Kind::And: {
        int a = lit(*f.lhs);
        int b = lit(*f.rhs);
        int x = fresh();
        clauses_.push_back({-x, a});
        clauses_.push_back({-x, b});
        clauses_.push_back({x, -a, -b});
        return x;
      }
      case Formula::Kind::Or:
      case Formula::Kind::Implies: {
        int a = lit(*f.lhs);
        if (f.kind == Formula::Kind::Implies) a = -a;
        int b = lit(*f.rhs);
        int x = fresh();
        clauses_.push_back({-x, a, b});
        clauses_.push_back({x, -a});
        clauses_.push_back({x, -b});
        return x;
      }
    }
    return 0;
  }

  std::map<std::string, int> atoms_;
  std::vector<std::vector<int>> clauses_;
  int next_var_ = 1;
  int true_var_ = 0;
};

class Dpll {
 public:
  Dpll(int num_vars, const std::vector<std::vector<int>>& clauses)
      : clauses_(clauses), value_(static_cast<std::size_t>(num_vars) + 1, 0) {}

  bool solve() { return search(); }
  bool value_of(int var) const { return value_[static_cast<std::size_t>(var)] > 0; }

 private:
  int lit_value(int lit) const {
    int v = value_[static_cast<std::size_t>(std::abs(lit))];
    return lit > 0 ? v : -v;
  }

  void assign(int lit, std::vector<int>& trail) {
    value_[static_cast<std::size_t>(std::abs(lit))] = lit > 0 ? 1 : -1;
    trail.push_back(std::abs(lit));
  }

  void undo(const std::vector<int>& trail) {
    for (int v : trail) value_[static_cast<std::size_t>(v)] = 0;
  }

  bool propagate(std::vector<int>& trail) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& clause : clauses_) {
        int open = 0;
        int unit = 0;
        bool sat = false;
        for (int l : clause) {
          int v = lit_value(l);
          if (v > 0) {
            sat = true;
            break;
          }
          if (v == 0) {
            ++open;
            unit = l;
          }
        }
        if (sat) continue;
        if (open == 0) return false;
        if (open == 1) {
          assign(unit, trail);
          changed = true;
        }
      }
    }
    return true;
  }

  bool search() {
    std::vector<int> trail;
    if (!propagate(trail)) {
      undo(trail);
      return false;
    }
    std::size_t v = 1;
    while (v < value_.size() && value_[v] != 0) ++v;
    if (v == value_.size()) return true;
    for (int lit : {static_cast<int>(v), -static_cast<int>(v)}) {
      std::vector<int> decision;
      assign(lit, decision);
      if (search()) return true;
      undo(decision);
    }
    undo(trail);
    return false;
  }

  const std::vector<std::vector<int>>& clauses_;
  std::vector<int8_t> value_;
};

}  // namespace

bool satisfiable(const FeatureModel& fm, const FormulaPtr& extra, Assignment* witness) {
  CnfBuilder cnf(fm);
  cnf.assert_formula(*fm.constraint);
  if (extra) cnf.assert_formula(*extra);
  Dpll solver(cnf.num_vars(), cnf.clauses());
  if (!solver.solve()) return false;
  if (witness != nullptr) {
    witness->clear();
    for (std::size_t i = 0; i < fm.features.size(); ++i) {
      (*witness)[fm.features[i]] = solver.value_of(static_cast<int>(i) + 1);
    }
  }
  return true;
}

std::string to_string(const PresenceVerdict& v) {
  switch (v.kind) {
    case PresenceVerdict::Kind::AlwaysAlone:
      return "AlwaysAlone(" + v.group.front() + ")";
    case PresenceVerdict::Kind::AlwaysInGroup: {
      std::string s = "AlwaysInGroup(";
      for (std::size_t i = 0; i < v.group.size(); ++i) s += (i ? ", " : "") + v.group[i];
      return s + ")";
    }
    case PresenceVerdict::Kind::NeverForced:
      return "NeverForced";
  }
  return {};
}

Reasoner::Reasoner(FeatureModel fm, bool cache) : fm_(std::move(fm)), cache_(cache) {}

bool Reasoner::cached(const std::string& key, const std::function<bool()>& compute) {
  if (!cache_) return compute();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  bool result = compute();
  std::lock_guard<std::mutex> lock(mutex_);
  memo_.emplace(key, result);
  return result;
}

std::string Reasoner::context_key(const Context& ctx) {
  std::set<std::string> sorted(ctx.begin(), ctx.end());
  std::string key;
  for (const auto& f : sorted) key += f + ",";
  return key;
}

FormulaPtr Reasoner::conjunction(const Context& ctx) const {
  std::vector<FormulaPtr> atoms;
  for (const auto& f : ctx) atoms.push_back(f_atom(f));
  return f_and_all(atoms);
}

bool Reasoner::satisfiable(const FormulaPtr& extra) {
  return cached("sat|" + print_formula(*extra), [&] { return ffj::satisfiable(fm_, extra); });
}

bool Reasoner::consistent(const Context& ctx) {
  return cached("ctx|" + context_key(ctx),
                [&] { return ffj::satisfiable(fm_, conjunction(ctx)); });
}

bool Reasoner::sometimes(const Context& ctx, const std::string& feature) {
  return cached("some|" + context_key(ctx) + "|" + feature, [&] {
    return ffj::satisfiable(fm_, f_and(conjunction(ctx), f_atom(feature)));
  });
}

bool Reasoner::never(const Context& ctx, const std::string& feature) {
  return !sometimes(ctx, feature);
}

bool Reasoner::implies(const Context& ctx, const FormulaPtr& f) {
  return cached("imp|" + context_key(ctx) + "|" + print_formula(*f), [&] {
    return !ffj::satisfiable(fm_, f_and(conjunction(ctx), f_not(f)));
  });
}

PresenceVerdict Reasoner::always(const Context& ctx, const std::string& feature,
                                 const std::vector<std::string>& candidates) {
  if (implies(ctx, f_atom(feature))) {
    return {PresenceVerdict::Kind::AlwaysAlone, {feature}};
  }
  std::vector<std::string> pool;
  for (const auto& c : in_model_order(candidates)) {
    if (c == feature || std::find(pool.begin(), pool.end(), c) != pool.end()) continue;
    if (never(ctx, c)) continue;
    Context with = ctx;
    with.push_back(feature);
    if (never(with, c)) pool.push_back(c);
  }
  auto exclusive = [&](const std::string& a, const std::string& b) {
    Context with = ctx;
    with.push_back(a);
    return never(with, b);
  };
  // Smallest group first, then earliest in model order.
  std::vector<std::string> group{feature};
  std::function<bool(std::size_t, std::size_t)> search = [&](std::size_t from, std::size_t size) {
    if (group.size() == size) {
      std::vector<FormulaPtr> atoms;
      for (const auto& g : group) atoms.push_back(f_atom(g));
      return implies(ctx, f_or_all(atoms));
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      bool ok = std::all_of(group.begin() + 1, group.end(),
                            [&](const std::string& g) { return exclusive(g, pool[i]); });
      if (!ok) continue;
      group.push_back(pool[i]);
      if (search(i + 1, size)) return true;
      group.pop_back();
    }
    return false;
  };
  for (std::size_t size = 2; size <= pool.size() + 1; ++size) {
    if (search(0, size)) {
      return {PresenceVerdict::Kind::AlwaysInGroup, in_model_order(group)};
    }
  }
  return {PresenceVerdict::Kind::NeverForced, {}};
}

bool Reasoner::reachable(const Context& ctx, const std::vector<std::string>& introducers,
                         const std::optional<std::vector<std::string>>& scope) {
  std::vector<FormulaPtr> atoms;
  for (const auto& f : introducers) {
    if (scope && std::find(scope->begin(), scope->end(), f) == scope->end()) continue;
    atoms.push_back(f_atom(f));
  }
  return implies(ctx, f_or_all(atoms));
}

bool Reasoner::valid_selection(const std::vector<std::string>& selection) const {
  Assignment a;
  for (const auto& f : fm_.features) a[f] = false;
  for (const auto& f : selection) {
    if (!fm_.declares(f)) return false;
    a[f] = true;
  }
  return evaluate(*fm_.constraint, a);
}

std::vector<std::string> Reasoner::in_model_order(std::vector<std::string> features) const {
  std::stable_sort(features.begin(), features.end(), [&](const auto& a, const auto& b) {
    return fm_.index_of(a).value_or(fm_.features.size()) <
           fm_.index_of(b).value_or(fm_.features.size());
  });
  return features;
}

}  // namespace ffj
