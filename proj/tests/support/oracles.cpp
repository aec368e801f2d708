#include "oracles.hpp"

#include <algorithm>

namespace ffj::oracle {

namespace {

FormulaPtr context_formula(const Context& ctx) {
  std::vector<FormulaPtr> atoms;
  for (const auto& f : ctx) atoms.push_back(f_atom(f));
  return f_and_all(atoms);
}

}  // namespace

std::vector<Assignment> models(const FeatureModel& fm, const FormulaPtr& extra) {
  std::vector<Assignment> out;
  const std::size_t n = fm.features.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Assignment a;
    for (std::size_t i = 0; i < n; ++i) a[fm.features[i]] = (bits >> i) & 1u;
    if (evaluate(*fm.constraint, a) && evaluate(*extra, a)) out.push_back(std::move(a));
  }
  return out;
}

bool satisfiable(const FeatureModel& fm, const FormulaPtr& extra) {
  return !oracle::models(fm, extra).empty();
}

bool sometimes(const FeatureModel& fm, const Context& ctx, const std::string& f) {
  return oracle::satisfiable(fm, f_and(context_formula(ctx), f_atom(f)));
}

bool never(const FeatureModel& fm, const Context& ctx, const std::string& f) {
  return !sometimes(fm, ctx, f);
}

PresenceVerdict always(const FeatureModel& fm, const Context& ctx, const std::string& f,
                       const std::vector<std::string>& candidates) {
  auto ms = models(fm, context_formula(ctx));
  if (std::all_of(ms.begin(), ms.end(), [&](const Assignment& a) { return a.at(f); })) {
    return {PresenceVerdict::Kind::AlwaysAlone, {f}};
  }
  auto co_present = [&](const std::string& a, const std::string& b) {
    return std::any_of(ms.begin(), ms.end(), [&](const Assignment& m) { return m.at(a) && m.at(b); });
  };
  std::vector<std::string> pool;
  for (const auto& g : fm.features) {
    if (g == f || std::find(candidates.begin(), candidates.end(), g) == candidates.end()) continue;
    bool present = std::any_of(ms.begin(), ms.end(), [&](const Assignment& m) { return m.at(g); });
    if (present && !co_present(f, g)) pool.push_back(g);
  }
  const std::size_t k = pool.size();
  std::vector<std::size_t> best;
  bool found = false;
  for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << k); ++bits) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) {
      if ((bits >> i) & 1u) idx.push_back(i);
    }
    bool ok = true;
    for (std::size_t a = 0; a < idx.size() && ok; ++a) {
      for (std::size_t b = a + 1; b < idx.size() && ok; ++b) {
        ok = !co_present(pool[idx[a]], pool[idx[b]]);
      }
    }
    if (!ok) continue;
    bool covers = std::all_of(ms.begin(), ms.end(), [&](const Assignment& m) {
      if (m.at(f)) return true;
      return std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return m.at(pool[i]); });
    });
    if (!covers) continue;
    if (!found || idx.size() < best.size() || (idx.size() == best.size() && idx < best)) {
      best = idx;
      found = true;
    }
  }
  if (!found) return {PresenceVerdict::Kind::NeverForced, {}};
  std::vector<std::string> group{f};
  for (std::size_t i : best) group.push_back(pool[i]);
  std::sort(group.begin(), group.end(), [&](const auto& a, const auto& b) {
    return *fm.index_of(a) < *fm.index_of(b);
  });
  return {PresenceVerdict::Kind::AlwaysInGroup, group};
}

bool valid_selection(const FeatureModel& fm, const std::vector<std::string>& selection) {
  Assignment a;
  for (const auto& f : fm.features) a[f] = false;
  for (const auto& f : selection) {
    if (!fm.declares(f)) return false;
    a[f] = true;
  }
  return evaluate(*fm.constraint, a);
}

}  // namespace ffj::oracle
