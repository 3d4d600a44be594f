#pragma once

// Randomized manifest generator and the fold/leakage invariants checked on it.
// Returns an empty string when every invariant holds, else the first violation.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "uar/errors.hpp"
#include "uar/harness.hpp"

namespace props {

inline uar::DatasetManifest random_manifest(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_rooms(1, 3), n_subj(1, 6), n_inst(1, 5), coin(0, 3);
  uar::DatasetManifest m;
  const int rooms = n_rooms(rng);
  for (int r = 0; r < rooms; ++r) {
    const int subjects = n_subj(rng);
    for (int s = 0; s < subjects; ++s)
      for (const auto a : uar::kAllActionClasses) {
        if (coin(rng) == 0) continue;  // sparse class coverage
        const int inst = n_inst(rng);
        for (int k = 0; k < inst; ++k) {
          uar::ManifestRecord rec;
          rec.room = "R" + std::string(1, char('a' + r));
          rec.subject = "S" + std::to_string(s + 1);
          rec.label = a;
          rec.id = rec.room + "-" + rec.subject + "-" + std::string(uar::to_string(a)) + "-" + std::to_string(k);
          rec.path = rec.id + ".wav";
          m.records.push_back(rec);
        }
      }
  }
  std::shuffle(m.records.begin(), m.records.end(), rng);
  return m;
}

inline std::string group_key(const uar::ManifestRecord& r, uar::GroupBy g) {
  return g == uar::GroupBy::Subject ? r.subject : g == uar::GroupBy::Room ? r.room : r.id;
}

inline std::string check_folds(const uar::DatasetManifest& m, const std::vector<std::size_t>& pool,
                               const std::vector<std::vector<std::size_t>>& folds, uar::GroupBy g) {
  std::map<std::size_t, int> seen;
  std::map<std::string, std::size_t> fold_of_group;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].empty()) return "empty fold";
    for (const auto i : folds[f]) {
      if (++seen[i] > 1) return "record in two folds";
      const auto key = group_key(m.records[i], g);
      const auto [it, fresh] = fold_of_group.try_emplace(key, f);
      if (!fresh && it->second != f) return "group '" + key + "' split across folds";
    }
  }
  if (seen.size() != pool.size()) return "folds do not cover the pool";
  for (const auto i : pool)
    if (!seen.count(i)) return "pool record missing from folds";
  return {};
}

inline std::string check_plan(const uar::DatasetManifest& m, const std::vector<uar::FoldPlan>& plan) {
  for (const auto& f : plan) {
    std::set<std::string> train;
    for (const auto i : f.train) train.insert(m.records[i].id);
    for (const auto i : f.eval)
      if (train.count(m.records[i].id)) return f.name + ": leakage of " + m.records[i].id;
  }
  return {};
}

inline std::string check_one(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto m = random_manifest(rng);
  if (m.records.empty()) return {};
  std::vector<std::size_t> all(m.records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  // Grouped k-fold.
  const uar::GroupBy groupings[] = {uar::GroupBy::None, uar::GroupBy::Subject, uar::GroupBy::Room};
  const auto g = groupings[rng() % 3];
  std::set<std::string> keys;
  for (const auto& r : m.records) keys.insert(group_key(r, g));
  const std::size_t k = 2 + rng() % 5;
  try {
    const auto folds = uar::split_grouped_kfold(m, k, g, seed);
    if (keys.size() < k) return "expected a Parameter error for too few groups";
    if (folds.size() != k) return "wrong fold count";
    if (auto e = check_folds(m, all, folds, g); !e.empty()) return e;
    if (folds != uar::split_grouped_kfold(m, k, g, seed)) return "k-fold not deterministic";
    if (g == uar::GroupBy::None) {
      const auto [lo, hi] = std::minmax_element(folds.begin(), folds.end(),
                                                [](const auto& a, const auto& b) { return a.size() < b.size(); });
      if (hi->size() - lo->size() > 1) return "ungrouped folds unbalanced";
    }
  } catch (const uar::Error& e) {
    if (!(e.kind() == uar::ErrorKind::Parameter && keys.size() < k)) return std::string("k-fold threw: ") + e.what();
  }

  // Stratified split.
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  const double tf = frac(rng);
  const auto s = uar::split_stratified(m, all, tf, seed);
  if (s.train.size() + s.eval.size() != all.size()) return "stratified split loses records";
  std::map<uar::ActionClass, std::size_t> total, in_train;
  for (const auto& r : m.records) ++total[r.label];
  for (const auto i : s.train) ++in_train[m.records[i].label];
  for (const auto& [c, n] : total)
    if (in_train[c] != static_cast<std::size_t>(std::llround(tf * double(n)))) return "stratified class count off";
  {
    std::set<std::size_t> tr(s.train.begin(), s.train.end());
    for (const auto i : s.eval)
      if (tr.count(i)) return "stratified split overlaps";
  }

  // Conditions through plan_condition.
  std::vector<uar::ConditionSpec> conds;
  {
    uar::ConditionSpec c;
    c.name = "random";
    c.split.kind = uar::SplitKind::Random;
    c.split.train_fraction = tf;
    conds.push_back(c);
    c.name = "kfold";
    c.split.kind = uar::SplitKind::KFold;
    c.split.k = k;
    c.split.group_by = g;
    conds.push_back(c);
    c = {};
    c.name = "explicit";
    c.train.subjects = {"S1"};
    c.eval = uar::Selector{{}, {"S2", "S3"}};
    conds.push_back(c);
    c.name = "overlap";
    c.train = {};
    c.eval = uar::Selector{{"Ra"}, {}};
    conds.push_back(c);
  }
  for (const auto& c : conds) {
    try {
      const auto plan = uar::plan_condition(m, c, seed);
      if (c.name == "overlap") return "overlapping selectors were not flagged";
      if (auto e = check_plan(m, plan); !e.empty()) return e;
      if (c.split.kind == uar::SplitKind::KFold && plan.size() != k) return "k-fold plan size";
    } catch (const uar::Error& e) {
      const bool expected = (c.name == "overlap" && e.kind() == uar::ErrorKind::Leakage) ||
                            e.kind() == uar::ErrorKind::Parameter;
      if (!expected) return c.name + " threw: " + e.what();
    }
  }
  return {};
}

}  // namespace props
