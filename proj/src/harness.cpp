#include "uar/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "uar/errors.hpp"
#include "uar/util.hpp"

namespace uar {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return v.empty() || std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<std::size_t> select(const DatasetManifest& m, const Selector& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.records.size(); ++i)
    if (s.matches(m.records[i])) out.push_back(i);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorKind::Io, "bad number '" + std::string(s) + "' in report");
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorKind::Io, "bad count '" + std::string(s) + "' in report");
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) fail(ErrorKind::Io, "unterminated quote in report line");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

bool Selector::matches(const ManifestRecord& r) const { return contains(rooms, r.room) && contains(subjects, r.subject); }

std::string Selector::describe() const {
  std::vector<std::string> parts;
  if (!rooms.empty()) parts.push_back("room=" + join(rooms, "+"));
  if (!subjects.empty()) parts.push_back("subject=" + join(subjects, "+"));
  return parts.empty() ? "all" : join(parts, ";");
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::None: return "none";
    case GroupBy::Subject: return "subject";
    case GroupBy::Room: return "room";
  }
  return "?";
}

std::optional<GroupBy> parse_group_by(std::string_view name) {
  for (const auto g : {GroupBy::None, GroupBy::Subject, GroupBy::Room})
    if (to_string(g) == name) return g;
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> split_grouped_kfold(const DatasetManifest& manifest,
                                                          std::span<const std::size_t> pool, std::size_t k,
                                                          GroupBy group_by, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::Parameter, "k-fold needs k >= 2");
  std::vector<std::string> keys;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (const auto i : pool) {
    if (i >= manifest.records.size()) fail(ErrorKind::Parameter, "record index out of range");
    const auto& r = manifest.records[i];
    const std::string key = group_by == GroupBy::Subject ? r.subject : group_by == GroupBy::Room ? r.room : r.id;
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second.push_back(i);
  }
  if (keys.size() < k)
    fail(ErrorKind::Parameter, "only " + std::to_string(keys.size()) + " " + std::string(to_string(group_by)) +
                                   " groups for " + std::to_string(k) + " folds");

  std::mt19937_64 rng(seed);
  std::shuffle(keys.begin(), keys.end(), rng);
  std::stable_sort(keys.begin(), keys.end(),
                   [&](const auto& a, const auto& b) { return groups[a].size() > groups[b].size(); });

  std::vector<std::vector<std::size_t>> folds(k);
  for (const auto& key : keys) {
    auto& target = *std::min_element(folds.begin(), folds.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    const auto& g = groups[key];
    target.insert(target.end(), g.begin(), g.end());
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::vector<std::size_t>> split_grouped_kfold(const DatasetManifest& manifest, std::size_t k,
                                                          GroupBy group_by, std::uint64_t seed) {
  std::vector<std::size_t> all(manifest.records.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return split_grouped_kfold(manifest, all, k, group_by, seed);
}

TrainEvalSplit split_stratified(const DatasetManifest& manifest, std::span<const std::size_t> pool,
                                double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorKind::Parameter, "train_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, kNumActionClasses> by_class;
  for (const auto i : pool) {
    if (i >= manifest.records.size()) fail(ErrorKind::Parameter, "record index out of range");
    by_class[static_cast<std::size_t>(to_index(manifest.records[i].label))].push_back(i);
  }
  TrainEvalSplit out;
  for (std::size_t c = 0; c < kNumActionClasses; ++c) {
    auto& v = by_class[c];
    std::mt19937_64 rng(derive_seed(seed, {c}));
    std::shuffle(v.begin(), v.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(v.size())));
    out.train.insert(out.train.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.eval.insert(out.eval.end(), v.begin() + static_cast<std::ptrdiff_t>(n_train), v.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.eval.begin(), out.eval.end());
  return out;
}

namespace {

void check_fold(const DatasetManifest& m, const FoldPlan& f) {
  if (f.train.empty()) fail(ErrorKind::Parameter, f.name + ": empty training set");
  if (f.eval.empty()) fail(ErrorKind::Parameter, f.name + ": empty evaluation set");
  std::set<std::string> train_ids;
  for (const auto i : f.train) {
    if (i >= m.records.size()) fail(ErrorKind::Parameter, f.name + ": record index out of range");
    train_ids.insert(m.records[i].id);
  }
  for (const auto i : f.eval) {
    if (i >= m.records.size()) fail(ErrorKind::Parameter, f.name + ": record index out of range");
    if (train_ids.count(m.records[i].id))
      fail(ErrorKind::Leakage, f.name + ": record '" + m.records[i].id + "' is in both train and eval");
  }
}

}  // namespace

std::vector<FoldPlan> plan_condition(const DatasetManifest& manifest, const ConditionSpec& c, std::uint64_t seed) {
  const auto pool = select(manifest, c.train);
  if (pool.empty()) fail(ErrorKind::Parameter, c.name + ": train selector " + c.train.describe() + " matches nothing");
  std::vector<FoldPlan> plans;
  switch (c.split.kind) {
    case SplitKind::None: {
      if (!c.eval) fail(ErrorKind::Parameter, c.name + ": an explicit train/eval condition needs an eval selector");
      auto eval = select(manifest, *c.eval);
      if (eval.empty()) fail(ErrorKind::Parameter, c.name + ": eval selector " + c.eval->describe() + " matches nothing");
      plans.push_back({c.name, pool, std::move(eval)});
      break;
    }
    case SplitKind::Random: {
      if (c.eval) fail(ErrorKind::Parameter, c.name + ": a random split takes no eval selector");
      auto s = split_stratified(manifest, pool, c.split.train_fraction, seed);
      plans.push_back({c.name, std::move(s.train), std::move(s.eval)});
      break;
    }
    case SplitKind::KFold: {
      if (c.eval) fail(ErrorKind::Parameter, c.name + ": a k-fold split takes no eval selector");
      const auto folds = split_grouped_kfold(manifest, pool, c.split.k, c.split.group_by, seed);
      for (std::size_t f = 0; f < folds.size(); ++f) {
        FoldPlan p;
        p.name = c.name + "/fold" + std::to_string(f + 1);
        p.eval = folds[f];
        for (std::size_t g = 0; g < folds.size(); ++g)
          if (g != f) p.train.insert(p.train.end(), folds[g].begin(), folds[g].end());
        std::sort(p.train.begin(), p.train.end());
        plans.push_back(std::move(p));
      }
      break;
    }
  }
  for (const auto& p : plans) check_fold(manifest, p);
  return plans;
}

std::uint64_t EvalReport::total() const {
  std::uint64_t n = 0;
  for (const auto& row : confusion)
    for (const auto v : row) n += v;
  return n;
}

std::uint64_t EvalReport::correct() const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < kNumActionClasses; ++i) n += confusion[i][i];
  return n;
}

double EvalReport::confusion_accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

double EvalReport::mean_fold_accuracy() const {
  if (per_fold.empty()) return accuracy;
  return std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / static_cast<double>(per_fold.size());
}

void EvalReport::validate() const {
  if (total() == 0) fail(ErrorKind::Parameter, "report has an empty confusion matrix");
  if (std::abs(confusion_accuracy() - accuracy) > 1e-12)
    fail(ErrorKind::Parameter, "report accuracy disagrees with its confusion matrix");
}

RecordingFeatureCache::RecordingFeatureCache(const DatasetManifest& manifest, SensingConfig sensing, std::size_t window)
    : manifest_(manifest), sensing_(std::move(sensing)), window_(window) {}

const std::vector<FeatureMatrix>& RecordingFeatureCache::get(const ManifestRecord& record, FeatureKind kind) {
  const auto key = std::make_pair(kind, record.id);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const auto rec = load_recording(manifest_, record, sensing_);
  const FeatureKind kinds[] = {kind};
  auto full = extract_all(rec, kinds).front();
  full.label = record.label;
  return cache_.emplace(key, split_windows(full, window_)).first->second;
}

FeatureProvider RecordingFeatureCache::provider(FeatureKind kind) {
  return [this, kind](const ManifestRecord& r) { return get(r, kind); };
}

namespace {

struct Instances {
  FloatRows x;
  std::vector<ActionClass> labels;
  std::size_t rows = 0, cols = 0;
  std::optional<FeatureKind> kind;
};

Instances gather(const DatasetManifest& m, std::span<const std::size_t> idx, const FeatureProvider& features,
                 const std::string& fold) {
  Instances out;
  for (const auto i : idx) {
    const auto& rec = m.records[i];
    const auto windows = features(rec);
    if (windows.empty()) fail(ErrorKind::Segmentation, fold + ": record '" + rec.id + "' yields no feature window");
    for (const auto& w : windows) {
      if (out.labels.empty()) {
        out.rows = w.values.rows;
        out.cols = w.values.cols;
        out.kind = w.kind;
        out.x.cols = out.rows * out.cols;
      }
      if (w.values.rows != out.rows || w.values.cols != out.cols)
        fail(ErrorKind::Parameter, fold + ": record '" + rec.id + "' has a different feature shape");
      out.x.values.resize(out.x.values.size() + out.x.cols);
      std::transform(w.values.values.begin(), w.values.values.end(), out.x.values.end() - static_cast<std::ptrdiff_t>(out.x.cols),
                     [](double v) { return static_cast<float>(v); });
      ++out.x.rows;
      out.labels.push_back(rec.label);
    }
  }
  return out;
}

}  // namespace

EvalReport evaluate_plan(const DatasetManifest& manifest, std::span<const FoldPlan> plan,
                         const FeatureProvider& features, const SvmHyperparams& hyper, ConditionDescriptor descriptor,
                         const EvalHooks& hooks) {
  if (plan.empty()) fail(ErrorKind::Parameter, descriptor.name + ": no folds to evaluate");
  EvalReport report;
  report.condition = std::move(descriptor);
  for (const auto& fold : plan) {
    check_fold(manifest, fold);
    LinearSvmModel model;
    {
      const auto train = gather(manifest, fold.train, features, fold.name);
      model = train_linear_svm(train.x, train.labels, hyper);
      model.feature_kind = train.kind;
      model.input_rows = train.rows;
      model.input_cols = train.cols;
    }
    if (hooks.on_trained) hooks.on_trained(fold, model);

    const auto eval = gather(manifest, fold.eval, features, fold.name);
    if (eval.rows != model.input_rows || eval.cols != model.input_cols)
      fail(ErrorKind::Parameter, fold.name + ": eval features differ in shape from train features");
    const auto pred = predict(model, eval.x);
    std::uint64_t hit = 0;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
      const auto t = static_cast<std::size_t>(to_index(eval.labels[i]));
      const auto p = static_cast<std::size_t>(to_index(pred.labels[i]));
      ++report.confusion[t][p];
      hit += t == p;
    }
    report.per_fold.push_back(static_cast<double>(hit) / static_cast<double>(pred.labels.size()));
  }
  report.accuracy = report.confusion_accuracy();
  return report;
}

std::string describe_train(const ConditionSpec& c) { return c.train.describe(); }

std::string describe_eval(const ConditionSpec& c) {
  switch (c.split.kind) {
    case SplitKind::None:
      return c.eval ? c.eval->describe() : "?";
    case SplitKind::Random: {
      std::ostringstream os;
      os << "random " << std::llround(100.0 * c.split.train_fraction) << "/"
         << 100 - std::llround(100.0 * c.split.train_fraction) << " split";
      return os.str();
    }
    case SplitKind::KFold:
      return std::to_string(c.split.k) + "-fold by " + std::string(to_string(c.split.group_by));
  }
  return "?";
}

EvalReport run_condition(const DatasetManifest& manifest, const ConditionSpec& condition, FeatureKind kind,
                         const FeatureProvider& features, const SvmHyperparams& hyper, std::uint64_t seed,
                         const EvalHooks& hooks) {
  const auto plan = plan_condition(manifest, condition, seed);
  ConditionDescriptor d{condition.name, describe_train(condition), describe_eval(condition),
                        std::string(to_string(kind)), "linear-svm"};
  return evaluate_plan(manifest, plan, features, hyper, std::move(d), hooks);
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "csv") return ReportFormat::Delimited;
  return std::nullopt;
}

std::string emit_report(const EvalReport& r, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::Delimited) {
    os << "condition," << csv_field(r.condition.name) << '\n';
    os << "train," << csv_field(r.condition.train) << '\n';
    os << "eval," << csv_field(r.condition.eval) << '\n';
    os << "feature," << csv_field(r.condition.feature) << '\n';
    os << "classifier," << csv_field(r.condition.classifier) << '\n';
    os << "accuracy," << format_double(r.accuracy) << '\n';
    for (std::size_t f = 0; f < r.per_fold.size(); ++f) os << "fold," << f + 1 << ',' << format_double(r.per_fold[f]) << '\n';
    for (std::size_t t = 0; t < kNumActionClasses; ++t) {
      os << "confusion," << kActionNames[t];
      for (const auto v : r.confusion[t]) os << ',' << v;
      os << '\n';
    }
    return os.str();
  }

  os << "condition   " << r.condition.name << '\n';
  os << "train       " << r.condition.train << '\n';
  os << "eval        " << r.condition.eval << '\n';
  os << "feature     " << r.condition.feature << '\n';
  os << "classifier  " << r.condition.classifier << '\n';
  os << "accuracy    " << std::fixed << std::setprecision(4) << r.accuracy << " (" << r.correct() << "/" << r.total()
     << ")\n";
  if (!r.per_fold.empty()) {
    os << "folds      ";
    for (const double a : r.per_fold) os << ' ' << std::setprecision(4) << a;
    os << "\nfold mean   " << r.mean_fold_accuracy() << '\n';
  }
  os << "\nconfusion (rows: true class, columns: predicted)\n";
  os << std::setw(12) << "";
  for (std::size_t p = 0; p < kNumActionClasses; ++p) os << std::setw(6) << ("c" + std::to_string(p));
  os << '\n';
  for (std::size_t t = 0; t < kNumActionClasses; ++t) {
    os << std::left << std::setw(12) << kActionNames[t] << std::right;
    for (const auto v : r.confusion[t]) os << std::setw(6) << v;
    os << "   c" << t << '\n';
  }
  return os.str();
}

EvalReport parse_delimited_report(std::string_view text) {
  EvalReport r;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = csv_split(line);
    const auto& key = f[0];
    auto need = [&](std::size_t n) {
      if (f.size() != n) fail(ErrorKind::Io, "malformed report line: " + std::string(line));
    };
    if (key == "condition" || key == "train" || key == "eval" || key == "feature" || key == "classifier") {
      need(2);
      auto& dst = key == "condition" ? r.condition.name
                  : key == "train"   ? r.condition.train
                  : key == "eval"    ? r.condition.eval
                  : key == "feature" ? r.condition.feature
                                     : r.condition.classifier;
      dst = f[1];
    } else if (key == "accuracy") {
      need(2);
      r.accuracy = parse_double(f[1]);
    } else if (key == "fold") {
      need(3);
      if (parse_count(f[1]) != r.per_fold.size() + 1) fail(ErrorKind::Io, "report folds out of order");
      r.per_fold.push_back(parse_double(f[2]));
    } else if (key == "confusion") {
      need(2 + kNumActionClasses);
      const auto a = parse_action(f[1]);
      if (!a) fail(ErrorKind::Io, "unknown class '" + f[1] + "' in report");
      auto& row = r.confusion[static_cast<std::size_t>(to_index(*a))];
      for (std::size_t p = 0; p < kNumActionClasses; ++p) row[p] = parse_count(f[2 + p]);
    } else {
      fail(ErrorKind::Io, "unknown report key '" + key + "'");
    }
    seen.insert(key);
  }
  for (const char* k : {"condition", "feature", "accuracy", "confusion"})
    if (!seen.count(k)) fail(ErrorKind::Io, std::string("report lacks a '") + k + "' line");
  return r;
}

std::string emit_summary(std::span<const EvalReport> reports) {
  std::vector<std::string> conditions, kinds;
  std::map<std::pair<std::string, std::string>, const EvalReport*> cell;
  std::map<std::string, std::pair<std::string, std::string>> sets;
  for (const auto& r : reports) {
    if (std::find(conditions.begin(), conditions.end(), r.condition.name) == conditions.end())
      conditions.push_back(r.condition.name);
    if (std::find(kinds.begin(), kinds.end(), r.condition.feature) == kinds.end()) kinds.push_back(r.condition.feature);
    cell[{r.condition.name, r.condition.feature}] = &r;
    sets.try_emplace(r.condition.name, r.condition.train, r.condition.eval);
  }
  std::size_t wn = 9, wt = 5, we = 4;
  for (const auto& c : conditions) {
    wn = std::max(wn, c.size());
    wt = std::max(wt, sets[c].first.size());
    we = std::max(we, sets[c].second.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(wn + 2)) << "condition" << std::setw(static_cast<int>(wt + 2)) << "train"
     << std::setw(static_cast<int>(we + 2)) << "eval" << std::right;
  for (const auto& k : kinds) os << std::setw(9) << k;
  os << "\n";
  for (const auto& c : conditions) {
    os << std::left << std::setw(static_cast<int>(wn + 2)) << c << std::setw(static_cast<int>(wt + 2)) << sets[c].first
       << std::setw(static_cast<int>(we + 2)) << sets[c].second << std::right;
    for (const auto& k : kinds) {
      const auto it = cell.find({c, k});
      if (it == cell.end()) {
        os << std::setw(9) << "-";
      } else {
        std::ostringstream v;
        v << std::fixed << std::setprecision(1) << 100.0 * it->second->accuracy;
        os << std::setw(9) << v.str();
      }
    }
    os << "\n";
  }
  os << "(accuracy in %)\n";
  return os.str();
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) fail(ErrorKind::Parameter, where + ": '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(ErrorKind::Parameter, where + ": '" + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Selector parse_selector(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::Parameter, where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "rooms" && k != "subjects") fail(ErrorKind::Parameter, where + ": unknown key '" + k + "'");
  return {string_list(j, "rooms", where), string_list(j, "subjects", where)};
}

}  // namespace

std::vector<ConditionSpec> parse_conditions(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parameter, std::string("condition config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("conditions") || !doc["conditions"].is_array())
    fail(ErrorKind::Parameter, "condition config needs a 'conditions' array");
  std::vector<ConditionSpec> out;
  std::set<std::string> names;
  for (const auto& c : doc["conditions"]) {
    const std::string where = "condition #" + std::to_string(out.size() + 1);
    try {
      ConditionSpec spec;
      spec.name = c.at("name").get<std::string>();
      if (!names.insert(spec.name).second) fail(ErrorKind::Parameter, where + ": duplicate name '" + spec.name + "'");
      spec.train = parse_selector(c.at("train"), spec.name + ".train");
      if (c.contains("eval")) spec.eval = parse_selector(c["eval"], spec.name + ".eval");
      if (c.contains("split")) {
        const auto& s = c["split"];
        const auto kind = s.value("kind", std::string("none"));
        if (kind == "none")
          spec.split.kind = SplitKind::None;
        else if (kind == "random")
          spec.split.kind = SplitKind::Random;
        else if (kind == "kfold")
          spec.split.kind = SplitKind::KFold;
        else
          fail(ErrorKind::Parameter, spec.name + ": unknown split kind '" + kind + "'");
        spec.split.train_fraction = s.value("train_fraction", 0.7);
        spec.split.k = s.value("k", std::size_t{4});
        const auto g = parse_group_by(s.value("group_by", std::string("subject")));
        if (!g) fail(ErrorKind::Parameter, spec.name + ": unknown group_by");
        spec.split.group_by = *g;
      }
      out.push_back(std::move(spec));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parameter, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<ConditionSpec> load_conditions(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_conditions(ss.str());
}

SeparabilityReport separability_gate(std::span<const FeatureMatrix> features) {
  std::array<std::vector<const FeatureMatrix*>, kNumActionClasses> by_class;
  std::size_t width = 0;
  for (const auto& f : features) {
    if (!f.label) fail(ErrorKind::Parameter, "separability gate needs labelled features");
    if (width == 0) width = f.values.values.size();
    if (f.values.values.size() != width) fail(ErrorKind::Parameter, "feature matrices have inconsistent shapes");
    by_class[static_cast<std::size_t>(to_index(*f.label))].push_back(&f);
  }
  std::vector<std::vector<double>> centroids;
  SeparabilityReport out;
  for (const auto& members : by_class) {
    if (members.empty()) continue;
    std::vector<double> mu(width, 0.0);
    for (const auto* m : members)
      for (std::size_t j = 0; j < width; ++j) mu[j] += m->values.values[j];
    for (auto& v : mu) v /= static_cast<double>(members.size());
    double ss = 0.0;
    for (const auto* m : members)
      for (std::size_t j = 0; j < width; ++j) {
        const double d = m->values.values[j] - mu[j];
        ss += d * d;
      }
    out.max_within_spread = std::max(out.max_within_spread, std::sqrt(ss / static_cast<double>(members.size())));
    centroids.push_back(std::move(mu));
  }
  if (centroids.size() < 2) fail(ErrorKind::Parameter, "separability gate needs two or more classes");
  out.min_centroid_distance = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < centroids.size(); ++a)
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      double ss = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        const double d = centroids[a][j] - centroids[b][j];
        ss += d * d;
      }
      out.min_centroid_distance = std::min(out.min_centroid_distance, std::sqrt(ss));
    }
  return out;
}

}  // namespace uar
