#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uar/features.hpp"
#include "uar/manifest.hpp"
#include "uar/svm.hpp"

namespace uar {

/// Records whose room and subject are both listed; an empty list matches everything.
struct Selector {
  std::vector<std::string> rooms;
  std::vector<std::string> subjects;

  bool matches(const ManifestRecord& r) const;
  std::string describe() const;  // e.g. "room=Rc;subject=S1+S2", "all"
  bool operator==(const Selector&) const = default;
};

enum class GroupBy { None, Subject, Room };

std::string_view to_string(GroupBy g);
std::optional<GroupBy> parse_group_by(std::string_view name);

/// k disjoint folds (indices into manifest.records) covering every record.
/// Grouped folds never split a group; groups go largest-first to the currently
/// smallest fold after a seeded shuffle. Throws ErrorKind::Parameter when k < 2
/// or there are fewer groups than k.
std::vector<std::vector<std::size_t>> split_grouped_kfold(const DatasetManifest& manifest, std::size_t k,
                                                          GroupBy group_by, std::uint64_t seed);
std::vector<std::vector<std::size_t>> split_grouped_kfold(const DatasetManifest& manifest,
                                                          std::span<const std::size_t> pool, std::size_t k,
                                                          GroupBy group_by, std::uint64_t seed);

struct TrainEvalSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// Per-class random split of `pool`; round(train_fraction * n_class) records of each class go to train.
TrainEvalSplit split_stratified(const DatasetManifest& manifest, std::span<const std::size_t> pool,
                                double train_fraction, std::uint64_t seed);

enum class SplitKind { None, Random, KFold };

struct SplitSpec {
  SplitKind kind = SplitKind::None;
  double train_fraction = 0.7;
  std::size_t k = 4;
  GroupBy group_by = GroupBy::Subject;
};

/// Train/eval condition. With SplitKind::None the eval selector is required and
/// the two selections must be disjoint; Random and KFold split the train
/// selection and take no eval selector.
struct ConditionSpec {
  std::string name;
  Selector train;
  std::optional<Selector> eval;
  SplitSpec split;
};

struct FoldPlan {
  std::string name;
  std::vector<std::size_t> train;  // indices into manifest.records
  std::vector<std::size_t> eval;
};

/// Throws ErrorKind::Leakage when a train and an eval record share an id and
/// ErrorKind::Parameter for empty selections.
std::vector<FoldPlan> plan_condition(const DatasetManifest& manifest, const ConditionSpec& condition,
                                     std::uint64_t seed);

struct ConditionDescriptor {
  std::string name;
  std::string train;
  std::string eval;
  std::string feature;
  std::string classifier = "linear-svm";

  bool operator==(const ConditionDescriptor&) const = default;
};

using ConfusionMatrix = std::array<std::array<std::uint64_t, kNumActionClasses>, kNumActionClasses>;

struct EvalReport {
  ConditionDescriptor condition;
  ConfusionMatrix confusion{};  // [true][predicted]
  double accuracy = 0.0;
  std::vector<double> per_fold;

  std::uint64_t total() const;
  std::uint64_t correct() const;
  double confusion_accuracy() const;  // trace / total
  double mean_fold_accuracy() const;
  void validate() const;

  bool operator==(const EvalReport&) const = default;
};

/// Feature windows of one record. Every window becomes one instance carrying the record's label.
using FeatureProvider = std::function<std::vector<FeatureMatrix>(const ManifestRecord&)>;

/// Reads each record's WAV once per kind and keeps the windows in memory.
class RecordingFeatureCache {
 public:
  RecordingFeatureCache(const DatasetManifest& manifest, SensingConfig sensing,
                        std::size_t window = kDefaultWindowCycles);

  FeatureProvider provider(FeatureKind kind);
  const std::vector<FeatureMatrix>& get(const ManifestRecord& record, FeatureKind kind);
  void clear() { cache_.clear(); }

 private:
  const DatasetManifest& manifest_;
  SensingConfig sensing_;
  std::size_t window_;
  std::map<std::pair<FeatureKind, std::string>, std::vector<FeatureMatrix>> cache_;
};

struct EvalHooks {
  // Called after each fold's model is trained, before any eval features are requested.
  std::function<void(const FoldPlan&, const LinearSvmModel&)> on_trained;
};

/// Features -> scaler and SVM fitted on train only -> predict eval -> pooled confusion.
EvalReport evaluate_plan(const DatasetManifest& manifest, std::span<const FoldPlan> plan,
                         const FeatureProvider& features, const SvmHyperparams& hyper, ConditionDescriptor descriptor,
                         const EvalHooks& hooks = {});

EvalReport run_condition(const DatasetManifest& manifest, const ConditionSpec& condition, FeatureKind kind,
                         const FeatureProvider& features, const SvmHyperparams& hyper, std::uint64_t seed,
                         const EvalHooks& hooks = {});

std::string describe_train(const ConditionSpec& c);
std::string describe_eval(const ConditionSpec& c);

enum class ReportFormat { Text, Delimited };

std::optional<ReportFormat> parse_report_format(std::string_view name);  // "text" | "csv"
std::string emit_report(const EvalReport& report, ReportFormat format);
/// Inverse of emit_report(..., Delimited).
EvalReport parse_delimited_report(std::string_view text);
/// Condition rows by feature-kind columns of accuracies.
std::string emit_summary(std::span<const EvalReport> reports);

/// {"conditions": [{"name", "train": {"rooms", "subjects"}, "eval": {...},
///   "split": {"kind": "none|random|kfold", "train_fraction", "k", "group_by"}}]}
std::vector<ConditionSpec> parse_conditions(std::string_view json_text);
std::vector<ConditionSpec> load_conditions(const std::filesystem::path& path);

struct SeparabilityReport {
  double min_centroid_distance = 0.0;
  double max_within_spread = 0.0;  // largest per-class RMS distance to the class centroid
  bool pass() const { return min_centroid_distance > max_within_spread; }
};

/// Centroid separation of flattened labelled features. Needs two or more classes.
SeparabilityReport separability_gate(std::span<const FeatureMatrix> features);

}  // namespace uar
