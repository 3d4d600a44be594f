#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uar/action.hpp"
#include "uar/features.hpp"

namespace uar {

/// Row-major float design matrix, one flattened instance per row.
struct FloatRows {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  FloatRows() = default;
  FloatRows(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}

  float* row(std::size_t r) { return values.data() + r * cols; }
  const float* row(std::size_t r) const { return values.data() + r * cols; }
};

/// Slow-time-major flatten of each matrix into one row. All matrices must share a shape.
FloatRows flatten(std::span<const FeatureMatrix> features);

struct Scaler {
  static constexpr double kFloor = 1e-8;

  std::vector<double> mean;
  std::vector<double> scale;

  std::size_t width() const { return mean.size(); }
  void validate() const;
  void transform(const float* in, float* out) const;
  std::vector<double> transform(std::span<const double> row) const;
  FloatRows transform(const FloatRows& x) const;

  bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(const FloatRows& x);
Scaler fit_scaler(std::span<const FeatureMatrix> features);

enum class SvmSolver {
  DualCoordinate,  // exact coordinate steps on the dual box problem
  Pegasos,         // stochastic subgradient steps with eta_t = 1 / (lambda t) and ball projection
};

std::string_view to_string(SvmSolver s);
std::optional<SvmSolver> parse_solver(std::string_view name);

struct SvmHyperparams {
  double C = 1.0;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  SvmSolver solver = SvmSolver::DualCoordinate;

  void validate() const;
  bool operator==(const SvmHyperparams&) const = default;
};

/// Full-set objective of each one-vs-rest machine at every epoch boundary.
struct TrainingTrace {
  std::array<std::vector<double>, kNumActionClasses> objective;
};

struct LinearSvmModel {
  std::vector<double> weights;  // kNumActionClasses x dim, row-major, in standardized units
  std::array<double, kNumActionClasses> biases{};
  Scaler scaler;
  SvmHyperparams hyper;
  std::array<ActionClass, kNumActionClasses> class_map{};  // row k scores class_map[k]
  std::optional<FeatureKind> feature_kind;
  std::size_t input_rows = 0;  // N x W of the matrices that were flattened, 0 when trained on raw rows
  std::size_t input_cols = 0;

  std::size_t dim() const { return scaler.width(); }
  std::span<const double> weight_row(std::size_t k) const { return {weights.data() + k * dim(), dim()}; }

  bool operator==(const LinearSvmModel&) const = default;
};

/// One-vs-rest linear SVMs minimising lambda/2 |w|^2 + mean hinge with
/// lambda = 1 / (C n), visiting rows in a seeded shuffle each epoch. The scaler
/// is fitted on `x` and the bias is learned as the weight of a constant
/// feature. Throws ErrorKind::Training when fewer than two classes are present.
LinearSvmModel train_linear_svm(const FloatRows& x, std::span<const ActionClass> labels, const SvmHyperparams& hyper,
                                TrainingTrace* trace = nullptr);
LinearSvmModel train_linear_svm(std::span<const FeatureMatrix> features, std::span<const ActionClass> labels,
                                const SvmHyperparams& hyper, TrainingTrace* trace = nullptr);

struct Prediction {
  std::vector<ActionClass> labels;
  Matrix scores;  // rows x kNumActionClasses, in class_map order
};

/// argmax_k w_k . z + b_k, ties (within 1e-12 relative) to the lowest row. With bypass_scaler the rows
/// are taken as already standardized.
Prediction predict(const LinearSvmModel& model, const FloatRows& x, bool bypass_scaler = false);
Prediction predict(const LinearSvmModel& model, std::span<const FeatureMatrix> features, bool bypass_scaler = false);

std::vector<std::uint8_t> encode_model(const LinearSvmModel& model);
LinearSvmModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const LinearSvmModel& model, const std::filesystem::path& path);
LinearSvmModel load_model(const std::filesystem::path& path);

}  // namespace uar
