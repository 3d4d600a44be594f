#include "uar/svm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "uar/errors.hpp"
#include "uar/simd/kernels.hpp"
#include "uar/util.hpp"

namespace uar {

FloatRows flatten(std::span<const FeatureMatrix> features) {
  if (features.empty()) return {};
  const std::size_t r = features.front().values.rows, c = features.front().values.cols;
  FloatRows out(features.size(), r * c);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& m = features[i].values;
    if (m.rows != r || m.cols != c)
      fail(ErrorKind::Parameter, "feature matrices have inconsistent shapes (" + std::to_string(m.rows) + "x" +
                                     std::to_string(m.cols) + " vs " + std::to_string(r) + "x" + std::to_string(c) + ")");
    std::transform(m.values.begin(), m.values.end(), out.row(i), [](double v) { return static_cast<float>(v); });
  }
  return out;
}

void Scaler::validate() const {
  if (mean.size() != scale.size()) fail(ErrorKind::Parameter, "scaler mean and scale widths differ");
  for (const double s : scale)
    if (!(s >= kFloor) || !std::isfinite(s)) fail(ErrorKind::Parameter, "scaler scale below floor or not finite");
}

void Scaler::transform(const float* in, float* out) const {
  std::vector<double> inv(scale.size());
  for (std::size_t j = 0; j < scale.size(); ++j) inv[j] = 1.0 / scale[j];
  simd::kernels().standardize_f32(in, mean.data(), inv.data(), out, width());
}

std::vector<double> Scaler::transform(std::span<const double> row) const {
  if (row.size() != width()) fail(ErrorKind::Parameter, "row width does not match the scaler");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

FloatRows Scaler::transform(const FloatRows& x) const {
  if (x.cols != width()) fail(ErrorKind::Parameter, "row width does not match the scaler");
  std::vector<double> inv(scale.size());
  for (std::size_t j = 0; j < scale.size(); ++j) inv[j] = 1.0 / scale[j];
  FloatRows out(x.rows, x.cols);
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < x.rows; ++i) k.standardize_f32(x.row(i), mean.data(), inv.data(), out.row(i), x.cols);
  return out;
}

Scaler fit_scaler(const FloatRows& x) {
  if (x.rows == 0 || x.cols == 0) fail(ErrorKind::Parameter, "cannot fit a scaler on an empty training set");
  Scaler s;
  s.mean.assign(x.cols, 0.0);
  s.scale.assign(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const float* r = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += r[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const float* r = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double d = r[j] - s.mean[j];
      s.scale[j] += d * d;
    }
  }
  for (auto& v : s.scale) v = std::max(std::sqrt(v / static_cast<double>(x.rows)), Scaler::kFloor);
  return s;
}

Scaler fit_scaler(std::span<const FeatureMatrix> features) { return fit_scaler(flatten(features)); }

std::string_view to_string(SvmSolver s) { return s == SvmSolver::Pegasos ? "pegasos" : "dual-cd"; }

std::optional<SvmSolver> parse_solver(std::string_view name) {
  for (const auto s : {SvmSolver::DualCoordinate, SvmSolver::Pegasos})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

void SvmHyperparams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) fail(ErrorKind::Parameter, "C must be positive and finite");
  if (epochs < 1) fail(ErrorKind::Parameter, "epochs must be at least 1");
}

namespace {

// K = Z Z^T + 1; the constant carries the bias as an extra feature.
std::vector<double> augmented_gram(const FloatRows& z) {
  constexpr std::size_t kRowBlock = 32, kColChunk = 2048;
  const std::size_t n = z.rows;
  const auto& k = simd::kernels();
  std::vector<double> g(n * n, 0.0);
  for (std::size_t ib = 0; ib < n; ib += kRowBlock) {
    const std::size_t ie = std::min(ib + kRowBlock, n);
    for (std::size_t jb = 0; jb <= ib; jb += kRowBlock) {
      const std::size_t je = std::min(jb + kRowBlock, n);
      for (std::size_t c0 = 0; c0 < z.cols; c0 += kColChunk) {
        const std::size_t len = std::min(kColChunk, z.cols - c0);
        for (std::size_t i = ib; i < ie; ++i)
          for (std::size_t j = jb; j < std::min(je, i + 1); ++j) g[i * n + j] += k.dot_f32(z.row(i) + c0, z.row(j) + c0, len);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      g[i * n + j] += 1.0;
      g[j * n + i] = g[i * n + j];
    }
    g[i * n + i] += 1.0;
  }
  return g;
}

// Pegasos in representer form: w = s * sum_i c_i z_i, g_i = sum_j c_j K_ij,
// q = sum_ij c_i c_j K_ij so that |w|^2 = s^2 q.
struct Machine {
  std::vector<double> c, g;
  double s = 1.0, q = 0.0;

  explicit Machine(std::size_t n) : c(n, 0.0), g(n, 0.0) {}

  void reset() {
    std::fill(c.begin(), c.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    s = 1.0;
    q = 0.0;
  }

  void renormalize() {
    for (auto& v : c) v *= s;
    for (auto& v : g) v *= s;
    q *= s * s;
    s = 1.0;
  }
};

double objective(const Machine& m, std::span<const double> y, double lambda) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * m.s * m.g[i]);
  return 0.5 * lambda * m.s * m.s * m.q + hinge / static_cast<double>(y.size());
}

// Shared tail of both solvers: keep the best epoch-boundary iterate so the
// recorded objective never rises.
struct BestIterate {
  Machine best;
  double best_obj;

  void offer(Machine& m, double obj, std::vector<double>* history) {
    if (obj <= best_obj) {
      best = m;
      best_obj = obj;
    } else {
      m = best;
    }
    if (history) history->push_back(best_obj);
  }
};

Machine train_pegasos(const std::vector<double>& gram, std::span<const double> y, double lambda, std::size_t epochs,
                      std::uint64_t seed, std::vector<double>* history) {
  const std::size_t n = y.size();
  Machine m(n);
  BestIterate keep{m, objective(m, y, lambda)};
  const double radius = 1.0 / std::sqrt(lambda);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::size_t t = 0;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin = y[i] * m.s * m.g[i];
      if (t == 1)
        m.reset();
      else
        m.s *= 1.0 - 1.0 / static_cast<double>(t);
      if (margin < 1.0) {
        const double delta = eta * y[i] / m.s;
        const double* col = gram.data() + i * n;
        m.q += 2.0 * delta * m.g[i] + delta * delta * col[i];
        m.c[i] += delta;
        for (std::size_t j = 0; j < n; ++j) m.g[j] += delta * col[j];
      }
      const double norm = m.s * std::sqrt(std::max(m.q, 0.0));
      if (norm > radius) m.s *= radius / norm;
      if (m.s < 1e-9) m.renormalize();
    }
    keep.offer(m, objective(m, y, lambda), history);
  }
  return keep.best;
}

// Dual coordinate descent on 1/2 |w|^2 + C sum hinge, box 0 <= alpha_i <= C,
// with c_i = alpha_i y_i. Same minimiser as the lambda form with lambda = 1 / (C n).
Machine train_dual_cd(const std::vector<double>& gram, std::span<const double> y, double C, std::size_t epochs,
                      std::uint64_t seed, std::vector<double>* history) {
  const std::size_t n = y.size();
  const double lambda = 1.0 / (C * static_cast<double>(n));
  Machine m(n);
  BestIterate keep{m, objective(m, y, lambda)};
  std::vector<double> alpha(n, 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order) {
      const double* col = gram.data() + i * n;
      const double grad = y[i] * m.g[i] - 1.0;
      double pg = grad;
      if (alpha[i] <= 0.0) pg = std::min(grad, 0.0);
      else if (alpha[i] >= C) pg = std::max(grad, 0.0);
      if (pg == 0.0 || col[i] <= 0.0) continue;
      const double next = std::clamp(alpha[i] - grad / col[i], 0.0, C);
      const double delta = (next - alpha[i]) * y[i];
      if (delta == 0.0) continue;
      alpha[i] = next;
      m.q += 2.0 * delta * m.g[i] + delta * delta * col[i];
      m.c[i] += delta;
      for (std::size_t j = 0; j < n; ++j) m.g[j] += delta * col[j];
    }
    const double obj = objective(m, y, lambda);
    const bool reverted = obj > keep.best_obj;
    keep.offer(m, obj, history);
    if (reverted)
      for (std::size_t i = 0; i < n; ++i) alpha[i] = m.c[i] * y[i];
  }
  return keep.best;
}

}  // namespace

LinearSvmModel train_linear_svm(const FloatRows& x, std::span<const ActionClass> labels, const SvmHyperparams& hyper,
                                TrainingTrace* trace) {
  hyper.validate();
  if (x.rows != labels.size()) fail(ErrorKind::Parameter, "feature rows and labels differ in count");
  if (x.rows == 0 || x.cols == 0) fail(ErrorKind::Training, "empty training set");
  std::array<std::size_t, kNumActionClasses> counts{};
  for (const auto l : labels) ++counts[static_cast<std::size_t>(to_index(l))];
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    fail(ErrorKind::Training, "training needs at least two classes");

  LinearSvmModel model;
  model.hyper = hyper;
  model.class_map = kAllActionClasses;
  model.scaler = fit_scaler(x);
  const FloatRows z = model.scaler.transform(x);
  const auto gram = augmented_gram(z);

  const std::size_t n = x.rows, d = x.cols;
  const double lambda = 1.0 / (hyper.C * static_cast<double>(n));
  model.weights.assign(kNumActionClasses * d, 0.0);
  if (trace) *trace = {};

  const auto& k = simd::kernels();
  std::vector<double> y(n);
  for (std::size_t cls = 0; cls < kNumActionClasses; ++cls) {
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == model.class_map[cls] ? 1.0 : -1.0;
    const auto stream = derive_seed(hyper.seed, {cls});
    auto* history = trace ? &trace->objective[cls] : nullptr;
    const Machine m = hyper.solver == SvmSolver::Pegasos
                          ? train_pegasos(gram, y, lambda, hyper.epochs, stream, history)
                          : train_dual_cd(gram, y, hyper.C, hyper.epochs, stream, history);
    double* w = model.weights.data() + cls * d;
    double bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m.c[i] == 0.0) continue;
      k.axpy_f64_f32(m.s * m.c[i], z.row(i), w, d);
      bias += m.s * m.c[i];
    }
    model.biases[cls] = bias;
  }
  for (const double w : model.weights)
    if (!std::isfinite(w)) fail(ErrorKind::Training, "training produced non-finite weights");
  return model;
}

LinearSvmModel train_linear_svm(std::span<const FeatureMatrix> features, std::span<const ActionClass> labels,
                                const SvmHyperparams& hyper, TrainingTrace* trace) {
  auto model = train_linear_svm(flatten(features), labels, hyper, trace);
  if (!features.empty()) {
    model.feature_kind = features.front().kind;
    model.input_rows = features.front().values.rows;
    model.input_cols = features.front().values.cols;
  }
  return model;
}

namespace {
constexpr double kTieTolerance = 1e-12;
}  // namespace

Prediction predict(const LinearSvmModel& model, const FloatRows& x, bool bypass_scaler) {
  const std::size_t d = model.dim();
  if (x.rows > 0 && x.cols != d)
    fail(ErrorKind::Parameter, "feature width " + std::to_string(x.cols) + " does not match model width " +
                                   std::to_string(d));
  const auto& k = simd::kernels();
  Prediction out;
  out.labels.resize(x.rows);
  out.scores = Matrix(x.rows, kNumActionClasses);
  std::vector<double> inv(d);
  for (std::size_t j = 0; j < d; ++j) inv[j] = 1.0 / model.scaler.scale[j];
  std::vector<float> z(d);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const float* row = x.row(i);
    if (!bypass_scaler) {
      k.standardize_f32(row, model.scaler.mean.data(), inv.data(), z.data(), d);
      row = z.data();
    }
    std::size_t best = 0;
    for (std::size_t cls = 0; cls < kNumActionClasses; ++cls) {
      const double v = k.dot_f64_f32(model.weights.data() + cls * d, row, d) + model.biases[cls];
      out.scores(i, cls) = v;
      // Scores within rounding of the leader count as tied, so rescaling the model cannot reorder them.
      const double lead = out.scores(i, best);
      if (v - lead > kTieTolerance * std::max(1.0, std::abs(lead))) best = cls;
    }
    out.labels[i] = model.class_map[best];
  }
  return out;
}

Prediction predict(const LinearSvmModel& model, std::span<const FeatureMatrix> features, bool bypass_scaler) {
  if (!features.empty() && model.input_rows != 0) {
    const auto& m = features.front().values;
    if (m.rows != model.input_rows || m.cols != model.input_cols)
      fail(ErrorKind::Parameter, "feature shape " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                                     " does not match the model's " + std::to_string(model.input_rows) + "x" +
                                     std::to_string(model.input_cols));
  }
  return predict(model, flatten(features), bypass_scaler);
}

namespace {

constexpr char kMagic[8] = {'U', 'A', 'R', 'S', 'V', 'M', '0', '1'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) fail(ErrorKind::Io, "model file is truncated");
    std::uint8_t b[sizeof(T)];
    std::memcpy(b, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_model(const LinearSvmModel& model) {
  model.scaler.validate();
  const std::uint64_t d = model.dim();
  if (model.weights.size() != kNumActionClasses * d) fail(ErrorKind::Parameter, "model weights have the wrong size");
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof(kMagic));
  put(out, kModelVersion);
  put(out, d);
  put(out, model.hyper.C);
  put<std::uint64_t>(out, model.hyper.epochs);
  put<std::uint64_t>(out, model.hyper.seed);
  put<std::int32_t>(out, static_cast<std::int32_t>(model.hyper.solver));
  put<std::int32_t>(out, model.feature_kind ? static_cast<std::int32_t>(*model.feature_kind) : -1);
  put<std::uint64_t>(out, model.input_rows);
  put<std::uint64_t>(out, model.input_cols);
  for (const auto c : model.class_map) put<std::int32_t>(out, to_index(c));
  for (const double v : model.scaler.mean) put(out, v);
  for (const double v : model.scaler.scale) put(out, v);
  for (const double v : model.weights) put(out, v);
  for (const double v : model.biases) put(out, v);
  put(out, fnv1a64({reinterpret_cast<const char*>(out.data()), out.size()}));
  return out;
}

LinearSvmModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    fail(ErrorKind::Io, "not a model file (bad magic)");
  Reader r(bytes.subspan(sizeof(kMagic)));
  if (const auto v = r.get<std::uint32_t>(); v != kModelVersion)
    fail(ErrorKind::Io, "unsupported model version " + std::to_string(v));
  const auto d = r.get<std::uint64_t>();
  // mean, scale and 8 weight rows, plus the fixed fields that follow d.
  if (d > r.remaining() / (8 * (2 + kNumActionClasses))) fail(ErrorKind::Io, "model file is truncated");

  LinearSvmModel m;
  m.hyper.C = r.get<double>();
  m.hyper.epochs = r.get<std::uint64_t>();
  m.hyper.seed = r.get<std::uint64_t>();
  const auto solver = r.get<std::int32_t>();
  if (solver != static_cast<std::int32_t>(SvmSolver::DualCoordinate) && solver != static_cast<std::int32_t>(SvmSolver::Pegasos))
    fail(ErrorKind::Io, "model names an unknown solver");
  m.hyper.solver = static_cast<SvmSolver>(solver);
  const auto kind = r.get<std::int32_t>();
  if (kind >= 0) {
    if (kind > static_cast<std::int32_t>(FeatureKind::Ienv)) fail(ErrorKind::Io, "model names an unknown feature kind");
    m.feature_kind = static_cast<FeatureKind>(kind);
  }
  m.input_rows = r.get<std::uint64_t>();
  m.input_cols = r.get<std::uint64_t>();
  for (auto& c : m.class_map) {
    const auto a = action_from_index(r.get<std::int32_t>());
    if (!a) fail(ErrorKind::Io, "model class map holds an unknown class");
    c = *a;
  }
  m.scaler.mean.resize(d);
  m.scaler.scale.resize(d);
  m.weights.resize(kNumActionClasses * d);
  for (auto& v : m.scaler.mean) v = r.get<double>();
  for (auto& v : m.scaler.scale) v = r.get<double>();
  for (auto& v : m.weights) v = r.get<double>();
  for (auto& v : m.biases) v = r.get<double>();
  const std::size_t body = sizeof(kMagic) + r.pos();
  const auto checksum = r.get<std::uint64_t>();
  if (r.remaining() != 0) fail(ErrorKind::Io, "trailing bytes after model payload");
  if (checksum != fnv1a64({reinterpret_cast<const char*>(bytes.data()), body}))
    fail(ErrorKind::Io, "model checksum mismatch");
  try {
    m.scaler.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Io, std::string("corrupt model: ") + e.what());
  }
  return m;
}

void save_model(const LinearSvmModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::Io, "write failed for " + path.string());
}

LinearSvmModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace uar
