#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "mwt/binio.hpp"
#include "mwt/error.hpp"
#include "mwt/model.hpp"
#include "mwt/random.hpp"

namespace mwt {

namespace {

std::span<const double> row(const std::vector<double>& v, const SampleSet& set, int i) {
  return {v.data() + static_cast<std::size_t>(i) * set.points, static_cast<std::size_t>(set.points)};
}

void check_set(const OperatorModel& model, const SampleSet& set, const char* what) {
  if (set.count < 0 || set.points <= 0 ||
      set.inputs.size() != static_cast<std::size_t>(set.count) * set.points ||
      set.outputs.size() != set.inputs.size())
    throw ShapeError(std::string(what) + " set storage does not match its shape");
  if (set.dims != model.config().dims)
    throw IncompatibleError(std::string(what) + " set dimension does not match the model");
}

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& c) : m_(n, 0.0), v_(n, 0.0), c_(c) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++t_;
    const double b1 = c_.beta1, b2 = c_.beta2;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1, vhat = v_[i] / c2;
      params[i] -= lr * mhat / (std::sqrt(vhat) + c_.eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  TrainConfig c_;
  long t_ = 0;
};

}  // namespace

double evaluate(const OperatorModel& model, const SampleSet& set) {
  check_set(model, set, "evaluation");
  if (set.count == 0) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (int i = 0; i < set.count; ++i) acc += relative_l2(predict(model, set, i), row(set.outputs, set, i));
  return acc / set.count;
}

std::pair<double, double> data_scales(const SampleSet& set) {
  auto rms = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    const double r = v.empty() ? 0.0 : std::sqrt(acc / v.size());
    return r > 0.0 && std::isfinite(r) ? r : 1.0;
  };
  return {rms(set.inputs), rms(set.outputs)};
}

std::vector<double> predict(const OperatorModel& model, const SampleSet& set, int i) {
  if (i < 0 || i >= set.count) throw ShapeError("sample index out of range");
  const auto a = row(set.inputs, set, i);
  return set.dims == 1 ? forward(model, a) : forward_2d(model, a, set.side);
}

std::vector<EpochMetrics> train(OperatorModel& model, const SampleSet& train_set,
                                const SampleSet& test_set, const TrainConfig& config,
                                const EpochCallback& on_epoch) {
  if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (config.lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (config.batch_size < 1) throw ConfigError("batch size must be positive");
  if (config.step < 1) throw ConfigError("learning-rate step must be positive");
  check_set(model, train_set, "training");
  check_set(model, test_set, "test");
  if (train_set.count == 0) throw ShapeError("training set is empty");

  std::vector<EpochMetrics> history;
  if (config.epochs == 0) return history;

  const auto start = std::chrono::steady_clock::now();
  Adam adam(model.parameter_count(), config);
  std::vector<int> order(train_set.count);
  std::vector<double> grad(model.parameter_count());
  const int side = train_set.dims == 1 ? train_set.points : train_set.side;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr * std::pow(config.gamma, epoch / config.step);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch));
    for (int i = train_set.count - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);

    double loss_sum = 0.0;
    for (int first = 0; first < train_set.count; first += config.batch_size) {
      const int last = std::min(train_set.count, first + config.batch_size);
      const double scale = 1.0 / (last - first);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (int j = first; j < last; ++j) {
        const int i = order[j];
        const double loss = loss_gradient(model, row(train_set.inputs, train_set, i),
                                          row(train_set.outputs, train_set, i), side, scale, grad);
        if (!std::isfinite(loss))
          throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch + 1),
                                epoch + 1);
        loss_sum += loss;
      }
      for (double g : grad)
        if (!std::isfinite(g))
          throw DivergenceError("non-finite gradient at epoch " + std::to_string(epoch + 1), epoch + 1);
      adam.step(model.params(), grad, lr);
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_rel_l2 = loss_sum / train_set.count;
    m.test_rel_l2 = evaluate(model, test_set);
    m.lr = lr;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (test_set.count > 0 && !std::isfinite(m.test_rel_l2))
      throw DivergenceError("non-finite test error at epoch " + std::to_string(m.epoch), m.epoch);
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

namespace {

constexpr std::uint8_t kCheckpointVersion = 2;

}  // namespace

void save_checkpoint(const OperatorModel& model, std::ostream& out) {
  using namespace binio;
  const ModelConfig& c = model.config();
  put_magic(out, "MWTM");
  put<std::uint8_t>(out, kCheckpointVersion);
  put<std::uint8_t>(out, c.kind == BasisKind::Legendre ? 0 : 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.k));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.layers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.dims));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.coarsest));
  put<std::uint8_t>(out, c.net == NetKind::Conv ? 0 : 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.width));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.modes));
  put<std::uint8_t>(out, c.relu_inside);
  put<std::uint8_t>(out, c.relu_between);
  put<std::uint8_t>(out, c.random_filters);
  put<std::uint64_t>(out, c.filter_seed);
  put<double>(out, c.input_scale);
  put<double>(out, c.output_scale);

  const auto& P = model.params();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.tensors().size()));
  for (const auto& t : model.tensors()) {
    put_string(out, t.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int e : t.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (std::size_t i = 0; i < t.size; ++i) put<double>(out, P[t.offset + i]);
  }
  if (!out) throw FormatError("failed to write checkpoint");
}

OperatorModel load_checkpoint(std::istream& in) {
  using namespace binio;
  expect_magic(in, "MWTM");
  const auto version = get<std::uint8_t>(in);
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig c;
  const auto kind = get<std::uint8_t>(in);
  if (kind > 1) throw FormatError("unknown basis kind in checkpoint");
  c.kind = kind == 0 ? BasisKind::Legendre : BasisKind::Chebyshev;
  c.k = static_cast<int>(get<std::uint32_t>(in));
  c.layers = static_cast<int>(get<std::uint32_t>(in));
  c.dims = static_cast<int>(get<std::uint32_t>(in));
  c.coarsest = static_cast<int>(get<std::uint32_t>(in));
  const auto net = get<std::uint8_t>(in);
  if (net > 1) throw FormatError("unknown net kind in checkpoint");
  c.net = net == 0 ? NetKind::Conv : NetKind::Spectral;
  c.hidden = static_cast<int>(get<std::uint32_t>(in));
  c.width = static_cast<int>(get<std::uint32_t>(in));
  c.modes = static_cast<int>(get<std::uint32_t>(in));
  c.relu_inside = get<std::uint8_t>(in) != 0;
  c.relu_between = get<std::uint8_t>(in) != 0;
  c.random_filters = get<std::uint8_t>(in) != 0;
  c.filter_seed = get<std::uint64_t>(in);
  c.input_scale = get<double>(in);
  c.output_scale = get<double>(in);
  if (c.layers < 1 || c.layers > 64 || c.hidden < 0 || c.hidden > 4096 || c.modes > 4096 ||
      c.width > 63)
    throw FormatError("implausible model configuration in checkpoint");

  OperatorModel model;
  try {
    model = OperatorModel(c, 0);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid model configuration in checkpoint: ") + e.what());
  }
  const auto count = get<std::uint32_t>(in);
  if (count != model.tensors().size()) throw FormatError("checkpoint tensor count mismatch");
  auto& P = model.params();
  for (const auto& t : model.tensors()) {
    const auto name = get_string(in, 256);
    if (name != t.name) throw FormatError("expected tensor '" + t.name + "', found '" + name + "'");
    const auto rank = get<std::uint32_t>(in);
    if (rank != t.shape.size()) throw FormatError("rank mismatch for tensor " + t.name);
    for (int e : t.shape)
      if (get<std::uint32_t>(in) != static_cast<std::uint32_t>(e))
        throw FormatError("shape mismatch for tensor " + t.name);
    for (std::size_t i = 0; i < t.size; ++i) P[t.offset + i] = get<double>(in);
  }
  return model;
}

void save_checkpoint(const OperatorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  save_checkpoint(model, out);
}

OperatorModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return load_checkpoint(in);
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, std::ostream& out) {
  out << "epoch,train_rel_l2,test_rel_l2,lr\n";
  out << std::setprecision(10);
  for (const auto& m : history)
    out << m.epoch << ',' << m.train_rel_l2 << ',' << m.test_rel_l2 << ',' << m.lr << '\n';
}

}  // namespace mwt
