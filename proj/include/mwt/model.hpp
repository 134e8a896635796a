#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwt/filterbank.hpp"
#include "mwt/transform.hpp"

namespace mwt {

/// How the A/B/C maps process a scale: a circular convolution, or a
/// Fourier-domain product truncated to `modes` frequencies (1-D only).
/// Either is followed by ReLU (optional) and a pointwise linear map.
enum class NetKind { Conv, Spectral };

std::string_view to_string(NetKind kind);
NetKind parse_net_kind(std::string_view name);

struct ModelConfig {
  BasisKind kind = BasisKind::Legendre;
  int k = 4;
  int dims = 1;
  int layers = 2;
  int coarsest = 0;
  NetKind net = NetKind::Conv;
  int hidden = 0;  // 0 selects the block size k^dims
  int width = 3;
  int modes = 16;
  bool relu_inside = true;
  bool relu_between = true;
  bool random_filters = false;
  std::uint64_t filter_seed = 1;
  // Fixed data scales: the network sees a / input_scale and its raw output
  // is multiplied by output_scale. Not trained.
  double input_scale = 1.0;
  double output_scale = 1.0;

  int block() const { return dims == 1 ? k : k * k; }
  int hidden_channels() const { return hidden > 0 ? hidden : block(); }
};

/// Named slice of the flat parameter vector.
struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Lifting 1 -> k^dims, stacked multiwavelet layers, projection k^dims -> 1.
/// All parameters live in one flat vector; the shapes never depend on the
/// input resolution.
class OperatorModel {
 public:
  OperatorModel() = default;
  /// Parameters drawn uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); spectral
  /// weights normal / (in * hidden).
  OperatorModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const FilterBank& filters() const { return bank_; }
  const Ladder& ladder() const { return ladder_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t parameter_count() const { return params_.size(); }
  const TensorInfo& tensor(const std::string& name) const;
  /// Replaces the data scales; both must be finite and positive.
  void set_scales(double input_scale, double output_scale);
  std::span<double> view(const std::string& name);

  struct Net {
    int in = 0, out = 0;
    std::size_t conv_w = 0, conv_b = 0, spec_w = 0, lin_w = 0, lin_b = 0;
  };
  struct Layer {
    Net A, B, C;
    std::size_t T_w = 0, T_b = 0;
  };
  const std::vector<Layer>& layer_nets() const { return layers_; }
  std::size_t lift_w() const { return lift_w_; }
  std::size_t lift_b() const { return lift_b_; }
  std::size_t proj_w() const { return proj_w_; }
  std::size_t proj_b() const { return proj_b_; }

 private:
  ModelConfig config_;
  FilterBank bank_;
  Ladder ladder_;
  std::vector<double> params_;
  std::vector<TensorInfo> tensors_;
  std::vector<Layer> layers_;
  std::size_t lift_w_ = 0, lift_b_ = 0, proj_w_ = 0, proj_b_ = 0;

  std::vector<double> fan_in_;  // negative marks Fourier weights

  std::size_t add(const std::string& name, std::vector<int> shape, double fan_in);
  Net make_net(const std::string& prefix, int in, int out);
};

/// Intermediate values kept by a forward pass for the backward pass.
struct ForwardCache;

struct Gradients {
  std::vector<double> params;
  std::vector<double> input;
};

/// 1-D forward on a power-of-two length >= 2^(L+1). Throws ShapeError otherwise.
std::vector<double> forward(const OperatorModel& model, std::span<const double> a);
/// 2-D forward on a side x side field stored row-major.
std::vector<double> forward_2d(const OperatorModel& model, std::span<const double> a, int side);

/// Reverse-mode gradient of <upstream, forward(a)> with respect to every
/// parameter and to a. `side` is the field side for 2-D models and ignored
/// for 1-D ones.
Gradients backward(const OperatorModel& model, std::span<const double> a,
                   std::span<const double> upstream, int side = 0);

/// Relative L2 of forward(a) against `truth`; adds scale * its gradient with
/// respect to the parameters into `grad`.
double loss_gradient(const OperatorModel& model, std::span<const double> a,
                     std::span<const double> truth, int side, double scale, std::span<double> grad);

/// Number of decomposition steps one layer performs on a field of this side.
int ladder_depth(const OperatorModel& model, int side);

/// ||pred - truth|| / ||truth||. Throws DegenerateTargetError when ||truth|| = 0.
double relative_l2(std::span<const double> pred, std::span<const double> truth);
/// Mean relative L2 over `count` samples stored contiguously.
double relative_l2_batch(std::span<const double> pred, std::span<const double> truth, int count);

struct TrainConfig {
  int epochs = 500;
  int batch_size = 20;
  double lr = 1e-3;
  double gamma = 0.5;
  int step = 100;
  std::uint64_t seed = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// Samples stored contiguously: count x points (points = n or side^2).
struct SampleSet {
  int count = 0;
  int points = 0;
  int side = 0;  // grid side; equal to points for 1-D data
  int dims = 1;
  std::vector<double> inputs;
  std::vector<double> outputs;
};

struct EpochMetrics {
  int epoch = 0;
  double train_rel_l2 = 0.0;
  double test_rel_l2 = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Adam on the mean relative L2 of each minibatch with a step learning-rate
/// schedule. Deterministic in config.seed. Throws DivergenceError on a
/// non-finite loss.
std::vector<EpochMetrics> train(OperatorModel& model, const SampleSet& train_set,
                                const SampleSet& test_set, const TrainConfig& config,
                                const EpochCallback& on_epoch = {});

/// Root-mean-square of the inputs and of the outputs of a sample set, the
/// usual choice for ModelConfig::input_scale and output_scale. A zero RMS
/// is reported as 1.
std::pair<double, double> data_scales(const SampleSet& set);

/// Mean relative L2 of the model over a sample set.
double evaluate(const OperatorModel& model, const SampleSet& set);
/// Model output for sample i of a set.
std::vector<double> predict(const OperatorModel& model, const SampleSet& set, int i);

/// Checkpoint: "MWTM", version byte, configuration, then each parameter
/// tensor as rank, extents and little-endian float64 values.
void save_checkpoint(const OperatorModel& model, std::ostream& out);
OperatorModel load_checkpoint(std::istream& in);
void save_checkpoint(const OperatorModel& model, const std::string& path);
OperatorModel load_checkpoint(const std::string& path);

void write_metrics_csv(const std::vector<EpochMetrics>& history, std::ostream& out);

}  // namespace mwt
