#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <tuple>

#include "mwt/error.hpp"
#include "mwt/filterbank.hpp"
#include "mwt/model.hpp"
#include "mwt/pdedata.hpp"
#include "mwt/random.hpp"
#include "mwt/transform.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace mwt::cli {

namespace {

/// A check failed after the computation itself succeeded.
class ValidationFailure : public Error {
  using Error::Error;
};

std::ofstream open_output(const std::string& path) {
  if (path.empty()) throw ConfigError("output path is empty");
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw FormatError("failed writing " + path);
}

// Entries below 1e-13 are quadrature roundoff of exact zeros and print as 0.
void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  auto out = open_output(path);
  out << std::setprecision(12);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j ? "," : "") << (std::abs(m(i, j)) < 1e-13 ? 0.0 : m(i, j));
    out << '\n';
  }
  finish(out, path);
}

int int_key(const RunConfig& c, const std::string& key) { return static_cast<int>(c.integer(key)); }

void apply_seed_override(RunConfig& c) {
  if (const char* env = std::getenv("MWT_SEED"); env && *env) c.set("seed", env);
}

Kernel2 named_kernel(const std::string& name, int degree) {
  if (name == "gaussian") return [](double x, double y) { return std::exp(-50.0 * (x - y) * (x - y)); };
  if (name == "abs-difference") return [](double x, double y) { return std::abs(x - y); };
  if (name == "polynomial") return [degree](double x, double y) { return std::pow(x + 2.0 * y + 0.5, degree); };
  if (name == "zero") return [](double, double) { return 0.0; };
  throw ConfigError("unknown kernel '" + name + "' (expected gaussian, abs-difference, polynomial, zero)");
}

// ---------------------------------------------------------------- filters

RunConfig filters_keys() {
  RunConfig c;
  c.declare("kind", "legendre", "polynomial family: legendre or chebyshev");
  c.declare("k", "3", "multiwavelet order, 1..6");
  c.declare_path("out", "filters", "output directory");
  c.declare("dump_basis", "false", "also write phi and psi sampled on 201 points");
  return c;
}

int cmd_filters(const RunConfig& c, std::ostream& out) {
  const BasisKind kind = parse_basis_kind(c.str("kind"));
  const int k = int_key(c, "k");
  const FilterBank fb = build_filters(kind, k);
  const fs::path dir(c.str("out"));
  const std::pair<const char*, const Eigen::MatrixXd*> mats[] = {
      {"H0", &fb.H0}, {"H1", &fb.H1}, {"G0", &fb.G0}, {"G1", &fb.G1}, {"Sigma0", &fb.Sigma0}, {"Sigma1", &fb.Sigma1}};
  for (const auto& [name, m] : mats) write_matrix_csv(*m, (dir / (std::string(name) + ".csv")).string());

  if (c.flag("dump_basis")) {
    const OrthoBasis phi(kind, k);
    const PiecewiseBasis psi = derive_psi(kind, k);
    const std::string path = (dir / "basis.csv").string();
    auto f = open_output(path);
    f << "x";
    for (int i = 0; i < k; ++i) f << ",phi" << i;
    for (int i = 0; i < k; ++i) f << ",psi" << i;
    f << '\n' << std::setprecision(12);
    for (int p = 0; p <= 200; ++p) {
      const double x = p / 200.0;
      f << x;
      for (double v : phi.eval(x)) f << ',' << v;
      for (int i = 0; i < k; ++i) f << ',' << psi.eval(i, x);
      f << '\n';
    }
    finish(f, path);
  }

  const double residual = validate_filters(fb);
  c.write_file((dir / "filters.cfg").string());
  out << "filters " << to_string(kind) << " k=" << k << " written to " << dir.string() << '\n'
      << "orthogonality residual " << std::scientific << std::setprecision(3) << residual << std::defaultfloat << '\n';
  if (residual > 1e-8) throw ValidationFailure("orthogonality residual exceeds 1e-8");
  return kOk;
}

// -------------------------------------------------------------- transform

RunConfig transform_keys() {
  RunConfig c;
  c.declare("kind", "legendre", "polynomial family: legendre or chebyshev");
  c.declare("k", "4", "multiwavelet order, 1..6");
  c.declare("dims", "1", "1 or 2");
  c.declare("N", "6", "finest scale; the input has 2^N cells per axis");
  c.declare("L", "0", "coarsest scale");
  c.declare("trials", "20", "random inputs for the round-trip check");
  c.declare("seed", "0", "random seed");
  c.declare("kernel", "", "optional kernel to project: gaussian, abs-difference, polynomial, zero");
  c.declare("degree", "2", "degree of the polynomial kernel");
  c.declare_path("out", "", "CSV of the projected blocks (block,scale,row,col,value)");
  return c;
}

int cmd_transform(const RunConfig& c, std::ostream& out) {
  const BasisKind kind = parse_basis_kind(c.str("kind"));
  const int k = int_key(c, "k"), dims = int_key(c, "dims"), N = int_key(c, "N"), L = int_key(c, "L");
  const int trials = int_key(c, "trials");
  if (dims != 1 && dims != 2) throw ConfigError("dims must be 1 or 2");
  if (N < 0 || N > (dims == 1 ? 16 : 10)) throw ConfigError("N out of range");
  const FilterBank fb = build_filters(kind, k);

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(c.unsigned_integer("seed"), t);
    CoeffArray s = CoeffArray::zeros(k, dims, 1 << N);
    for (double& v : s.data) v = rng.normal();
    const CoeffArray back = reconstruct(fb, decompose(fb, s, L));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      num += (back.data[i] - s.data[i]) * (back.data[i] - s.data[i]);
      den += s.data[i] * s.data[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  out << "round trip " << to_string(kind) << " k=" << k << " dims=" << dims << " N=" << N << " L=" << L << ": max relative residual "
      << std::scientific << std::setprecision(3) << worst << std::defaultfloat << " over " << trials << " inputs\n";

  if (!c.str("kernel").empty()) {
    if (dims != 1) throw ConfigError("kernel projection is 1-D");
    const auto kp = project_kernel(named_kernel(c.str("kernel"), int_key(c, "degree")), fb, N, L);
    if (!c.str("out").empty()) {
      const std::string& path = c.str("out");
      auto f = open_output(path);
      f << "block,scale,row,col,value\n" << std::setprecision(12);
      auto dump = [&](const char* name, int n, const Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i)
          for (int j = 0; j < m.cols(); ++j) f << name << ',' << n << ',' << i << ',' << j << ',' << m(i, j) << '\n';
      };
      for (int n = L; n < N; ++n) {
        dump("A", n, kp.A_at(n));
        dump("B", n, kp.B_at(n));
        dump("C", n, kp.C_at(n));
      }
      dump("T", L, kp.T);
      finish(f, path);
      c.write_file(path + ".cfg");
      out << "kernel blocks written to " << path << '\n';
    }
  }
  if (!(worst <= 1e-9)) throw ValidationFailure("round-trip residual exceeds 1e-9");
  return kOk;
}

// -------------------------------------------------------------- kernelviz

RunConfig kernelviz_keys() {
  RunConfig c;
  c.declare("kernel", "gaussian", "gaussian, abs-difference, polynomial or zero");
  c.declare("kind", "legendre", "polynomial family: legendre or chebyshev");
  c.declare("k", "4", "multiwavelet order, 1..6");
  c.declare("N", "6", "finest scale");
  c.declare("L", "0", "coarsest scale");
  c.declare("threshold", "1e-8", "entries with larger magnitude count as nonzero");
  c.declare("degree", "2", "degree of the polynomial kernel");
  c.declare_path("out", "sparsity.csv", "per-block sparsity table");
  c.declare_path("mask", "", "coordinates above threshold; empty derives <out>_mask.csv");
  return c;
}

int cmd_kernelviz(const RunConfig& c, std::ostream& out) {
  const auto K = named_kernel(c.str("kernel"), int_key(c, "degree"));
  const BasisKind kind = parse_basis_kind(c.str("kind"));
  const int k = int_key(c, "k"), N = int_key(c, "N"), L = int_key(c, "L");
  const double threshold = c.real("threshold");
  if (N < 1 || N > 10) throw ConfigError("N must lie in 1..10");
  const FilterBank fb = build_filters(kind, k);
  const auto kp = project_kernel(K, fb, N, L, threshold);

  const std::string& path = c.str("out");
  std::string mask_path = c.str("mask");
  if (mask_path.empty()) {
    fs::path p(path);
    mask_path = (p.parent_path() / (p.stem().string() + "_mask.csv")).string();
  }
  auto table = open_output(path);
  auto mask = open_output(mask_path);
  table << "block,scale,rows,cols,above,fraction\n" << std::setprecision(6);
  mask << "block,scale,row,col\n";

  std::map<std::string, std::pair<long, long>> totals;
  auto visit = [&](const std::string& name, int n, const Eigen::MatrixXd& m) {
    long above = 0;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        if (std::abs(m(i, j)) > threshold) {
          ++above;
          mask << name << ',' << n << ',' << i << ',' << j << '\n';
        }
    table << name << ',' << n << ',' << m.rows() << ',' << m.cols() << ',' << above << ','
          << double(above) / double(m.size()) << '\n';
    totals[name].first += above;
    totals[name].second += m.size();
  };
  for (int n = L; n < N; ++n) {
    visit("A", n, kp.A_at(n));
    visit("B", n, kp.B_at(n));
    visit("C", n, kp.C_at(n));
  }
  visit("T", L, kp.T);
  for (const auto& [name, t] : totals)
    table << name << ",all,,," << t.first << ',' << double(t.first) / double(t.second) << '\n';
  finish(table, path);
  finish(mask, mask_path);
  c.write_file(path + ".cfg");

  out << "kernel " << c.str("kernel") << ", " << to_string(kind) << " k=" << k << " N=" << N << ", threshold " << threshold
      << '\n';
  for (const auto& [name, t] : totals)
    out << "  " << name << " fraction above threshold " << double(t.first) / double(t.second) << '\n';
  out << "sparsity table " << path << ", mask " << mask_path << '\n';
  return kOk;
}

// ---------------------------------------------------------------- datagen

RunConfig datagen_keys() {
  RunConfig c;
  c.declare("equation", "burgers", "identity, kdv, burgers, beam3, beam4 or darcy");
  c.declare("count", "10", "number of samples");
  c.declare("resolution", "256", "output grid points per axis (power of two)");
  c.declare("seed", "0", "master seed; sample i uses a stream derived from (seed, i)");
  c.declare("nu", "0.1", "Burgers viscosity");
  c.declare("omega", "215", "beam frequency");
  c.declare("lambda", "0.25", "wavelength of identity-task inputs");
  c.declare("solver_resolution", "0", "internal grid for kdv/burgers; 0 uses the default");
  c.declare("dt", "0", "time step for kdv/burgers; 0 uses the default");
  c.declare("beam_refine", "4", "beam solver grid / output grid");
  c.declare_path("out", "data.mwtd", "dataset file");
  return c;
}

int cmd_datagen(const RunConfig& c, std::ostream& out) {
  DatagenConfig g;
  g.equation = c.str("equation");
  g.count = int_key(c, "count");
  g.resolution = int_key(c, "resolution");
  g.seed = c.unsigned_integer("seed");
  g.nu = c.real("nu");
  g.omega = c.real("omega");
  g.lambda = c.real("lambda");
  g.solver_resolution = int_key(c, "solver_resolution");
  g.dt = c.real("dt");
  g.beam_refine = int_key(c, "beam_refine");
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset d = generate_dataset(g);
  write_dataset(d, c.str("out"));
  c.write_file(c.str("out") + ".cfg");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "wrote " << d.count << ' ' << d.equation << " samples at " << d.side << (d.dims == 2 ? "^2" : "") << " to "
      << c.str("out") << " (" << std::fixed << std::setprecision(1) << secs << " s)\n"
      << std::defaultfloat;
  return kOk;
}

// ------------------------------------------------------------------ train

SampleSet load_split(const std::string& path, int first, int count, int resolution, const char* what) {
  Dataset d = read_dataset(path);
  if (resolution > 0 && resolution != d.side) {
    if (resolution > d.side || d.side % resolution != 0)
      throw ConfigError(std::string(what) + " resolution " + std::to_string(resolution) + " is not a divisor of " +
                        std::to_string(d.side));
    d = subsample_dataset(d, d.side / resolution);
  }
  if (first + count > d.count)
    throw ConfigError(std::string(what) + " needs samples [" + std::to_string(first) + ", " +
                      std::to_string(first + count) + ") but " + path + " holds " + std::to_string(d.count));
  return d.slice(first, count);
}

RunConfig train_keys() {
  RunConfig c;
  c.declare_path("data", "", "training dataset");
  c.declare_path("test_data", "", "test dataset; empty takes the samples after the training ones");
  c.declare("N_train", "1000", "training samples");
  c.declare("N_test", "200", "test samples");
  c.declare("resolution", "0", "train at this resolution by subsampling; 0 keeps the file's");
  c.declare("test_resolution", "0", "test resolution; 0 follows resolution");
  c.declare("basis", "legendre", "polynomial family: legendre or chebyshev");
  c.declare("k", "4", "multiwavelet order, 1..6");
  c.declare("layers", "2", "multiwavelet layers");
  c.declare("L", "0", "coarsest scale");
  c.declare("net", "conv", "A/B/C maps: conv or spectral");
  c.declare("hidden", "0", "hidden channels of A/B/C; 0 uses k^dims");
  c.declare("width", "3", "convolution width");
  c.declare("modes", "16", "Fourier modes of the spectral maps");
  c.declare("relu_inside", "true", "ReLU between the first and second map of A/B/C");
  c.declare("relu_between", "true", "ReLU between layers");
  c.declare("random_filters", "false", "replace the filter bank with random matrices");
  c.declare("filter_seed", "1", "seed of the random filter bank");
  c.declare("normalize", "true", "scale inputs and outputs by the RMS of the training set");
  c.declare("epochs", "500", "training epochs");
  c.declare("batch", "20", "minibatch size");
  c.declare("lr", "1e-3", "Adam learning rate");
  c.declare("gamma", "0.5", "learning-rate decay factor");
  c.declare("step", "100", "epochs between learning-rate decays");
  c.declare("seed", "0", "model initialisation and shuffling seed");
  c.declare_path("checkpoint", "model.mwtm", "checkpoint output");
  c.declare_path("metrics", "metrics.csv", "per-epoch metrics output");
  c.declare("quiet", "false", "suppress per-epoch progress");
  return c;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  if (c.str("data").empty()) throw ConfigError("train needs data=<dataset>");
  const int n_train = int_key(c, "N_train"), n_test = int_key(c, "N_test");
  if (n_train < 1 || n_test < 0) throw ConfigError("N_train must be positive and N_test non-negative");
  const int res = int_key(c, "resolution");
  const int test_res = int_key(c, "test_resolution") > 0 ? int_key(c, "test_resolution") : res;
  const SampleSet tr = load_split(c.str("data"), 0, n_train, res, "training");
  const SampleSet te = c.str("test_data").empty() ? load_split(c.str("data"), n_train, n_test, test_res, "test")
                                                  : load_split(c.str("test_data"), 0, n_test, test_res, "test");

  ModelConfig mc;
  mc.kind = parse_basis_kind(c.str("basis"));
  mc.k = int_key(c, "k");
  mc.dims = tr.dims;
  mc.layers = int_key(c, "layers");
  mc.coarsest = int_key(c, "L");
  mc.net = parse_net_kind(c.str("net"));
  mc.hidden = int_key(c, "hidden");
  mc.width = int_key(c, "width");
  mc.modes = int_key(c, "modes");
  mc.relu_inside = c.flag("relu_inside");
  mc.relu_between = c.flag("relu_between");
  mc.random_filters = c.flag("random_filters");
  mc.filter_seed = c.unsigned_integer("filter_seed");
  if (c.flag("normalize")) std::tie(mc.input_scale, mc.output_scale) = data_scales(tr);

  TrainConfig tc;
  tc.epochs = int_key(c, "epochs");
  tc.batch_size = int_key(c, "batch");
  tc.lr = c.real("lr");
  tc.gamma = c.real("gamma");
  tc.step = int_key(c, "step");
  tc.seed = c.unsigned_integer("seed");
  if (tc.epochs < 0 || tc.batch_size < 1 || tc.step < 1 || !(tc.lr > 0))
    throw ConfigError("epochs >= 0, batch >= 1, step >= 1 and lr > 0 are required");

  OperatorModel model(mc, tc.seed);
  const bool quiet = c.flag("quiet");
  out << "training " << model.parameter_count() << " parameters on " << tr.count << " samples at " << tr.side
      << (tr.dims == 2 ? "^2" : "") << ", testing on " << te.count << '\n';
  const auto history = train(model, tr, te, tc, [&](const EpochMetrics& m) {
    if (quiet) return;
    out << "epoch " << m.epoch << " train " << m.train_rel_l2 << " test " << m.test_rel_l2 << " lr " << m.lr << " ("
        << std::fixed << std::setprecision(1) << m.seconds << " s)" << std::defaultfloat << std::setprecision(6)
        << std::endl;
  });

  save_checkpoint(model, c.str("checkpoint"));
  {
    auto f = open_output(c.str("metrics"));
    write_metrics_csv(history, f);
    finish(f, c.str("metrics"));
  }
  c.write_file(c.str("checkpoint") + ".cfg");
  const double final_test = te.count > 0 ? (history.empty() ? evaluate(model, te) : history.back().test_rel_l2) : 0.0;
  out << "final test relative L2 " << std::setprecision(6) << final_test << '\n';
  return kOk;
}

// ------------------------------------------------------------------- eval

RunConfig eval_keys() {
  RunConfig c;
  c.declare_path("checkpoint", "model.mwtm", "trained model");
  c.declare_path("data", "", "dataset to evaluate on");
  c.declare("resolution", "0", "evaluate at this resolution (the file's divided by a power of two); 0 keeps it");
  c.declare("first", "0", "first sample");
  c.declare("count", "0", "number of samples; 0 takes the rest");
  c.declare("basis", "", "expected basis of the checkpoint; empty accepts any");
  c.declare("k", "0", "expected order of the checkpoint; 0 accepts any");
  c.declare_path("out", "", "optional per-sample CSV");
  return c;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.str("data").empty()) throw ConfigError("eval needs data=<dataset>");
  const OperatorModel model = load_checkpoint(c.str("checkpoint"));
  const ModelConfig& mc = model.config();
  if (!c.str("basis").empty() && parse_basis_kind(c.str("basis")) != mc.kind)
    throw IncompatibleError("checkpoint uses the " + std::string(to_string(mc.kind)) + " basis, expected " +
                            c.str("basis"));
  if (int_key(c, "k") != 0 && int_key(c, "k") != mc.k)
    throw IncompatibleError("checkpoint has k=" + std::to_string(mc.k) + ", expected " + c.str("k"));

  Dataset d = read_dataset(c.str("data"));
  if (d.dims != mc.dims)
    throw IncompatibleError("checkpoint is " + std::to_string(mc.dims) + "-D, dataset is " + std::to_string(d.dims) +
                            "-D");
  const int res = int_key(c, "resolution");
  if (res > 0 && res != d.side) {
    const int factor = res > 0 ? d.side / res : 0;
    if (res > d.side || d.side % res != 0 || (factor & (factor - 1)) != 0)
      throw ConfigError("resolution " + std::to_string(res) + " must be " + std::to_string(d.side) +
                        " divided by a power of two");
    d = subsample_dataset(d, factor);
  }
  const int first = int_key(c, "first");
  const int count = int_key(c, "count") > 0 ? int_key(c, "count") : d.count - first;
  if (first < 0 || count < 1 || first + count > d.count) throw ConfigError("sample range outside the dataset");
  const SampleSet set = d.slice(first, count);

  double total = 0.0;
  std::vector<double> errors(count);
  try {
    for (int i = 0; i < count; ++i) {
      const auto pred = predict(model, set, i);
      errors[i] = relative_l2(pred, std::span<const double>(set.outputs).subspan(
                                        static_cast<std::size_t>(i) * set.points, set.points));
      total += errors[i];
    }
  } catch (const ShapeError& e) {
    throw IncompatibleError(std::string("checkpoint cannot run on this grid: ") + e.what());
  }
  if (!c.str("out").empty()) {
    auto f = open_output(c.str("out"));
    f << "sample,relative_l2\n" << std::setprecision(10);
    for (int i = 0; i < count; ++i) f << first + i << ',' << errors[i] << '\n';
    finish(f, c.str("out"));
  }
  out << "mean relative L2 " << std::setprecision(6) << total / count << " over " << count << " samples at "
      << d.side << (d.dims == 2 ? "^2" : "") << '\n';
  return kOk;
}

// ---------------------------------------------------------------- driver

struct Command {
  const char* name;
  const char* help;
  RunConfig (*keys)();
  int (*body)(const RunConfig&, std::ostream&);
  bool seeded;
};

const Command kCommands[] = {
    {"filters", "derive and write the filter bank of one family and order", filters_keys, cmd_filters, false},
    {"transform", "round-trip self-test and optional kernel projection dump", transform_keys, cmd_transform, true},
    {"datagen", "generate a dataset file", datagen_keys, cmd_datagen, true},
    {"train", "train an operator model", train_keys, cmd_train, true},
    {"eval", "evaluate a checkpoint on a dataset", eval_keys, cmd_eval, false},
    {"kernelviz", "sparsity of a kernel's non-standard form", kernelviz_keys, cmd_kernelviz, false},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiwavelet operator learning: filters, datasets, training and evaluation", "mwt"};
  app.require_subcommand(1);

  struct Slot {
    const Command* cmd;
    CLI::App* sub;
    RunConfig config;
    std::string config_file;
    std::vector<std::string> settings;
    std::map<std::string, std::string> flags;
  };
  std::vector<Slot> slots;
  slots.reserve(std::size(kCommands));
  for (const auto& cmd : kCommands) {
    Slot& s = slots.emplace_back();
    s.cmd = &cmd;
    s.config = cmd.keys();
    s.sub = app.add_subcommand(cmd.name, cmd.help);
    s.sub->add_option("--config", s.config_file, "key=value file ('#' comments)");
    s.sub->add_option("settings", s.settings, "key=value overrides applied after --config");
    for (const auto& e : s.config.entries())
      s.sub->add_option("--" + e.key, s.flags[e.key], e.help)->default_str(e.value);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) err << sub->help();
    return kUsage;
  }

  for (auto& s : slots) {
    if (!s.sub->parsed()) continue;
    try {
      RunConfig& c = s.config;
      if (!s.config_file.empty()) c.load_file(s.config_file);
      for (const auto& kv : s.settings) c.assign(kv);
      for (const auto& [key, value] : s.flags)
        if (s.sub->count("--" + key) > 0) c.set(key, value);
      if (s.cmd->seeded) apply_seed_override(c);
      c.resolve_paths();
      return s.cmd->body(c, out);
    } catch (const ConfigError& e) {
      err << "configuration error: " << e.what() << '\n';
      return kUsage;
    } catch (const OrderUnsupportedError& e) {
      err << "unsupported order: " << e.what() << '\n';
      return kUsage;
    } catch (const SpecError& e) {
      err << "invalid parameters: " << e.what() << '\n';
      return kUsage;
    } catch (const ShapeError& e) {
      err << "shape error: " << e.what() << '\n';
      return kUsage;
    } catch (const ScaleError& e) {
      err << "scale error: " << e.what() << '\n';
      return kUsage;
    } catch (const FormatError& e) {
      err << "I/O error: " << e.what() << '\n';
      return kIo;
    } catch (const IncompatibleError& e) {
      err << "incompatible: " << e.what() << '\n';
      return kIncompatible;
    } catch (const DivergenceError& e) {
      err << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
      return kNumerical;
    } catch (const SolverDivergenceError& e) {
      err << "solver diverged: " << e.what() << '\n';
      return kNumerical;
    } catch (const ValidationFailure& e) {
      err << "validation failed: " << e.what() << '\n';
      return kNumerical;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kNumerical;
    } catch (const std::invalid_argument& e) {
      err << "invalid argument: " << e.what() << '\n';
      return kUsage;
    }
  }
  return kUsage;
}

}  // namespace mwt::cli
