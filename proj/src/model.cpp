#include "mwt/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mwt/error.hpp"
#include "mwt/random.hpp"

namespace mwt {

std::string_view to_string(NetKind kind) { return kind == NetKind::Conv ? "conv" : "spectral"; }

NetKind parse_net_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "conv" || s == "cnn") return NetKind::Conv;
  if (s == "spectral" || s == "fourier" || s == "fft") return NetKind::Spectral;
  throw ConfigError("unknown net kind '" + std::string(name) + "' (expected conv or spectral)");
}

OperatorModel::OperatorModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  const ModelConfig& c = config_;
  if (c.k < 1 || c.k > kMaxBasisOrder)
    throw OrderUnsupportedError("model order k must lie in 1.." + std::to_string(kMaxBasisOrder));
  if (c.dims != 1 && c.dims != 2) throw ConfigError("model dimension must be 1 or 2");
  if (c.layers < 1) throw ConfigError("model needs at least one layer");
  if (c.coarsest < 0) throw ConfigError("coarsest scale must be non-negative");
  if (c.width < 1 || c.width % 2 == 0) throw ConfigError("convolution width must be odd");
  if (c.net == NetKind::Spectral && c.dims != 1)
    throw ConfigError("spectral A/B/C maps are available for 1-D models only");
  if (c.net == NetKind::Spectral && c.modes < 1) throw ConfigError("spectral modes must be positive");
  set_scales(c.input_scale, c.output_scale);

  bank_ = c.random_filters ? random_filters(c.k, c.filter_seed) : build_filters(c.kind, c.k);
  ladder_ = Ladder(bank_, c.dims);

  const int b = c.block();
  const int comp = c.dims == 1 ? 1 : 3;
  lift_w_ = add("lift.weight", {b}, 1);
  lift_b_ = add("lift.bias", {b}, 1);
  for (int i = 0; i < c.layers; ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    Layer layer;
    layer.A = make_net(p + "A", comp * b, comp * b);
    layer.B = make_net(p + "B", b, comp * b);
    layer.C = make_net(p + "C", comp * b, b);
    layer.T_w = add(p + "T.weight", {b, b}, b);
    layer.T_b = add(p + "T.bias", {b}, b);
    layers_.push_back(layer);
  }
  proj_w_ = add("proj.weight", {b}, b);
  proj_b_ = add("proj.bias", {1}, b);

  Rng rng(seed);
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& t = tensors_[i];
    double* p = params_.data() + t.offset;
    if (fan_in_[i] < 0.0) {
      const double scale = 1.0 / (t.shape[2] * t.shape[3]);
      for (std::size_t j = 0; j < t.size; ++j) p[j] = scale * rng.normal();
    } else {
      const double bound = 1.0 / std::sqrt(fan_in_[i]);
      for (std::size_t j = 0; j < t.size; ++j) p[j] = rng.uniform(-bound, bound);
    }
  }
}

void OperatorModel::set_scales(double input_scale, double output_scale) {
  if (!(std::isfinite(input_scale) && input_scale > 0.0 && std::isfinite(output_scale) && output_scale > 0.0))
    throw ConfigError("data scales must be finite and positive");
  config_.input_scale = input_scale;
  config_.output_scale = output_scale;
}

std::size_t OperatorModel::add(const std::string& name, std::vector<int> shape, double fan_in) {
  fan_in_.push_back(fan_in);
  TensorInfo t;
  t.name = name;
  t.size = 1;
  for (int e : shape) t.size *= static_cast<std::size_t>(e);
  t.shape = std::move(shape);
  t.offset = params_.size();
  params_.resize(params_.size() + t.size, 0.0);
  tensors_.push_back(t);
  return t.offset;
}

OperatorModel::Net OperatorModel::make_net(const std::string& prefix, int in, int out) {
  const ModelConfig& c = config_;
  const int h = c.hidden_channels();
  Net net;
  net.in = in;
  net.out = out;
  if (c.net == NetKind::Conv) {
    const int taps = c.dims == 1 ? c.width : c.width * c.width;
    net.conv_w = add(prefix + ".conv.weight", {h, in, taps}, in * taps);
    net.conv_b = add(prefix + ".conv.bias", {h}, in * taps);
  } else {
    net.spec_w = add(prefix + ".spec.weight", {2, c.modes, in, h}, -1);
  }
  net.lin_w = add(prefix + ".lin.weight", {out, h}, h);
  net.lin_b = add(prefix + ".lin.bias", {out}, h);
  return net;
}

const TensorInfo& OperatorModel::tensor(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return t;
  throw ConfigError("model has no parameter tensor '" + name + "'");
}

std::span<double> OperatorModel::view(const std::string& name) {
  const auto& t = tensor(name);
  return {params_.data() + t.offset, t.size};
}

namespace {

// Cosine and sine of 2 pi f p / n for f < mf, p < n, laid out [f * n + p].
struct TrigTable {
  std::vector<double> cos, sin;
};

const TrigTable& trig_table(int n, int mf) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<TrigTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n, mf}];
  if (!slot) {
    slot = std::make_unique<TrigTable>();
    slot->cos.resize(static_cast<std::size_t>(mf) * n);
    slot->sin.resize(static_cast<std::size_t>(mf) * n);
    for (int f = 0; f < mf; ++f) {
      for (int p = 0; p < n; ++p) {
        const long r = (static_cast<long>(f) * p) % n;
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) / n;
        slot->cos[f * n + p] = std::cos(theta);
        slot->sin[f * n + p] = std::sin(theta);
      }
    }
  }
  return *slot;
}

struct NetCache {
  std::vector<double> x, hpre, h, re, im;
};

struct LevelCache {
  std::vector<double> s, d, ud, us;
  NetCache A, B, C;
};

struct LayerCache {
  int N = 0;
  std::vector<LevelCache> levels;  // [n - L]
  std::vector<double> sL;
  std::vector<double> out;  // layer output before the between-layer ReLU
};

struct Geometry {
  int dims = 1;
  int side = 0;
  int points() const { return dims == 1 ? side : side * side; }
};

class Evaluator {
 public:
  explicit Evaluator(const OperatorModel& m) : m_(m), c_(m.config()), P_(m.params()) {}

  void net_forward(const OperatorModel::Net& net, std::span<const double> x, const Geometry& g,
                   NetCache& cache, std::span<double> y, bool accumulate) const;
  void net_backward(const OperatorModel::Net& net, const NetCache& cache, std::span<const double> gy,
                    const Geometry& g, std::span<double> gp, std::span<double> gx) const;

  void layer_forward(const OperatorModel::Layer& layer, std::span<const double> x, int side,
                     LayerCache& cache) const;
  std::vector<double> layer_backward(const OperatorModel::Layer& layer, const LayerCache& cache,
                                     std::span<const double> gout, int side,
                                     std::span<double> gp) const;

 private:
  const OperatorModel& m_;
  const ModelConfig& c_;
  const std::vector<double>& P_;

  std::vector<int> neighbours(const Geometry& g) const;
};

std::vector<int> Evaluator::neighbours(const Geometry& g) const {
  const int w = c_.width, r = w / 2, n = g.side;
  const int taps = g.dims == 1 ? w : w * w;
  std::vector<int> nb(static_cast<std::size_t>(g.points()) * taps);
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  if (g.dims == 1) {
    for (int p = 0; p < n; ++p)
      for (int t = 0; t < w; ++t) nb[p * taps + t] = wrap(p + t - r);
  } else {
    for (int p1 = 0; p1 < n; ++p1)
      for (int p2 = 0; p2 < n; ++p2)
        for (int t1 = 0; t1 < w; ++t1)
          for (int t2 = 0; t2 < w; ++t2)
            nb[(p1 * n + p2) * taps + t1 * w + t2] = wrap(p1 + t1 - r) * n + wrap(p2 + t2 - r);
  }
  return nb;
}

void Evaluator::net_forward(const OperatorModel::Net& net, std::span<const double> x,
                            const Geometry& g, NetCache& cache, std::span<double> y,
                            bool accumulate) const {
  const int P = g.points(), in = net.in, out = net.out, h = c_.hidden_channels();
  cache.x.assign(x.begin(), x.end());
  cache.hpre.assign(static_cast<std::size_t>(P) * h, 0.0);

  if (c_.net == NetKind::Conv) {
    const int taps = g.dims == 1 ? c_.width : c_.width * c_.width;
    const auto nb = neighbours(g);
    const double* W = P_.data() + net.conv_w;
    const double* bias = P_.data() + net.conv_b;
    for (int p = 0; p < P; ++p) {
      double* hp = cache.hpre.data() + static_cast<std::size_t>(p) * h;
      for (int o = 0; o < h; ++o) {
        double acc = bias[o];
        const double* Wo = W + static_cast<std::size_t>(o) * in * taps;
        for (int t = 0; t < taps; ++t) {
          const double* xq = x.data() + static_cast<std::size_t>(nb[p * taps + t]) * in;
          for (int c = 0; c < in; ++c) acc += Wo[c * taps + t] * xq[c];
        }
        hp[o] = acc;
      }
    }
  } else {
    const int n = P, mf = std::min(c_.modes, n / 2 + 1);
    const auto& tt = trig_table(n, mf);
    const double* Wr = P_.data() + net.spec_w;
    const double* Wi = Wr + static_cast<std::size_t>(c_.modes) * in * h;
    cache.re.assign(static_cast<std::size_t>(mf) * in, 0.0);
    cache.im.assign(static_cast<std::size_t>(mf) * in, 0.0);
    for (int f = 0; f < mf; ++f) {
      const double* cs = tt.cos.data() + static_cast<std::size_t>(f) * n;
      const double* sn = tt.sin.data() + static_cast<std::size_t>(f) * n;
      double* re = cache.re.data() + static_cast<std::size_t>(f) * in;
      double* im = cache.im.data() + static_cast<std::size_t>(f) * in;
      for (int p = 0; p < n; ++p) {
        const double* xp = x.data() + static_cast<std::size_t>(p) * in;
        for (int c = 0; c < in; ++c) {
          re[c] += xp[c] * cs[p];
          im[c] -= xp[c] * sn[p];
        }
      }
    }
    std::vector<double> yr(h), yi(h);
    for (int f = 0; f < mf; ++f) {
      std::fill(yr.begin(), yr.end(), 0.0);
      std::fill(yi.begin(), yi.end(), 0.0);
      const double* re = cache.re.data() + static_cast<std::size_t>(f) * in;
      const double* im = cache.im.data() + static_cast<std::size_t>(f) * in;
      for (int c = 0; c < in; ++c) {
        const double* wr = Wr + (static_cast<std::size_t>(f) * in + c) * h;
        const double* wi = Wi + (static_cast<std::size_t>(f) * in + c) * h;
        for (int o = 0; o < h; ++o) {
          yr[o] += re[c] * wr[o] - im[c] * wi[o];
          yi[o] += re[c] * wi[o] + im[c] * wr[o];
        }
      }
      const double cf = (f == 0 || 2 * f == n ? 1.0 : 2.0) / n;
      const double* cs = tt.cos.data() + static_cast<std::size_t>(f) * n;
      const double* sn = tt.sin.data() + static_cast<std::size_t>(f) * n;
      for (int p = 0; p < n; ++p) {
        double* hp = cache.hpre.data() + static_cast<std::size_t>(p) * h;
        const double a = cf * cs[p], b = cf * sn[p];
        for (int o = 0; o < h; ++o) hp[o] += a * yr[o] - b * yi[o];
      }
    }
  }

  cache.h = cache.hpre;
  if (c_.relu_inside)
    for (double& v : cache.h) v = std::max(v, 0.0);

  const double* L = P_.data() + net.lin_w;
  const double* lb = P_.data() + net.lin_b;
  for (int p = 0; p < P; ++p) {
    const double* hp = cache.h.data() + static_cast<std::size_t>(p) * h;
    double* yp = y.data() + static_cast<std::size_t>(p) * out;
    for (int o = 0; o < out; ++o) {
      double acc = lb[o];
      const double* Lo = L + static_cast<std::size_t>(o) * h;
      for (int j = 0; j < h; ++j) acc += Lo[j] * hp[j];
      yp[o] = accumulate ? yp[o] + acc : acc;
    }
  }
}

void Evaluator::net_backward(const OperatorModel::Net& net, const NetCache& cache,
                             std::span<const double> gy, const Geometry& g, std::span<double> gp,
                             std::span<double> gx) const {
  const int P = g.points(), in = net.in, out = net.out, h = c_.hidden_channels();
  const double* L = P_.data() + net.lin_w;
  double* gL = gp.data() + net.lin_w;
  double* glb = gp.data() + net.lin_b;

  std::vector<double> gh(static_cast<std::size_t>(P) * h, 0.0);
  for (int p = 0; p < P; ++p) {
    const double* gyp = gy.data() + static_cast<std::size_t>(p) * out;
    const double* hp = cache.h.data() + static_cast<std::size_t>(p) * h;
    double* ghp = gh.data() + static_cast<std::size_t>(p) * h;
    for (int o = 0; o < out; ++o) {
      const double go = gyp[o];
      if (go == 0.0) continue;
      glb[o] += go;
      const double* Lo = L + static_cast<std::size_t>(o) * h;
      double* gLo = gL + static_cast<std::size_t>(o) * h;
      for (int j = 0; j < h; ++j) {
        gLo[j] += go * hp[j];
        ghp[j] += go * Lo[j];
      }
    }
  }
  if (c_.relu_inside)
    for (std::size_t i = 0; i < gh.size(); ++i)
      if (cache.hpre[i] <= 0.0) gh[i] = 0.0;

  if (c_.net == NetKind::Conv) {
    const int taps = g.dims == 1 ? c_.width : c_.width * c_.width;
    const auto nb = neighbours(g);
    const double* W = P_.data() + net.conv_w;
    double* gW = gp.data() + net.conv_w;
    double* gb = gp.data() + net.conv_b;
    for (int p = 0; p < P; ++p) {
      const double* ghp = gh.data() + static_cast<std::size_t>(p) * h;
      for (int o = 0; o < h; ++o) {
        const double go = ghp[o];
        if (go == 0.0) continue;
        gb[o] += go;
        const double* Wo = W + static_cast<std::size_t>(o) * in * taps;
        double* gWo = gW + static_cast<std::size_t>(o) * in * taps;
        for (int t = 0; t < taps; ++t) {
          const std::size_t q = static_cast<std::size_t>(nb[p * taps + t]) * in;
          const double* xq = cache.x.data() + q;
          double* gxq = gx.data() + q;
          for (int c = 0; c < in; ++c) {
            gWo[c * taps + t] += go * xq[c];
            gxq[c] += go * Wo[c * taps + t];
          }
        }
      }
    }
  } else {
    const int n = P, mf = std::min(c_.modes, n / 2 + 1);
    const auto& tt = trig_table(n, mf);
    const std::size_t half = static_cast<std::size_t>(c_.modes) * in * h;
    const double* Wr = P_.data() + net.spec_w;
    const double* Wi = Wr + half;
    double* gWr = gp.data() + net.spec_w;
    double* gWi = gWr + half;
    std::vector<double> gyr(h), gyi(h), gre(in), gim(in);
    for (int f = 0; f < mf; ++f) {
      const double cf = (f == 0 || 2 * f == n ? 1.0 : 2.0) / n;
      const double* cs = tt.cos.data() + static_cast<std::size_t>(f) * n;
      const double* sn = tt.sin.data() + static_cast<std::size_t>(f) * n;
      std::fill(gyr.begin(), gyr.end(), 0.0);
      std::fill(gyi.begin(), gyi.end(), 0.0);
      for (int p = 0; p < n; ++p) {
        const double* ghp = gh.data() + static_cast<std::size_t>(p) * h;
        const double a = cf * cs[p], b = cf * sn[p];
        for (int o = 0; o < h; ++o) {
          gyr[o] += a * ghp[o];
          gyi[o] -= b * ghp[o];
        }
      }
      const double* re = cache.re.data() + static_cast<std::size_t>(f) * in;
      const double* im = cache.im.data() + static_cast<std::size_t>(f) * in;
      for (int c = 0; c < in; ++c) {
        const std::size_t base = (static_cast<std::size_t>(f) * in + c) * h;
        double sr = 0.0, si = 0.0;
        for (int o = 0; o < h; ++o) {
          gWr[base + o] += re[c] * gyr[o] + im[c] * gyi[o];
          gWi[base + o] += -im[c] * gyr[o] + re[c] * gyi[o];
          sr += gyr[o] * Wr[base + o] + gyi[o] * Wi[base + o];
          si += -gyr[o] * Wi[base + o] + gyi[o] * Wr[base + o];
        }
        gre[c] = sr;
        gim[c] = si;
      }
      for (int p = 0; p < n; ++p) {
        double* gxp = gx.data() + static_cast<std::size_t>(p) * in;
        for (int c = 0; c < in; ++c) gxp[c] += gre[c] * cs[p] - gim[c] * sn[p];
      }
    }
  }
}

void Evaluator::layer_forward(const OperatorModel::Layer& layer, std::span<const double> x,
                              int side, LayerCache& cache) const {
  const Ladder& ladder = m_.ladder();
  const int dims = c_.dims, b = c_.block(), comp = ladder.components();
  const int N = dyadic_level(static_cast<std::size_t>(side));
  const int L = c_.coarsest;
  cache.N = N;
  cache.levels.assign(N - L, {});

  std::vector<double> cur(x.begin(), x.end());
  for (int n = N - 1; n >= L; --n) {
    LevelCache& lv = cache.levels[n - L];
    const int cside = 1 << n;
    const std::size_t cells = dims == 1 ? cside : static_cast<std::size_t>(cside) * cside;
    lv.s.assign(cells * b, 0.0);
    lv.d.assign(cells * comp * b, 0.0);
    ladder.decompose(cur, 2 * cside, 1, lv.s, lv.d);
    const Geometry geo{dims, cside};
    lv.ud.assign(cells * comp * b, 0.0);
    lv.us.assign(cells * b, 0.0);
    net_forward(layer.A, lv.d, geo, lv.A, lv.ud, false);
    net_forward(layer.B, lv.s, geo, lv.B, lv.ud, true);
    net_forward(layer.C, lv.d, geo, lv.C, lv.us, false);
    cur = lv.s;
  }

  cache.sL = cur;
  const double* W = P_.data() + layer.T_w;
  const double* bias = P_.data() + layer.T_b;
  const std::size_t cellsL = cur.size() / b;
  std::vector<double> u(cur.size());
  for (std::size_t cell = 0; cell < cellsL; ++cell)
    for (int i = 0; i < b; ++i) {
      double acc = bias[i];
      for (int j = 0; j < b; ++j) acc += W[i * b + j] * cur[cell * b + j];
      u[cell * b + i] = acc;
    }

  for (int n = L; n < N; ++n) {
    const LevelCache& lv = cache.levels[n - L];
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += lv.us[i];
    std::vector<double> fine(u.size() * ladder.children());
    ladder.reconstruct(u, lv.ud, 2 << n, 1, fine);
    u = std::move(fine);
  }
  cache.out = std::move(u);
}

std::vector<double> Evaluator::layer_backward(const OperatorModel::Layer& layer,
                                              const LayerCache& cache, std::span<const double> gout,
                                              int side, std::span<double> gp) const {
  (void)side;
  const Ladder& ladder = m_.ladder();
  const int dims = c_.dims, b = c_.block(), comp = ladder.components();
  const int N = cache.N, L = c_.coarsest;

  std::vector<std::vector<double>> gud(N - L), gus(N - L);
  std::vector<double> g(gout.begin(), gout.end());
  for (int n = N - 1; n >= L; --n) {
    std::vector<double> gu(g.size() / ladder.children());
    gud[n - L].assign(gu.size() * comp, 0.0);
    ladder.reconstruct_adjoint(g, 2 << n, 1, gu, gud[n - L]);
    gus[n - L] = gu;
    g = std::move(gu);
  }

  const double* W = P_.data() + layer.T_w;
  double* gW = gp.data() + layer.T_w;
  double* gb = gp.data() + layer.T_b;
  const std::size_t cellsL = g.size() / b;
  std::vector<double> gs(g.size(), 0.0);
  for (std::size_t cell = 0; cell < cellsL; ++cell)
    for (int i = 0; i < b; ++i) {
      const double gi = g[cell * b + i];
      gb[i] += gi;
      for (int j = 0; j < b; ++j) {
        gW[i * b + j] += gi * cache.sL[cell * b + j];
        gs[cell * b + j] += gi * W[i * b + j];
      }
    }

  for (int n = L; n < N; ++n) {
    const LevelCache& lv = cache.levels[n - L];
    const Geometry geo{dims, 1 << n};
    std::vector<double> gd(lv.d.size(), 0.0);
    net_backward(layer.A, lv.A, gud[n - L], geo, gp, gd);
    net_backward(layer.B, lv.B, gud[n - L], geo, gp, gs);
    net_backward(layer.C, lv.C, gus[n - L], geo, gp, gd);
    std::vector<double> gfine(gs.size() * ladder.children());
    ladder.decompose_adjoint(gs, gd, 2 << n, 1, gfine);
    gs = std::move(gfine);
  }
  return gs;
}

}  // namespace

struct ForwardCache {
  int side = 0;
  std::vector<double> a;
  std::vector<LayerCache> layers;
  std::vector<double> last;  // input of the projection
};

namespace {

int check_input(const OperatorModel& model, std::size_t length, int side) {
  const ModelConfig& c = model.config();
  if (c.dims == 1) {
    const int N = dyadic_level(length);
    if (N < c.coarsest + 1)
      throw ShapeError("input length " + std::to_string(length) + " is below 2^(L+1) = " +
                       std::to_string(2 << c.coarsest));
    return static_cast<int>(length);
  }
  if (side <= 0 || static_cast<std::size_t>(side) * side != length)
    throw ShapeError("2-D input must be a square side x side field");
  const int N = dyadic_level(static_cast<std::size_t>(side));
  if (N < c.coarsest + 1) throw ShapeError("2-D side is below 2^(L+1)");
  return side;
}

std::vector<double> run_forward(const OperatorModel& model, std::span<const double> a, int side,
                                ForwardCache* cache) {
  const ModelConfig& c = model.config();
  const auto& P = model.params();
  const int b = c.block();
  const std::size_t pts = a.size();
  const Evaluator ev(model);

  const double in_s = 1.0 / c.input_scale;
  std::vector<double> x(pts * b);
  for (std::size_t p = 0; p < pts; ++p)
    for (int j = 0; j < b; ++j) x[p * b + j] = in_s * a[p] * P[model.lift_w() + j] + P[model.lift_b() + j];

  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.side = side;
  fc.a.assign(a.begin(), a.end());
  fc.layers.assign(c.layers, {});
  const auto& nets = model.layer_nets();
  for (int i = 0; i < c.layers; ++i) {
    ev.layer_forward(nets[i], x, side, fc.layers[i]);
    x = fc.layers[i].out;
    if (i + 1 < c.layers && c.relu_between)
      for (double& v : x) v = std::max(v, 0.0);
    if (!cache) fc.layers[i] = {};
  }

  std::vector<double> y(pts);
  for (std::size_t p = 0; p < pts; ++p) {
    double acc = P[model.proj_b()];
    for (int j = 0; j < b; ++j) acc += P[model.proj_w() + j] * x[p * b + j];
    y[p] = c.output_scale * acc;
  }
  fc.last = std::move(x);
  return y;
}

}  // namespace

std::vector<double> forward(const OperatorModel& model, std::span<const double> a) {
  if (model.config().dims != 1) throw ShapeError("forward expects a 1-D model; use forward_2d");
  const int side = check_input(model, a.size(), 0);
  return run_forward(model, a, side, nullptr);
}

std::vector<double> forward_2d(const OperatorModel& model, std::span<const double> a, int side) {
  if (model.config().dims != 2) throw ShapeError("forward_2d expects a 2-D model");
  check_input(model, a.size(), side);
  return run_forward(model, a, side, nullptr);
}

namespace {

// Reverse pass over a filled cache; parameter gradients are added into gp.
std::vector<double> backprop(const OperatorModel& model, const ForwardCache& fc,
                             std::span<const double> upstream, std::span<double> gp) {
  const ModelConfig& c = model.config();
  const auto& P = model.params();
  const int b = c.block();
  const std::size_t pts = fc.a.size();

  std::vector<double> g(pts * b);
  for (std::size_t p = 0; p < pts; ++p) {
    const double go = c.output_scale * upstream[p];
    gp[model.proj_b()] += go;
    for (int j = 0; j < b; ++j) {
      gp[model.proj_w() + j] += go * fc.last[p * b + j];
      g[p * b + j] = go * P[model.proj_w() + j];
    }
  }

  const Evaluator ev(model);
  const auto& nets = model.layer_nets();
  for (int i = c.layers - 1; i >= 0; --i) {
    if (i + 1 < c.layers && c.relu_between) {
      const auto& pre = fc.layers[i].out;
      for (std::size_t j = 0; j < g.size(); ++j)
        if (pre[j] <= 0.0) g[j] = 0.0;
    }
    g = ev.layer_backward(nets[i], fc.layers[i], g, fc.side, gp);
  }

  const double in_s = 1.0 / c.input_scale;
  std::vector<double> ga(pts, 0.0);
  for (std::size_t p = 0; p < pts; ++p) {
    for (int j = 0; j < b; ++j) {
      const double gj = g[p * b + j];
      gp[model.lift_w() + j] += gj * in_s * fc.a[p];
      gp[model.lift_b() + j] += gj;
      ga[p] += gj * P[model.lift_w() + j];
    }
    ga[p] *= in_s;
  }
  return ga;
}

}  // namespace

Gradients backward(const OperatorModel& model, std::span<const double> a,
                   std::span<const double> upstream, int side) {
  side = check_input(model, a.size(), side);
  if (upstream.size() != a.size()) throw ShapeError("upstream gradient length differs from input");
  ForwardCache fc;
  run_forward(model, a, side, &fc);
  Gradients grads;
  grads.params.assign(model.parameter_count(), 0.0);
  grads.input = backprop(model, fc, upstream, grads.params);
  return grads;
}

double loss_gradient(const OperatorModel& model, std::span<const double> a,
                     std::span<const double> truth, int side, double scale, std::span<double> grad) {
  side = check_input(model, a.size(), side);
  if (truth.size() != a.size()) throw ShapeError("target length differs from input");
  if (grad.size() != model.parameter_count()) throw ShapeError("gradient buffer has the wrong size");
  ForwardCache fc;
  const auto pred = run_forward(model, a, side, &fc);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (den == 0.0) throw DegenerateTargetError("relative L2 of a zero-norm target is undefined");
  const double err = std::sqrt(num), tn = std::sqrt(den);
  const double loss = err / tn;
  if (!std::isfinite(loss)) return loss;
  if (err > 0.0) {
    std::vector<double> up(pred.size());
    const double f = scale / (err * tn);
    for (std::size_t i = 0; i < pred.size(); ++i) up[i] = f * (pred[i] - truth[i]);
    backprop(model, fc, up, grad);
  }
  return loss;
}

int ladder_depth(const OperatorModel& model, int side) {
  return dyadic_level(static_cast<std::size_t>(side)) - model.config().coarsest;
}

double relative_l2(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw ShapeError("prediction and target lengths differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (den == 0.0) throw DegenerateTargetError("relative L2 of a zero-norm target is undefined");
  return std::sqrt(num / den);
}

double relative_l2_batch(std::span<const double> pred, std::span<const double> truth, int count) {
  if (count <= 0 || pred.size() != truth.size() || pred.size() % count != 0)
    throw ShapeError("batch shape mismatch");
  const std::size_t len = pred.size() / count;
  double acc = 0.0;
  for (int i = 0; i < count; ++i)
    acc += relative_l2(pred.subspan(i * len, len), truth.subspan(i * len, len));
  return acc / count;
}

}  // namespace mwt
