#include <fstream>
#include <iomanip>
#include <sstream>

#include "mwt/binio.hpp"
#include "mwt/error.hpp"
#include "mwt/pdedata.hpp"
#include "mwt/random.hpp"

namespace mwt {

namespace {

constexpr std::uint8_t kDatasetVersion = 1;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

std::string Dataset::meta(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return fallback;
}

SampleSet Dataset::slice(int first, int n) const {
  if (first < 0 || n < 0 || first + n > count)
    throw ShapeError("requested samples [" + std::to_string(first) + ", " + std::to_string(first + n) +
                     ") but the dataset holds " + std::to_string(count));
  SampleSet s;
  s.count = n;
  s.points = points();
  s.side = side;
  s.dims = dims;
  const auto lo = static_cast<std::size_t>(first) * s.points, hi = static_cast<std::size_t>(first + n) * s.points;
  s.inputs.assign(inputs.begin() + lo, inputs.begin() + hi);
  s.outputs.assign(outputs.begin() + lo, outputs.begin() + hi);
  return s;
}

void write_dataset(const Dataset& data, std::ostream& out) {
  using namespace binio;
  const std::size_t values = static_cast<std::size_t>(data.count) * data.points();
  if (data.inputs.size() != values || data.outputs.size() != values)
    throw ShapeError("dataset storage does not match its header");
  put_magic(out, "MWTD");
  put<std::uint8_t>(out, kDatasetVersion);
  put_string(out, data.equation);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.metadata.size()));
  for (const auto& [k, v] : data.metadata) {
    put_string(out, k);
    put_string(out, v);
  }
  put<std::uint8_t>(out, static_cast<std::uint8_t>(data.dims));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.count));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.side));
  for (double v : data.inputs) put<double>(out, v);
  for (double v : data.outputs) put<double>(out, v);
  if (!out) throw FormatError("failed to write dataset");
}

Dataset read_dataset(std::istream& in) {
  using namespace binio;
  expect_magic(in, "MWTD");
  const auto version = get<std::uint8_t>(in);
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version));
  Dataset d;
  d.equation = get_string(in, 256);
  const auto entries = get<std::uint32_t>(in);
  if (entries > 4096) throw FormatError("implausible metadata block");
  for (std::uint32_t i = 0; i < entries; ++i) {
    auto k = get_string(in, 4096);
    auto v = get_string(in, 1 << 16);
    d.metadata.emplace_back(std::move(k), std::move(v));
  }
  d.dims = get<std::uint8_t>(in);
  d.count = static_cast<int>(get<std::uint32_t>(in));
  d.side = static_cast<int>(get<std::uint32_t>(in));
  if ((d.dims != 1 && d.dims != 2) || d.side < 1 || d.side > (1 << 24) || d.count < 0)
    throw FormatError("implausible dataset header");
  const std::size_t values = static_cast<std::size_t>(d.count) * d.points();
  if (values > (std::size_t{1} << 31)) throw FormatError("dataset too large");
  d.inputs.resize(values);
  d.outputs.resize(values);
  for (double& v : d.inputs) v = get<double>(in);
  for (double& v : d.outputs) v = get<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after dataset");
  return d;
}

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_dataset(data, out);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_dataset(in);
}

Dataset subsample_dataset(const Dataset& data, int factor) {
  if (factor < 1 || data.side % factor != 0)
    throw ShapeError("subsample factor " + std::to_string(factor) + " does not divide side " +
                     std::to_string(data.side));
  Dataset out = data;
  out.side = data.side / factor;
  const std::size_t p = data.points(), q = out.points();
  out.inputs.resize(static_cast<std::size_t>(data.count) * q);
  out.outputs.resize(out.inputs.size());
  for (int i = 0; i < data.count; ++i) {
    const std::span<const double> a(data.inputs.data() + i * p, p), u(data.outputs.data() + i * p, p);
    const auto sa = data.dims == 1 ? subsample(a, factor) : subsample_2d(a, data.side, factor);
    const auto su = data.dims == 1 ? subsample(u, factor) : subsample_2d(u, data.side, factor);
    std::copy(sa.begin(), sa.end(), out.inputs.begin() + i * q);
    std::copy(su.begin(), su.end(), out.outputs.begin() + i * q);
  }
  for (auto& [k, v] : out.metadata)
    if (k == "subsample") v = std::to_string(std::stoi(v) * factor);
  return out;
}

Dataset generate_dataset(const DatagenConfig& c) {
  const std::string& eq = c.equation;
  if (c.count < 0) throw ConfigError("sample count must be non-negative");
  if (c.resolution < 2 || (c.resolution & (c.resolution - 1)) != 0)
    throw ConfigError("resolution must be a power of two >= 2");

  Dataset d;
  d.equation = eq;
  d.count = c.count;
  d.side = c.resolution;
  d.dims = eq == "darcy" ? 2 : 1;
  auto& md = d.metadata;
  md = {{"equation", eq}, {"count", std::to_string(c.count)}, {"resolution", std::to_string(c.resolution)},
        {"seed", std::to_string(c.seed)}};

  const std::size_t p = d.points();
  d.inputs.resize(static_cast<std::size_t>(c.count) * p);
  d.outputs.resize(d.inputs.size());
  auto store = [&](int i, const std::vector<double>& a, const std::vector<double>& u) {
    std::copy(a.begin(), a.end(), d.inputs.begin() + i * p);
    std::copy(u.begin(), u.end(), d.outputs.begin() + i * p);
  };
  auto seed_of = [&](int i) { return Rng::derive_seed(c.seed, static_cast<std::uint64_t>(i)); };
  auto run = [&](int i, auto&& body) {
    try {
      body();
    } catch (const SolverDivergenceError& e) {
      throw SolverDivergenceError("sample " + std::to_string(i) + ": " + e.what());
    }
  };

  if (eq == "identity") {
    md.push_back({"sampler", "smooth_random"});
    md.push_back({"lambda", num(c.lambda)});
    md.push_back({"subsample", "1"});
    for (int i = 0; i < c.count; ++i) {
      const auto a = sample_smooth_random(c.lambda, c.resolution, seed_of(i));
      store(i, a, a);
    }
  } else if (eq == "kdv" || eq == "burgers") {
    const bool kdv = eq == "kdv";
    const int R = std::max(c.solver_resolution > 0 ? c.solver_resolution : (kdv ? 1 << 10 : 1 << 13), c.resolution);
    if ((R & (R - 1)) != 0) throw ConfigError("solver resolution must be a power of two");
    const GrfSpec grf = kdv ? GrfSpec{2401.0, 7.0, 2.5} : GrfSpec{625.0, 5.0, 2.0};
    md.push_back({"sampler", "grf"});
    md.push_back({"grf_sigma2", num(grf.sigma2)});
    md.push_back({"grf_tau", num(grf.tau)});
    md.push_back({"grf_alpha", num(grf.alpha)});
    md.push_back({"grf_laplacian", "periodic eigenvalues 4 pi^2 m^2 on the unit interval"});
    md.push_back({"domain", kdv ? "[0,1)" : "(0,2pi)"});
    if (!kdv) md.push_back({"nu", num(c.nu)});
    md.push_back({"T", "1"});
    md.push_back({"integrator", "ETDRK4, 2/3 dealiasing"});
    md.push_back({"solver_resolution", std::to_string(R)});
    md.push_back({"dt", c.dt > 0 ? num(c.dt) : (kdv ? "min(1e-5, 1/(kmax max|u0|))" : "1e-3")});
    md.push_back({"subsample", std::to_string(R / c.resolution)});
    const SpectralSolverOptions opt{R, c.dt};
    for (int i = 0; i < c.count; ++i) {
      run(i, [&] {
        const auto a = sample_grf(grf, R, seed_of(i));
        const auto u = kdv ? solve_kdv(a, 1.0, opt) : solve_burgers(a, c.nu, 1.0, opt);
        store(i, subsample(a, R / c.resolution), subsample(u, R / c.resolution));
      });
    }
  } else if (eq == "beam3" || eq == "beam4") {
    const int order = eq == "beam3" ? 3 : 4;
    if (c.beam_refine < 1) throw ConfigError("beam refinement must be positive");
    const int M = c.resolution * c.beam_refine;
    md.push_back({"sampler", "sqexp_periodic"});
    md.push_back({"sqexp_smoothing", "0.5"});
    md.push_back({"sqexp_period", "1"});
    md.push_back({"omega", num(c.omega)});
    md.push_back({"order", std::to_string(order)});
    md.push_back({"grid", "nodes j/n, j = 0..n-1 (u(1) = 0 omitted)"});
    md.push_back({"solver_resolution", std::to_string(M)});
    md.push_back({"subsample", std::to_string(c.beam_refine)});
    const SqExpSampler sampler(0.5, 1.0, M);
    const BeamSolver solver(M, c.omega, order);
    for (int i = 0; i < c.count; ++i) {
      auto f = sampler.sample(seed_of(i));
      f.push_back(f.front());
      auto u = solver.solve(f);
      f.pop_back();
      u.pop_back();
      store(i, subsample(f, c.beam_refine), subsample(u, c.beam_refine));
    }
  } else if (eq == "darcy") {
    const GrfSpec grf{1.0, 3.0, 2.0, 2, false};
    md.push_back({"sampler", "grf thresholded"});
    md.push_back({"grf_sigma2", "1"});
    md.push_back({"grf_tau", "3"});
    md.push_back({"grf_alpha", "2"});
    md.push_back({"grf_boundary", "Neumann cosine basis (even reflection)"});
    md.push_back({"threshold", "12 where grf >= 0, else 3"});
    md.push_back({"forcing", "1"});
    md.push_back({"grid", "nodes i/(n-1), zero Dirichlet boundary"});
    md.push_back({"face_coefficient", "arithmetic mean"});
    md.push_back({"cg_tolerance", "1e-10"});
    md.push_back({"subsample", "1"});
    for (int i = 0; i < c.count; ++i) {
      const auto a = threshold_coefficient(sample_grf(grf, c.resolution, seed_of(i)));
      store(i, a, solve_darcy(a, c.resolution));
    }
  } else {
    throw ConfigError("unknown equation '" + eq + "' (expected identity, kdv, burgers, beam3, beam4, darcy)");
  }
  return d;
}

}  // namespace mwt
