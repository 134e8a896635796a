#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"
#include "mwt/model.hpp"
#include "mwt/pdedata.hpp"

namespace fs = std::filesystem;
using namespace mwt;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

Outcome mwt_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// The number following `prefix` on the first line that starts with it.
double number_after(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) return std::stod(line.substr(prefix.size()));
  FAIL("no line starting with '" << prefix << "' in:\n" << text);
  return NAN;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("mwt_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

}  // namespace

TEST_CASE("filters writes the Legendre k = 3 bank") {
  TempDir dir;
  const auto r = mwt_run({"filters", "--kind", "legendre", "--k", "3", "--out", dir / "f"});
  REQUIRE(r.code == 0);
  const auto h0 = slurp(dir / "f/H0.csv");
  CHECK(h0.substr(0, h0.find('\n')) == "0.707106781187,0,0");
  for (const char* name : {"H1.csv", "G0.csv", "G1.csv", "Sigma0.csv", "Sigma1.csv", "filters.cfg"})
    CHECK(fs::exists(dir / ("f/" + std::string(name))));
  CHECK(number_after(r.out, "orthogonality residual") < 1e-10);
}

TEST_CASE("filters for k = 1 are 1 x 1 with magnitude 1/sqrt(2)") {
  TempDir dir;
  REQUIRE(mwt_run({"filters", "k=1", "kind=legendre", "out=" + dir / "f", "dump_basis=true"}).code == 0);
  for (const char* name : {"H0.csv", "H1.csv", "G0.csv", "G1.csv"}) {
    const auto text = slurp(dir / ("f/" + std::string(name)));
    CAPTURE(name);
    CHECK(text.find(',') == std::string::npos);
    CHECK(std::abs(std::stod(text)) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-11));
  }
  CHECK(fs::exists(dir / "f/basis.csv"));
}

TEST_CASE("filters rejects an unsupported order") {
  const auto r = mwt_run({"filters", "k=9"});
  CHECK(r.code == 1);
  CHECK(r.err.find("1..6") != std::string::npos);
}

TEST_CASE("transform round trip passes in 1-D and 2-D") {
  auto r = mwt_run({"transform", "kind=chebyshev", "k=3", "N=8"});
  CHECK(r.code == 0);
  CHECK(number_after(r.out.substr(r.out.find(':') + 1), " max relative residual") <= 1e-9);
  r = mwt_run({"transform", "dims=2", "N=4", "trials=3"});
  CHECK(r.code == 0);
}

TEST_CASE("transform dumps kernel blocks") {
  TempDir dir;
  const auto r = mwt_run({"transform", "kernel=gaussian", "N=3", "k=2", "out=" + dir / "blocks.csv"});
  REQUIRE(r.code == 0);
  const auto text = slurp(dir / "blocks.csv");
  CHECK(text.rfind("block,scale,row,col,value\n", 0) == 0);
  // A/B/C at scales 0..2 with 2^n * k rows, plus the 2 x 2 coarsest block.
  const long lines = std::count(text.begin(), text.end(), '\n') - 1;
  CHECK(lines == 3 * (4 + 16 + 64) + 4);
}

TEST_CASE("kernelviz sparsity fractions") {
  TempDir dir;
  SUBCASE("polynomial kernel below degree k vanishes") {
    const auto r = mwt_run({"kernelviz", "kernel=polynomial", "degree=3", "k=4", "N=5", "out=" + dir / "p.csv"});
    REQUIRE(r.code == 0);
    CHECK(number_after(r.out, "  A fraction above threshold") == 0.0);
    CHECK(number_after(r.out, "  B fraction above threshold") == 0.0);
    CHECK(number_after(r.out, "  C fraction above threshold") == 0.0);
    CHECK(fs::exists(dir / "p_mask.csv"));
  }
  SUBCASE("zero kernel leaves every block empty") {
    const auto r = mwt_run({"kernelviz", "kernel=zero", "out=" + dir / "z.csv"});
    REQUIRE(r.code == 0);
    for (const char* b : {"A", "B", "C", "T"}) CHECK(number_after(r.out, "  " + std::string(b) + " fraction above threshold") == 0.0);
    CHECK(slurp(dir / "z_mask.csv") == "block,scale,row,col\n");
  }
  SUBCASE("gaussian kernel is banded") {
    const auto r = mwt_run({"kernelviz", "kernel=gaussian", "k=4", "N=6", "out=" + dir / "g.csv"});
    REQUIRE(r.code == 0);
    CHECK(number_after(r.out, "  A fraction above threshold") < 0.3);
  }
  SUBCASE("unknown kernel is a usage error") {
    CHECK(mwt_run({"kernelviz", "kernel=bessel", "out=" + dir / "x.csv"}).code == 1);
  }
}

TEST_CASE("datagen") {
  TempDir dir;
  SUBCASE("burgers twice gives byte-identical files") {
    for (const char* name : {"a.mwtd", "b.mwtd"})
      REQUIRE(mwt_run({"datagen", "equation=burgers", "count=2", "resolution=256", "seed=0", "out=" + dir / name}).code == 0);
    CHECK(slurp(dir / "a.mwtd") == slurp(dir / "b.mwtd"));
  }
  SUBCASE("kdv at 1024 matches the header arithmetic") {
    REQUIRE(mwt_run({"datagen", "equation=kdv", "count=1", "resolution=1024", "out=" + dir / "k.mwtd"}).code == 0);
    const Dataset d = read_dataset(dir / "k.mwtd");
    std::size_t header = 4 + 1 + 4 + d.equation.size() + 4 + 1 + 4 + 4;
    for (const auto& [k, v] : d.metadata) header += 8 + k.size() + v.size();
    CHECK(fs::file_size(dir / "k.mwtd") == header + 2 * 1024 * sizeof(double));
  }
  SUBCASE("darcy coefficients are strictly positive") {
    REQUIRE(mwt_run({"datagen", "equation=darcy", "count=2", "resolution=32", "out=" + dir / "d.mwtd"}).code == 0);
    const Dataset d = read_dataset(dir / "d.mwtd");
    CHECK(d.side == 32);
    for (double a : d.inputs) REQUIRE(a > 0.0);
  }
  SUBCASE("solver divergence exits 3 and names the sample") {
    const auto r = mwt_run({"datagen", "equation=burgers", "count=2", "resolution=64", "solver_resolution=64", "dt=0.2",
                            "nu=1e-4", "out=" + dir / "x.mwtd"});
    CHECK(r.code == 3);
    CHECK(r.err.find("sample 0") != std::string::npos);
  }
  SUBCASE("MWT_SEED overrides the configured seed") {
    REQUIRE(mwt_run({"datagen", "equation=identity", "count=2", "resolution=32", "seed=5", "out=" + dir / "s5.mwtd"}).code == 0);
    ::setenv("MWT_SEED", "5", 1);
    const auto r = mwt_run({"datagen", "equation=identity", "count=2", "resolution=32", "seed=0", "out=" + dir / "env.mwtd"});
    ::unsetenv("MWT_SEED");
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "s5.mwtd") == slurp(dir / "env.mwtd"));
    CHECK(slurp(dir / "env.mwtd.cfg").find("seed = 5") != std::string::npos);
  }
  SUBCASE("unknown equation is a usage error") {
    CHECK(mwt_run({"datagen", "equation=heat", "out=" + dir / "h.mwtd"}).code == 1);
  }
}

TEST_CASE("train and eval") {
  TempDir dir;
  REQUIRE(mwt_run({"datagen", "equation=identity", "count=250", "resolution=64", "out=" + dir / "id.mwtd"}).code == 0);
  std::vector<std::string> small = {"train", "data=" + dir / "id.mwtd", "N_train=8", "N_test=4", "k=2", "epochs=2",
                                    "batch=4", "quiet=true"};
  auto with = [](std::vector<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };

  SUBCASE("epochs = 0 saves the initialisation and an empty metrics body") {
    const auto r = mwt_run(with(small, {"epochs=0", "seed=7", "checkpoint=" + dir / "m0.mwtm", "metrics=" + dir / "m0.csv"}));
    REQUIRE(r.code == 0);
    const OperatorModel saved = load_checkpoint(dir / "m0.mwtm");
    ModelConfig c;
    c.k = 2;
    CHECK(saved.params() == OperatorModel(c, 7).params());
    CHECK(slurp(dir / "m0.csv") == "epoch,train_rel_l2,test_rel_l2,lr\n");
  }
  SUBCASE("same seed reproduces metrics and checkpoint") {
    REQUIRE(mwt_run(with(small, {"checkpoint=" + dir / "a.mwtm", "metrics=" + dir / "a.csv"})).code == 0);
    REQUIRE(mwt_run(with(small, {"checkpoint=" + dir / "b.mwtm", "metrics=" + dir / "b.csv"})).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.mwtm") == slurp(dir / "b.mwtm"));
  }
  SUBCASE("the serialized config reproduces the run") {
    REQUIRE(mwt_run(with(small, {"checkpoint=" + dir / "a.mwtm", "metrics=" + dir / "a.csv"})).code == 0);
    REQUIRE(mwt_run({"train", "--config", dir / "a.mwtm.cfg", "checkpoint=" + dir / "c.mwtm", "metrics=" + dir / "c.csv"})
                .code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "c.csv"));
    CHECK(slurp(dir / "a.mwtm") == slurp(dir / "c.mwtm"));
  }
  SUBCASE("config files reject unknown keys and accept comments") {
    std::ofstream(dir / "bad.cfg") << "# comment\nepochs = 1\nlearning_rate = 3\n";
    const auto r = mwt_run({"train", "--config", dir / "bad.cfg"});
    CHECK(r.code == 1);
    CHECK(r.err.find("learning_rate") != std::string::npos);
    CHECK(mwt_run(with(small, {"bogus=1"})).code == 1);
  }
  SUBCASE("identity task reaches 1% in 50 epochs") {
    const auto r = mwt_run({"train", "--config", MWT_SOURCE_DIR "/tools/configs/identity.cfg", "data=" + dir / "id.mwtd",
                            "checkpoint=" + dir / "id.mwtm", "metrics=" + dir / "id.csv", "quiet=true"});
    REQUIRE(r.code == 0);
    MESSAGE(r.out);
    CHECK(number_after(r.out, "final test relative L2") < 0.01);

    const auto e = mwt_run({"eval", "checkpoint=" + dir / "id.mwtm", "data=" + dir / "id.mwtd", "count=200"});
    REQUIRE(e.code == 0);
    CHECK(number_after(e.out, "mean relative L2") < 0.01);
  }
  SUBCASE("eval with a native override matches the plain evaluation") {
    REQUIRE(mwt_run(with(small, {"checkpoint=" + dir / "a.mwtm", "metrics=" + dir / "a.csv"})).code == 0);
    const auto plain = mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "id.mwtd"});
    const auto same = mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "id.mwtd", "resolution=64"});
    REQUIRE(plain.code == 0);
    CHECK(plain.out == same.out);
    CHECK(mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "id.mwtd", "resolution=48"}).code == 1);
  }
  SUBCASE("train at 128, evaluate at 512") {
    REQUIRE(mwt_run({"datagen", "equation=identity", "count=12", "resolution=512", "out=" + dir / "hi.mwtd"}).code == 0);
    REQUIRE(mwt_run(with(small, {"data=" + dir / "hi.mwtd", "resolution=128", "checkpoint=" + dir / "r.mwtm",
                                 "metrics=" + dir / "r.csv"}))
                .code == 0);
    const auto e = mwt_run({"eval", "checkpoint=" + dir / "r.mwtm", "data=" + dir / "hi.mwtd"});
    CHECK(e.code == 0);
    CHECK(e.out.find("at 512") != std::string::npos);
  }
  SUBCASE("shipped Burgers config runs on a small dataset") {
    REQUIRE(mwt_run({"datagen", "equation=burgers", "count=3", "resolution=512", "out=" + dir / "b.mwtd"}).code == 0);
    const auto r = mwt_run({"train", "--config", MWT_SOURCE_DIR "/tools/configs/burgers.cfg", "data=" + dir / "b.mwtd",
                            "N_train=2", "N_test=1", "epochs=1", "checkpoint=" + dir / "b.mwtm",
                            "metrics=" + dir / "b.csv", "quiet=true"});
    CHECK(r.code == 0);
    CHECK(std::isfinite(number_after(r.out, "final test relative L2")));
  }
  SUBCASE("incompatible checkpoints exit 4") {
    REQUIRE(mwt_run(with(small, {"checkpoint=" + dir / "a.mwtm", "metrics=" + dir / "a.csv"})).code == 0);
    CHECK(mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "id.mwtd", "k=3"}).code == 4);
    CHECK(mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "id.mwtd", "basis=chebyshev"}).code == 4);
    REQUIRE(mwt_run({"datagen", "equation=darcy", "count=1", "resolution=16", "out=" + dir / "d.mwtd"}).code == 0);
    CHECK(mwt_run({"eval", "checkpoint=" + dir / "a.mwtm", "data=" + dir / "d.mwtd"}).code == 4);
  }
  SUBCASE("missing files are I/O errors") {
    CHECK(mwt_run({"eval", "checkpoint=" + dir / "none.mwtm", "data=" + dir / "id.mwtd"}).code == 2);
    CHECK(mwt_run(with(small, {"data=" + dir / "none.mwtd"})).code == 2);
  }
}

TEST_CASE("usage errors") {
  CHECK(mwt_run({}).code == 1);
  CHECK(mwt_run({"frobnicate"}).code == 1);
  CHECK(mwt_run({"train", "epochs"}).code == 1);
  CHECK(mwt_run({"datagen", "count=ten"}).code == 1);
  CHECK(mwt_run({"--help"}).code == 0);
}
