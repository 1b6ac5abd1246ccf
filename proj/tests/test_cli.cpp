#include "tvsv/blur.hpp"
#include "tvsv/io.hpp"
#include "tvsv/phantom.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace tvsv;
namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "tvsv_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = "cd '" + work().string() + "' && '" TVSV_CLI "' " + args + " > last.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("frobnicate") == 2);
  CHECK(run("degrade phantom:geometric --awgn-bsnr 20 --spn-gamma 0.1") == 2);
}

TEST_CASE("exit codes distinguish validation and I/O failures") {
  CHECK(run("pmap phantom:geometric -s 4 --out p") == 2);
  CHECK(run("degrade nope.pgm --awgn-bsnr 20 --out d") == 3);
  CHECK(run("degrade phantom:mandrill --awgn-bsnr 20 --out d") == 2);
  CHECK(run("degrade phantom:geometric:16x16 --blur-band 4 --awgn-bsnr 20 --out d") == 2);
}

TEST_CASE("degrade with gamma 0 reproduces the blurred input") {
  REQUIRE(run("degrade phantom:geometric:32x32 --spn-gamma 0 --blur-band 9 --blur-sigma 2.5 --out g0") == 0);
  const ImageD u = geometric_phantom(32, 32);
  const ImageD ku = BlurOperator<double>(9, 2.5, 32, 32).apply(u);
  CHECK((read_csv_grid(work() / "g0/observed.csv") == ku).all());
  CHECK(read_mask(work() / "g0/mask.pbm").count() == 0);
  CHECK(read_json(work() / "g0/degrade.json")["gamma"] == 0.0);
}

TEST_CASE("degrade at a target BSNR writes metadata") {
  REQUIRE(run("degrade phantom:geometric --awgn-bsnr 20 --seed 4 --out a20") == 0);
  const auto meta = read_json(work() / "a20/degrade.json");
  CHECK(std::abs(meta["bsnr_db"].get<double>() - 20.0) <= 0.5);
  CHECK(meta["seed"] == 4);
  CHECK(meta["noise"] == "awgn");
  CHECK(fs::exists(work() / "a20/observed.pgm"));

  REQUIRE(run("degrade phantom:geometric --awgn-bsnr 20 --seed 4 --out a20b") == 0);
  CHECK(read_text(work() / "a20/observed.csv") == read_text(work() / "a20b/observed.csv"));
}

TEST_CASE("config file supplies option defaults") {
  write_text(work() / "cfg.toml", "seed = 4\nout = \"fromcfg\"\n[degrade]\nawgn-bsnr = 20\n");
  REQUIRE(run("--config cfg.toml degrade phantom:geometric") == 0);
  CHECK(read_text(work() / "fromcfg/observed.csv") == read_text(work() / "a20/observed.csv"));
}

TEST_CASE("p-map previews") {
  write_pgm(work() / "flat.pgm", ImageD::Constant(16, 16, 0.4));
  REQUIRE(run("pmap flat.pgm -s 3 --out pf") == 0);
  CHECK((read_pgm(work() / "pf/pmap_s3.pgm") == 1.0).all());
  CHECK((read_csv_grid(work() / "pf/pmap_s3.csv") == 2.0).all());

  REQUIRE(run("degrade phantom:geometric --awgn-bsnr 30 --seed 1 --out pd") == 0);
  REQUIRE(run("pmap pd/observed.csv -s 3 -s 11 --out pm") == 0);
  const ImageD p3 = read_csv_grid(work() / "pm/pmap_s3.csv");
  const ImageD p11 = read_csv_grid(work() / "pm/pmap_s11.csv");
  CHECK(!(p3 == p11).all());
  for (const ImageD* p : {&p3, &p11}) {
    CHECK(p->minCoeff() >= 0.05);
    CHECK(p->maxCoeff() <= 2.0);
  }
}

TEST_CASE("restore writes the image, p-map, log and report") {
  REQUIRE(run("degrade phantom:geometric:32x32 --awgn-bsnr 30 --seed 2 --out rd") == 0);
  REQUIRE(run("restore rd/observed.csv --meta rd/degrade.json --model tv-l2 --reference "
              "phantom:geometric:32x32 --out rr") == 0);
  const auto rep = read_json(work() / "rr/report.json");
  CHECK(rep["model"] == "tv-l2");
  CHECK(rep["converged"] == true);
  CHECK(rep["isnr_db"].get<double>() > 0.0);
  CHECK(rep["discrepancy"].get<double>() <= 1.05 * rep["delta_bar"].get<double>());
  CHECK(fs::exists(work() / "rr/restored.pgm"));
  CHECK(read_csv_grid(work() / "rr/restored.csv").rows() == 32);
  CHECK((read_csv_grid(work() / "rr/pmap.csv") == 1.0).all());
  CHECK(read_text(work() / "rr/iterations.csv").rfind("iter,rel_change,r_norm,mu\n1,", 0) == 0);

  CHECK(run("restore rd/observed.csv --meta rd/degrade.json --model tv-l1 --mu 1 --out rx") == 2);
  CHECK(run("restore rd/observed.csv --meta missing.json --model tv-l2 --out rx") == 3);
}

TEST_CASE("restore on salt-and-pepper data with a mu sweep") {
  REQUIRE(run("degrade phantom:texture:32x32 --spn-gamma 0.3 --blur-band 5 --blur-sigma 1.5 --seed 3 --out sd") == 0);
  REQUIRE(run("restore sd/observed.csv --meta sd/degrade.json --model tvpsv-l1 -s 5 --mu-sweep 5,20 "
              "--max-iter 50 --reference phantom:texture:32x32 --out sr") == 0);
  const auto rep = read_json(work() / "sr/report.json");
  REQUIRE(rep["mu_sweep"].size() == 2);
  CHECK(rep["isnr_db"].get<double>() ==
        std::max(rep["mu_sweep"][0]["isnr_db"].get<double>(), rep["mu_sweep"][1]["isnr_db"].get<double>()));
  CHECK(run("restore sd/observed.csv --meta sd/degrade.json --model tvpsv-l1 --mu-sweep 5,20 --out sr2") == 2);
}

TEST_CASE("metrics") {
  REQUIRE(run("degrade phantom:geometric:32x32 --awgn-bsnr 25 --seed 2 --out md") == 0);
  REQUIRE(run("metrics --clean phantom:geometric:32x32 --observed md/observed.csv --restored md/observed.csv") == 0);
  const auto out = nlohmann::json::parse(read_text(work() / "last.log"));
  CHECK(out["bsnr_db"].get<double>() == doctest::Approx(read_json(work() / "md/degrade.json")["bsnr_db"].get<double>()));
  CHECK(out["isnr_db"].get<double>() == 0.0);
}

TEST_CASE("experiment command and failure exit code") {
  write_text(work() / "exp.toml",
             "seed = 1\nmodels = [\"tv-l2\", \"tvpsv-l2\"]\n[image]\nrows = 24\ncols = 24\n"
             "[noise]\nbsnr = [20, 30]\n[restore]\nmax_iter = 20\n[output]\ndir = \"exp\"\n");
  REQUIRE(run("experiment exp.toml") == 0);
  const std::string csv = read_text(work() / "exp/report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(work() / "exp/report.json"));
  CHECK(fs::exists(work() / "exp/isnr_table.csv"));
  REQUIRE(run("experiment exp.toml --out exp2 --seed 2") == 0);
  CHECK(read_text(work() / "exp2/report.csv") != csv);

  ImageD bad = ImageD::Constant(8, 8, 0.5);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  write_csv_grid(work() / "bad.csv", bad);
  write_text(work() / "bad.toml",
             "models = [\"tv-l2\"]\n[image]\npath = \"bad.csv\"\n[blur]\nband = 3\n"
             "[noise]\nsigma = [0.01]\n[output]\ndir = \"expbad\"\n");
  CHECK(run("experiment bad.toml") == 5);
  CHECK(read_text(work() / "expbad/report.csv").find("diverged") != std::string::npos);
  CHECK(run("experiment nope.toml") == 3);
  write_text(work() / "invalid.toml", "models = [\"tv-l9\"]\n[noise]\nbsnr = [20]\n");
  CHECK(run("experiment invalid.toml") == 2);
}
