#include "oracles.hpp"

#include "tvsv/experiment.hpp"
#include "tvsv/io.hpp"
#include "tvsv/phantom.hpp"
#include "tvsv/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>

using namespace tvsv;
namespace fs = std::filesystem;

TEST_CASE("model names round-trip") {
  for (const char* name : {"tv-l1", "tv-l2", "tvp-l1", "tvp-l2", "tvpsv-l1", "tvpsv-l2"})
    CHECK(model_name(parse_model(name)) == name);
  CHECK_THROWS_AS(parse_model("tv-l3"), std::invalid_argument);
  CHECK(model_fidelity(Model::kTvpL1) == Fidelity::kL1);
  CHECK(model_fidelity(Model::kTvpsvL2) == Fidelity::kL2);
  CHECK(parse_pmap_source("observed") == PMapSource::kObserved);
  CHECK_THROWS_AS(parse_pmap_source("x"), std::invalid_argument);
}

TEST_CASE("phantoms") {
  const ImageD g = geometric_phantom(64, 64);
  CHECK(g.minCoeff() >= 0.0);
  CHECK(g.maxCoeff() <= 1.0);
  CHECK((gradient_magnitudes(g) == 0.0).count() > 3000);  // mostly flat
  const ImageD t = texture_phantom(64, 64);
  CHECK(t.minCoeff() >= 0.0);
  CHECK(t.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(make_phantom("mandrill", 8, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_phantom("geometric", 0, 8), std::invalid_argument);
}

namespace {

struct SpnCase {
  ImageD u = texture_phantom(32, 32);
  BlurOperator<double> k{5, 1.5, 32, 32};
  DegradationRecord<double> rec = degrade_spn(u, k, NoiseSpec::salt_pepper(0.3, 4));
  Observation obs = observation_of(rec, NoiseKind::kSaltPepper);
};

struct AwgnCase {
  ImageD u = geometric_phantom(32, 32);
  BlurOperator<double> k{5, 1.0, 32, 32};
  DegradationRecord<double> rec = degrade_awgn(u, k, NoiseSpec::awgn_bsnr(30.0, 4));
  Observation obs = observation_of(rec, NoiseKind::kAwgn);
};

}  // namespace

TEST_CASE("model and noise pairing is validated") {
  AwgnCase a;
  RestoreOptions opt;
  opt.model = Model::kTvL1;
  opt.mu = 1.0;
  CHECK_THROWS_AS(restore(a.rec.g, a.k, a.obs, opt), std::invalid_argument);
  opt.allow_mismatch = true;
  opt.max_iter = 5;
  CHECK_NOTHROW(restore(a.rec.g, a.k, a.obs, opt));

  SpnCase s;
  RestoreOptions l2;
  l2.model = Model::kTvL2;
  CHECK_THROWS_AS(restore(s.rec.g, s.k, s.obs, l2), std::invalid_argument);

  RestoreOptions no_mu;
  no_mu.model = Model::kTvpsvL1;
  CHECK_THROWS_AS(restore(s.rec.g, s.k, s.obs, no_mu), std::invalid_argument);

  Observation no_sigma;
  RestoreOptions auto_mu;
  auto_mu.model = Model::kTvL2;
  CHECK_THROWS_AS(restore(a.rec.g, a.k, no_sigma, auto_mu), std::invalid_argument);

  RestoreOptions even;
  even.window = 4;
  CHECK_THROWS_AS(even.validate(), std::invalid_argument);
}

TEST_CASE("tv-l1 equals tvp-l1 at p = 1 bitwise") {
  SpnCase s;
  RestoreOptions a;
  a.model = Model::kTvL1;
  a.mu = 10.0;
  a.max_iter = 60;
  RestoreOptions b = a;
  b.model = Model::kTvpL1;
  b.p = 1.0;
  const auto ra = restore(s.rec.g, s.k, s.obs, a);
  const auto rb = restore(s.rec.g, s.k, s.obs, b);
  CHECK((ra.report.u == rb.report.u).all());
  CHECK(ra.report.iterations == rb.report.iterations);
}

TEST_CASE("SPN restore starts from the pre-filtered image") {
  SpnCase s;
  RestoreOptions opt;
  opt.model = Model::kTvpsvL1;
  opt.mu = 10.0;
  opt.window = 5;
  opt.max_iter = 3;
  const auto res = restore(s.rec.g, s.k, s.obs, opt);
  const ImageD pre = spn_prefilter<double>(s.rec.g, s.rec.mask);
  CHECK((res.initial == pre).all());
  CHECK((res.pmap.values() == estimate_pmap(pre, 5, RatioLookup<double>()).values()).all());

  // Without a mask the support is detected from the extreme values.
  Observation detect;
  detect.noise = NoiseKind::kSaltPepper;
  const auto res2 = restore(s.rec.g, s.k, detect, opt);
  CHECK((res2.initial == spn_prefilter<double>(s.rec.g, detect_impulses(s.rec.g))).all());
}

TEST_CASE("q = 2 p-map sources") {
  AwgnCase a;
  RestoreOptions opt;
  opt.model = Model::kTvpsvL2;
  opt.max_iter = 40;
  const auto pilot = restore(a.rec.g, a.k, a.obs, opt);
  REQUIRE(pilot.pilot.has_value());
  RestoreOptions tv = opt;
  tv.model = Model::kTvL2;
  const auto tv_run = restore(a.rec.g, a.k, a.obs, tv);
  CHECK((pilot.pilot->u == tv_run.report.u).all());
  CHECK((pilot.pmap.values() == estimate_pmap(tv_run.report.u, 3, RatioLookup<double>()).values()).all());
  CHECK(pilot.delta_bar == doctest::Approx(noise_level(a.rec.sigma, 1024)));

  opt.pmap_source = PMapSource::kObserved;
  const auto observed = restore(a.rec.g, a.k, a.obs, opt);
  CHECK(!observed.pilot.has_value());
  CHECK((observed.pmap.values() == estimate_pmap(a.rec.g, 3, RatioLookup<double>()).values()).all());

  RestoreOptions tvp = opt;
  tvp.model = Model::kTvpL2;
  tvp.p = 0.7;
  CHECK((pipeline_pmap(a.rec.g, a.k, a.obs, tvp).values() == 0.7).all());
}

TEST_CASE("mu sweep keeps the best ISNR") {
  SpnCase s;
  RestoreOptions opt;
  opt.model = Model::kTvL1;
  opt.max_iter = 80;
  const auto sw = sweep_mu(s.rec.g, s.k, s.obs, opt, {1.0, 10.0, 100.0}, s.u);
  REQUIRE(sw.entries.size() == 3);
  for (const auto& e : sw.entries) {
    CHECK(e.isnr <= sw.entries[sw.best].isnr);
    CHECK(e.isnr == isnr(s.rec.g, s.u, e.result.report.u));
  }
  CHECK_THROWS_AS(sweep_mu(s.rec.g, s.k, s.obs, opt, {}, s.u), std::invalid_argument);
}

TEST_CASE("experiment spec parsing") {
  const std::string toml = R"(
seed = 3
models = ["tv-l2", "tvpsv-l2"]
[image]
phantom = "geometric"
rows = 24
cols = 24
[blur]
band = 5
sigma = 1.0
[noise]
kind = "awgn"
bsnr = [20, 30]
[restore]
max_iter = 30
pmap_source = "observed"
[output]
dir = "x"
)";
  const ExperimentSpec a = parse_experiment_spec(toml, false);
  CHECK(a.seed == 3);
  CHECK(a.models.size() == 2);
  CHECK(a.levels == std::vector<double>{20.0, 30.0});
  CHECK(a.rows == 24);
  CHECK(a.restore.max_iter == 30);
  CHECK(a.restore.pmap_source == PMapSource::kObserved);
  CHECK(a.out_dir == "x");

  const std::string json = R"({"seed": 3, "models": ["tv-l2", "tvpsv-l2"],
    "image": {"phantom": "geometric", "rows": 24, "cols": 24},
    "noise": {"kind": "awgn", "bsnr": [20, 30]}, "restore": {"max_iter": 30}})";
  const ExperimentSpec b = parse_experiment_spec(json, true);
  CHECK(b.models == a.models);
  CHECK(b.levels == a.levels);

  CHECK_THROWS_AS(parse_experiment_spec("seed = 1\nbogus = 2\n", false), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_spec("[noise]\nkind = \"awgn\"\n", false), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_spec("seed = [", false), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_spec("{", true), std::invalid_argument);

  ExperimentSpec mismatch = a;
  mismatch.models = {Model::kTvL1};
  mismatch.mu_grid = {1.0};
  CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
}

TEST_CASE("experiment runs the full factorial in spec order") {
  ExperimentSpec spec;
  spec.rows = spec.cols = 24;
  spec.levels = {20.0, 30.0, 40.0};
  spec.models = {Model::kTvL2, Model::kTvpL2, Model::kTvpsvL2};
  spec.restore.max_iter = 25;
  spec.seed = 9;
  const ExperimentResult one = run_experiment(spec, 1);
  const ExperimentResult three = run_experiment(spec, 3);
  REQUIRE(one.rows.size() == 9);
  CHECK(one.rows[0].model == "tv-l2");
  CHECK(one.rows[1].model == "tvp-l2");
  CHECK(one.rows[3].level == 30.0);
  CHECK(!one.any_failed());
  CHECK(report_csv(one.rows) == report_csv(three.rows));
  const std::string table = isnr_table_csv(spec, one.rows);
  CHECK(table.rfind("bsnr,tv-l2,tvp-l2,tvpsv-l2\n20,", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}

TEST_CASE("failed cells are recorded, not fatal") {
  const fs::path dir = fs::temp_directory_path() / "tvsv_pipeline_test";
  fs::create_directories(dir);
  ImageD bad = ImageD::Constant(8, 8, 0.5);
  bad(2, 2) = std::numeric_limits<double>::quiet_NaN();
  write_csv_grid(dir / "bad.csv", bad);
  ExperimentSpec spec;
  spec.image_path = (dir / "bad.csv").string();
  spec.blur_band = 3;
  spec.levels_are_sigma = true;
  spec.levels = {0.01};
  spec.models = {Model::kTvL2};
  const ExperimentResult res = run_experiment(spec, 1);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].status == "diverged");
  CHECK(res.any_failed());
}

TEST_CASE("thread count from the environment") {
  ::setenv("TVSV_THREADS", "3", 1);
  CHECK(experiment_threads() == 3);
  ::setenv("TVSV_THREADS", "zero", 1);
  CHECK_THROWS_AS(experiment_threads(), std::invalid_argument);
  ::setenv("TVSV_THREADS", "0", 1);
  CHECK_THROWS_AS(experiment_threads(), std::invalid_argument);
  ::unsetenv("TVSV_THREADS");
  CHECK(experiment_threads() >= 1);
}
