#include "tvsv/degrade.hpp"
#include "tvsv/experiment.hpp"
#include "tvsv/io.hpp"
#include "tvsv/phantom.hpp"
#include "tvsv/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tvsv;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kValidation = 2, kIo = 3, kDiverged = 4, kCellsFailed = 5 };

json num_json(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

// "phantom:<name>" or "phantom:<name>:<rows>x<cols>" selects a built-in image.
ImageD load_input(const std::string& spec) {
  const std::string prefix = "phantom:";
  if (spec.rfind(prefix, 0) != 0) return read_image(spec);
  std::string name = spec.substr(prefix.size());
  Index rows = 64, cols = 64;
  if (auto colon = name.find(':'); colon != std::string::npos) {
    const std::string size = name.substr(colon + 1);
    name.resize(colon);
    const auto x = size.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(size);
      rows = std::stol(size.substr(0, x));
      cols = std::stol(size.substr(x + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad phantom size '" + size + "' (expected ROWSxCOLS)");
    }
  }
  return make_phantom(name, rows, cols);
}

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct BlurArgs {
  int band = 5;
  double sigma = 1.0;
  void add(CLI::App* app) {
    app->add_option("--blur-band", band, "Gaussian kernel width (odd)")->capture_default_str();
    app->add_option("--blur-sigma", sigma, "Gaussian kernel standard deviation")->capture_default_str();
  }
};

// ---------------------------------------------------------------------------

struct DegradeArgs {
  std::string input;
  BlurArgs blur;
  std::optional<double> awgn_sigma, awgn_bsnr, spn_gamma;
};

int cmd_degrade(const DegradeArgs& a, const Globals& g) {
  const ImageD u = load_input(a.input);
  const BlurOperator<double> k(a.blur.band, a.blur.sigma, u.rows(), u.cols());
  NoiseSpec ns;
  if (a.spn_gamma)
    ns = NoiseSpec::salt_pepper(*a.spn_gamma, g.seed);
  else if (a.awgn_bsnr)
    ns = NoiseSpec::awgn_bsnr(*a.awgn_bsnr, g.seed);
  else
    ns = NoiseSpec::awgn_sigma(a.awgn_sigma.value_or(0.0), g.seed);
  const DegradationRecord<double> rec = degrade(u, k, ns);

  const fs::path out = prepare_out(g.out);
  write_pgm(out / "observed.pgm", rec.g);
  write_csv_grid(out / "observed.csv", rec.g);
  json meta;
  meta["input"] = a.input;
  meta["rows"] = u.rows();
  meta["cols"] = u.cols();
  meta["blur"] = {{"band", a.blur.band}, {"sigma", a.blur.sigma}};
  meta["noise"] = ns.kind == NoiseKind::kAwgn ? "awgn" : "spn";
  meta["seed"] = rec.seed;
  meta["sigma"] = rec.sigma;
  meta["gamma"] = rec.gamma;
  meta["bsnr_db"] = num_json(rec.bsnr);
  meta["observed"] = "observed.csv";
  if (ns.kind == NoiseKind::kSaltPepper) {
    write_mask(out / "mask.pbm", rec.mask);
    meta["mask"] = "mask.pbm";
    meta["corrupted"] = rec.mask.count();
  }
  write_text(out / "degrade.json", meta.dump(2) + '\n');
  std::cout << "realized BSNR " << rec.bsnr << " dB, sigma " << rec.sigma << ", wrote " << out.string()
            << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct PmapArgs {
  std::string input;
  std::vector<int> windows{3};
  std::string mask;
  double p_min = 0.05;
  int resolution = 4096;
};

int cmd_pmap(const PmapArgs& a, const Globals& g) {
  ImageD u = load_input(a.input);
  if (!a.mask.empty()) u = spn_prefilter<double>(u, read_mask(a.mask));
  const RatioLookup<double> lut(a.p_min, a.resolution);
  const fs::path out = prepare_out(g.out);
  for (int s : a.windows) {
    const PMap<double> pm = estimate_pmap(u, s, lut);
    const std::string stem = "pmap_s" + std::to_string(s);
    write_csv_grid(out / (stem + ".csv"), pm.values());
    // Every preview maps [p_min, 2] to [0, 1] so maps for different s compare directly.
    write_pgm(out / (stem + ".pgm"), (pm.values() - a.p_min) / (2.0 - a.p_min));
    std::cout << stem << ": p in [" << pm.values().minCoeff() << ", " << pm.values().maxCoeff()
              << "], mean " << pm.values().mean() << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct RestoreArgs {
  std::string input;
  std::string meta;
  std::string noise;
  std::optional<double> sigma;
  std::string mask;
  BlurArgs blur;
  std::string model = "tvpsv-l2";
  std::string pmap_source = "pilot";
  std::string reference;
  std::vector<double> mu_sweep;
  RestoreOptions opt;
  std::optional<double> beta_r, beta_t, mu;
};

int cmd_restore(RestoreArgs a, const Globals& g) {
  const ImageD obs_img = load_input(a.input);
  Observation obs;
  BlurArgs blur = a.blur;
  if (!a.meta.empty()) {
    const fs::path meta_path(a.meta);
    json meta;
    try {
      meta = json::parse(read_text(meta_path));
      blur.band = meta.at("blur").at("band").get<int>();
      blur.sigma = meta.at("blur").at("sigma").get<double>();
      obs.noise = meta.at("noise").get<std::string>() == "spn" ? NoiseKind::kSaltPepper : NoiseKind::kAwgn;
      if (obs.noise == NoiseKind::kAwgn) obs.sigma = meta.at("sigma").get<double>();
      if (meta.contains("mask")) obs.mask = read_mask(meta_path.parent_path() / meta["mask"].get<std::string>());
    } catch (const json::exception& e) {
      throw IoError("'" + a.meta + "': bad degradation metadata: " + e.what());
    }
  }
  if (!a.noise.empty()) {
    if (a.noise != "awgn" && a.noise != "spn") throw std::invalid_argument("--noise must be awgn or spn");
    obs.noise = a.noise == "spn" ? NoiseKind::kSaltPepper : NoiseKind::kAwgn;
  }
  if (a.sigma) obs.sigma = a.sigma;
  if (!a.mask.empty()) obs.mask = read_mask(a.mask);

  RestoreOptions opt = a.opt;
  opt.model = parse_model(a.model);
  opt.pmap_source = parse_pmap_source(a.pmap_source);
  opt.beta_r = a.beta_r;
  opt.beta_t = a.beta_t;
  opt.mu = a.mu;
  const BlurOperator<double> k(blur.band, blur.sigma, obs_img.rows(), obs_img.cols());
  std::optional<ImageD> clean;
  if (!a.reference.empty()) clean = load_input(a.reference);

  json report;
  RestoreResult res = [&] {
    if (a.mu_sweep.empty()) return restore(obs_img, k, obs, opt);
    if (!clean) throw std::invalid_argument("--mu-sweep needs --reference to score the candidates");
    SweepResult sw = sweep_mu(obs_img, k, obs, opt, a.mu_sweep, *clean);
    json entries = json::array();
    for (const auto& e : sw.entries) entries.push_back({{"mu", e.mu}, {"isnr_db", num_json(e.isnr)}});
    report["mu_sweep"] = entries;
    report["mu_best"] = sw.entries[sw.best].mu;
    return std::move(sw.entries[sw.best].result);
  }();
  const RestoreReport<double>& rep = res.report;

  const fs::path out = prepare_out(g.out);
  write_pgm(out / "restored.pgm", rep.u);
  write_csv_grid(out / "restored.csv", rep.u);
  write_csv_grid(out / "pmap.csv", res.pmap.values());
  std::string log = "iter,rel_change,r_norm,mu\n";
  for (const auto& it : rep.log) {
    std::ostringstream line;
    line.precision(17);
    line << it.iter << ',' << it.rel_change << ',' << it.r_norm << ',' << it.mu << '\n';
    log += line.str();
  }
  write_text(out / "iterations.csv", log);

  report["model"] = model_name(opt.model);
  report["iterations"] = rep.iterations;
  report["converged"] = rep.converged;
  report["final_rel_change"] = num_json(rep.rel_change);
  report["r_norm"] = rep.r_norm;
  report["discrepancy"] = rep.discrepancy;
  report["delta_bar"] = res.delta_bar;
  report["r_constraint"] = rep.r_constraint;
  report["t_constraint"] = rep.t_constraint;
  report["mu_unbounded"] = rep.mu_unbounded;
  if (!rep.log.empty()) report["mu_final"] = num_json(rep.log.back().mu);
  if (res.pilot) report["pilot_iterations"] = res.pilot->iterations;
  report["wall_seconds"] = rep.wall_seconds;
  if (clean) {
    report["isnr_db"] = num_json(isnr(obs_img, *clean, rep.u));
    report["bsnr_db"] = num_json(bsnr(obs_img, *clean, k));
  }
  write_text(out / "report.json", report.dump(2) + '\n');
  std::cout << model_name(opt.model) << ": " << rep.iterations << " iterations"
            << (rep.converged ? "" : " (max_iter reached, not converged)");
  if (clean) std::cout << ", ISNR " << report["isnr_db"].dump() << " dB";
  std::cout << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string spec;
};

int cmd_experiment(const ExperimentArgs& a, const Globals& g, bool seed_given, bool out_given) {
  ExperimentSpec spec = load_experiment_spec(a.spec);
  if (seed_given) spec.seed = g.seed;
  if (out_given) spec.out_dir = g.out;
  const ExperimentResult res = run_experiment(spec, experiment_threads());
  write_experiment_outputs(spec, res);
  std::cout << isnr_table_csv(spec, res.rows);
  for (const auto& r : res.rows)
    if (r.status != "ok") std::cerr << r.model << " @ " << r.level << ": " << r.status << ": " << r.message << "\n";
  return res.any_failed() ? kCellsFailed : kOk;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
  std::string clean, observed, restored;
  BlurArgs blur;
};

int cmd_metrics(const MetricsArgs& a) {
  const ImageD u = load_input(a.clean);
  const ImageD g = load_input(a.observed);
  const BlurOperator<double> k(a.blur.band, a.blur.sigma, u.rows(), u.cols());
  json j;
  j["bsnr_db"] = num_json(bsnr(g, u, k));
  if (!a.restored.empty()) j["isnr_db"] = num_json(isnr(g, u, load_input(a.restored)));
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-variant TVp image restoration"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file with option defaults");
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Noise seed")->capture_default_str();
  auto* out_opt = app.add_option("--out", g.out, "Output directory")->capture_default_str();

  auto* phantom = app.add_subcommand("phantom", "Write a built-in test image");
  std::string ph_name = "geometric";
  int ph_rows = 64, ph_cols = 64;
  phantom->add_option("name", ph_name, "geometric or texture")->capture_default_str();
  phantom->add_option("--rows", ph_rows)->capture_default_str();
  phantom->add_option("--cols", ph_cols)->capture_default_str();

  DegradeArgs da;
  auto* deg = app.add_subcommand("degrade", "Blur and corrupt an image");
  deg->add_option("input", da.input, "Image file (.pgm/.csv) or phantom:<name>[:RxC]")->required();
  da.blur.add(deg);
  auto* o_sig = deg->add_option("--awgn-sigma", da.awgn_sigma, "Gaussian noise standard deviation");
  auto* o_bsnr = deg->add_option("--awgn-bsnr", da.awgn_bsnr, "Gaussian noise level as BSNR (dB)");
  auto* o_gam = deg->add_option("--spn-gamma", da.spn_gamma, "Salt-and-pepper corruption probability");
  o_sig->excludes(o_bsnr)->excludes(o_gam);
  o_bsnr->excludes(o_gam);

  PmapArgs pa;
  auto* pm = app.add_subcommand("pmap", "Estimate the local shape-exponent map");
  pm->add_option("input", pa.input, "Image file or phantom:<name>[:RxC]")->required();
  pm->add_option("-s,--window", pa.windows, "Neighborhood size(s), odd")->capture_default_str();
  pm->add_option("--mask", pa.mask, "Corrupted-pixel mask; pre-filters the image first");
  pm->add_option("--p-min", pa.p_min)->capture_default_str();
  pm->add_option("--lut-resolution", pa.resolution)->capture_default_str();

  RestoreArgs ra;
  auto* rs = app.add_subcommand("restore", "Restore an observed image");
  rs->add_option("input", ra.input, "Observed image (.csv keeps full precision)")->required();
  rs->add_option("--meta", ra.meta, "degrade.json written by the degrade command");
  rs->add_option("--noise", ra.noise, "awgn or spn");
  rs->add_option("--sigma", ra.sigma, "AWGN standard deviation for the discrepancy rule");
  rs->add_option("--mask", ra.mask, "Corrupted-pixel mask (SPN)");
  ra.blur.add(rs);
  rs->add_option("--model", ra.model, "tv-l1, tv-l2, tvp-l1, tvp-l2, tvpsv-l1, tvpsv-l2")->capture_default_str();
  rs->add_option("--p", ra.opt.p, "Global exponent for tvp models")->capture_default_str();
  rs->add_option("-s,--window", ra.opt.window, "p-map neighborhood size")->capture_default_str();
  rs->add_option("--beta-r", ra.beta_r);
  rs->add_option("--beta-t", ra.beta_t);
  rs->add_option("--mu", ra.mu, "Fixed regularization weight (required for L1 without a sweep)");
  rs->add_option("--mu-sweep", ra.mu_sweep, "Candidate mu values; keeps the best ISNR")->delimiter(',');
  rs->add_option("--reference", ra.reference, "Clean image for ISNR");
  rs->add_option("--tau", ra.opt.tau)->capture_default_str();
  rs->add_option("--tol", ra.opt.tol)->capture_default_str();
  rs->add_option("--max-iter", ra.opt.max_iter)->capture_default_str();
  rs->add_option("--p-min", ra.opt.p_min)->capture_default_str();
  rs->add_option("--pmap-source", ra.pmap_source, "pilot or observed (L2 models)")->capture_default_str();
  rs->add_flag("--allow-mismatch", ra.opt.allow_mismatch, "Permit L2 on SPN or L1 on AWGN");

  ExperimentArgs ea;
  auto* ex = app.add_subcommand("experiment", "Run a models x noise-levels batch");
  ex->add_option("spec", ea.spec, "Experiment spec (.toml or .json)")->required();

  MetricsArgs ma;
  auto* mt = app.add_subcommand("metrics", "BSNR and ISNR of image files");
  mt->add_option("--clean", ma.clean)->required();
  mt->add_option("--observed", ma.observed)->required();
  mt->add_option("--restored", ma.restored);
  ma.blur.add(mt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*phantom) {
      const fs::path out = prepare_out(g.out);
      write_pgm(out / (ph_name + ".pgm"), make_phantom(ph_name, ph_rows, ph_cols));
      return kOk;
    }
    if (*deg) return cmd_degrade(da, g);
    if (*pm) return cmd_pmap(pa, g);
    if (*rs) return cmd_restore(ra, g);
    if (*ex) return cmd_experiment(ea, g, seed_opt->count() > 0, out_opt->count() > 0);
    if (*mt) return cmd_metrics(ma);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kOk;
}
