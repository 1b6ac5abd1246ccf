#include "tvsv/experiment.hpp"

#include "tvsv/io.hpp"
#include "tvsv/phantom.hpp"

#include <nlohmann/json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tvsv {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

json num_json(double x) { return std::isfinite(x) ? json(x) : json(num(x)); }

class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) fail("must be a table");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  std::optional<T> get(const char* key) {
    if (!has(key)) return std::nullopt;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(std::string("bad value for '") + key + "'");
    }
  }

  template <typename T>
  void read(const char* key, T& into) {
    if (auto v = get<T>(key)) into = *v;
  }

  Section sub(const char* key) {
    static const json empty = json::object();
    seen_.insert(key);
    return Section(j_.contains(key) ? j_.at(key) : empty, name_ + key + ".");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("experiment spec " + (name_.empty() ? "" : "[" + name_ + "] ") + what);
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentSpec::validate() const {
  if (image_path.empty() && (rows < 1 || cols < 1))
    throw std::invalid_argument("experiment: phantom size must be positive");
  if (blur_band < 1 || blur_band % 2 == 0) throw std::invalid_argument("experiment: blur band must be odd");
  if (!(blur_sigma > 0.0)) throw std::invalid_argument("experiment: blur sigma must be > 0");
  if (levels.empty()) throw std::invalid_argument("experiment: no noise levels");
  if (models.empty()) throw std::invalid_argument("experiment: no models");
  for (double lv : levels) {
    NoiseSpec ns;
    if (noise == NoiseKind::kSaltPepper)
      ns = NoiseSpec::salt_pepper(lv, seed);
    else
      ns = levels_are_sigma ? NoiseSpec::awgn_sigma(lv, seed) : NoiseSpec::awgn_bsnr(lv, seed);
    ns.validate();
  }
  for (double mu : mu_grid)
    if (!(mu >= 0.0)) throw std::invalid_argument("experiment: mu grid values must be >= 0");
  for (Model m : models) {
    RestoreOptions o = restore;
    o.model = m;
    if (model_fidelity(m) == Fidelity::kL1 && !o.mu && !mu_grid.empty()) o.mu = mu_grid.front();
    o.validate();
    if (o.allow_mismatch) continue;
    const bool l1 = model_fidelity(m) == Fidelity::kL1;
    if (l1 != (noise == NoiseKind::kSaltPepper))
      throw std::invalid_argument("experiment: model " + model_name(m) + " does not match the noise " +
                                  "type (set restore.allow_mismatch to force it)");
  }
}

ExperimentSpec parse_experiment_spec(const std::string& text, bool is_json) {
  json root;
  try {
    if (is_json) {
      root = json::parse(text);
    } else {
      const toml::table tbl = toml::parse(text);
      std::ostringstream os;
      os << toml::json_formatter{tbl};
      root = json::parse(os.str());
    }
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument("experiment spec: TOML parse error: " + std::string(e.description()));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment spec: JSON parse error: ") + e.what());
  }

  ExperimentSpec spec;
  Section top(root, "");
  top.read("seed", spec.seed);

  Section image = top.sub("image");
  image.read("path", spec.image_path);
  image.read("phantom", spec.phantom);
  image.read("rows", spec.rows);
  image.read("cols", spec.cols);
  image.finish();

  Section blur = top.sub("blur");
  blur.read("band", spec.blur_band);
  blur.read("sigma", spec.blur_sigma);
  blur.finish();

  Section noise = top.sub("noise");
  const std::string kind = noise.get<std::string>("kind").value_or("awgn");
  if (kind == "awgn") {
    spec.noise = NoiseKind::kAwgn;
    auto bsnr = noise.get<std::vector<double>>("bsnr");
    auto sigma = noise.get<std::vector<double>>("sigma");
    if (bsnr.has_value() == sigma.has_value()) noise.fail("AWGN needs exactly one of bsnr / sigma lists");
    spec.levels_are_sigma = sigma.has_value();
    spec.levels = sigma ? *sigma : *bsnr;
  } else if (kind == "spn") {
    spec.noise = NoiseKind::kSaltPepper;
    auto gamma = noise.get<std::vector<double>>("gamma");
    if (!gamma) noise.fail("SPN needs a gamma list");
    spec.levels = *gamma;
  } else {
    noise.fail("kind must be awgn or spn");
  }
  noise.finish();

  for (const auto& name : top.get<std::vector<std::string>>("models").value_or(std::vector<std::string>{}))
    spec.models.push_back(parse_model(name));

  Section r = top.sub("restore");
  RestoreOptions& o = spec.restore;
  r.read("p", o.p);
  r.read("window", o.window);
  if (auto v = r.get<double>("beta_r")) o.beta_r = v;
  if (auto v = r.get<double>("beta_t")) o.beta_t = v;
  if (auto v = r.get<double>("mu")) o.mu = v;
  r.read("mu_grid", spec.mu_grid);
  r.read("tau", o.tau);
  r.read("tol", o.tol);
  r.read("max_iter", o.max_iter);
  r.read("p_min", o.p_min);
  r.read("lut_resolution", o.lut_resolution);
  if (auto v = r.get<std::string>("pmap_source")) o.pmap_source = parse_pmap_source(*v);
  r.read("allow_mismatch", o.allow_mismatch);
  r.finish();

  Section out = top.sub("output");
  out.read("dir", spec.out_dir);
  out.read("save_images", spec.save_images);
  out.finish();

  top.finish();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext != ".toml" && ext != ".json")
    throw std::invalid_argument("experiment spec must be a .toml or .json file");
  return parse_experiment_spec(read_text(path), ext == ".json");
}

bool ExperimentResult::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status != "ok"; });
}

unsigned experiment_threads() {
  if (const char* env = std::getenv("TVSV_THREADS"); env && *env) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
      throw std::invalid_argument("TVSV_THREADS must be a positive integer, got '" + std::string(s) + "'");
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

ReportRow run_cell(const ExperimentSpec& spec, const ImageD& clean, const BlurOperator<double>& k,
                   const DegradationRecord<double>& rec, Model model, double level, ImageD& restored) {
  ReportRow row;
  row.model = model_name(model);
  row.noise = spec.noise == NoiseKind::kAwgn ? "awgn" : "spn";
  row.level = level;
  row.bsnr = rec.bsnr;

  const Observation obs = observation_of(rec, spec.noise);
  RestoreOptions opt = spec.restore;
  opt.model = model;

  const auto start = std::chrono::steady_clock::now();
  try {
    RestoreResult res = [&] {
      if (spec.mu_grid.empty()) return restore(rec.g, k, obs, opt);
      SweepResult sw = sweep_mu(rec.g, k, obs, opt, spec.mu_grid, clean);
      return std::move(sw.entries[sw.best].result);
    }();
    const RestoreReport<double>& rep = res.report;
    row.isnr = isnr(rec.g, clean, rep.u);
    row.iterations = rep.iterations;
    row.converged = rep.converged;
    row.rel_change = rep.rel_change;
    row.discrepancy = rep.discrepancy;
    row.delta_bar = res.delta_bar;
    if (!rep.mu_history.empty()) {
      row.mu = rep.mu_history.back();
      auto [lo, hi] = std::minmax_element(rep.mu_history.begin(), rep.mu_history.end());
      row.mu_min = *lo;
      row.mu_max = *hi;
    } else {
      row.mu = row.mu_min = row.mu_max = rep.log.empty() ? 0.0 : rep.log.back().mu;
    }
    restored = rep.u;
  } catch (const DivergenceError& e) {
    row.status = "diverged";
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
  spec.validate();
  ExperimentResult result;
  result.clean = spec.image_path.empty() ? make_phantom(spec.phantom, spec.rows, spec.cols)
                                         : read_image(spec.image_path);
  const ImageD& clean = result.clean;
  const BlurOperator<double> k(spec.blur_band, spec.blur_sigma, clean.rows(), clean.cols());

  for (double lv : spec.levels) {
    NoiseSpec ns = spec.noise == NoiseKind::kSaltPepper ? NoiseSpec::salt_pepper(lv, spec.seed)
                   : spec.levels_are_sigma               ? NoiseSpec::awgn_sigma(lv, spec.seed)
                                                         : NoiseSpec::awgn_bsnr(lv, spec.seed);
    result.degradations.push_back(degrade(clean, k, ns));
  }

  const std::size_t n_models = spec.models.size();
  const std::size_t n_cells = spec.levels.size() * n_models;
  result.rows.resize(n_cells);
  result.restored.resize(n_cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_cells; i = next++) {
      const std::size_t lv = i / n_models, m = i % n_models;
      result.rows[i] = run_cell(spec, clean, k, result.degradations[lv], spec.models[m],
                                spec.levels[lv], result.restored[i]);
    }
  };
  const unsigned n_threads = unsigned(std::min<std::size_t>(std::max(1u, threads), n_cells));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return result;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "model,noise,level,bsnr_db,isnr_db,iterations,converged,final_rel_change,discrepancy,"
      "delta_bar,mu,mu_min,mu_max,status\n";
  for (const ReportRow& r : rows) {
    out += r.model + ',' + r.noise + ',' + num(r.level) + ',' + num(r.bsnr) + ',' + num(r.isnr) +
           ',' + std::to_string(r.iterations) + ',' + (r.converged ? "1" : "0") + ',' +
           num(r.rel_change) + ',' + num(r.discrepancy) + ',' + num(r.delta_bar) + ',' + num(r.mu) +
           ',' + num(r.mu_min) + ',' + num(r.mu_max) + ',' + r.status + '\n';
  }
  return out;
}

std::string isnr_table_csv(const ExperimentSpec& spec, const std::vector<ReportRow>& rows) {
  std::string out = spec.noise == NoiseKind::kSaltPepper ? "gamma"
                    : spec.levels_are_sigma            ? "sigma"
                                                       : "bsnr";
  for (Model m : spec.models) out += ',' + model_name(m);
  out += '\n';
  const std::size_t n_models = spec.models.size();
  for (std::size_t lv = 0; lv < spec.levels.size(); ++lv) {
    out += num(spec.levels[lv]);
    for (std::size_t m = 0; m < n_models; ++m) {
      const ReportRow& r = rows.at(lv * n_models + m);
      out += ',' + (r.status == "ok" ? num(r.isnr) : std::string());
    }
    out += '\n';
  }
  return out;
}

std::string report_json(const ExperimentSpec& spec, const ExperimentResult& result) {
  json j;
  j["seed"] = spec.seed;
  j["image"] = spec.image_path.empty() ? "phantom:" + spec.phantom : spec.image_path;
  j["rows"] = result.clean.rows();
  j["cols"] = result.clean.cols();
  j["blur"] = {{"band", spec.blur_band}, {"sigma", spec.blur_sigma}};
  j["noise"] = spec.noise == NoiseKind::kAwgn ? "awgn" : "spn";
  json degr = json::array();
  for (const auto& rec : result.degradations)
    degr.push_back({{"sigma", rec.sigma}, {"gamma", rec.gamma}, {"bsnr_db", num_json(rec.bsnr)}});
  j["degradations"] = degr;
  const RestoreOptions& o = spec.restore;
  j["restore"] = {{"p", o.p},
                  {"window", o.window},
                  {"tau", o.tau},
                  {"tol", o.tol},
                  {"max_iter", o.max_iter},
                  {"p_min", o.p_min},
                  {"pmap_source", pmap_source_name(o.pmap_source)},
                  {"mu_grid", spec.mu_grid}};
  json rows = json::array();
  for (const ReportRow& r : result.rows) {
    rows.push_back({{"model", r.model},
                    {"level", r.level},
                    {"bsnr_db", num_json(r.bsnr)},
                    {"isnr_db", num_json(r.isnr)},
                    {"iterations", r.iterations},
                    {"converged", r.converged},
                    {"final_rel_change", num_json(r.rel_change)},
                    {"discrepancy", r.discrepancy},
                    {"delta_bar", r.delta_bar},
                    {"mu", num_json(r.mu)},
                    {"mu_min", num_json(r.mu_min)},
                    {"mu_max", num_json(r.mu_max)},
                    {"wall_seconds", r.wall_seconds},
                    {"status", r.status},
                    {"message", r.message}});
  }
  j["cells"] = rows;
  return j.dump(2) + '\n';
}

void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_text(dir / "report.csv", report_csv(result.rows));
  write_text(dir / "isnr_table.csv", isnr_table_csv(spec, result.rows));
  write_text(dir / "report.json", report_json(spec, result));
  if (!spec.save_images) return;
  write_pgm(dir / "clean.pgm", result.clean);
  for (std::size_t lv = 0; lv < result.degradations.size(); ++lv)
    write_pgm(dir / ("observed_" + num(spec.levels[lv]) + ".pgm"), result.degradations[lv].g);
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    if (result.restored[i].size() > 0)
      write_pgm(dir / ("restored_" + result.rows[i].model + "_" + num(result.rows[i].level) + ".pgm"),
                result.restored[i]);
}

}  // namespace tvsv
