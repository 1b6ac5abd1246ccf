#include "tvsv/pipeline.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace tvsv {

namespace {

constexpr std::array<std::pair<Model, std::string_view>, 6> kModelNames{{
    {Model::kTvL1, "tv-l1"},
    {Model::kTvL2, "tv-l2"},
    {Model::kTvpL1, "tvp-l1"},
    {Model::kTvpL2, "tvp-l2"},
    {Model::kTvpsvL1, "tvpsv-l1"},
    {Model::kTvpsvL2, "tvpsv-l2"},
}};

bool is_tv(Model m) { return m == Model::kTvL1 || m == Model::kTvL2; }

}  // namespace

Model parse_model(std::string_view name) {
  for (const auto& [m, n] : kModelNames)
    if (n == name) return m;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected tv-l1, tv-l2, tvp-l1, tvp-l2, tvpsv-l1, tvpsv-l2)");
}

std::string model_name(Model m) {
  for (const auto& [mm, n] : kModelNames)
    if (mm == m) return std::string(n);
  return "?";
}

Fidelity model_fidelity(Model m) {
  return (m == Model::kTvL1 || m == Model::kTvpL1 || m == Model::kTvpsvL1) ? Fidelity::kL1
                                                                            : Fidelity::kL2;
}

bool model_space_variant(Model m) { return m == Model::kTvpsvL1 || m == Model::kTvpsvL2; }

PMapSource parse_pmap_source(std::string_view name) {
  if (name == "pilot") return PMapSource::kPilot;
  if (name == "observed") return PMapSource::kObserved;
  throw std::invalid_argument("unknown p-map source '" + std::string(name) +
                              "' (expected pilot or observed)");
}

std::string pmap_source_name(PMapSource s) { return s == PMapSource::kPilot ? "pilot" : "observed"; }

void RestoreOptions::validate() const {
  if (!(p > 0.0 && p <= 2.0)) throw std::invalid_argument("p must be in (0, 2]");
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("window size s must be odd and >= 3");
  if (beta_r && !(*beta_r > 0.0)) throw std::invalid_argument("beta_r must be > 0");
  if (beta_t && !(*beta_t > 0.0)) throw std::invalid_argument("beta_t must be > 0");
  if (mu && !(*mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(p_min > 0.0 && p_min < 2.0)) throw std::invalid_argument("p_min must be in (0, 2)");
  if (lut_resolution < 2) throw std::invalid_argument("lookup resolution must be >= 2");
  if (model_fidelity(model) == Fidelity::kL1 && !mu)
    throw std::invalid_argument(model_name(model) + " needs mu (or a mu sweep)");
}

Observation observation_of(const DegradationRecord<double>& rec, NoiseKind kind) {
  Observation obs;
  obs.noise = kind;
  if (kind == NoiseKind::kAwgn)
    obs.sigma = rec.sigma;
  else
    obs.mask = rec.mask;
  return obs;
}

Mask detect_impulses(const ImageD& g) { return (g == 0.0) || (g == 1.0); }

SolverConfig solver_config(const RestoreOptions& opt, const ImageD& g, const Observation& obs) {
  const Fidelity q = model_fidelity(opt.model);
  SolverConfig cfg = SolverConfig::defaults(q);
  if (opt.beta_r) cfg.beta_r = *opt.beta_r;
  if (opt.beta_t) cfg.beta_t = *opt.beta_t;
  cfg.tol = opt.tol;
  cfg.max_iter = opt.max_iter;
  cfg.tau = opt.tau;
  if (opt.mu) {
    cfg.mu = *opt.mu;
  } else if (q == Fidelity::kL2) {
    if (!obs.sigma)
      throw std::invalid_argument(model_name(opt.model) +
                                  " needs the noise sigma for the discrepancy rule, or a fixed mu");
    cfg.delta_bar = noise_level(*obs.sigma, g.size(), opt.tau);
  }
  cfg.validate();
  return cfg;
}

namespace {

void check_pairing(const RestoreOptions& opt, const Observation& obs) {
  if (opt.allow_mismatch) return;
  const Fidelity q = model_fidelity(opt.model);
  if (q == Fidelity::kL2 && obs.noise == NoiseKind::kSaltPepper)
    throw std::invalid_argument(model_name(opt.model) +
                                " is an L2 model but the noise is salt-and-pepper (pass the mismatch override to force it)");
  if (q == Fidelity::kL1 && obs.noise == NoiseKind::kAwgn)
    throw std::invalid_argument(model_name(opt.model) +
                                " is an L1 model but the noise is Gaussian (pass the mismatch override to force it)");
}

struct Prepared {
  SolverConfig cfg;
  ImageD initial;
  PMap<double> pmap;
  std::optional<RestoreReport<double>> pilot;
};

Prepared prepare(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                 const RestoreOptions& opt) {
  opt.validate();
  check_pairing(opt, obs);
  if (obs.mask) require_same_shape(*obs.mask, g.rows(), g.cols(), "observation mask");
  const SolverConfig cfg = solver_config(opt, g, obs);

  ImageD initial = g;
  if (obs.noise == NoiseKind::kSaltPepper)
    initial = spn_prefilter<double>(g, obs.mask ? *obs.mask : detect_impulses(g));

  if (!model_space_variant(opt.model)) {
    const double p = is_tv(opt.model) ? 1.0 : opt.p;
    return {cfg, std::move(initial), PMap<double>::constant(g.rows(), g.cols(), p), std::nullopt};
  }

  const RatioLookup<double> lut(opt.p_min, opt.lut_resolution);
  if (model_fidelity(opt.model) == Fidelity::kL1 || obs.noise == NoiseKind::kSaltPepper ||
      opt.pmap_source == PMapSource::kObserved) {
    const ImageD& source = obs.noise == NoiseKind::kSaltPepper ? initial : g;
    PMap<double> pmap = estimate_pmap(source, opt.window, lut);
    return {cfg, std::move(initial), std::move(pmap), std::nullopt};
  }

  SolveOptions<double> pilot_opts;
  pilot_opts.initial = initial;
  RestoreReport<double> pilot =
      solve(g, k, PMap<double>::constant(g.rows(), g.cols(), 1.0), cfg, pilot_opts);
  PMap<double> pmap = estimate_pmap(pilot.u, opt.window, lut);
  return {cfg, std::move(initial), std::move(pmap), std::move(pilot)};
}

}  // namespace

PMap<double> pipeline_pmap(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                           const RestoreOptions& opt) {
  return prepare(g, k, obs, opt).pmap;
}

RestoreResult restore(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                      const RestoreOptions& opt, const SolveOptions<double>& solve_opts) {
  Prepared prep = prepare(g, k, obs, opt);
  SolveOptions<double> so = solve_opts;
  if (!so.initial) so.initial = prep.initial;
  RestoreReport<double> report = solve(g, k, prep.pmap, prep.cfg, so);
  return {std::move(report), std::move(prep.pmap), std::move(prep.initial),
          prep.cfg.delta_bar.value_or(0.0), std::move(prep.pilot)};
}

SweepResult sweep_mu(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                     const RestoreOptions& opt, const std::vector<double>& grid,
                     const ImageD& clean) {
  if (grid.empty()) throw std::invalid_argument("mu sweep: empty grid");
  require_same_shape(clean, g.rows(), g.cols(), "mu sweep reference image");
  SweepResult out;
  for (double mu : grid) {
    RestoreOptions o = opt;
    o.mu = mu;
    RestoreResult res = restore(g, k, obs, o);
    const double score = isnr(g, clean, res.report.u);
    out.entries.push_back({mu, score, std::move(res)});
    if (out.entries.size() == 1 || score > out.entries[out.best].isnr) out.best = out.entries.size() - 1;
  }
  return out;
}

}  // namespace tvsv
