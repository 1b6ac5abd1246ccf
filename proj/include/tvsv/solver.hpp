#pragma once

#include "tvsv/blur.hpp"
#include "tvsv/differences.hpp"
#include "tvsv/image.hpp"
#include "tvsv/pmap.hpp"
#include "tvsv/prox.hpp"
#include "tvsv/spectral.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvsv {

enum class Fidelity { kL1 = 1, kL2 = 2 };

/// ADMM parameters for the TV_p^sv-L_q models.
///
/// L1 always takes a fixed mu. L2 takes either a fixed mu or a noise level
/// delta_bar, in which case mu is re-chosen at every iteration by the
/// discrepancy rule.
struct SolverConfig {
  Fidelity fidelity = Fidelity::kL2;
  double beta_r = 50.0;
  double beta_t = 50.0;
  std::optional<double> mu;
  std::optional<double> delta_bar;
  double tol = 1e-4;
  int max_iter = 500;
  double tau = 1.0;

  /// (beta_t, beta_r) = (10, 5) for L1 and (50, 50) for L2.
  static SolverConfig defaults(Fidelity q) {
    SolverConfig cfg;
    cfg.fidelity = q;
    if (q == Fidelity::kL1) {
      cfg.beta_t = 10.0;
      cfg.beta_r = 5.0;
    }
    return cfg;
  }
  static SolverConfig l2_discrepancy(double delta_bar) {
    SolverConfig cfg = defaults(Fidelity::kL2);
    cfg.delta_bar = delta_bar;
    return cfg;
  }
  static SolverConfig l2_fixed(double mu) {
    SolverConfig cfg = defaults(Fidelity::kL2);
    cfg.mu = mu;
    return cfg;
  }
  static SolverConfig l1(double mu) {
    SolverConfig cfg = defaults(Fidelity::kL1);
    cfg.mu = mu;
    return cfg;
  }

  bool auto_mu() const { return fidelity == Fidelity::kL2 && !mu.has_value(); }

  void validate() const {
    if (!(beta_r > 0.0) || !(beta_t > 0.0))
      throw std::invalid_argument("solver: beta_r and beta_t must be > 0");
    if (mu && !(*mu >= 0.0)) throw std::invalid_argument("solver: mu must be >= 0");
    if (fidelity == Fidelity::kL1 && !mu)
      throw std::invalid_argument("solver: the L1 fidelity needs an explicit mu");
    if (fidelity == Fidelity::kL2 && !mu && !delta_bar)
      throw std::invalid_argument("solver: L2 fidelity needs mu or a noise level delta_bar");
    if (fidelity == Fidelity::kL2 && mu && delta_bar)
      throw std::invalid_argument("solver: give either mu or delta_bar, not both");
    if (delta_bar && !(*delta_bar >= 0.0))
      throw std::invalid_argument("solver: delta_bar must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
  }
};

/// Expected l2 norm of an n-pixel AWGN realization, scaled by tau.
inline double noise_level(double sigma, Index n, double tau = 1.0) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise_level: sigma must be >= 0");
  return tau * sigma * std::sqrt(double(n));
}

/// Primal and dual iterates of the splitting r = Ku - g, t = Du.
template <typename Scalar>
struct AdmmState {
  Image<Scalar> u;
  Image<Scalar> ku;
  GradientField<Scalar> du;
  Image<Scalar> r;
  GradientField<Scalar> t;
  Image<Scalar> lambda_r;
  GradientField<Scalar> lambda_t;
  double mu = 0.0;
  int iter = 0;
};

struct IterationInfo {
  int iter = 0;
  double rel_change = 0.0;
  double r_norm = 0.0;
  double mu = 0.0;
};

template <typename Scalar>
struct RestoreReport {
  Image<Scalar> u;
  int iterations = 0;
  bool converged = false;  // false means max_iter was reached
  double rel_change = 0.0;
  double r_norm = 0.0;        // ||r|| at the last iterate
  double discrepancy = 0.0;   // ||Ku - g||
  double r_constraint = 0.0;  // ||r - (Ku - g)||
  double t_constraint = 0.0;  // ||t - Du||
  bool mu_unbounded = false;  // discrepancy rule hit delta_bar = 0 with v != 0
  std::vector<double> mu_history;
  std::vector<IterationInfo> log;
  double wall_seconds = 0.0;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int iteration)
      : std::runtime_error("solver diverged: non-finite iterate at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Transform of the u-subproblem solution:
///   (beta_t D^T D + beta_r K^T K) u = D^T (beta_t t - lambda_t) + K^T (beta_r (r + g) - lambda_r)
template <typename Scalar>
ComplexGrid<Scalar> u_step_spectrum(const Image<Scalar>& r, const GradientField<Scalar>& t,
                                    const Image<Scalar>& lambda_r,
                                    const GradientField<Scalar>& lambda_t, const Image<Scalar>& g,
                                    const SpectralMultipliers<Scalar>& spec, Scalar beta_r,
                                    Scalar beta_t) {
  if (!(beta_r > Scalar(0)))
    throw std::invalid_argument("u_step: beta_r must be > 0 (system is singular at DC)");
  require_same_shape(g, spec.rows(), spec.cols(), "u_step");
  const Image<Scalar> d_rhs = divergence<Scalar>(beta_t * t - lambda_t);
  const Image<Scalar> k_rhs = beta_r * (r + g) - lambda_r;
  const ComplexGrid<Scalar> rhs = fft2(d_rhs) + spec.blur.conjugate() * fft2(k_rhs);
  const Image<Scalar> denom = beta_t * spec.laplacian_symbol() + beta_r * spec.blur.abs2();
  return rhs / denom.template cast<std::complex<Scalar>>();
}

template <typename Scalar>
Image<Scalar> u_step(const Image<Scalar>& r, const GradientField<Scalar>& t,
                     const Image<Scalar>& lambda_r, const GradientField<Scalar>& lambda_t,
                     const Image<Scalar>& g, const SpectralMultipliers<Scalar>& spec,
                     Scalar beta_r, Scalar beta_t) {
  return ifft2_real<Scalar>(u_step_spectrum(r, t, lambda_r, lambda_t, g, spec, beta_r, beta_t));
}

/// Feasible start: r = Ku0 - g, t = Du0, zero multipliers.
template <typename Scalar>
AdmmState<Scalar> admm_init(const Image<Scalar>& u0, const Image<Scalar>& g,
                            const BlurOperator<Scalar>& k) {
  AdmmState<Scalar> s;
  s.u = u0;
  s.ku = k.apply(u0);
  s.du = gradient(u0);
  s.r = s.ku - g;
  s.t = s.du;
  s.lambda_r = Image<Scalar>::Zero(g.rows(), g.cols());
  s.lambda_t = GradientField<Scalar>(g.rows(), g.cols());
  return s;
}

/// One ADMM cycle in the order r, t, u, lambda_r, lambda_t.
template <typename Scalar>
IterationInfo admm_iteration(AdmmState<Scalar>& s, const Image<Scalar>& g,
                             const SpectralMultipliers<Scalar>& spec, const PMap<Scalar>& pmap,
                             const SolverConfig& cfg) {
  const Scalar beta_r = Scalar(cfg.beta_r), beta_t = Scalar(cfg.beta_t);

  const Image<Scalar> v = s.ku - g + s.lambda_r / beta_r;
  if (cfg.fidelity == Fidelity::kL1) {
    s.mu = *cfg.mu;
    s.r = r_step_l1<Scalar>(v, Scalar(s.mu), beta_r);
  } else if (cfg.mu) {
    s.mu = *cfg.mu;
    s.r = r_step_l2_fixed<Scalar>(v, Scalar(s.mu), beta_r);
  } else {
    auto step = r_step_l2_discrepancy<Scalar>(v, beta_r, Scalar(*cfg.delta_bar));
    s.r = std::move(step.r);
    s.mu = double(step.mu);
  }

  const GradientField<Scalar> w = s.du + (Scalar(1) / beta_t) * s.lambda_t;
  s.t = t_step(w, pmap, beta_t);

  const ComplexGrid<Scalar> u_hat =
      u_step_spectrum(s.r, s.t, s.lambda_r, s.lambda_t, g, spec, beta_r, beta_t);
  Image<Scalar> u_next = ifft2_real<Scalar>(u_hat);
  s.ku = ifft2_real<Scalar>(spec.blur * u_hat);
  s.du = gradient(u_next);

  s.lambda_r -= beta_r * (s.r - (s.ku - g));
  s.lambda_t -= beta_t * (s.t - s.du);

  IterationInfo info;
  info.iter = ++s.iter;
  const double step = double((u_next - s.u).matrix().norm());
  const double prev = double(s.u.matrix().norm());
  info.rel_change = prev > 0.0 ? step / prev
                               : (step == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  info.r_norm = double(s.r.matrix().norm());
  info.mu = s.mu;
  s.u = std::move(u_next);

  if (!s.u.allFinite() || !s.lambda_r.allFinite() || !s.lambda_t.allFinite())
    throw DivergenceError(info.iter);
  return info;
}

template <typename Scalar>
struct SolveOptions {
  std::optional<Image<Scalar>> initial;  // defaults to g
  std::function<void(const IterationInfo&)> on_iteration;
};

/// Runs ADMM until ||u^k - u^{k-1}|| / ||u^{k-1}|| < tol or max_iter.
template <typename Scalar>
RestoreReport<Scalar> solve(const Image<Scalar>& g, const BlurOperator<Scalar>& k,
                            const PMap<Scalar>& pmap, const SolverConfig& cfg,
                            const SolveOptions<Scalar>& opts = {}) {
  cfg.validate();
  require_same_shape(g, k.rows(), k.cols(), "solve: observation vs blur operator");
  require_same_shape(pmap.values(), g.rows(), g.cols(), "solve: p-map");
  if (opts.initial) require_same_shape(*opts.initial, g.rows(), g.cols(), "solve: initial image");

  const auto start = std::chrono::steady_clock::now();
  const SpectralMultipliers<Scalar> spec = spectral_multipliers(k, g.rows(), g.cols());
  AdmmState<Scalar> state = admm_init<Scalar>(opts.initial ? *opts.initial : g, g, k);

  RestoreReport<Scalar> report;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const IterationInfo info = admm_iteration(state, g, spec, pmap, cfg);
    report.log.push_back(info);
    if (cfg.auto_mu()) {
      report.mu_history.push_back(info.mu);
      if (std::isinf(info.mu)) report.mu_unbounded = true;
    }
    if (opts.on_iteration) opts.on_iteration(info);
    report.rel_change = info.rel_change;
    if (info.rel_change < cfg.tol) {
      report.converged = true;
      break;
    }
  }

  report.iterations = state.iter;
  report.r_norm = double(state.r.matrix().norm());
  report.discrepancy = double((state.ku - g).matrix().norm());
  report.r_constraint = double((state.r - (state.ku - g)).matrix().norm());
  report.t_constraint = double((state.t - state.du).norm());
  report.u = std::move(state.u);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tvsv
