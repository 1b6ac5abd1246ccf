#pragma once

#include "tvsv/image.hpp"
#include "tvsv/pmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tvsv {

// ---------------------------------------------------------------------------
// r-subproblem: argmin_r (mu/q) ||r||_q^q + (beta_r/2) ||r - v||^2
// ---------------------------------------------------------------------------

/// q = 1: component-wise soft-thresholding with threshold mu / beta_r.
template <typename Scalar>
Image<Scalar> r_step_l1(const Image<Scalar>& v, Scalar mu, Scalar beta_r) {
  const Scalar thresh = mu / beta_r;
  return v.sign() * (v.abs() - thresh).max(Scalar(0));
}

/// q = 2 with fixed mu: uniform shrinkage beta_r / (beta_r + mu).
template <typename Scalar>
Image<Scalar> r_step_l2_fixed(const Image<Scalar>& v, Scalar mu, Scalar beta_r) {
  return (beta_r / (beta_r + mu)) * v;
}

template <typename Scalar>
struct DiscrepancyStep {
  Image<Scalar> r;
  Scalar mu;  // +inf when delta_bar == 0 and v != 0
};

/// q = 2 with mu chosen so that ||r||_2 <= delta_bar (equality when the
/// constraint is active).
template <typename Scalar>
DiscrepancyStep<Scalar> r_step_l2_discrepancy(const Image<Scalar>& v, Scalar beta_r,
                                              Scalar delta_bar) {
  const Scalar vnorm = v.matrix().norm();
  if (vnorm <= delta_bar) return {v, Scalar(0)};
  if (delta_bar == Scalar(0))
    return {Image<Scalar>::Zero(v.rows(), v.cols()), std::numeric_limits<Scalar>::infinity()};
  return {(delta_bar / vnorm) * v, beta_r * (vnorm / delta_bar - Scalar(1))};
}

// ---------------------------------------------------------------------------
// t-subproblem: per pixel argmin_t ||t||^p + (beta_t/2) ||t - w||^2
// ---------------------------------------------------------------------------

/// Scalar objective xi^p + (beta/2) (xi - a)^2 of the radial prox problem.
template <typename Scalar>
Scalar lp_prox_objective(Scalar xi, Scalar a, Scalar p, Scalar beta) {
  const Scalar d = xi - a;
  return std::pow(xi, p) + Scalar(0.5) * beta * d * d;
}

namespace detail {

// Root of f'(x) = p x^{p-1} + beta (x - a) on [lo, hi] where f'(lo) < 0 < f'(hi)
// and f' is monotone increasing. Newton steps that leave the bracket fall back
// to bisection.
template <typename Scalar>
Scalar lp_stationary_point(Scalar a, Scalar p, Scalar beta, Scalar lo, Scalar hi) {
  auto dphi = [&](Scalar x) { return p * std::pow(x, p - 1) + beta * (x - a); };
  auto ddphi = [&](Scalar x) { return p * (p - 1) * std::pow(x, p - 2) + beta; };
  Scalar x = hi;
  for (int it = 0; it < 200; ++it) {
    const Scalar fx = dphi(x);
    if (fx == Scalar(0)) return x;
    if (fx < Scalar(0))
      lo = x;
    else
      hi = x;
    Scalar next = x - fx / ddphi(x);
    if (!(next > lo && next < hi)) next = Scalar(0.5) * (lo + hi);
    if (std::abs(next - x) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * x ||
        hi - lo <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * hi)
      return next;
    x = next;
  }
  return x;
}

}  // namespace detail

/// Minimizer over xi >= 0 of xi^p + (beta/2)(xi - a)^2 for a >= 0, p in (0, 2].
///
/// p = 1 and p = 2 have closed forms. For 1 < p < 2 the objective is strictly
/// convex and the minimizer is the unique stationary point in (0, a). For
/// p < 1 the objective is concave near 0: the only interior candidate is the
/// stationary point to the right of the inflection point
/// ((p(1-p)/beta)^{1/(2-p)}), and it is kept only if it strictly beats xi = 0
/// (ties within 1e-12 go to 0).
template <typename Scalar>
Scalar lp_prox_magnitude(Scalar a, Scalar p, Scalar beta) {
  if (!(a > Scalar(0))) return Scalar(0);
  if (p == Scalar(2)) return beta * a / (beta + Scalar(2));
  if (p == Scalar(1)) return std::max(a - Scalar(1) / beta, Scalar(0));
  if (p > Scalar(1)) return detail::lp_stationary_point(a, p, beta, Scalar(0), a);

  const Scalar inflection = std::pow(p * (Scalar(1) - p) / beta, Scalar(1) / (Scalar(2) - p));
  if (inflection >= a) return Scalar(0);
  const Scalar slope = p * std::pow(inflection, p - 1) + beta * (inflection - a);
  if (slope >= Scalar(0)) return Scalar(0);
  const Scalar xi = detail::lp_stationary_point(a, p, beta, inflection, a);
  const Scalar at_zero = Scalar(0.5) * beta * a * a;
  return lp_prox_objective(xi, a, p, beta) < at_zero - Scalar(1e-12) ? xi : Scalar(0);
}

/// Per-pixel generalized shrinkage of a gradient field: t_i = xi_i w_i / |w_i|.
template <typename Scalar>
GradientField<Scalar> t_step(const GradientField<Scalar>& w, const PMap<Scalar>& pmap,
                             Scalar beta_t) {
  require_same_shape(pmap.values(), w.rows(), w.cols(), "t_step p-map");
  GradientField<Scalar> t(w.rows(), w.cols());
  for (Index i = 0; i < w.h.size(); ++i) {
    const Scalar wh = w.h.data()[i], wv = w.v.data()[i];
    const Scalar a = std::sqrt(wh * wh + wv * wv);
    if (a == Scalar(0)) continue;
    const Scalar scale = lp_prox_magnitude(a, pmap.values().data()[i], beta_t) / a;
    t.h.data()[i] = scale * wh;
    t.v.data()[i] = scale * wv;
  }
  return t;
}

}  // namespace tvsv
