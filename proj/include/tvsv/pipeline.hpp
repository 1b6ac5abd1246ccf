#pragma once

#include "tvsv/blur.hpp"
#include "tvsv/degrade.hpp"
#include "tvsv/image.hpp"
#include "tvsv/pmap.hpp"
#include "tvsv/solver.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tvsv {

enum class Model { kTvL1, kTvL2, kTvpL1, kTvpL2, kTvpsvL1, kTvpsvL2 };

Model parse_model(std::string_view name);
std::string model_name(Model m);
Fidelity model_fidelity(Model m);
bool model_space_variant(Model m);

// Where the q = 2 p-map is estimated from. q = 1 always uses the pre-filtered image.
enum class PMapSource { kPilot, kObserved };

PMapSource parse_pmap_source(std::string_view name);
std::string pmap_source_name(PMapSource s);

struct RestoreOptions {
  Model model = Model::kTvpsvL2;
  double p = 0.8;   // global exponent of the tvp models
  int window = 3;   // p-map neighborhood size
  std::optional<double> beta_r, beta_t;
  std::optional<double> mu;  // required for q = 1; for q = 2 replaces the discrepancy rule
  double tau = 1.0;
  double tol = 1e-4;
  int max_iter = 500;
  double p_min = 0.05;
  int lut_resolution = 4096;
  PMapSource pmap_source = PMapSource::kPilot;
  bool allow_mismatch = false;  // permit L2 on SPN or L1 on AWGN

  void validate() const;
};

/// What is known about the observation besides g itself.
struct Observation {
  NoiseKind noise = NoiseKind::kAwgn;
  std::optional<double> sigma;  // AWGN level, needed by the discrepancy rule
  std::optional<Mask> mask;     // SPN support; detected as {0, 1} pixels when absent
};

Observation observation_of(const DegradationRecord<double>& rec, NoiseKind kind);

/// Pixels equal to exactly 0 or 1.
Mask detect_impulses(const ImageD& g);

SolverConfig solver_config(const RestoreOptions& opt, const ImageD& g, const Observation& obs);

struct RestoreResult {
  RestoreReport<double> report;
  PMap<double> pmap;
  ImageD initial;
  double delta_bar = 0.0;  // 0 unless the discrepancy rule is active
  std::optional<RestoreReport<double>> pilot;
};

/// Pre-filter (SPN), p-map, and ADMM solve for one model.
RestoreResult restore(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                      const RestoreOptions& opt, const SolveOptions<double>& solve_opts = {});

/// The p-map the restore pipeline would use, without the final solve.
PMap<double> pipeline_pmap(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                           const RestoreOptions& opt);

struct SweepEntry {
  double mu = 0.0;
  double isnr = 0.0;
  RestoreResult result;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // grid order
  std::size_t best = 0;             // first argmax of ISNR
};

/// Runs restore for each mu in grid and picks the highest ISNR against the clean image.
SweepResult sweep_mu(const ImageD& g, const BlurOperator<double>& k, const Observation& obs,
                     const RestoreOptions& opt, const std::vector<double>& grid,
                     const ImageD& clean);

}  // namespace tvsv
