#pragma once

#include "tvsv/degrade.hpp"
#include "tvsv/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tvsv {

/// A full-factorial batch: every model against every noise level of one image.
struct ExperimentSpec {
  std::string image_path;             // empty means use the phantom
  std::string phantom = "geometric";
  int rows = 64, cols = 64;           // phantom size
  int blur_band = 5;
  double blur_sigma = 1.0;
  NoiseKind noise = NoiseKind::kAwgn;
  bool levels_are_sigma = false;      // AWGN levels given as sigma instead of BSNR
  std::vector<double> levels;         // BSNR (dB), sigma, or gamma
  std::vector<Model> models;
  RestoreOptions restore;             // model field is ignored
  std::vector<double> mu_grid;        // swept per cell, argmax ISNR kept
  std::uint64_t seed = 0;
  std::string out_dir = "tvsv-out";
  bool save_images = false;

  void validate() const;
};

/// Parses TOML (.toml) or JSON (.json) experiment files.
ExperimentSpec parse_experiment_spec(const std::string& text, bool json);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ReportRow {
  std::string model;
  std::string noise;
  double level = 0.0;
  double bsnr = 0.0;  // realized
  double isnr = 0.0;
  int iterations = 0;
  bool converged = false;
  double rel_change = 0.0;
  double discrepancy = 0.0;
  double delta_bar = 0.0;
  double mu = 0.0;      // fixed or swept mu; final mu of the discrepancy rule
  double mu_min = 0.0;
  double mu_max = 0.0;
  double wall_seconds = 0.0;
  std::string status = "ok";  // ok, diverged, or error
  std::string message;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;  // level-major, then model, in spec order
  std::vector<DegradationRecord<double>> degradations;
  std::vector<ImageD> restored;  // parallel to rows (empty on failure)
  ImageD clean;
  bool any_failed() const;
};

/// Worker count from TVSV_THREADS (default: hardware concurrency, at least 1).
unsigned experiment_threads();

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads);

/// Fixed column order; contains no timing so reruns compare byte-for-byte.
std::string report_csv(const std::vector<ReportRow>& rows);

/// Levels down, models across, ISNR in each cell.
std::string isnr_table_csv(const ExperimentSpec& spec, const std::vector<ReportRow>& rows);

std::string report_json(const ExperimentSpec& spec, const ExperimentResult& result);

/// Writes report.csv, isnr_table.csv, report.json (and images if requested) to spec.out_dir.
void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace tvsv
