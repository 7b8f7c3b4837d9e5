#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kmcert/models.hpp"
#include "kmcert/sdp.hpp"

namespace kmcert {

enum class ModelKind { Ball, Gmm };
enum class SuccessMetric { SdpRecovery, CertificateValid, Both };

std::string to_string(ModelKind k);
std::string to_string(SuccessMetric m);

/// One phase-transition sweep: for every delta, `trials` datasets are drawn,
/// solved, rounded and optionally certified against their truth labels.
struct SweepConfig {
  ModelKind model = ModelKind::Ball;
  Support support = Support::UniformSphere;  // ball model
  double variance = 1.0;                     // mixture model: covariance = variance * I
  CenterShape geometry = CenterShape::Circle;
  int k = 2;
  int m = 2;
  int n = 30;  // points per cluster
  std::vector<double> delta_grid;
  int trials = 20;
  Relaxation relaxation = Relaxation::PengWei;
  SuccessMetric metric = SuccessMetric::SdpRecovery;
  double eps_rec = 1e-3;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 picks hardware concurrency
  SolverOptions solver;

  void validate() const;
};

void to_json(nlohmann::json& j, const SweepConfig& c);
void from_json(const nlohmann::json& j, SweepConfig& c);

struct SweepRow {
  double delta = 0.0;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  int sdp_successes = 0;
  int certificate_successes = 0;
  int not_converged = 0;
  double mean_solve_iters = 0.0;
  double mean_wall_ms = 0.0;  // measured; not part of the deterministic output
};

struct SweepAnnotations {
  double sufficient = 0.0;
  std::optional<double> necessary;
  double asymptotic = 0.0;
  std::optional<double> conjecture_line;  // 2 + 2/m, ball model only
  std::optional<double> crossing_50;      // first delta where the isotonic fit reaches 1/2
  bool sufficient_applicable = true;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;
  SweepAnnotations annotations;
  std::vector<double> isotonic_fit;
  double isotonic_max_violation = 0.0;
  std::vector<std::string> log;  // one line per trial that failed to converge
};

void to_json(nlohmann::json& j, const SweepResult& r);
void from_json(const nlohmann::json& j, SweepResult& r);

/// Draws the dataset for one trial; exposed so single trials can be replayed.
Dataset sweep_trial_dataset(const SweepConfig& cfg, std::size_t delta_index, int trial);

SweepResult run_sweep(const SweepConfig& cfg);

/// Pool-adjacent-violators fit of a non-decreasing sequence (equal weights).
std::vector<double> isotonic_fit(const std::vector<double>& values);

enum class ReportFormat { Csv, Json, Plotdata };

ReportFormat report_format_from_string(const std::string& s);

void emit_report(std::ostream& out, const SweepResult& result, ReportFormat format);
/// Throws IoError naming the path.
void emit_report(const std::string& path, const SweepResult& result, ReportFormat format);

}  // namespace kmcert
