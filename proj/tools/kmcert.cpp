#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kmcert/baselines.hpp"
#include "kmcert/certificate.hpp"
#include "kmcert/dataset_io.hpp"
#include "kmcert/errors.hpp"
#include "kmcert/experiment.hpp"
#include "kmcert/models.hpp"
#include "kmcert/proximity.hpp"
#include "kmcert/sdp.hpp"

using nlohmann::json;
using namespace kmcert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

void write_json(const json& j, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw IoError(out_path, "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(out_path, "write failed");
}

std::vector<int> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::vector<int> labels;
  std::string token;
  while (in >> token) {
    std::stringstream fields(token);
    std::string field;
    while (std::getline(fields, field, ',')) {
      if (field.empty()) continue;
      try {
        std::size_t used = 0;
        labels.push_back(std::stoi(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ValidationError(path + ": non-integer label '" + field + "'");
      }
    }
  }
  return labels;
}

/// Labels from --labels when given, else the dataset's own label column.
Partition load_partition(const Dataset& data, const std::string& labels_path) {
  std::vector<int> labels;
  if (!labels_path.empty()) {
    labels = read_labels_file(labels_path);
  } else if (data.truth_labels) {
    labels = *data.truth_labels;
  } else {
    throw ValidationError("dataset has no label column; pass --labels");
  }
  if (static_cast<int>(labels.size()) != data.size()) {
    throw DimensionMismatch("got " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(data.size()) + " points");
  }
  return Partition::from_labels(std::move(labels));
}

json residuals_json(const Residuals& r) {
  return {{"psd", r.psd_violation},
          {"nonneg", r.nonneg_violation},
          {"rowsum", r.rowsum_violation},
          {"trace", r.trace_violation}};
}

json bound_json(const BoundReport& r) {
  const BoundParams& p = r.params;
  return {{"formula_id", r.formula_id},
          {"delta_sufficient", r.delta_sufficient},
          {"delta_necessary", r.delta_necessary ? json(*r.delta_necessary) : json(nullptr)},
          {"delta_asymptotic", r.delta_asymptotic},
          {"applicable", r.applicable},
          {"params",
           {{"k", p.k},
            {"m", p.m},
            {"N", p.N},
            {"w_min", p.w_min},
            {"sigma_max", p.sigma_max},
            {"gamma", p.gamma},
            {"t", p.t},
            {"s", p.s},
            {"q", p.q}}}};
}

json partition_json(const Partition& part, double objective) {
  return {{"labels", part.labels()}, {"k", part.k()}, {"sizes", part.sizes()}, {"objective", objective}};
}

struct CommonArgs {
  std::string data;
  std::string labels;
  std::string out;
};

int run_check(const CommonArgs& a, const std::string& mode) {
  const Dataset data = read_dataset_csv(a.data);
  const Partition part = load_partition(data, a.labels);
  const ClusterGeometry geom = compute_geometry(data, part);
  const PairStats pairs = compute_pair_stats(geom);
  ProximityReport rep;
  if (mode == "general") {
    rep = check_proximity_general(geom, pairs);
  } else if (mode == "balanced") {
    rep = check_proximity_balanced(geom, pairs);
  } else if (mode == "necessary_general") {
    rep = check_necessary_general(geom, pairs);
  } else {
    rep = check_necessary_balanced(geom, pairs);
  }
  json jp = json::array();
  for (const PairMargin& p : rep.pairs) {
    jp.push_back({{"a", p.a}, {"b", p.b}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"margin", p.margin}});
  }
  write_json({{"mode", to_string(rep.mode)}, {"satisfied", rep.satisfied}, {"pairs", jp}}, a.out);
  return kExitOk;
}

int run_certify(const CommonArgs& a, const std::string& variant) {
  const Dataset data = read_dataset_csv(a.data);
  const Partition part = load_partition(data, a.labels);
  const CertificateKernels kernels = build_kernels(data, part);
  const DualCertificate c = variant == "balanced" ? build_certificate_balanced(kernels)
                                                  : build_certificate_pw(kernels);
  const CertificateVerdicts& v = c.verdicts;
  json j{{"variant", to_string(c.variant)},
         {"valid", v.valid},
         {"unique", v.valid},
         {"optimal", v.optimal},
         {"q_min_eig", v.q_min_eig},
         {"b_min_offdiag", v.b_min_offdiag},
         {"q_row_annihilation", v.q_row_annihilation},
         {"reconstruction_error", v.reconstruction_error},
         {"duality_gap", c.duality_gap()}};
  if (c.variant == CertificateVariant::PengWei) {
    j["z"] = c.z;
  } else {
    j["z_a"] = std::vector<double>(c.z_blocks.data(), c.z_blocks.data() + c.z_blocks.size());
  }
  write_json(j, a.out);
  return kExitOk;
}

int run_solve(const CommonArgs& a, int k, const std::string& relaxation, const std::string& dump_z,
              const SolverOptions& opts, std::uint64_t seed) {
  const Dataset data = read_dataset_csv(a.data);
  std::optional<Partition> ref;
  if (!a.labels.empty() || data.truth_labels) ref = load_partition(data, a.labels);
  if (k <= 0) {
    if (!ref) throw ValidationError("--k is required when the dataset carries no labels");
    k = ref->k();
  }
  SdpProblem prob{squared_distances(data.points), k, relaxation_from_string(relaxation)};
  SdpSolution sol;
  try {
    sol = solve(prob, opts);
  } catch (const NotConverged& e) {
    sol = e.best();
  }
  if (!dump_z.empty()) write_matrix_csv(dump_z, sol.Z);

  json j{{"objective", sol.objective},
         {"residuals", residuals_json(sol.residuals)},
         {"iterations", sol.iterations},
         {"converged", sol.converged}};
  RoundingOptions ropts;
  ropts.seed = seed;
  try {
    const RoundedPartition r = round_solution(sol.Z, k, ref, ropts);
    j["rounded_labels"] = r.part.labels();
    j["recovery_distance"] = r.recovery_distance;
    j["exact"] = r.exact;
    if (ref) j["matches_labels"] = r.part.same_clusters(*ref);
  } catch (const RoundingAmbiguous& e) {
    j["rounded_labels"] = nullptr;
    j["recovery_distance"] = nullptr;
    j["rounding_error"] = e.what();
  }
  write_json(j, a.out);
  return sol.converged ? kExitOk : kExitFailure;
}

struct GenerateArgs {
  std::string model = "ball";
  std::string support = "uniform_sphere";
  std::string geometry = "circle";
  int k = 2;
  int m = 2;
  int n = 30;
  double delta = 3.0;
  double variance = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& g) {
  const Eigen::MatrixXd centers = center_geometry(shape_from_string(g.geometry), g.k, g.delta, g.m);
  const std::vector<int> sizes(static_cast<std::size_t>(g.k), g.n);
  Dataset data;
  json spec{{"model", g.model}, {"geometry", g.geometry}, {"k", g.k}, {"m", g.m},
            {"n", g.n},         {"delta", g.delta},       {"seed", g.seed}};
  if (g.model == "ball") {
    data = sample_ball_model(BallModelSpec{centers, sizes, {support_from_string(g.support)}, g.seed});
    spec["support"] = g.support;
  } else if (g.model == "gmm") {
    GmmSpec s;
    s.centers = centers;
    s.covariances = {g.variance * Eigen::MatrixXd::Identity(g.m, g.m)};
    s.sizes = sizes;
    s.seed = g.seed;
    data = sample_gmm(s);
    spec["variance"] = g.variance;
  } else {
    throw ValidationError("unknown model '" + g.model + "'");
  }
  json jc = json::array();
  for (Eigen::Index a = 0; a < centers.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index c = 0; c < centers.cols(); ++c) row.push_back(centers(a, c));
    jc.push_back(row);
  }
  spec["centers"] = jc;

  if (g.out.empty() || g.out == "-") {
    write_dataset_csv(std::cout, data);
    std::cerr << spec.dump() << '\n';
  } else {
    write_dataset_csv(g.out, data);
    write_json(spec, g.out + ".json");
  }
  return kExitOk;
}

int run_bounds(const std::string& model, int k, int m, int N, double w_min, double sigma,
               double gamma, const std::string& support, const std::string& out) {
  if (sigma < 0.0) sigma = std::sqrt(support_variance(support_from_string(support), m));
  if (w_min <= 0.0) w_min = 1.0 / k;
  const BoundReport r =
      model == "gmm" ? gmm_bound(k, m, N, w_min, sigma) : sbm_bounds(k, m, N, w_min, sigma, gamma);
  write_json(bound_json(r), out);
  return kExitOk;
}

int run_oracle(const CommonArgs& a, int k, double limit) {
  const Dataset data = read_dataset_csv(a.data);
  const BruteForceResult r = brute_force_kmeans(data, k, limit);
  json j = partition_json(r.best_partition, r.best_objective);
  j["unique"] = r.unique;
  j["second_objective"] = std::isfinite(r.second_objective) ? json(r.second_objective) : json(nullptr);
  j["partitions_enumerated"] = r.partitions_enumerated;
  write_json(j, a.out);
  return kExitOk;
}

int run_lloyd(const CommonArgs& a, int k, std::uint64_t seed, int max_iter) {
  const Dataset data = read_dataset_csv(a.data);
  const LloydResult r = lloyd_detailed(data.points, k, seed, max_iter);
  json j = partition_json(r.part, r.objective);
  j["iterations"] = r.iterations;
  j["stabilized"] = r.stabilized;
  write_json(j, a.out);
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, std::optional<std::uint64_t> seed,
                  const std::string& out, const std::string& format) {
  std::ifstream in(config_path);
  if (!in) throw IoError(config_path, "cannot open for reading");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(config_path + ": " + e.what());
  }
  SweepConfig cfg;
  try {
    cfg = j.get<SweepConfig>();
  } catch (const json::exception& e) {
    throw ValidationError(config_path + ": " + e.what());
  }
  if (seed) cfg.seed = *seed;
  const ReportFormat fmt = report_format_from_string(format);
  const SweepResult result = run_sweep(cfg);
  for (const std::string& line : result.log) std::cerr << line << '\n';
  if (out.empty() || out == "-") {
    emit_report(std::cout, result, fmt);
  } else {
    emit_report(out, result, fmt);
  }
  return kExitOk;
}

void add_data_options(CLI::App* cmd, CommonArgs& a, bool labels = true) {
  cmd->add_option("--data,-d", a.data, "Dataset CSV")->required();
  if (labels) cmd->add_option("--labels,-l", a.labels, "Label file (defaults to the label column)");
  cmd->add_option("--out,-o", a.out, "Output path (stdout when omitted)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact-recovery checks, certificates and SDP experiments for k-means"};
  app.require_subcommand(1);

  CommonArgs common;

  std::string check_mode = "general";
  auto* check = app.add_subcommand("check", "Evaluate a proximity condition for a labelled dataset");
  add_data_options(check, common);
  check->add_option("--mode", check_mode)
      ->check(CLI::IsMember({"general", "balanced", "necessary_general", "necessary_balanced"}));

  std::string cert_variant = "pw";
  auto* certify = app.add_subcommand("certify", "Build and verify a dual certificate");
  add_data_options(certify, common);
  certify->add_option("--variant", cert_variant)->check(CLI::IsMember({"pw", "balanced"}));

  int solve_k = 0;
  std::string relaxation = "peng_wei";
  std::string dump_z;
  std::uint64_t solve_seed = 0;
  SolverOptions solver;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the SDP relaxation and round");
  add_data_options(solve_cmd, common);
  solve_cmd->add_option("--k", solve_k, "Number of clusters (defaults to the label count)");
  solve_cmd->add_option("--relaxation", relaxation)
      ->check(CLI::IsMember({"peng_wei", "pw", "amini_levina", "al", "balanced"}));
  solve_cmd->add_option("--dump-z", dump_z, "Write Z as CSV");
  solve_cmd->add_option("--max-iter", solver.max_iter);
  solve_cmd->add_option("--tol", solver.tol_primal);
  solve_cmd->add_option("--seed", solve_seed, "Seed for the rounding fallback");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a synthetic dataset");
  generate->add_option("--model", gen.model)->check(CLI::IsMember({"ball", "gmm"}));
  generate->add_option("--support", gen.support)
      ->check(CLI::IsMember({"uniform_ball", "uniform_sphere", "equispaced_circle"}));
  generate->add_option("--geometry", gen.geometry)->check(CLI::IsMember({"circle", "line", "hive"}));
  generate->add_option("--k", gen.k);
  generate->add_option("--m", gen.m);
  generate->add_option("--n", gen.n, "Points per cluster");
  generate->add_option("--delta", gen.delta, "Minimum center separation");
  generate->add_option("--variance", gen.variance, "Mixture covariance scale");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out,-o", gen.out, "CSV path; the spec goes to <path>.json");

  std::string bound_model = "sbm";
  std::string bound_support = "uniform_ball";
  int bk = 2, bm = 2, bN = 1000;
  double w_min = 0.0, sigma = -1.0, gamma = 1.0;
  auto* bounds = app.add_subcommand("bounds", "Evaluate separation bounds");
  bounds->add_option("--model", bound_model)->check(CLI::IsMember({"sbm", "gmm"}));
  bounds->add_option("--k", bk);
  bounds->add_option("--m", bm);
  bounds->add_option("--N", bN);
  bounds->add_option("--w-min", w_min, "Smallest cluster weight (defaults to 1/k)");
  bounds->add_option("--sigma-max", sigma, "Defaults to the support's standard deviation");
  bounds->add_option("--support", bound_support);
  bounds->add_option("--gamma", gamma);
  bounds->add_option("--out,-o", common.out);

  int oracle_k = 2;
  double limit = 1e7;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive k-means on a tiny dataset");
  add_data_options(oracle, common, false);
  oracle->add_option("--k", oracle_k)->required();
  oracle->add_option("--limit", limit, "Largest number of partitions to enumerate");

  int lloyd_k = 2, lloyd_iter = 300;
  std::uint64_t lloyd_seed = 0;
  auto* lloyd_cmd = app.add_subcommand("lloyd", "Lloyd's algorithm with k-means++ seeding");
  add_data_options(lloyd_cmd, common, false);
  lloyd_cmd->add_option("--k", lloyd_k)->required();
  lloyd_cmd->add_option("--seed", lloyd_seed);
  lloyd_cmd->add_option("--max-iter", lloyd_iter);

  std::string config_path, format = "json";
  std::uint64_t sweep_seed = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a phase-transition sweep");
  sweep->add_option("--config,-c", config_path, "Sweep configuration JSON")->required();
  auto* seed_opt = sweep->add_option("--seed", sweep_seed, "Overrides the config seed");
  sweep->add_option("--out,-o", common.out);
  sweep->add_option("--format,-f", format)->check(CLI::IsMember({"csv", "json", "plotdata"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*check) return run_check(common, check_mode);
    if (*certify) return run_certify(common, cert_variant);
    if (*solve_cmd) return run_solve(common, solve_k, relaxation, dump_z, solver, solve_seed);
    if (*generate) return run_generate(gen);
    if (*bounds) {
      return run_bounds(bound_model, bk, bm, bN, w_min, sigma, gamma, bound_support, common.out);
    }
    if (*oracle) return run_oracle(common, oracle_k, limit);
    if (*lloyd_cmd) return run_lloyd(common, lloyd_k, lloyd_seed, lloyd_iter);
    if (*sweep) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = sweep_seed;
      return run_sweep_cmd(config_path, seed, common.out, format);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
