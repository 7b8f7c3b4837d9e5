#include <fstream>
#include <iomanip>
#include <ostream>

#include "kmcert/errors.hpp"
#include "kmcert/experiment.hpp"

namespace kmcert {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ModelKind model_from_string(const std::string& s) {
  if (s == "ball") return ModelKind::Ball;
  if (s == "gmm") return ModelKind::Gmm;
  throw ValidationError("unknown model '" + s + "'");
}

SuccessMetric metric_from_string(const std::string& s) {
  if (s == "sdp_recovery") return SuccessMetric::SdpRecovery;
  if (s == "certificate_valid") return SuccessMetric::CertificateValid;
  if (s == "both") return SuccessMetric::Both;
  throw ValidationError("unknown success metric '" + s + "'");
}

void write_csv(std::ostream& out, const SweepResult& r) {
  out << "delta,trials,successes,rate,sdp_successes,certificate_successes,not_converged,"
         "mean_solve_iters,mean_wall_ms\n";
  out << std::setprecision(17);
  for (const auto& row : r.rows) {
    out << row.delta << ',' << row.trials << ',' << row.successes << ',' << row.rate << ','
        << row.sdp_successes << ',' << row.certificate_successes << ',' << row.not_converged << ','
        << row.mean_solve_iters << ',' << row.mean_wall_ms << '\n';
  }
}

void write_plotdata(std::ostream& out, const SweepResult& r) {
  out << "kind,delta,value\n" << std::setprecision(17);
  for (const auto& row : r.rows) out << "rate," << row.delta << ',' << row.rate << '\n';
  for (std::size_t i = 0; i < r.rows.size() && i < r.isotonic_fit.size(); ++i) {
    out << "isotonic," << r.rows[i].delta << ',' << r.isotonic_fit[i] << '\n';
  }
  // Each annotation is a vertical segment from rate 0 to rate 1.
  auto line = [&](const char* kind, const std::optional<double>& x) {
    if (!x) return;
    out << kind << ',' << *x << ",0\n" << kind << ',' << *x << ",1\n";
  };
  line("sufficient", r.annotations.sufficient);
  line("asymptotic", r.annotations.asymptotic);
  line("necessary", r.annotations.necessary);
  line("conjecture", r.annotations.conjecture_line);
  line("crossing_50", r.annotations.crossing_50);
}

}  // namespace

void to_json(json& j, const SweepConfig& c) {
  j = json{{"model", to_string(c.model)},
           {"support", to_string(c.support)},
           {"variance", c.variance},
           {"geometry", to_string(c.geometry)},
           {"k", c.k},
           {"m", c.m},
           {"n", c.n},
           {"delta_grid", c.delta_grid},
           {"trials", c.trials},
           {"relaxation", to_string(c.relaxation)},
           {"metric", to_string(c.metric)},
           {"eps_rec", c.eps_rec},
           {"seed", c.seed},
           {"threads", c.threads},
           {"solver",
            {{"max_iter", c.solver.max_iter},
             {"tol_primal", c.solver.tol_primal},
             {"tol_obj", c.solver.tol_obj},
             {"size_cap", c.solver.size_cap},
             {"rho0", c.solver.rho0},
             {"rho_factor", c.solver.rho_factor},
             {"rho_ratio", c.solver.rho_ratio},
             {"adapt_every", c.solver.adapt_every},
             {"relaxation", c.solver.relaxation}}}};
}

void from_json(const json& j, SweepConfig& c) {
  if (!j.is_object()) throw ValidationError("sweep config must be a JSON object");
  c.model = model_from_string(j.value("model", to_string(c.model)));
  c.support = support_from_string(j.value("support", to_string(c.support)));
  c.variance = j.value("variance", c.variance);
  c.geometry = shape_from_string(j.value("geometry", to_string(c.geometry)));
  c.k = j.value("k", c.k);
  c.m = j.value("m", c.m);
  c.n = j.value("n", c.n);
  if (j.contains("delta_grid")) {
    c.delta_grid = j.at("delta_grid").get<std::vector<double>>();
  } else if (j.contains("delta_range")) {
    // {"from": a, "to": b, "count": n}: n equispaced values including both ends.
    const json& r = j.at("delta_range");
    const double from = r.at("from").get<double>();
    const double to = r.at("to").get<double>();
    const int count = r.at("count").get<int>();
    if (count < 1) throw ValidationError("delta_range.count must be positive");
    c.delta_grid.clear();
    for (int i = 0; i < count; ++i) {
      c.delta_grid.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
    }
  }
  c.trials = j.value("trials", c.trials);
  c.relaxation = relaxation_from_string(j.value("relaxation", to_string(c.relaxation)));
  c.metric = metric_from_string(j.value("metric", to_string(c.metric)));
  c.eps_rec = j.value("eps_rec", c.eps_rec);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    c.solver.max_iter = s.value("max_iter", c.solver.max_iter);
    c.solver.tol_primal = s.value("tol_primal", c.solver.tol_primal);
    c.solver.tol_obj = s.value("tol_obj", c.solver.tol_obj);
    c.solver.size_cap = s.value("size_cap", c.solver.size_cap);
    c.solver.rho0 = s.value("rho0", c.solver.rho0);
    c.solver.rho_factor = s.value("rho_factor", c.solver.rho_factor);
    c.solver.rho_ratio = s.value("rho_ratio", c.solver.rho_ratio);
    c.solver.adapt_every = s.value("adapt_every", c.solver.adapt_every);
    c.solver.relaxation = s.value("relaxation", c.solver.relaxation);
  }
}

void to_json(json& j, const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"delta", row.delta},
                    {"trials", row.trials},
                    {"successes", row.successes},
                    {"rate", row.rate},
                    {"sdp_successes", row.sdp_successes},
                    {"certificate_successes", row.certificate_successes},
                    {"not_converged", row.not_converged},
                    {"mean_solve_iters", row.mean_solve_iters},
                    {"mean_wall_ms", row.mean_wall_ms}});
  }
  const auto& a = r.annotations;
  j = json{{"config", r.config},
           {"rows", rows},
           {"annotations",
            {{"sufficient", a.sufficient},
             {"necessary", optional_json(a.necessary)},
             {"asymptotic", a.asymptotic},
             {"conjecture_line", optional_json(a.conjecture_line)},
             {"crossing_50", optional_json(a.crossing_50)},
             {"sufficient_applicable", a.sufficient_applicable}}},
           {"isotonic_fit", r.isotonic_fit},
           {"isotonic_max_violation", r.isotonic_max_violation},
           {"log", r.log}};
}

void from_json(const json& j, SweepResult& r) {
  r.config = j.at("config").get<SweepConfig>();
  r.rows.clear();
  for (const auto& row : j.at("rows")) {
    SweepRow s;
    s.delta = row.at("delta").get<double>();
    s.trials = row.at("trials").get<int>();
    s.successes = row.at("successes").get<int>();
    s.rate = row.at("rate").get<double>();
    s.sdp_successes = row.at("sdp_successes").get<int>();
    s.certificate_successes = row.at("certificate_successes").get<int>();
    s.not_converged = row.at("not_converged").get<int>();
    s.mean_solve_iters = row.at("mean_solve_iters").get<double>();
    s.mean_wall_ms = row.at("mean_wall_ms").get<double>();
    r.rows.push_back(s);
  }
  const json& a = j.at("annotations");
  r.annotations.sufficient = a.at("sufficient").get<double>();
  r.annotations.necessary = optional_from(a, "necessary");
  r.annotations.asymptotic = a.at("asymptotic").get<double>();
  r.annotations.conjecture_line = optional_from(a, "conjecture_line");
  r.annotations.crossing_50 = optional_from(a, "crossing_50");
  r.annotations.sufficient_applicable = a.at("sufficient_applicable").get<bool>();
  r.isotonic_fit = j.at("isotonic_fit").get<std::vector<double>>();
  r.isotonic_max_violation = j.at("isotonic_max_violation").get<double>();
  r.log = j.value("log", std::vector<std::string>{});
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "plotdata") return ReportFormat::Plotdata;
  throw ValidationError("unknown report format '" + s + "'");
}

void emit_report(std::ostream& out, const SweepResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: write_csv(out, result); break;
    case ReportFormat::Json: out << json(result).dump(2) << '\n'; break;
    case ReportFormat::Plotdata: write_plotdata(out, result); break;
  }
}

void emit_report(const std::string& path, const SweepResult& result, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  emit_report(out, result, format);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

}  // namespace kmcert
