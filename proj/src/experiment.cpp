#include "kmcert/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "kmcert/certificate.hpp"
#include "kmcert/errors.hpp"
#include "kmcert/random.hpp"

namespace kmcert {

namespace {

constexpr std::uint64_t kTrialTag = 0x7217;

struct TrialOutcome {
  bool sdp_ok = false;
  bool cert_ok = false;
  bool converged = false;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string message;
};

TrialOutcome run_trial(const SweepConfig& cfg, std::size_t di, int trial) {
  TrialOutcome out;
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = sweep_trial_dataset(cfg, di, trial);
  const Partition truth = Partition::from_labels(*data.truth_labels, cfg.k);
  const bool want_sdp = cfg.metric != SuccessMetric::CertificateValid;
  const bool want_cert = cfg.metric != SuccessMetric::SdpRecovery;

  if (want_sdp) {
    SdpProblem prob{squared_distances(data.points), cfg.k, cfg.relaxation};
    try {
      const SdpSolution sol = solve(prob, cfg.solver);
      out.converged = true;
      out.iterations = sol.iterations;
      RoundingOptions ropts;
      ropts.eps_rec = cfg.eps_rec;
      ropts.seed = stream_id(cfg.seed, di, static_cast<std::uint64_t>(trial));
      try {
        const RoundedPartition r = round_solution(sol.Z, cfg.k, truth, ropts);
        out.sdp_ok = r.exact && r.part.same_clusters(truth);
      } catch (const RoundingAmbiguous&) {
        out.sdp_ok = false;
      }
    } catch (const NotConverged& e) {
      out.iterations = e.best().iterations;
      out.message = "delta[" + std::to_string(di) + "] trial " + std::to_string(trial) + ": " + e.what();
    }
  }
  if (want_cert) {
    try {
      const DualCertificate c = cfg.relaxation == Relaxation::PengWei
                                    ? build_certificate_pw(data, truth)
                                    : build_certificate_balanced(data, truth);
      out.cert_ok = c.verdicts.valid;
    } catch (const CoincidentCenters&) {
      out.cert_ok = false;
    }
  }
  out.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::optional<double> crossing(const std::vector<double>& deltas, const std::vector<double>& fit) {
  for (std::size_t i = 0; i < fit.size(); ++i) {
    if (fit[i] >= 0.5) {
      if (i == 0) return deltas[0];
      const double f0 = fit[i - 1];
      const double f1 = fit[i];
      const double s = (0.5 - f0) / (f1 - f0);
      return deltas[i - 1] + s * (deltas[i] - deltas[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(ModelKind k) { return k == ModelKind::Ball ? "ball" : "gmm"; }

std::string to_string(SuccessMetric m) {
  switch (m) {
    case SuccessMetric::SdpRecovery: return "sdp_recovery";
    case SuccessMetric::CertificateValid: return "certificate_valid";
    case SuccessMetric::Both: return "both";
  }
  return "unknown";
}

void SweepConfig::validate() const {
  if (delta_grid.empty()) throw ValidationError("delta_grid must not be empty");
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0) || !std::isfinite(delta_grid[i])) {
      throw ValidationError("delta_grid entries must be positive and finite");
    }
    if (i > 0 && !(delta_grid[i] > delta_grid[i - 1])) {
      throw ValidationError("delta_grid must be strictly increasing");
    }
  }
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (k < 2) throw ValidationError("sweeps need k >= 2");
  if (m < 1 || n < 1) throw ValidationError("m and n must be positive");
  if (model == ModelKind::Ball && support == Support::EquispacedCircle && m != 2) {
    throw UnsupportedShape("equispaced circle support needs m = 2");
  }
  if (model == ModelKind::Gmm && !(variance >= 0.0)) throw ValidationError("variance must be nonnegative");
  if (geometry == CenterShape::Hive && m != 2) throw UnsupportedShape("hive geometry needs m = 2");
  if (geometry == CenterShape::Circle && m < 2) throw UnsupportedShape("circle geometry needs m >= 2");
  if (!(eps_rec > 0.0)) throw ValidationError("eps_rec must be positive");
  if (k * n > solver.size_cap) {
    throw ValidationError("N = " + std::to_string(k * n) + " exceeds solver cap " +
                          std::to_string(solver.size_cap));
  }
}

Dataset sweep_trial_dataset(const SweepConfig& cfg, std::size_t di, int trial) {
  const std::uint64_t seed = stream_id(cfg.seed ^ kTrialTag, di, static_cast<std::uint64_t>(trial));
  const Eigen::MatrixXd centers = center_geometry(cfg.geometry, cfg.k, cfg.delta_grid.at(di), cfg.m);
  const std::vector<int> sizes(static_cast<std::size_t>(cfg.k), cfg.n);
  if (cfg.model == ModelKind::Ball) {
    return sample_ball_model(BallModelSpec{centers, sizes, {cfg.support}, seed});
  }
  GmmSpec spec;
  spec.centers = centers;
  spec.covariances = {cfg.variance * Eigen::MatrixXd::Identity(cfg.m, cfg.m)};
  spec.sizes = sizes;
  spec.seed = seed;
  return sample_gmm(spec);
}

std::vector<double> isotonic_fit(const std::vector<double>& values) {
  // Blocks of (mean, weight); merge while the previous block exceeds the current one.
  std::vector<double> means;
  std::vector<int> weights;
  for (double v : values) {
    means.push_back(v);
    weights.push_back(1);
    while (means.size() > 1 && means[means.size() - 2] > means.back()) {
      const double w1 = weights[weights.size() - 2];
      const double w2 = weights.back();
      const double merged = (means[means.size() - 2] * w1 + means.back() * w2) / (w1 + w2);
      means.pop_back();
      weights.pop_back();
      means.back() = merged;
      weights.back() += static_cast<int>(w2);
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t b = 0; b < means.size(); ++b) out.insert(out.end(), static_cast<std::size_t>(weights[b]), means[b]);
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t nd = cfg.delta_grid.size();
  const std::size_t total = nd * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialOutcome> outcomes(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      outcomes[t] = run_trial(cfg, t / static_cast<std::size_t>(cfg.trials),
                              static_cast<int>(t % static_cast<std::size_t>(cfg.trials)));
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult r;
  r.config = cfg;
  std::vector<double> rates;
  for (std::size_t di = 0; di < nd; ++di) {
    SweepRow row;
    row.delta = cfg.delta_grid[di];
    row.trials = cfg.trials;
    double iters = 0.0;
    double wall = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      const TrialOutcome& o = outcomes[di * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)];
      row.sdp_successes += o.sdp_ok;
      row.certificate_successes += o.cert_ok;
      const bool wants_sdp = cfg.metric != SuccessMetric::CertificateValid;
      if (wants_sdp && !o.converged) {
        ++row.not_converged;
        r.log.push_back(o.message);
      }
      switch (cfg.metric) {
        case SuccessMetric::SdpRecovery: row.successes += o.sdp_ok; break;
        case SuccessMetric::CertificateValid: row.successes += o.cert_ok; break;
        case SuccessMetric::Both: row.successes += o.sdp_ok && o.cert_ok; break;
      }
      iters += o.iterations;
      wall += o.wall_ms;
    }
    row.rate = static_cast<double>(row.successes) / row.trials;
    row.mean_solve_iters = iters / row.trials;
    row.mean_wall_ms = wall / row.trials;
    rates.push_back(row.rate);
    r.rows.push_back(row);
  }

  r.isotonic_fit = isotonic_fit(rates);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    r.isotonic_max_violation = std::max(r.isotonic_max_violation, std::abs(rates[i] - r.isotonic_fit[i]));
  }

  const int N = cfg.k * cfg.n;
  const double w_min = 1.0 / cfg.k;
  if (cfg.model == ModelKind::Ball) {
    const BoundReport b = sbm_bounds(cfg.k, cfg.m, N, w_min, std::sqrt(support_variance(cfg.support, cfg.m)));
    r.annotations.sufficient = b.delta_sufficient;
    r.annotations.necessary = b.delta_necessary;
    r.annotations.asymptotic = b.delta_asymptotic;
    r.annotations.sufficient_applicable = b.applicable;
    r.annotations.conjecture_line = 2.0 + 2.0 / cfg.m;
  } else {
    const BoundReport b = gmm_bound(cfg.k, cfg.m, N, w_min, std::sqrt(cfg.variance));
    r.annotations.sufficient = b.delta_sufficient;
    r.annotations.asymptotic = b.delta_asymptotic;
  }
  r.annotations.crossing_50 = crossing(cfg.delta_grid, r.isotonic_fit);
  return r;
}

}  // namespace kmcert
