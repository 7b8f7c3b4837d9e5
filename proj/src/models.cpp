#include "kmcert/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "kmcert/errors.hpp"
#include "kmcert/random.hpp"

namespace kmcert {

namespace {

constexpr std::uint64_t kBallTag = 0xba11;
constexpr std::uint64_t kGmmTag = 0x6a55;
constexpr std::uint64_t kSizeTag = 0x517e;

Eigen::VectorXd gaussian_vector(Philox& rng, int m) {
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = rng.normal();
  return v;
}

Eigen::VectorXd unit_direction(Philox& rng, int m) {
  while (true) {
    Eigen::VectorXd v = gaussian_vector(rng, m);
    const double n = v.norm();
    if (n > 0.0) return v / n;
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

std::string to_string(Support s) {
  switch (s) {
    case Support::UniformBall: return "uniform_ball";
    case Support::UniformSphere: return "uniform_sphere";
    case Support::EquispacedCircle: return "equispaced_circle";
  }
  return "unknown";
}

Support support_from_string(const std::string& s) {
  if (s == "uniform_ball" || s == "ball") return Support::UniformBall;
  if (s == "uniform_sphere" || s == "sphere") return Support::UniformSphere;
  if (s == "equispaced_circle" || s == "circle") return Support::EquispacedCircle;
  throw ValidationError("unknown support '" + s + "'");
}

double support_variance(Support s, int m) {
  switch (s) {
    case Support::UniformBall: return 1.0 / (m + 2);
    case Support::UniformSphere: return 1.0 / m;
    case Support::EquispacedCircle: return 0.5;
  }
  return 0.0;
}

Support BallModelSpec::support_of(int a) const {
  return support.size() == 1 ? support.front() : support.at(static_cast<std::size_t>(a));
}

void BallModelSpec::validate() const {
  if (k() < 1 || dim() < 1) throw ValidationError("ball model needs at least one center");
  if (!centers.allFinite()) throw ValidationError("centers must be finite");
  if (static_cast<int>(sizes.size()) != k()) throw DimensionMismatch("sizes must have one entry per center");
  for (int n : sizes) {
    if (n < 1) throw ValidationError("cluster sizes must be positive");
  }
  if (support.size() != 1 && static_cast<int>(support.size()) != k()) {
    throw DimensionMismatch("support must have one entry or one per center");
  }
  for (int a = 0; a < k(); ++a) {
    if (support_of(a) == Support::EquispacedCircle && dim() != 2) {
      throw UnsupportedShape("equispaced circle support needs m = 2");
    }
  }
}

Dataset sample_ball_model(const BallModelSpec& spec) {
  spec.validate();
  const int m = spec.dim();
  int N = 0;
  for (int n : spec.sizes) N += n;
  Dataset data;
  data.points.resize(N, m);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(N));
  int row = 0;
  for (int a = 0; a < spec.k(); ++a) {
    Philox rng(spec.seed, stream_id(kBallTag, static_cast<std::uint64_t>(a)));
    const int n = spec.sizes[static_cast<std::size_t>(a)];
    const Support sup = spec.support_of(a);
    for (int i = 0; i < n; ++i, ++row) {
      Eigen::VectorXd r;
      switch (sup) {
        case Support::UniformBall:
          r = unit_direction(rng, m) * std::pow(rng.uniform(), 1.0 / m);
          break;
        case Support::UniformSphere:
          r = unit_direction(rng, m);
          break;
        case Support::EquispacedCircle: {
          const double theta = 2.0 * std::numbers::pi * i / n;
          r = Eigen::Vector2d(std::cos(theta), std::sin(theta));
          break;
        }
      }
      data.points.row(row) = spec.centers.row(a) + r.transpose();
      labels.push_back(a);
    }
  }
  data.truth_labels = std::move(labels);
  return data;
}

const Eigen::MatrixXd& GmmSpec::covariance_of(int a) const {
  return covariances.size() == 1 ? covariances.front() : covariances.at(static_cast<std::size_t>(a));
}

void GmmSpec::validate() const {
  if (k() < 1 || dim() < 1) throw ValidationError("mixture needs at least one center");
  if (!centers.allFinite()) throw ValidationError("centers must be finite");
  if (covariances.size() != 1 && static_cast<int>(covariances.size()) != k()) {
    throw DimensionMismatch("covariances must have one entry or one per center");
  }
  for (const auto& c : covariances) {
    if (c.rows() != dim() || c.cols() != dim()) throw DimensionMismatch("covariance must be m x m");
  }
  if (size_mode == SizeMode::Fixed) {
    if (static_cast<int>(sizes.size()) != k()) throw DimensionMismatch("sizes must have one entry per center");
    for (int n : sizes) {
      if (n < 1) throw ValidationError("cluster sizes must be positive");
    }
  } else {
    if (static_cast<int>(weights.size()) != k()) throw DimensionMismatch("weights must have one entry per center");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ValidationError("weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("weights must sum to 1");
    if (total < 1) throw ValidationError("total must be positive in multinomial mode");
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  if (!cov.allFinite()) throw NonPsdCovariance("covariance has non-finite entries");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NonPsdCovariance("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && ev(0) < -1e-12 * scale) {
    throw NonPsdCovariance("covariance has negative eigenvalue " + std::to_string(ev(0)));
  }
  const Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Dataset sample_gmm(const GmmSpec& spec) {
  spec.validate();
  const int k = spec.k();
  const int m = spec.dim();
  std::vector<int> sizes = spec.sizes;
  if (spec.size_mode == SizeMode::Multinomial) {
    sizes.assign(static_cast<std::size_t>(k), 0);
    Philox rng(spec.seed, stream_id(kSizeTag));
    for (int i = 0; i < spec.total; ++i) {
      const double u = rng.uniform();
      double acc = 0.0;
      int pick = k - 1;
      for (int a = 0; a < k; ++a) {
        acc += spec.weights[static_cast<std::size_t>(a)];
        if (u < acc) {
          pick = a;
          break;
        }
      }
      ++sizes[static_cast<std::size_t>(pick)];
    }
  }
  std::vector<Eigen::MatrixXd> roots;
  for (int a = 0; a < k; ++a) roots.push_back(psd_sqrt(spec.covariance_of(a)));

  int N = 0;
  for (int n : sizes) N += n;
  Dataset data;
  data.points.resize(N, m);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(N));
  int row = 0;
  for (int a = 0; a < k; ++a) {
    Philox rng(spec.seed, stream_id(kGmmTag, static_cast<std::uint64_t>(a)));
    for (int i = 0; i < sizes[static_cast<std::size_t>(a)]; ++i, ++row) {
      data.points.row(row) =
          spec.centers.row(a) + (roots[static_cast<std::size_t>(a)] * gaussian_vector(rng, m)).transpose();
      labels.push_back(a);
    }
  }
  data.truth_labels = std::move(labels);
  return data;
}

std::string to_string(CenterShape s) {
  switch (s) {
    case CenterShape::Circle: return "circle";
    case CenterShape::Line: return "line";
    case CenterShape::Hive: return "hive";
  }
  return "unknown";
}

CenterShape shape_from_string(const std::string& s) {
  if (s == "circle") return CenterShape::Circle;
  if (s == "line") return CenterShape::Line;
  if (s == "hive") return CenterShape::Hive;
  throw ValidationError("unknown center geometry '" + s + "'");
}

Eigen::MatrixXd center_geometry(CenterShape shape, int k, double delta, int m) {
  if (k < 2) throw UnsupportedShape("center geometry needs k >= 2");
  require_positive(delta, "delta");
  if (m < 1) throw UnsupportedShape("dimension must be positive");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k, m);
  switch (shape) {
    case CenterShape::Line:
      for (int i = 0; i < k; ++i) C(i, 0) = i * delta;
      break;
    case CenterShape::Circle: {
      if (m < 2) throw UnsupportedShape("circle geometry needs m >= 2");
      const double R = delta / (2.0 * std::sin(std::numbers::pi / k));
      for (int i = 0; i < k; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / k;
        C(i, 0) = R * std::cos(theta);
        C(i, 1) = R * std::sin(theta);
      }
      break;
    }
    case CenterShape::Hive: {
      if (m != 2) throw UnsupportedShape("hive geometry needs m = 2");
      // Lattice sites i e1 + j e2 with e1 = (1, 0), e2 = (1/2, sqrt(3)/2); |.|^2 = i^2 + ij + j^2.
      // A hexagon of radius r holds 3r(r+1)+1 sites; the box below covers its circumscribed disk.
      int radius = 1;
      while (3 * radius * (radius + 1) + 1 < k) ++radius;
      radius = 2 * radius + 1;
      std::vector<std::tuple<int, double, int, int>> sites;
      for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
          const double x = i + 0.5 * j;
          const double y = 0.5 * std::sqrt(3.0) * j;
          double angle = std::atan2(y, x);
          if (angle < 0.0) angle += 2.0 * std::numbers::pi;
          sites.emplace_back(i * i + i * j + j * j, angle, i, j);
        }
      }
      std::sort(sites.begin(), sites.end());
      for (int s = 0; s < k; ++s) {
        const auto& [norm, angle, i, j] = sites[static_cast<std::size_t>(s)];
        C(s, 0) = delta * (i + 0.5 * j);
        C(s, 1) = delta * 0.5 * std::sqrt(3.0) * j;
      }
      break;
    }
  }
  return C;
}

BoundReport sbm_bounds(int k, int m, int N, double w_min, double sigma_max, double gamma) {
  if (k < 1 || m < 1 || N < 1) throw ValidationError("k, m and N must be positive");
  require_positive(w_min, "w_min");
  require_positive(gamma, "gamma");
  if (w_min > 1.0) throw ValidationError("w_min must not exceed 1");
  if (!(sigma_max >= 0.0) || sigma_max > 1.0) throw ValidationError("sigma_max must lie in [0, 1]");

  BoundReport r;
  r.formula_id = "stochastic_ball";
  r.params = {k, m, N, w_min, sigma_max, gamma, 0.0, 0.0, 0.0};
  const double log_term = std::log(4.0 * k * m * std::pow(static_cast<double>(N), gamma));
  r.params.t = std::sqrt(4.0 * log_term / (N * w_min));
  r.applicable = N >= (4.0 / w_min) * log_term;
  r.delta_asymptotic = 2.0 + std::sqrt(2.0 / w_min) * sigma_max;
  r.delta_sufficient = r.delta_asymptotic + 7.0 * std::sqrt(r.params.t / w_min);
  r.delta_necessary = 1.0 + std::sqrt(1.0 + 2.0 * sigma_max * sigma_max);
  return r;
}

BoundReport gmm_bound(int k, int m, int N, double w_min, double sigma_max) {
  if (k < 1 || m < 1 || N < 1) throw ValidationError("k, m and N must be positive");
  require_positive(w_min, "w_min");
  if (w_min > 1.0) throw ValidationError("w_min must not exceed 1");
  if (!(sigma_max >= 0.0) || !std::isfinite(sigma_max)) throw ValidationError("sigma_max must be nonnegative");

  constexpr double gamma = 1.0;
  BoundReport r;
  r.formula_id = "gaussian_mixture";
  const double L = std::log(k * std::pow(static_cast<double>(N), 1.0 + gamma));
  const double t = std::max(8.0 * L / m, std::sqrt(8.0 * L / m));
  const double s = 2.0 * L;
  const double q = 10.0 * std::sqrt(k * m * (1.0 + t) / (N * w_min)) + 6.0 * m * (1.0 + t) / std::sqrt(N);
  r.params = {k, m, N, w_min, sigma_max, gamma, t, s, q};
  r.delta_asymptotic = sigma_max * (2.0 / std::sqrt(w_min) + 4.0 * std::sqrt(s));
  r.delta_sufficient = sigma_max * (2.0 / std::sqrt(w_min) + 4.0 * std::sqrt(s) + q);
  return r;
}

}  // namespace kmcert
