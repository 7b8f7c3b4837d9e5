#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kmcert/geometry.hpp"

namespace kmcert {

enum class Support { UniformBall, UniformSphere, EquispacedCircle };

std::string to_string(Support s);
Support support_from_string(const std::string& s);

/// Largest eigenvalue of the support's covariance in dimension m.
double support_variance(Support s, int m);

/// x_{a,i} = mu_a + r_{a,i} with r drawn from a zero-mean law on the unit ball.
struct BallModelSpec {
  Eigen::MatrixXd centers;     // k x m
  std::vector<int> sizes;      // n_a
  std::vector<Support> support;  // one per cluster, or a single entry for all
  std::uint64_t seed = 0;

  int k() const noexcept { return static_cast<int>(centers.rows()); }
  int dim() const noexcept { return static_cast<int>(centers.cols()); }
  Support support_of(int a) const;
  void validate() const;
};

/// Points are emitted cluster by cluster with truth labels attached. Each
/// cluster draws from its own substream, so adding clusters leaves earlier ones unchanged.
Dataset sample_ball_model(const BallModelSpec& spec);

enum class SizeMode { Fixed, Multinomial };

struct GmmSpec {
  Eigen::MatrixXd centers;                   // k x m
  std::vector<Eigen::MatrixXd> covariances;  // one per cluster, or a single shared one
  SizeMode size_mode = SizeMode::Fixed;
  std::vector<int> sizes;       // Fixed mode
  std::vector<double> weights;  // Multinomial mode, summing to 1
  int total = 0;                // Multinomial mode
  std::uint64_t seed = 0;

  int k() const noexcept { return static_cast<int>(centers.rows()); }
  int dim() const noexcept { return static_cast<int>(centers.cols()); }
  const Eigen::MatrixXd& covariance_of(int a) const;
  void validate() const;
};

/// Throws NonPsdCovariance for asymmetric or indefinite covariances.
Dataset sample_gmm(const GmmSpec& spec);

/// Symmetric square root of a PSD matrix (accepts singular input).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

enum class CenterShape { Circle, Line, Hive };

std::string to_string(CenterShape s);
CenterShape shape_from_string(const std::string& s);

/// k centers in R^m with minimal pairwise distance delta.
///
/// Line: i * delta on the first axis. Circle: regular k-gon with side delta.
/// Hive: the k triangular-lattice sites closest to the origin (m = 2 only).
Eigen::MatrixXd center_geometry(CenterShape shape, int k, double delta, int m = 2);

struct BoundParams {
  int k = 0;
  int m = 0;
  int N = 0;
  double w_min = 0.0;
  double sigma_max = 0.0;
  double gamma = 0.0;
  double t = 0.0;
  double s = 0.0;
  double q = 0.0;
};

struct BoundReport {
  std::string formula_id;
  double delta_sufficient = 0.0;
  std::optional<double> delta_necessary;
  double delta_asymptotic = 0.0;  // N -> infinity limit of the sufficient bound
  bool applicable = true;         // sample-size precondition of the sufficient bound
  BoundParams params;
};

/// Stochastic ball model bounds: sufficient 2 + sqrt(2/w) sigma + 7 sqrt(t/w) with
/// t = sqrt(4 log(4 k m N^gamma) / (N w)); necessary 1 + sqrt(1 + 2 sigma^2).
BoundReport sbm_bounds(int k, int m, int N, double w_min, double sigma_max, double gamma = 1.0);

/// Gaussian mixture sufficient bound sigma (2/sqrt(w) + 4 sqrt(s) + q), gamma = 1.
BoundReport gmm_bound(int k, int m, int N, double w_min, double sigma_max);

}  // namespace kmcert
