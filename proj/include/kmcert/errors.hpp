#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kmcert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, out-of-range parameters, violated preconditions.
class ValidationError : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class EmptyCluster : public ValidationError {
public:
  explicit EmptyCluster(int cluster)
      : ValidationError("cluster " + std::to_string(cluster) + " is empty"), cluster_(cluster) {}
  int cluster() const noexcept { return cluster_; }

private:
  int cluster_;
};

/// Two cluster centers coincide, so the direction between them is undefined.
class CoincidentCenters : public ValidationError {
public:
  CoincidentCenters(int a, int b)
      : ValidationError("centers of clusters " + std::to_string(a) + " and " + std::to_string(b) +
                        " coincide"),
        a_(a), b_(b) {}
  int first() const noexcept { return a_; }
  int second() const noexcept { return b_; }

private:
  int a_;
  int b_;
};

class NotBalanced : public ValidationError {
public:
  explicit NotBalanced(std::vector<int> sizes);
  const std::vector<int>& sizes() const noexcept { return sizes_; }

private:
  std::vector<int> sizes_;
};

class InvalidProblem : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class MismatchedInputs : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NonPsdCovariance : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnsupportedShape : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Exhaustive enumeration would exceed the configured budget.
class TooLarge : public ValidationError {
public:
  TooLarge(double count, double limit)
      : ValidationError("enumeration of " + std::to_string(count) +
                        " partitions exceeds limit " + std::to_string(limit)),
        count_(count) {}
  double count() const noexcept { return count_; }

private:
  double count_;
};

class RoundingAmbiguous : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace kmcert
