#include "kmcert/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "kmcert/errors.hpp"

namespace kmcert {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& value) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& s, int& value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) throw ValidationError(source + ": no data rows");

  bool has_labels = false;
  double probe = 0.0;
  if (!parse_double(rows.front().front(), probe)) {
    has_labels = lower(rows.front().back()) == "label";
    rows.erase(rows.begin());
    if (rows.empty()) throw ValidationError(source + ": header but no data rows");
  }

  const std::size_t width = rows.front().size();
  const std::size_t m = has_labels ? width - 1 : width;
  if (m < 1) throw ValidationError(source + ": no coordinate columns");

  Dataset data;
  data.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  std::vector<int> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != width) {
      throw ValidationError(source + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(f.size()) + " fields, expected " +
                            std::to_string(width));
    }
    for (std::size_t c = 0; c < m; ++c) {
      double v = 0.0;
      if (!parse_double(f[c], v)) {
        throw ValidationError(source + ": row " + std::to_string(r + 1) +
                              " has non-numeric value '" + f[c] + "'");
      }
      data.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    if (has_labels) {
      int l = 0;
      if (!parse_int(f.back(), l)) {
        throw ValidationError(source + ": row " + std::to_string(r + 1) +
                              " has non-integer label '" + f.back() + "'");
      }
      labels.push_back(l);
    }
  }
  if (has_labels) data.truth_labels = std::move(labels);
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  return parse_dataset_csv(in, path);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const int m = data.dim();
  for (int c = 0; c < m; ++c) out << (c ? "," : "") << 'x' << c;
  if (data.truth_labels) out << ",label";
  out << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < data.size(); ++i) {
    for (int c = 0; c < m; ++c) out << (c ? "," : "") << data.points(i, c);
    if (data.truth_labels) out << ',' << (*data.truth_labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  write_dataset_csv(out, data);
  if (!out) throw IoError(path, "write failed");
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << M(i, j);
    out << '\n';
  }
  if (!out) throw IoError(path, "write failed");
}

}  // namespace kmcert
