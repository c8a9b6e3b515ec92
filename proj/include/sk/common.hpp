#pragma once

#include <Eigen/Core>

#include <iostream>
#include <stdexcept>
#include <string>

namespace sk {

// Points are stored one per row, so a PointSet is N x D with contiguous rows.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexVector = Eigen::VectorXi;

/// Invalid caller input (dimension mismatches, out-of-range arguments).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear-algebra failure that survived jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training-loop failure (divergence, non-finite gradients).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(long line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Corrupt, truncated, or incompatible model archive.
class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void warn(const std::string& msg) { std::cerr << "sk: warning: " << msg << "\n"; }

}  // namespace detail

}  // namespace sk
