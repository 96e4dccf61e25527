#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlasso {

// Extended precision in memory; persisted arrays are binary64.
using Real = long double;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using Index = Eigen::Index;

/// Sorted, duplicate-free list of zero-based indices.
using IndexSet = std::vector<Index>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or arithmetic breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericError {
 public:
  SingularityError(const std::string& what, double condition_number)
      : NumericError(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

/// Unreadable or schema-violating persisted documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline Real soft_threshold(Real x, Real t) {
  // |x| == t resolves to exactly zero.
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0;
}

inline int sign_of(Real x) { return (x > 0) - (x < 0); }

/// Complement of a sorted index set within [0, dim).
IndexSet complement(const IndexSet& set, Index dim);

/// Indices of the nonzero entries of x.
IndexSet nonzero_indices(const Vector& x);

/// Throws InputError unless set is sorted, unique and within [0, dim).
void check_index_set(const IndexSet& set, Index dim, const char* name);

}  // namespace rlasso
