#pragma once

// Perron roots of nonnegative matrices.
//
// The iteration is x <- (M + c I) x with c the current Collatz-Wielandt lower
// bound. For an irreducible nonnegative M and positive x,
//   min_i (Mx)_i / x_i  <=  rho(M)  <=  max_i (Mx)_i / x_i,
// so the stopping rule certifies log rho to the requested absolute tolerance.
// The shift makes M + cI primitive, which also handles periodic components.

#include "returnldp/error.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <optional>
#include <string>

namespace returnldp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct PowerIterationOptions {
  double tolerance = 1e-12;  ///< on log rho, absolute
  long max_iterations = 1'000'000;
};

template <typename Scalar>
struct PerronVector {
  Scalar log_radius;
  Scalar lower;  ///< Collatz-Wielandt lower bound on rho
  Scalar upper;  ///< Collatz-Wielandt upper bound on rho
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;  ///< positive, max entry 1
  long iterations;
};

/// Right Perron vector of an irreducible nonnegative matrix (dense or sparse).
/// Throws NoConvergence when the bound gap does not close within the cap or
/// when the iterate loses positivity (reducible input).
template <typename MatrixType>
PerronVector<typename MatrixType::Scalar> perron_vector(const MatrixType& m,
                                                        const PowerIterationOptions& opts = {}) {
  using Scalar = typename MatrixType::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = m.rows();
  if (n == 0 || m.cols() != n) throw Error(ErrorKind::InvalidArgument, "perron_vector needs a nonempty square matrix");

  Vector x = Vector::Ones(n);
  Vector y(n);
  for (long it = 1; it <= opts.max_iterations; ++it) {
    y.noalias() = m * x;
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar r = y(i) / x(i);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (!(lo > 0) || !std::isfinite(hi)) {
      throw Error(ErrorKind::NoConvergence, "Perron iteration lost positivity (reducible or degenerate matrix)");
    }
    const Scalar log_lo = std::log(lo);
    const Scalar log_hi = std::log(hi);
    if (log_hi - log_lo <= opts.tolerance) {
      x /= x.maxCoeff();
      return {Scalar(0.5) * (log_lo + log_hi), lo, hi, std::move(x), it};
    }
    x = y + lo * x;
    x /= x.maxCoeff();
  }
  throw Error(ErrorKind::NoConvergence,
              "Perron iteration did not reach tolerance within " + std::to_string(opts.max_iterations) + " iterations");
}

/// Log Perron root of diag(exp(row_log_weight)) * pattern, iterated on
/// logarithms so that weight ratios beyond the double range stay positive.
/// `pattern` must be irreducible with unit entries.
double perron_log_radius_logspace(const SparseMatrix& pattern, const Eigen::VectorXd& row_log_weight,
                                  const PowerIterationOptions& opts = {});

/// Log spectral radius of an arbitrary nonnegative square matrix: the
/// maximum over strongly connected components that carry a cycle.
/// Empty result means the matrix is nilpotent (no cycle at all).
std::optional<double> log_spectral_radius(const SparseMatrix& m, const PowerIterationOptions& opts = {});

/// Strongly connected components of the nonzero pattern; component ids are
/// returned per vertex, in reverse topological order of discovery.
std::vector<int> strongly_connected_components(const SparseMatrix& m, int& component_count);

}  // namespace returnldp
