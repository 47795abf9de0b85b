#include "returnldp/spectral.hpp"

#include <algorithm>
#include <vector>

namespace returnldp {

std::vector<int> strongly_connected_components(const SparseMatrix& m, int& component_count) {
  // Iterative Tarjan.
  const auto n = static_cast<int>(m.rows());
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
      comp(static_cast<std::size_t>(n), -1);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  struct Frame {
    int v;
    SparseMatrix::InnerIterator it;
  };
  std::vector<Frame> call;
  int counter = 0;
  component_count = 0;

  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    call.push_back({root, SparseMatrix::InnerIterator(m, root)});
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto v = static_cast<std::size_t>(f.v);
      bool descended = false;
      for (; f.it; ++f.it) {
        if (f.it.value() == 0) continue;
        const auto w = static_cast<std::size_t>(f.it.col());
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(static_cast<int>(w));
          on_stack[w] = 1;
          ++f.it;
          call.push_back({static_cast<int>(w), SparseMatrix::InnerIterator(m, static_cast<Eigen::Index>(w))});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        while (true) {
          const auto w = static_cast<std::size_t>(stack.back());
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = component_count;
          if (w == v) break;
        }
        ++component_count;
      }
      call.pop_back();
      if (!call.empty()) {
        const auto parent = static_cast<std::size_t>(call.back().v);
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return comp;
}

std::optional<double> log_spectral_radius(const SparseMatrix& m, const PowerIterationOptions& opts) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "log_spectral_radius needs a square matrix");
  if (m.rows() == 0) return std::nullopt;
  int count = 0;
  const std::vector<int> comp = strongly_connected_components(m, count);

  std::vector<std::vector<int>> members(static_cast<std::size_t>(count));
  for (int v = 0; v < static_cast<int>(comp.size()); ++v) members[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);

  std::optional<double> best;
  std::vector<int> local(comp.size(), -1);
  for (int c = 0; c < count; ++c) {
    const auto& vs = members[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < vs.size(); ++i) local[static_cast<std::size_t>(vs[i])] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trips;
    for (int v : vs) {
      for (SparseMatrix::InnerIterator it(m, v); it; ++it) {
        if (it.value() != 0 && comp[static_cast<std::size_t>(it.col())] == c) {
          trips.emplace_back(local[static_cast<std::size_t>(v)], local[static_cast<std::size_t>(it.col())], it.value());
        }
      }
    }
    if (trips.empty()) continue;  // single vertex without self-loop
    SparseMatrix sub(static_cast<Eigen::Index>(vs.size()), static_cast<Eigen::Index>(vs.size()));
    sub.setFromTriplets(trips.begin(), trips.end());
    const double r = perron_vector(sub, opts).log_radius;
    if (!best || r > *best) best = r;
  }
  return best;
}

double perron_log_radius_logspace(const SparseMatrix& pattern, const Eigen::VectorXd& row_log_weight,
                                  const PowerIterationOptions& opts) {
  const Eigen::Index n = pattern.rows();
  if (n == 0 || pattern.cols() != n || row_log_weight.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "perron_log_radius_logspace needs a nonempty square pattern");
  }
  Eigen::VectorXd lx = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ly(n);
  for (long it = 1; it <= opts.max_iterations; ++it) {
    double log_lo = std::numeric_limits<double>::infinity();
    double log_hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < n; ++u) {
      double top = -std::numeric_limits<double>::infinity();
      for (SparseMatrix::InnerIterator e(pattern, u); e; ++e) top = std::max(top, lx(e.col()));
      double sum = 0.0;
      for (SparseMatrix::InnerIterator e(pattern, u); e; ++e) sum += std::exp(lx(e.col()) - top);
      ly(u) = row_log_weight(u) + top + std::log(sum);
      if (!std::isfinite(ly(u))) {
        throw Error(ErrorKind::NoConvergence, "log-space Perron iteration hit a row without successors");
      }
      log_lo = std::min(log_lo, ly(u) - lx(u));
      log_hi = std::max(log_hi, ly(u) - lx(u));
    }
    if (log_hi - log_lo <= opts.tolerance) return 0.5 * (log_lo + log_hi);
    for (Eigen::Index u = 0; u < n; ++u) {
      const double a = ly(u), b = log_lo + lx(u);
      const double m = std::max(a, b);
      lx(u) = m + std::log1p(std::exp(std::min(a, b) - m));
    }
    lx.array() -= lx.maxCoeff();
  }
  throw Error(ErrorKind::NoConvergence, "log-space Perron iteration did not reach tolerance within " +
                                            std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace returnldp
