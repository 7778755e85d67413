#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "p2ptopo/error.hpp"
#include "p2ptopo/graph.hpp"

namespace p2ptopo {

struct EigenResult {
  double value = 0.0;         // dominant eigenvalue (spectral radius)
  std::vector<double> vector; // non-negative, L1-normalized
  std::size_t iterations = 0;
  double residual = 0.0;      // ||A v - value v||_1
  bool damped = false;        // switched to the averaged iteration after oscillation
};

struct PowerIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iters = 100000;
};

// Power iteration from the uniform vector. `apply(x, y)` must write y = A x for
// a non-negative A. Converged once both the successive L1 difference and the
// residual drop below the tolerance. A period-2 oscillation (bipartite
// spectra) switches the update to v <- normalize(v/2 + Av/(2|Av|)).
template <typename MatVec>
EigenResult power_iteration(std::size_t n, MatVec&& apply, const PowerIterationOptions& opts = {}) {
  if (n == 0) throw UndefinedError("degenerate spectrum: empty matrix");
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> prev(n, 0.0);
  std::vector<double> y(n);
  std::vector<double> next(n);
  EigenResult r;
  double residual = 0.0;
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    apply(std::span<const double>(v), std::span<double>(y));
    const double mass = std::accumulate(y.begin(), y.end(), 0.0);
    if (!(mass > 0.0)) throw UndefinedError("degenerate spectrum: iteration collapsed to the zero vector");

    double vy = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vy += v[i] * y[i];
      vv += v[i] * v[i];
    }
    const double lambda = vy / vv;
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(y[i] - lambda * v[i]);

    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = r.damped ? 0.5 * v[i] + 0.5 * y[i] / mass : y[i] / mass;
    }
    const double norm = std::accumulate(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      diff += std::abs(next[i] - v[i]);
    }

    if (residual <= opts.tolerance && diff < opts.tolerance) {
      r.value = lambda;
      r.vector = v;
      r.iterations = it;
      r.residual = residual;
      return r;
    }
    if (!r.damped && it >= 2) {
      double back = 0.0;
      for (std::size_t i = 0; i < n; ++i) back += std::abs(next[i] - prev[i]);
      if (back < 0.5 * diff) r.damped = true;
    }
    prev.swap(v);
    v.swap(next);
  }
  throw ConvergenceError("power iteration did not converge", residual);
}

inline EigenResult principal_eigenpair(const AdjacencyMatrix& a, double tolerance = 1e-10,
                                       std::size_t max_iters = 100000) {
  bool any = false;
  for (double x : a.entries) {
    if (x < 0.0) throw ParameterError("principal_eigenpair requires a non-negative matrix");
    any = any || x != 0.0;
  }
  if (!any) throw UndefinedError("degenerate spectrum: all-zero matrix");
  const std::size_t n = a.n;
  return power_iteration(
      n,
      [&](std::span<const double> x, std::span<double> y) {
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
          y[i] = s;
        }
      },
      {tolerance, max_iters});
}

// Dominant eigenpair of the symmetrized adjacency, evaluated sparsely.
inline EigenResult symmetric_eigenpair(const DirectedGraph& g, MatrixSemantics semantics,
                                       const PowerIterationOptions& opts = {}) {
  const UndirectedGraph u(g);
  if (u.edge_count() == 0) throw UndefinedError("degenerate spectrum: graph has no edges");
  return power_iteration(
      u.node_count(),
      [&](std::span<const double> x, std::span<double> y) {
        for (NodeId i = 0; i < u.node_count(); ++i) {
          double s = 0.0;
          for (const Arc& a : u.neighbors(i)) {
            s += (semantics == MatrixSemantics::binary ? 1.0 : 1.0 / a.latency) * x[a.node];
          }
          y[i] = s;
        }
      },
      opts);
}

// Defined on the symmetrized graph: a DAG's directed adjacency is nilpotent,
// so its Perron vector carries no information.
inline std::vector<double> eigenvector_centrality(const DirectedGraph& g,
                                                  MatrixSemantics semantics = MatrixSemantics::binary,
                                                  const PowerIterationOptions& opts = {}) {
  return symmetric_eigenpair(g, semantics, opts).vector;
}

// Share of the L1-normalized principal eigenvector carried by `members`.
// Weighted by inverse latency by default, matching the relay-weight adjacency.
inline double perron_mass(const DirectedGraph& g, std::span<const NodeId> members,
                          MatrixSemantics semantics = MatrixSemantics::inverse_latency) {
  std::vector<bool> in(g.node_count(), false);
  for (NodeId v : members) {
    g.check_node(v);
    in[v] = true;
  }
  const auto vec = eigenvector_centrality(g, semantics);
  double mass = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (in[v]) mass += vec[v];
  }
  return mass;
}

// Random-surfer fixed point on the out-degree-normalized directed adjacency;
// dangling mass is spread uniformly.
inline std::vector<double> pagerank(const DirectedGraph& g, double damping = 0.85, double tolerance = 1e-12,
                                    std::size_t max_iters = 100000) {
  if (!(damping > 0.0 && damping < 1.0)) throw ParameterError("damping must lie in (0,1)");
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  const auto nd = static_cast<double>(n);
  std::vector<double> pr(n, 1.0 / nd);
  std::vector<double> next(n);
  double diff = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    double dangling = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (g.out_degree(v) == 0) dangling += pr[v];
    }
    const double base = (1.0 - damping) / nd + damping * dangling / nd;
    for (NodeId v = 0; v < n; ++v) {
      double s = 0.0;
      for (const Arc& a : g.in_arcs(v)) s += pr[a.node] / static_cast<double>(g.out_degree(a.node));
      next[v] = base + damping * s;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    diff = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      next[v] /= total;
      diff += std::abs(next[v] - pr[v]);
    }
    pr.swap(next);
    if (diff < tolerance) return pr;
  }
  throw ConvergenceError("pagerank did not converge", diff);
}

struct SpectralSummary {
  double spectral_radius = 0.0;
  double spectral_gap = 0.0;           // lambda_1 - |lambda_2| of the symmetrized adjacency
  double algebraic_connectivity = 0.0; // second-smallest Laplacian eigenvalue
};

namespace detail {

inline constexpr std::size_t dense_spectrum_limit = 2000;

// Second-smallest Laplacian eigenvalue for large graphs: power iteration on
// c*I - L restricted to the complement of the constant vector.
inline double laplacian_lambda2_iterative(const UndirectedGraph& u, const PowerIterationOptions& opts) {
  const std::size_t n = u.node_count();
  double c = 0.0;
  for (NodeId v = 0; v < n; ++v) c = std::max(c, 2.0 * static_cast<double>(u.degree(v)));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(static_cast<double>(i) + 1.0);
  std::vector<double> y(n);
  double mu = 0.0;
  double change = 0.0;
  auto project = [&](std::vector<double>& z) {
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
    double norm = 0.0;
    for (auto& e : z) {
      e -= mean;
      norm += e * e;
    }
    norm = std::sqrt(norm);
    for (auto& e : z) e /= norm;
  };
  project(x);
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    for (NodeId v = 0; v < n; ++v) {
      double lx = static_cast<double>(u.degree(v)) * x[v];
      for (const Arc& a : u.neighbors(v)) lx -= x[a.node];
      y[v] = c * x[v] - lx;
    }
    double estimate = 0.0;
    for (std::size_t i = 0; i < n; ++i) estimate += x[i] * y[i];
    project(y);
    change = std::abs(estimate - mu);
    mu = estimate;
    x.swap(y);
    if (it > 10 && change < opts.tolerance * std::max(1.0, c)) return std::max(0.0, c - mu);
  }
  throw ConvergenceError("laplacian lambda_2 iteration did not converge", change);
}

}  // namespace detail

inline SpectralSummary laplacian_connectivity(const DirectedGraph& g, const PowerIterationOptions& opts = {}) {
  const std::size_t n = g.node_count();
  if (n < 2) throw UndefinedError("laplacian connectivity needs at least 2 nodes");
  const UndirectedGraph u(g);
  SpectralSummary s;
  if (n <= detail::dense_spectrum_limit) {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (NodeId v = 0; v < n; ++v) {
      for (const Arc& a : u.neighbors(v)) adj(v, a.node) = 1.0;
    }
    Eigen::MatrixXd lap = -adj;
    for (NodeId v = 0; v < n; ++v) lap(v, v) = static_cast<double>(u.degree(v));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lsolver(lap, Eigen::EigenvaluesOnly);
    s.algebraic_connectivity = std::max(0.0, lsolver.eigenvalues()(1));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> asolver(adj, Eigen::EigenvaluesOnly);
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(asolver.eigenvalues()(static_cast<Eigen::Index>(i)));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    s.spectral_radius = mags[0];
    s.spectral_gap = std::max(0.0, mags[0] - mags[1]);
    return s;
  }

  s.algebraic_connectivity = detail::laplacian_lambda2_iterative(u, opts);
  if (u.edge_count() == 0) return s;
  const auto top = symmetric_eigenpair(g, MatrixSemantics::binary, opts);
  s.spectral_radius = top.value;
  // |lambda_2| from A^2 deflated by the Perron direction.
  std::vector<double> p = top.vector;
  double pn = 0.0;
  for (double e : p) pn += e * e;
  for (auto& e : p) e /= std::sqrt(pn);
  std::vector<double> x(n);
  std::vector<double> y(n);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(static_cast<double>(i) + 1.0);
  auto deflated = [&](const std::vector<double>& in, std::vector<double>& out) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += p[i] * in[i];
    for (NodeId v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const Arc& a : u.neighbors(v)) acc += in[a.node];
      out[v] = acc - top.value * dot * p[v];
    }
  };
  double sq = 0.0;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    double norm = 0.0;
    for (double e : x) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (auto& e : x) e /= norm;
    deflated(x, y);
    deflated(y, z);
    double est = 0.0;
    for (std::size_t i = 0; i < n; ++i) est += x[i] * z[i];
    const bool done = it > 10 && std::abs(est - sq) < opts.tolerance * std::max(1.0, est);
    sq = est;
    x.swap(z);
    if (done) break;
  }
  s.spectral_gap = std::max(0.0, top.value - std::sqrt(std::max(0.0, sq)));
  return s;
}

// Spectral radius of the symmetrized binary adjacency; 0 for an edgeless graph.
inline double spectral_radius(const DirectedGraph& g) {
  if (g.edge_count() == 0) return 0.0;
  return symmetric_eigenpair(g, MatrixSemantics::binary).value;
}

}  // namespace p2ptopo
