/*
 * Copyright (c) 2026 The pdnsynth Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "pdnsynth/error.hpp"
#include "pdnsynth/ir/system.hpp"

namespace pdnsynth {

struct SolverOptions {
  double tol = 1e-9;           // relative infinity-norm residual
  int max_iterations = 20000;
  std::size_t direct_fallback_below = 2000;  // unknowns
};

struct IrSolution {
  std::shared_ptr<const ConductanceSystem> system;
  std::vector<double> drop;            // mV per system node
  std::vector<double> branch_current;  // mA per branch, a -> b
  double residual_inf = 0.0;           // ||G d - i||_inf
  double rhs_inf = 0.0;                // ||i||_inf
  int iterations = 0;
  bool direct = false;

  double voltage(std::size_t node) const { return system->vdd - drop[node]; }
  double max_drop() const { return drop.empty() ? 0.0 : *std::max_element(drop.begin(), drop.end()); }

  /// Power dissipated in the network, i^T d (uW with mA and mV).
  double dissipated_power() const {
    double p = 0.0;
    for (std::size_t u = 0; u < system->unknowns(); ++u)
      p += system->current[u] * drop[static_cast<std::size_t>(system->node_of_unknown[u])];
    return p;
  }

  std::vector<double> source_drops() const {
    std::vector<double> out;
    out.reserve(system->source_node.size());
    for (int n : system->source_node) out.push_back(drop[static_cast<std::size_t>(n)]);
    return out;
  }
};

inline double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

struct PcgResult {
  std::vector<double> x;
  std::vector<double> history;  // recursive residual, infinity norm
  int iterations = 0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for SPD \p a. Convergence is
/// judged on the true residual ||b - A x||_inf <= tol * ||b||_inf.
inline PcgResult pcg(const CsrMatrix& a, std::span<const double> b, double tol, int max_iterations) {
  const auto n = static_cast<std::size_t>(a.n);
  PcgResult out;
  out.x.assign(n, 0.0);
  const double bnorm = inf_norm(b);
  if (n == 0 || bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const double target = tol * bnorm;
  std::vector<double> inv_diag = a.diagonal();
  for (auto& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
  auto restart = [&] {
    a.multiply(out.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  };

  while (out.iterations < max_iterations) {
    const int before = out.iterations;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    double rnorm = inf_norm(r);
    while (rnorm > target && out.iterations < max_iterations) {
      a.multiply(p, q);
      double pq = 0.0;
      for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        out.x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      double rz_next = 0.0;
      for (std::size_t i = 0; i < n; ++i) rz_next += r[i] * z[i];
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = inf_norm(r);
      out.history.push_back(rnorm);
      ++out.iterations;
    }
    // the recursive residual drifts; confirm against the true one
    restart();
    if (inf_norm(r) <= target) {
      out.converged = true;
      return out;
    }
    if (out.iterations == before) break;  // breakdown without progress
  }
  return out;
}

/// Dense Cholesky solve, used when the iterative solve stalls on small
/// systems.
inline std::vector<double> dense_cholesky_solve(const CsrMatrix& a, std::span<const double> b) {
  const auto n = static_cast<std::size_t>(a.n);
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      l[i * n + static_cast<std::size_t>(a.col[static_cast<std::size_t>(k)])] = a.val[static_cast<std::size_t>(k)];
  for (std::size_t j = 0; j < n; ++j) {
    double d = l[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) throw Error(ErrorKind::Structural, "conductance matrix is not positive definite");
    d = std::sqrt(d);
    l[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = l[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / d;
    }
  }
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l[i * n + k] * y[k];
    y[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l[k * n + i] * y[k];
    y[i] /= l[i * n + i];
  }
  return y;
}

inline IrSolution solve(std::shared_ptr<const ConductanceSystem> sys, const SolverOptions& opt = {}) {
  if (!(opt.tol > 0.0 && opt.tol < 1.0)) throw Error(ErrorKind::Configuration, "solver tolerance must lie in (0, 1)");
  if (sys->pad_nodes.empty() && sys->unknowns() > 0)
    throw Error(ErrorKind::Structural, "system has no pad; conductance matrix is singular");

  IrSolution sol;
  sol.rhs_inf = inf_norm(sys->current);
  PcgResult r = pcg(sys->matrix, sys->current, opt.tol, opt.max_iterations);
  std::vector<double> x;
  if (r.converged) {
    x = std::move(r.x);
    sol.iterations = r.iterations;
  } else if (sys->unknowns() < opt.direct_fallback_below) {
    x = dense_cholesky_solve(sys->matrix, sys->current);
    sol.iterations = r.iterations;
    sol.direct = true;
  } else {
    throw SolverError("conjugate gradient did not converge in " + std::to_string(opt.max_iterations) + " iterations",
                      std::move(r.history));
  }

  sol.drop.assign(sys->nodes.size(), 0.0);
  for (std::size_t u = 0; u < x.size(); ++u) sol.drop[static_cast<std::size_t>(sys->node_of_unknown[u])] = x[u];

  std::vector<double> gx(x.size());
  sys->matrix.multiply(x, gx);
  for (std::size_t u = 0; u < x.size(); ++u) gx[u] -= sys->current[u];
  sol.residual_inf = inf_norm(gx);

  sol.branch_current.reserve(sys->branches.size());
  for (const auto& br : sys->branches)
    sol.branch_current.push_back(br.conductance *
                                 (sol.drop[static_cast<std::size_t>(br.b)] - sol.drop[static_cast<std::size_t>(br.a)]));
  sol.system = std::move(sys);
  return sol;
}

inline IrSolution solve(ConductanceSystem sys, const SolverOptions& opt = {}) {
  return solve(std::make_shared<const ConductanceSystem>(std::move(sys)), opt);
}

}  // namespace pdnsynth
