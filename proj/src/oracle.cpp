#include "slb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slb/expr.hpp"

namespace slb {

namespace {

// Nodes that land exactly on a singular point of a coefficient get
// nudged by a fraction of the mesh step.
double eval_with_retry(const Expr& f, double x, double step) {
  try {
    return f.evaluate(x);
  } catch (const EvalError&) {
  }
  const double nudge = step * std::ldexp(1.0, -30);
  try {
    return f.evaluate(x + nudge);
  } catch (const EvalError&) {
  }
  return f.evaluate(x - nudge);
}

}  // namespace

DiscretePencil discretize(const Problem& prob, double L, int n) {
  if (n < 2) throw std::invalid_argument("discretize: need n >= 2");
  if (!(L > 0.0)) throw std::invalid_argument("discretize: need L > 0");
  DiscretePencil m;
  m.L = L;
  m.n = n;
  m.h = 2.0 * L / n;
  const int k = n - 1;
  m.diag.resize(k);
  m.mass.resize(k);
  m.off.assign(std::max(0, k - 1), 0.0);
  std::vector<double> pmid(n);
  for (int i = 0; i < n; ++i)
    pmid[i] = eval_with_retry(*prob.p, -L + (i + 0.5) * m.h, m.h);
  const double h2 = m.h * m.h;
  for (int i = 1; i <= k; ++i) {
    const double x = -L + i * m.h;
    m.diag[i - 1] = (pmid[i - 1] + pmid[i]) / h2 +
                    eval_with_retry(*prob.q, x, m.h);
    m.mass[i - 1] = std::max(eval_with_retry(*prob.r, x, m.h), 1e-12);
    if (i <= k - 1) m.off[i - 1] = -pmid[i] / h2;
  }
  return m;
}

int eigenvalues_below(const DiscretePencil& m, double lambda) {
  const std::size_t k = m.diag.size();
  int count = 0;
  double prev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double d = m.diag[i] - lambda * m.mass[i];
    if (i > 0) d -= m.off[i - 1] * m.off[i - 1] / prev;
    if (d == 0.0) d = -std::numeric_limits<double>::min();
    if (d < 0.0) ++count;
    prev = d;
  }
  return count;
}

double min_eigenvalue(const DiscretePencil& m, double tol,
                      std::optional<double> lower_hint) {
  const std::size_t k = m.diag.size();
  if (k == 0) throw std::invalid_argument("min_eigenvalue: empty pencil");
  const double m_min = *std::min_element(m.mass.begin(), m.mass.end());
  double row_max = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = std::abs(m.diag[i]);
    if (i > 0) row += std::abs(m.off[i - 1]);
    if (i + 1 < k) row += std::abs(m.off[i]);
    row_max = std::max(row_max, row);
  }
  double lo = -row_max / m_min - 1.0;
  double hi = row_max / m_min + 1.0;
  if (lower_hint && eigenvalues_below(m, *lower_hint) == 0) lo = *lower_hint;
  for (int iter = 0;
       iter < 200 && hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi));
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bit-level plateau
    if (eigenvalues_below(m, mid) == 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SpectralEstimate estimate_min_spectrum(const Problem& prob, double tol,
                                       std::optional<double> lower_hint,
                                       double L_max, int n_max) {
  SpectralEstimate est;
  const double eig_tol = std::max(tol * 1e-3, 1e-12);
  double prev_level = std::numeric_limits<double>::quiet_NaN();
  for (double L = 8.0; L <= L_max; L *= 2.0) {
    double level = 0.0;
    double prev_n = std::numeric_limits<double>::quiet_NaN();
    for (int n = std::min(1 << 12, n_max); n <= n_max; n *= 2) {
      DiscretePencil m = discretize(prob, L, n);
      level = min_eigenvalue(m, eig_tol, lower_hint);
      est.history.emplace_back(L, n, level);
      est.L = L;
      est.n = n;
      est.lambda_min = level;
      if (!std::isnan(prev_n) && std::abs(level - prev_n) < 0.5 * tol) break;
      prev_n = level;
    }
    if (!std::isnan(prev_level) && std::abs(level - prev_level) < tol) {
      est.converged = true;
      break;
    }
    prev_level = level;
  }
  return est;
}

}  // namespace slb
