#pragma once

// Reference implementations used by the tests. They are deliberately naive
// and share no code with the library beyond the value types.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Q = boost::multiprecision::cpp_rational;

/// X factors through Y iff Y(i) == Y(j) implies X(i) == X(j) for all pairs.
inline bool cell_constant(const std::vector<int>& x, const std::vector<int>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (y[i] == y[j] && x[i] != x[j]) return false;
    }
  }
  return true;
}

/// Every map {0..n-1} -> {0..k-1}, as value vectors.
inline std::vector<std::vector<int>> all_maps(std::size_t n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = 0;
    while (i < n && ++cur[i] == k) cur[i++] = 0;
    if (i == n) break;
  }
  return out;
}

/// Every set partition of {0..n-1}, as restricted growth strings.
inline std::vector<std::vector<int>> all_set_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (int v = 0; v <= max_label + 1; ++v) {
      a[i] = v;
      rec(i + 1, std::max(max_label, v));
    }
  };
  if (n == 0) return {{}};
  a[0] = 0;
  rec(1, 0);
  return out;
}

/// Every block of `coarse` is a union of blocks of `fine`.
inline bool coarsens(const std::vector<int>& coarse, const std::vector<int>& fine) {
  return cell_constant(coarse, fine);
}

/// E(g | y) by weighted averaging over each label of y; zero-mass labels
/// are absent.
inline std::map<int, Q> conditional_mean(const std::vector<Q>& weights, const std::vector<Q>& g,
                                         const std::vector<int>& y) {
  std::map<int, Q> num;
  std::map<int, Q> den;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num[y[i]] += weights[i] * g[i];
    den[y[i]] += weights[i];
  }
  std::map<int, Q> out;
  for (const auto& [label, d] : den) {
    if (d != 0) out[label] = num[label] / d;
  }
  return out;
}

/// Finite decision model in plain rationals: prior[t], lik[t][j], psi[t].
struct Model {
  std::vector<Q> prior;
  std::vector<std::vector<Q>> lik;
  std::vector<Q> psi;
};

inline Q marginal(const Model& m, std::size_t j) {
  Q s = 0;
  for (std::size_t t = 0; t < m.prior.size(); ++t) s += m.prior[t] * m.lik[t][j];
  return s;
}

inline Q bayes_risk(const Model& m, const std::vector<Q>& phi) {
  Q r = 0;
  for (std::size_t t = 0; t < m.prior.size(); ++t) {
    for (std::size_t j = 0; j < phi.size(); ++j) {
      const Q e = m.psi[t] - phi[j];
      r += m.prior[t] * m.lik[t][j] * e * e;
    }
  }
  return r;
}

inline Q posterior_risk(const Model& m, const std::vector<Q>& phi, std::size_t j) {
  Q num = 0;
  for (std::size_t t = 0; t < m.prior.size(); ++t) {
    const Q e = m.psi[t] - phi[j];
    num += m.prior[t] * m.lik[t][j] * e * e;
  }
  return num / marginal(m, j);
}

inline Q frequentist_risk(const Model& m, const std::vector<Q>& phi, std::size_t t) {
  Q r = 0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const Q e = phi[j] - m.psi[t];
    r += m.lik[t][j] * e * e;
  }
  return r;
}

inline Q posterior_mean(const Model& m, std::size_t j) {
  Q num = 0;
  for (std::size_t t = 0; t < m.prior.size(); ++t) num += m.prior[t] * m.lik[t][j] * m.psi[t];
  return num / marginal(m, j);
}

/// Random rational model with small numerators; likelihood rows sum to one.
inline Model random_model(std::mt19937_64& rng, std::size_t thetas, std::size_t ys) {
  std::uniform_int_distribution<int> w(1, 6);
  std::uniform_int_distribution<int> v(-4, 4);
  Model m;
  for (std::size_t t = 0; t < thetas; ++t) {
    m.prior.push_back(Q(w(rng), w(rng)));
    m.psi.push_back(Q(v(rng), w(rng)));
    std::vector<Q> row;
    Q total = 0;
    for (std::size_t j = 0; j < ys; ++j) {
      row.push_back(Q(w(rng)));
      total += row.back();
    }
    for (auto& x : row) x /= total;
    m.lik.push_back(row);
  }
  return m;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Closed-form Riccati solution for F = 0, S' = C^2 - (G/D)^2 S^2, S(0) = s0:
/// S(t) = s_inf * (s0 + s_inf tanh(k t)) / (s_inf + s0 tanh(k t)), k = C G / D.
inline double riccati_f0(double c, double g, double d, double s0, double t) {
  const double s_inf = c * d / g;
  const double th = std::tanh(c * g / d * t);
  return s_inf * (s0 + s_inf * th) / (s_inf + s0 * th);
}

/// Textbook predict/update Kalman filter for x' = a x + w, z = h x + v with
/// Var w = q, Var v = r; returns predictions x_{k|k-1}, k = 0..n.
inline std::vector<double> kalman_predictions(double a, double h, double q, double r, double x0, double p0,
                                              const std::vector<double>& z) {
  std::vector<double> pred{x0};
  double x = x0;
  double p = p0;
  for (double zk : z) {
    const double s = h * p * h + r;
    const double k = p * h / s;
    x += k * (zk - h * x);
    p *= (1.0 - k * h);
    x *= a;
    p = a * p * a + q;
    pred.push_back(x);
  }
  return pred;
}

}  // namespace oracle
