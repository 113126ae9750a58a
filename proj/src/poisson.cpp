#include "dsg/poisson.hpp"

#include <cmath>
#include <stdexcept>

#include "dsg/rng.hpp"

namespace dsg {

namespace {

// pmf values q_0..q_K via the overflow-free recurrence q_{k+1} = q_k
// lambda/(k+1), truncated once the tail is negligible relative to the mode.
std::vector<double> poisson_pmf(double lambda) {
  std::vector<double> q;
  double qk = std::exp(-lambda);
  double peak = qk;
  for (int k = 0;; ++k) {
    q.push_back(qk);
    peak = std::max(peak, qk);
    if (static_cast<double>(k) > lambda && qk < 1e-18 * peak && k >= 3) break;
    if (k > 10000) throw std::runtime_error("poisson pmf failed to truncate");
    qk *= lambda / (k + 1);
  }
  return q;
}

// F* is the threshold form: 0 for k <= m, 1 - beta at m + 1, 1 above.
double fstar_at(int k, int m, double beta) {
  if (k <= m) return 0.0;
  if (k == m + 1) return 1.0 - beta;
  return 1.0;
}

}  // namespace

double lambda_of_p(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("p must be in (0, 1)");
  return std::log(1.0 / (1.0 - p));
}

PoissonPoint evaluate_point(double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
  std::vector<double> q = poisson_pmf(lambda);
  PoissonPoint pt;
  pt.lambda = lambda;

  long double cdf = 0.0L;
  int m = -1;
  long double below_m = 0.0L;  // sum_{k <= m-1} q_k
  for (size_t k = 0; k < q.size(); ++k) {
    cdf += q[k];
    if (cdf >= 0.5L) {
      m = static_cast<int>(k);
      below_m = cdf - q[k];
      break;
    }
  }
  if (m < 0) throw std::runtime_error("poisson median not found");
  pt.m = m;
  pt.beta = static_cast<double>((0.5L - below_m) / q[m]);
  if (!(pt.beta > 0.0 && pt.beta <= 1.0 + 1e-12))
    throw std::runtime_error("beta escaped (0, 1]");
  pt.beta = std::min(pt.beta, 1.0);

  double q_m1 = static_cast<size_t>(m) + 1 < q.size() ? q[m + 1] : 0.0;
  pt.exp_fstar =
      static_cast<double>(1.0L - (below_m + q[m]) - pt.beta * q_m1);

  long double efy = 0.0L;
  for (size_t k = 0; k < q.size(); ++k)
    efy += fstar_at(static_cast<int>(k), m, pt.beta) *
           static_cast<long double>(k) * q[k];
  pt.efy = static_cast<double>(efy);
  pt.ratio = pt.exp_fstar / (1.0 - std::exp(-lambda));
  return pt;
}

std::vector<double> lambda_boundaries(int i_max) {
  if (i_max < 1) throw std::domain_error("need at least one boundary");
  std::vector<double> out;
  for (int i = 0; i < i_max; ++i) {
    // solve sum_{k<=i} q_k(lambda) = 1/2; the CDF is decreasing in lambda
    auto cdf_i = [&](double lambda) {
      long double qk = std::exp(-lambda), s = 0.0L;
      for (int k = 0; k <= i; ++k) {
        s += qk;
        qk *= lambda / (k + 1);
      }
      return static_cast<double>(s);
    };
    double lo = 1e-12, hi = 3.0 * (i + 2);
    while (cdf_i(hi) > 0.5) hi *= 2.0;
    while (hi - lo > 1e-12) {
      double mid = 0.5 * (lo + hi);
      (cdf_i(mid) >= 0.5 ? lo : hi) = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

RatioMinimum minimize_ratio() {
  std::vector<double> candidates = lambda_boundaries(4);
  double hi = candidates.back();
  const int grid = 200000;
  for (int i = 1; i <= grid; ++i)
    candidates.push_back(hi * static_cast<double>(i) / grid);
  RatioMinimum best{0.0, 1e300};
  for (double lam : candidates) {
    double r = evaluate_point(lam).ratio;
    if (r < best.ratio) best = {lam, r};
  }
  return best;
}

bool lemma_direct_check(double lambda, int perturbations, uint64_t seed) {
  PoissonPoint pt = evaluate_point(lambda);
  std::vector<double> q = poisson_pmf(lambda);
  double bound = (1.0 - std::exp(-lambda)) / 3.44;

  Rng rng(derive_seed(seed, "lemma"));
  for (int t = -1; t <= perturbations; ++t) {
    std::vector<double> f(q.size());
    for (size_t k = 0; k < q.size(); ++k)
      f[k] = fstar_at(static_cast<int>(k), pt.m, pt.beta);
    if (t == 0) {
      for (double& x : f) x = 1.0;  // the trivial all-ones candidate
    } else if (t > 0) {
      double mix = rng.uniform();
      for (double& x : f) x += mix * rng.uniform() * (1.0 - x);
    }
    long double efy = 0.0L, ef = 0.0L;
    for (size_t k = 0; k < q.size(); ++k) {
      efy += f[k] * static_cast<long double>(k) * q[k];
      ef += f[k] * q[k];
    }
    if (static_cast<double>(efy) < lambda / 2.0 - 1e-9)
      throw std::runtime_error("infeasible candidate in lemma check");
    if (static_cast<double>(ef) < bound - 1e-12) return false;
  }
  return true;
}

}  // namespace dsg
