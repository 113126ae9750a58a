#pragma once

#include <cstdint>
#include <vector>

namespace dsg {

// The Poisson quantities behind the 3.44 constant, all at a given mean.
struct PoissonPoint {
  double lambda = 0.0;
  int m = 0;            // median: smallest k with CDF >= 1/2
  double beta = 0.0;    // solves sum_{k<=m-1} q_k + beta q_m = 1/2
  double exp_fstar = 0.0;  // 1 - sum_{k<=m} q_k - beta q_{m+1}
  double efy = 0.0;        // E[F* Y], equals lambda/2
  double ratio = 0.0;      // exp_fstar / Pr(Y != 0)
};

// lambda with e^{-lambda} = 1 - p; rejects p outside (0, 1).
double lambda_of_p(double p);

PoissonPoint evaluate_point(double lambda);

// Boundary means lambda_1..lambda_imax: lambda_{i+1} solves
// sum_{k<=i} q_k = 1/2 (so lambda_1 = ln 2). Bisection to 1e-12.
std::vector<double> lambda_boundaries(int i_max);

struct RatioMinimum {
  double lambda = 0.0;
  double ratio = 0.0;
};

// Global minimum of the ratio curve: boundary candidates lambda_1..lambda_4
// plus a dense grid safeguard over (0, lambda_4].
RatioMinimum minimize_ratio();

// Checks E[F] >= Pr(Y != 0) / 3.44 for the threshold optimum F* and
// `perturbations` random feasible candidates F >= F* (pointwise domination
// preserves the E[F Y] >= lambda/2 constraint). Every candidate's
// feasibility is re-verified before the bound is tested.
bool lemma_direct_check(double lambda, int perturbations, uint64_t seed);

}  // namespace dsg
