#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gammalab {

struct GaussRule {
    std::vector<double> nodes;   // on (-1, 1), open
    std::vector<double> weights;
};

// Gauss-Legendre rule of the given order (cached).
const GaussRule& gauss_rule(int order);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    long evals = 0;
};

// Adaptive Gauss on a single panel. Bisects while the coarse/fine discrepancy exceeds
// max(abs_tol, rel_tol*|panel|); abs_tol is split between halves.
QuadResult adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int order, int max_depth);

// Adaptive Simpson with the same contract. Kept as an independent rule family so it can
// serve as an oracle for the Gauss-based paths.
QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, double rel_tol, int max_depth);

// Deterministic pairwise-tree sum (order depends only on the index layout).
double pairwise_sum(std::span<const double> values);

} // namespace gammalab
