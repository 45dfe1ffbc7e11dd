#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "crestcap/auditory.hpp"
#include "crestcap/signal.hpp"

namespace crestcap {

struct SolverOptions {
    int max_inner_iters = 20000;
    double inner_tol = 1e-6;       // relative gradient-mapping tolerance
    double bisection_tol = 1e-4;   // relative bracket width on lambda
    int max_bisection_iters = 60;
    bool record_inner_objectives = false;
};

struct SolverReport {
    Signal solution;
    double objective = 0.0;
    /// ||x||inf for the box-constrained form, the weighted spectral norm for
    /// the detectability-constrained form.
    double constraint_value = 0.0;
    long iterations = 0;
    std::vector<std::pair<double, double>> bisection_trace;  // (lambda, weighted norm)
    bool converged = false;
    /// objective per accepted iterate, only filled when
    /// SolverOptions::record_inner_objectives is set
    std::vector<double> inner_objective_trace;
};

/// Element-wise shrinkage: (|x| - lambda) sgn(x) when |x| > lambda, else 0.
Signal soft_threshold(const Signal& x, double lambda);

/// Element-wise clamp to [-lambda, lambda]. Complements soft_threshold:
/// soft_threshold(x) + hard_clip(x) == x.
Signal hard_clip(const Signal& x, double lambda);

/// min ||diag(w) F (x - x0)||_2  s.t.  ||x||inf <= lambda, solved by
/// accelerated projected gradient with restart on objective increase. The
/// reported objective is the unsquared weighted norm.
SolverReport solve_min_detectability(const Signal& x0, const PerceptualWeights& weights,
                                     double lambda, const SolverOptions& opts = {});

/// min ||x||inf  s.t.  ||diag(w) F (x - x0)||_2 <= c, solved by bisection on
/// the peak bound of the problem above. c = 0 returns x0; c at or above the
/// weighted norm of x0 returns silence.
SolverReport solve_min_peak(const Signal& x0, const PerceptualWeights& weights, double c,
                            const SolverOptions& opts = {});

/// Exact minimizer of (x-x0)' Q (x-x0) over the box [-lambda, lambda]^n by
/// enumerating all 3^n clamped/free coordinate patterns. Test oracle; n <= 8.
std::vector<double> box_qp_oracle(const std::vector<double>& x0,
                                  const std::vector<double>& weight_matrix, double lambda);

/// Dense real quadratic-form matrix matching the solver's spectral
/// objective: Q[m][l] = (1/n) sum_k w_k^2 cos(2 pi k (m-l) / n). Computed
/// directly from the definition (no FFT) so oracle runs stay independent of
/// the transform path.
std::vector<double> spectral_weight_matrix(const std::vector<double>& bin_weights);

}  // namespace crestcap
