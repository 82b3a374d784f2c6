#pragma once

#include <string>

#include "zfrate/lmi.hpp"
#include "zfrate/types.hpp"

namespace zfrate {

enum class SdpStatus { Feasible, Infeasible, Numerical };

struct SdpOptions {
    int max_iter = 200;
    double tol = 1e-9;
    // Return as soon as a validated margin reaches the threshold (bisection only needs the sign).
    bool stop_at_threshold = false;
    // Negative: use feasibility_threshold(problem).
    double threshold = -1.0;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::Numerical;
    Vector x;          // best validated point (margin variable set to t)
    double t = 0.0;    // validated margin: -lambda_max(F(x) without t), clipped by the linear rows on t
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double upper_bound = 0.0;  // primal objective at exit; bounds t from above when the primal residual is small
    std::string message;
};

// Infeasible primal-dual path following (HKM direction, Mehrotra predictor-corrector) on
// max t s.t. F(x) <= 0 plus the linear rows. Every Feasible answer is re-validated by eig_max.
SdpSolution solve(const LmiProblem& p, const SdpOptions& opts = {});

double eig_max(const Matrix& M);

std::string to_string(SdpStatus s);

}  // namespace zfrate
