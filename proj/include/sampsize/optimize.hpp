#pragma once

#include <functional>

namespace sampsize::optimize {

struct Minimum {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

// Golden-section search for a unimodal f on [lo, hi]; stops when the
// bracket is narrower than tol.
Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol,
                       int max_iterations = 500);

// Brent's derivative-free minimizer (golden section + parabolic steps),
// same scheme as the classic fmin routine.
Minimum brent(const std::function<double(double)>& f, double lo, double hi, double tol,
              int max_iterations = 500);

}  // namespace sampsize::optimize
