#pragma once

#include <cstdint>

#include "sampsize/rng.hpp"

namespace sampsize {

// Two independent proportions: p1/n1 describe the established classifier,
// p2/n2 the new one. alpha is the two-sided type I error.
struct TwoProportionSpec {
    double p1 = 0.5;
    double p2 = 0.5;
    double n1 = 1.0;
    double n2 = 1.0;
    double alpha = 0.05;

    void validate() const;
};

struct SampleSizePlan {
    double n1 = 0.0;
    double n2 = 0.0;
    double fraction = 0.5;  // n1 / (n1 + n2)
    double power = 0.8;
    double alpha = 0.05;
};

struct MonteCarloPower {
    double estimate = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    std::int64_t replicates = 0;
    RngSeed seed{};
    bool sizes_rounded = false;  // n1 or n2 was not an integer
};

// Sample size used as "infinite" for the new classifier.
inline constexpr double kPracticalInfinity = 1e5;

// Normal-approximation power of the two-sided pooled-variance test
// (no continuity correction).
double analytic_power(const TwoProportionSpec& spec);

// Rejection rate of the pooled-variance z-test over simulated binomial
// outcomes, with a 95% Wald interval. Replicates are split into fixed-size
// blocks with their own RNG substreams, so the result does not depend on
// `threads`.
MonteCarloPower simulated_power(const TwoProportionSpec& spec, std::int64_t replicates, RngSeed seed,
                                unsigned threads = 1);

// Exact rejection probability of the same test by enumeration of all
// (k1, k2) outcomes. Intended for small integer n.
double exact_rejection_probability(const TwoProportionSpec& spec);

// Per-group sample size for equal allocation (unrounded).
double equal_allocation_samsize(double p1, double p2, double alpha = 0.05, double power = 0.8);

// Sample sizes with n1 = fraction * (n1 + n2).
SampleSizePlan allocation_samsize(double p1, double p2, double fraction, double alpha = 0.05, double power = 0.8);

// Test cases needed for the new classifier when the old one was tested with
// n_old cases: searches the allocation fraction in [1e-5, 0.5] whose n1
// matches n_old and returns ceil(n_old / f - n_old).
std::int64_t n_new_for_fixed_n_old(double p_old, std::int64_t n_old, double p_new, double alpha = 0.05,
                                   double power = 0.8);

// Power reachable when the new classifier is tested with kPracticalInfinity cases.
double max_power_vs_infinite_test(double p_old, std::int64_t n_old, double p_new, double alpha = 0.05);

}  // namespace sampsize
