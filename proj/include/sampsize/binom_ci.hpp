#pragma once

#include <cstdint>
#include <string_view>

namespace sampsize {

// A tested proportion: `successes` out of `trials` test cases. Both may be
// real-valued so that pooled or averaged counts can be used directly.
struct BinomialObservation {
    double successes = 0.0;
    double trials = 1.0;

    // Throws DomainError unless 0 <= successes <= trials and trials > 0.
    void validate() const;
};

struct PriorSpec {
    double a = 1.0;
    double b = 1.0;

    void validate() const;
};

struct BetaParams {
    double shape1 = 1.0;
    double shape2 = 1.0;

    double mean() const { return shape1 / (shape1 + shape2); }
};

enum class IntervalMethod { hpd, equal_tailed, clopper_pearson };

std::string_view to_string(IntervalMethod method);
IntervalMethod parse_interval_method(std::string_view name);

struct CredibleInterval {
    double lower = 0.0;
    double upper = 1.0;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::hpd;

    double width() const { return upper - lower; }
};

double point_estimate(const BinomialObservation& obs);

// sqrt(p (1 - p) / n); at most 0.5 / sqrt(n).
double sampling_stddev(double p, double n);

BetaParams posterior(const BinomialObservation& obs, const PriorSpec& prior = {});

// Shortest interval holding `level` posterior mass. Monotone posteriors give
// one-sided intervals touching 0 or 1. U-shaped or flat posteriors have no
// single HPD interval and are rejected.
CredibleInterval hpd_interval(const BinomialObservation& obs, double level = 0.95,
                              const PriorSpec& prior = {});

CredibleInterval equal_tailed_interval(const BinomialObservation& obs, double level = 0.95,
                                       const PriorSpec& prior = {});

// Exact tail-inversion interval; requires integer successes and trials.
CredibleInterval clopper_pearson(const BinomialObservation& obs, double level = 0.95);

CredibleInterval interval(IntervalMethod method, const BinomialObservation& obs, double level = 0.95,
                          const PriorSpec& prior = {});

struct NtestOptions {
    double level = 0.95;
    PriorSpec prior{};
    IntervalMethod method = IntervalMethod::hpd;
    std::int64_t cap = 1'000'000;
};

// Smallest integer n whose interval for k = expected_p_hat * n (k not
// rounded) is at most max_width wide. Throws InfeasibleError past `cap`.
std::int64_t min_ntest_for_width(double expected_p_hat, double max_width, const NtestOptions& options = {});

// Conservative planning value: min_ntest_for_width at p_hat = 0.5.
std::int64_t worst_case_ntest(double max_width, const NtestOptions& options = {});

}  // namespace sampsize
