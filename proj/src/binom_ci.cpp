#include "sampsize/binom_ci.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sampsize/error.hpp"
#include "sampsize/optimize.hpp"
#include "sampsize/special.hpp"

namespace sampsize {

namespace {

constexpr double kMassTolerance = 1e-8;
constexpr double kCutTolerance = 1e-10;

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
}

bool is_integral(double v) {
    return std::fabs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::fabs(v));
}

void check_mass(double lower, double upper, double level, const BetaParams& post) {
    const double mass = special::ibeta(upper, post.shape1, post.shape2) -
                        special::ibeta(lower, post.shape1, post.shape2);
    if (std::fabs(mass - level) > kMassTolerance) {
        throw SolverError("interval posterior mass misses the requested level", lower, mass - level, 0);
    }
}

}  // namespace

void BinomialObservation::validate() const {
    if (!std::isfinite(successes) || !std::isfinite(trials)) throw DomainError("observation must be finite");
    if (!(trials > 0.0)) throw DomainError("trials must be positive (n = 0 has no interval)");
    if (successes < 0.0 || successes > trials) throw DomainError("successes must lie in [0, trials]");
}

void PriorSpec::validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("prior shapes must be positive");
    }
}

std::string_view to_string(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::hpd: return "hpd";
        case IntervalMethod::equal_tailed: return "equal-tailed";
        case IntervalMethod::clopper_pearson: return "clopper-pearson";
    }
    return "?";
}

IntervalMethod parse_interval_method(std::string_view name) {
    if (name == "hpd") return IntervalMethod::hpd;
    if (name == "equal-tailed" || name == "equal_tailed" || name == "central") return IntervalMethod::equal_tailed;
    if (name == "clopper-pearson" || name == "clopper_pearson" || name == "exact") {
        return IntervalMethod::clopper_pearson;
    }
    throw DomainError("unknown interval method '" + std::string(name) + "'");
}

double point_estimate(const BinomialObservation& obs) {
    obs.validate();
    return obs.successes / obs.trials;
}

double sampling_stddev(double p, double n) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("proportion must lie in [0, 1]");
    if (!(n > 0.0)) throw DomainError("sample size must be positive");
    return std::sqrt(p * (1.0 - p) / n);
}

BetaParams posterior(const BinomialObservation& obs, const PriorSpec& prior) {
    obs.validate();
    prior.validate();
    return {obs.successes + prior.a, obs.trials - obs.successes + prior.b};
}

CredibleInterval hpd_interval(const BinomialObservation& obs, double level, const PriorSpec& prior) {
    check_level(level);
    const BetaParams post = posterior(obs, prior);
    const double a = post.shape1;
    const double b = post.shape2;
    CredibleInterval ci{0.0, 1.0, level, IntervalMethod::hpd};

    if (a <= 1.0 && b <= 1.0) {
        throw DomainError("posterior Beta(" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is flat or U-shaped; no unique HPD interval");
    }
    if (a <= 1.0) {
        ci.upper = special::ibeta_inv(level, a, b);
    } else if (b <= 1.0) {
        ci.lower = special::ibeta_inv(1.0 - level, a, b);
    } else {
        // Lower tail mass t fixes the interval [Q(t), Q(t + level)]; its length
        // is unimodal in t for a unimodal density.
        const auto width = [&](double t) {
            return special::ibeta_inv(std::min(t + level, 1.0), a, b) - special::ibeta_inv(t, a, b);
        };
        const auto best = optimize::golden_section(width, 0.0, 1.0 - level, kCutTolerance);
        ci.lower = special::ibeta_inv(best.x, a, b);
        ci.upper = special::ibeta_inv(std::min(best.x + level, 1.0), a, b);
    }
    check_mass(ci.lower, ci.upper, level, post);
    return ci;
}

CredibleInterval equal_tailed_interval(const BinomialObservation& obs, double level, const PriorSpec& prior) {
    check_level(level);
    const BetaParams post = posterior(obs, prior);
    const double tail = (1.0 - level) / 2.0;
    CredibleInterval ci{special::ibeta_inv(tail, post.shape1, post.shape2),
                        special::ibeta_inv(1.0 - tail, post.shape1, post.shape2), level,
                        IntervalMethod::equal_tailed};
    check_mass(ci.lower, ci.upper, level, post);
    return ci;
}

CredibleInterval clopper_pearson(const BinomialObservation& obs, double level) {
    check_level(level);
    obs.validate();
    if (!is_integral(obs.successes) || !is_integral(obs.trials)) {
        throw DomainError("Clopper-Pearson needs integer successes and trials");
    }
    const double k = std::round(obs.successes);
    const double n = std::round(obs.trials);
    const double tail = (1.0 - level) / 2.0;
    CredibleInterval ci{0.0, 1.0, level, IntervalMethod::clopper_pearson};
    if (k > 0.0) ci.lower = special::ibeta_inv(tail, k, n - k + 1.0);
    if (k < n) ci.upper = special::ibeta_inv(1.0 - tail, k + 1.0, n - k);
    return ci;
}

CredibleInterval interval(IntervalMethod method, const BinomialObservation& obs, double level,
                          const PriorSpec& prior) {
    switch (method) {
        case IntervalMethod::hpd: return hpd_interval(obs, level, prior);
        case IntervalMethod::equal_tailed: return equal_tailed_interval(obs, level, prior);
        case IntervalMethod::clopper_pearson: return clopper_pearson(obs, level);
    }
    throw DomainError("unknown interval method");
}

std::int64_t min_ntest_for_width(double expected_p_hat, double max_width, const NtestOptions& options) {
    if (!(expected_p_hat >= 0.0 && expected_p_hat <= 1.0)) throw DomainError("expected p_hat must lie in [0, 1]");
    if (!(max_width > 0.0)) throw DomainError("maximal width must be positive");
    if (options.cap < 1) throw DomainError("sample size cap must be at least 1");
    check_level(options.level);

    const auto width_at = [&](std::int64_t n) {
        const double trials = static_cast<double>(n);
        const BinomialObservation obs{std::min(expected_p_hat * trials, trials), trials};
        return interval(options.method, obs, options.level, options.prior).width();
    };

    // Width is not strictly monotone at tiny n with real-valued k, so small n
    // are scanned one by one. Beyond the scan range the width decreases
    // smoothly in n and bisection finds the first success.
    const std::int64_t scan_limit = std::min<std::int64_t>(options.cap, 4096);
    for (std::int64_t n = 1; n <= scan_limit; ++n) {
        if (width_at(n) <= max_width) return n;
    }
    const auto cap_message = [&] {
        return "interval width " + std::to_string(max_width) + " not reached within n <= " +
               std::to_string(options.cap);
    };
    if (scan_limit == options.cap || width_at(options.cap) > max_width) throw InfeasibleError(cap_message());

    std::int64_t failing = scan_limit;
    std::int64_t passing = options.cap;
    while (passing - failing > 1) {
        const std::int64_t mid = failing + (passing - failing) / 2;
        if (width_at(mid) <= max_width) passing = mid; else failing = mid;
    }
    return passing;
}

std::int64_t worst_case_ntest(double max_width, const NtestOptions& options) {
    return min_ntest_for_width(0.5, max_width, options);
}

}  // namespace sampsize
