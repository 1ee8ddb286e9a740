#include "sampsize/power.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "sampsize/error.hpp"
#include "sampsize/optimize.hpp"
#include "sampsize/special.hpp"

namespace sampsize {

namespace {

constexpr std::int64_t kBlockSize = 8192;
constexpr double kMinFraction = 1e-5;
constexpr double kMaxFraction = 0.5;

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void check_design(double alpha, double power) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(power > 0.0 && power < 1.0)) throw DomainError("power must lie in (0, 1)");
}

// Two-sided pooled-variance z-test on observed counts.
struct PooledZTest {
    double n1;
    double n2;
    double critical_sq;

    bool rejects(double k1, double k2) const {
        const double s = (k1 + k2) / (n1 + n2);
        const double d = k1 / n1 - k2 / n2;
        const double denom = s * (1.0 - s) * (1.0 / n1 + 1.0 / n2);
        if (denom <= 0.0) return d != 0.0;
        return d * d / denom >= critical_sq;
    }
};

PooledZTest make_test(double n1, double n2, double alpha) {
    const double z = special::normal_quantile(1.0 - alpha / 2.0);
    return {n1, n2, z * z};
}

std::int64_t simulate_block(const TwoProportionSpec& spec, std::int64_t n1, std::int64_t n2,
                            std::int64_t replicates, const RngSeed& seed) {
    Engine engine = make_engine(seed);
    std::binomial_distribution<std::int64_t> draw1(n1, spec.p1);
    std::binomial_distribution<std::int64_t> draw2(n2, spec.p2);
    const auto sample = [&](auto& dist, std::int64_t n, double p) -> std::int64_t {
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        return dist(engine);
    };
    const PooledZTest test = make_test(static_cast<double>(n1), static_cast<double>(n2), spec.alpha);
    std::int64_t rejections = 0;
    for (std::int64_t r = 0; r < replicates; ++r) {
        const auto k1 = static_cast<double>(sample(draw1, n1, spec.p1));
        const auto k2 = static_cast<double>(sample(draw2, n2, spec.p2));
        if (test.rejects(k1, k2)) ++rejections;
    }
    return rejections;
}

double log_binom_pmf(std::int64_t k, std::int64_t n, double p) {
    if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
    if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
           (nd - kd) * std::log1p(-p);
}

}  // namespace

void TwoProportionSpec::validate() const {
    check_probability(p1, "p1");
    check_probability(p2, "p2");
    if (!(n1 >= 1.0) || !(n2 >= 1.0)) throw DomainError("sample sizes must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

double analytic_power(const TwoProportionSpec& spec) {
    spec.validate();
    const double q1 = 1.0 - spec.p1;
    const double q2 = 1.0 - spec.p2;
    const double sd = std::sqrt(spec.p1 * q1 / spec.n1 + spec.p2 * q2 / spec.n2);
    if (!(sd > 0.0)) throw DomainError("both proportions are degenerate; power is undefined");
    const double z = special::normal_quantile(1.0 - spec.alpha / 2.0);
    const double pooled = (spec.n1 * spec.p1 + spec.n2 * spec.p2) / (spec.n1 + spec.n2);
    const double null_sd = z * std::sqrt((1.0 / spec.n1 + 1.0 / spec.n2) * pooled * (1.0 - pooled));
    const double diff = std::fabs(spec.p1 - spec.p2);
    return 1.0 - special::normal_cdf((null_sd - diff) / sd) + special::normal_cdf((-null_sd - diff) / sd);
}

MonteCarloPower simulated_power(const TwoProportionSpec& spec, std::int64_t replicates, RngSeed seed,
                                unsigned threads) {
    spec.validate();
    if (replicates < 1000) throw DomainError("simulated power needs at least 1000 replicates");

    MonteCarloPower result;
    result.replicates = replicates;
    result.seed = seed;
    const auto n1 = static_cast<std::int64_t>(std::llround(spec.n1));
    const auto n2 = static_cast<std::int64_t>(std::llround(spec.n2));
    result.sizes_rounded = static_cast<double>(n1) != spec.n1 || static_cast<double>(n2) != spec.n2;

    const std::int64_t blocks = (replicates + kBlockSize - 1) / kBlockSize;
    std::vector<std::int64_t> rejections(static_cast<std::size_t>(blocks), 0);
    const auto run_block = [&](std::int64_t b) {
        const std::int64_t count = std::min(kBlockSize, replicates - b * kBlockSize);
        rejections[static_cast<std::size_t>(b)] =
            simulate_block(spec, n1, n2, count, seed.child(static_cast<std::uint64_t>(b)));
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
    if (workers == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::int64_t b = w; b < blocks; b += workers) run_block(b);
            });
        }
    }

    std::int64_t total = 0;
    for (auto r : rejections) total += r;
    const double reps = static_cast<double>(replicates);
    result.estimate = static_cast<double>(total) / reps;
    const double half = special::normal_quantile(0.975) * std::sqrt(result.estimate * (1.0 - result.estimate) / reps);
    result.ci_lower = std::max(0.0, result.estimate - half);
    result.ci_upper = std::min(1.0, result.estimate + half);
    return result;
}

double exact_rejection_probability(const TwoProportionSpec& spec) {
    spec.validate();
    const auto n1 = static_cast<std::int64_t>(std::llround(spec.n1));
    const auto n2 = static_cast<std::int64_t>(std::llround(spec.n2));
    const PooledZTest test = make_test(static_cast<double>(n1), static_cast<double>(n2), spec.alpha);
    std::vector<double> pmf2(static_cast<std::size_t>(n2 + 1));
    for (std::int64_t k2 = 0; k2 <= n2; ++k2) pmf2[static_cast<std::size_t>(k2)] = std::exp(log_binom_pmf(k2, n2, spec.p2));
    double total = 0.0;
    for (std::int64_t k1 = 0; k1 <= n1; ++k1) {
        const double w1 = std::exp(log_binom_pmf(k1, n1, spec.p1));
        if (w1 == 0.0) continue;
        for (std::int64_t k2 = 0; k2 <= n2; ++k2) {
            if (test.rejects(static_cast<double>(k1), static_cast<double>(k2))) {
                total += w1 * pmf2[static_cast<std::size_t>(k2)];
            }
        }
    }
    return total;
}

double equal_allocation_samsize(double p1, double p2, double alpha, double power) {
    return allocation_samsize(p1, p2, 0.5, alpha, power).n1;
}

SampleSizePlan allocation_samsize(double p1, double p2, double fraction, double alpha, double power) {
    check_probability(p1, "p1");
    check_probability(p2, "p2");
    check_design(alpha, power);
    if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("fraction must lie in (0, 1)");
    if (p1 == p2) throw InfeasibleError("p1 == p2: no finite sample size detects a zero difference");

    const double z_alpha = special::normal_quantile(1.0 - alpha / 2.0);
    const double z_beta = special::normal_quantile(power);
    const double ratio = (1.0 - fraction) / fraction;  // n2 / n1
    const double pooled = fraction * p1 + (1.0 - fraction) * p2;
    const double numerator = z_alpha * std::sqrt((ratio + 1.0) * pooled * (1.0 - pooled)) +
                             z_beta * std::sqrt(ratio * p1 * (1.0 - p1) + p2 * (1.0 - p2));
    const double n1 = numerator * numerator / ratio / ((p1 - p2) * (p1 - p2));
    return {n1, ratio * n1, fraction, power, alpha};
}

double max_power_vs_infinite_test(double p_old, std::int64_t n_old, double p_new, double alpha) {
    return analytic_power({p_old, p_new, static_cast<double>(n_old), kPracticalInfinity, alpha});
}

std::int64_t n_new_for_fixed_n_old(double p_old, std::int64_t n_old, double p_new, double alpha, double power) {
    check_probability(p_old, "p_old");
    check_probability(p_new, "p_new");
    check_design(alpha, power);
    if (n_old < 1) throw DomainError("n_old must be at least 1");
    if (p_old == p_new) throw InfeasibleError("p_new == p_old: superiority cannot be demonstrated");

    const auto target = static_cast<double>(n_old);
    const auto n1_at = [&](double f) { return allocation_samsize(p_old, p_new, f, alpha, power).n1; };

    // n1 grows with the fraction: at the lower end the old test set is the
    // bottleneck, at the upper end equal allocation already suffices.
    if (n1_at(kMinFraction) > target) {
        const double reachable = max_power_vs_infinite_test(p_old, n_old, p_new, alpha);
        throw InfeasibleError("power " + std::to_string(power) + " unattainable with n_old = " +
                              std::to_string(n_old) + "; maximal power with an effectively infinite new test set is " +
                              std::to_string(reachable));
    }
    if (n1_at(kMaxFraction) <= target) return n_old;

    const auto mismatch = [&](double f) {
        const double d = n1_at(f) - target;
        return d * d;
    };
    const auto best = optimize::brent(mismatch, kMinFraction, kMaxFraction, 1e-12);
    return static_cast<std::int64_t>(std::ceil(target / best.x - target));
}

}  // namespace sampsize
