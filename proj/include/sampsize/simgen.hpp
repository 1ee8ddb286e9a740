#pragma once

#include <string>
#include <vector>

#include "sampsize/dataset.hpp"
#include "sampsize/rng.hpp"

namespace sampsize {

// One simulated class population: N(mean, covariance).
struct GaussianClassSpec {
    std::string label;
    Vector mean;
    Matrix covariance;

    // Checks shape, symmetry (1e-10 relative) and eigenvalues >= -1e-8 * largest.
    void validate() const;
};

// Symmetric root R = V diag(sqrt(lambda)) V^T with R R^T = cov. Eigenvalues
// down to -1e-8 times the largest are clipped to zero.
Matrix matrix_root(const Matrix& covariance);

// Class specs with their matrix roots computed once.
class Population {
public:
    explicit Population(std::vector<GaussianClassSpec> specs);

    const std::vector<GaussianClassSpec>& specs() const { return specs_; }
    std::vector<std::string> labels() const;
    std::size_t dim() const { return static_cast<std::size_t>(specs_.front().mean.size()); }
    std::size_t num_classes() const { return specs_.size(); }
    std::uint64_t hash() const { return hash_; }

    // n rows of class c; the class index is used as label.
    LabeledDataset sample_class(std::size_t c, std::size_t n, const RngSeed& seed) const;

    // n_per_class rows for every class (class c drawn from seed.child(c)),
    // class-major row order.
    LabeledDataset sample(std::size_t n_per_class, const RngSeed& seed) const;

private:
    std::vector<GaussianClassSpec> specs_;
    std::vector<Matrix> roots_;
    std::uint64_t hash_ = 0;
};

// Rows mean + R z, z standard normal via the inverse CDF of (0,1) uniforms.
LabeledDataset sample_mvn(const GaussianClassSpec& spec, std::size_t n, const RngSeed& seed);

// Per-class mean and unbiased covariance; every class needs two rows.
std::vector<GaussianClassSpec> estimate_class_moments(const LabeledDataset& data);

// Class means on a regular simplex with pairwise distance `separation`.
// shared_cov gives every class the identity covariance; otherwise each class
// gets a random rotation of eigenvalues in [0.5, 1.5].
std::vector<GaussianClassSpec> make_problem(int n_classes, int dim, double separation, bool shared_cov,
                                            const RngSeed& seed, std::vector<std::string> labels = {});

struct StratifiedSplit {
    LabeledDataset small;
    LabeledDataset remainder;
};

// Draws n_per_class rows per class without replacement.
StratifiedSplit stratified_draw(const LabeledDataset& pool, std::size_t n_per_class, const RngSeed& seed);

// Nested datasets of sizes[i] rows per class; each set is its predecessor
// with the new rows appended.
std::vector<LabeledDataset> growing_sequence(const LabeledDataset& pool, const std::vector<std::size_t>& sizes,
                                             const RngSeed& seed);
std::vector<LabeledDataset> growing_sequence(const Population& population, const std::vector<std::size_t>& sizes,
                                             const RngSeed& seed);

}  // namespace sampsize
