#include "sampsize/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "sampsize/error.hpp"

namespace sampsize {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kEigenClip = 1e-8;

std::uint64_t hash_spec(const GaussianClassSpec& spec, std::uint64_t h) {
    h = fnv1a(spec.label.data(), spec.label.size(), h);
    h = fnv1a(spec.mean.data(), sizeof(double) * static_cast<std::size_t>(spec.mean.size()), h);
    return fnv1a(spec.covariance.data(), sizeof(double) * static_cast<std::size_t>(spec.covariance.size()), h);
}

void check_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) throw DomainError("growing sequence needs at least one size");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] <= sizes[i - 1]) throw DomainError("growing sequence sizes must be strictly ascending");
    }
}

// Per-class row orders -> nested sets built by appending increments.
std::vector<LabeledDataset> nest(const LabeledDataset& source, const std::vector<std::vector<std::size_t>>& order,
                                 const std::vector<std::size_t>& sizes) {
    std::vector<LabeledDataset> out;
    std::vector<std::size_t> rows;
    std::size_t previous = 0;
    for (std::size_t s : sizes) {
        for (const auto& cls : order) {
            for (std::size_t i = previous; i < s; ++i) rows.push_back(cls[i]);
        }
        previous = s;
        out.push_back(source.subset(rows));
    }
    return out;
}

}  // namespace

void GaussianClassSpec::validate() const {
    const auto d = mean.size();
    if (d < 1) throw DomainError("class '" + label + "': empty mean vector");
    if (covariance.rows() != d || covariance.cols() != d) {
        throw DomainError("class '" + label + "': covariance shape does not match the mean");
    }
    matrix_root(covariance);
}

Matrix matrix_root(const Matrix& cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) throw DomainError("covariance must be square and non-empty");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw DomainError("covariance matrix is not symmetric");
    }
    const Matrix sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw SolverError("eigendecomposition failed", 0.0, 0.0, 0);
    Vector lambda = eig.eigenvalues();
    const double largest = std::max(0.0, lambda.maxCoeff());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -kEigenClip * largest || (largest == 0.0 && lambda(i) < 0.0)) {
            throw DomainError("covariance matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(lambda(i)) + ")");
        }
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    const Matrix& v = eig.eigenvectors();
    return v * lambda.asDiagonal() * v.transpose();
}

Population::Population(std::vector<GaussianClassSpec> specs)
    : specs_(std::move(specs)), hash_(0xcbf29ce484222325ULL) {
    if (specs_.empty()) throw DomainError("population needs at least one class");
    const auto d = specs_.front().mean.size();
    for (const auto& s : specs_) {
        if (s.mean.size() != d) throw DomainError("all classes must share the feature dimension");
        s.validate();
        roots_.push_back(matrix_root(s.covariance));
        hash_ = hash_spec(s, hash_);
    }
}

std::vector<std::string> Population::labels() const {
    std::vector<std::string> out;
    for (const auto& s : specs_) out.push_back(s.label);
    return out;
}

LabeledDataset Population::sample_class(std::size_t c, std::size_t n, const RngSeed& seed) const {
    const auto& spec = specs_.at(c);
    const auto d = spec.mean.size();
    Engine engine = make_engine(seed);
    Matrix z(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = standard_normal(engine);
    }
    LabeledDataset out;
    out.features = z * roots_[c].transpose();
    out.features.rowwise() += spec.mean.transpose();
    out.labels.assign(n, static_cast<int>(c));
    out.classes = labels();
    out.provenance = {"mvn", seed.seed, seed.stream, hash_};
    return out;
}

LabeledDataset Population::sample(std::size_t n_per_class, const RngSeed& seed) const {
    LabeledDataset out;
    out.classes = labels();
    out.features.resize(0, static_cast<Eigen::Index>(dim()));
    for (std::size_t c = 0; c < specs_.size(); ++c) out = concatenate(out, sample_class(c, n_per_class, seed.child(c)));
    out.provenance = {"mvn", seed.seed, seed.stream, hash_};
    return out;
}

LabeledDataset sample_mvn(const GaussianClassSpec& spec, std::size_t n, const RngSeed& seed) {
    if (n < 1) throw DomainError("sample_mvn needs n >= 1");
    return Population({spec}).sample_class(0, n, seed);
}

std::vector<GaussianClassSpec> estimate_class_moments(const LabeledDataset& data) {
    data.validate();
    std::vector<GaussianClassSpec> out;
    const auto rows = data.class_rows();
    for (std::size_t c = 0; c < data.classes.size(); ++c) {
        if (rows[c].size() < 2) {
            throw DomainError("class '" + data.classes[c] + "' needs at least two rows for a covariance estimate");
        }
        const Matrix x = data.subset(rows[c]).features;
        const Vector mean = x.colwise().mean();
        const Matrix centered = x.rowwise() - mean.transpose();
        Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
        cov = 0.5 * (cov + cov.transpose());
        out.push_back({data.classes[c], mean, cov});
    }
    return out;
}

std::vector<GaussianClassSpec> make_problem(int n_classes, int dim, double separation, bool shared_cov,
                                            const RngSeed& seed, std::vector<std::string> labels) {
    if (n_classes < 2) throw DomainError("a problem needs at least two classes");
    if (dim < 1) throw DomainError("dimension must be at least 1");
    if (dim < n_classes - 1) throw DomainError("simplex placement needs dim >= n_classes - 1");
    if (!(separation >= 0.0)) throw DomainError("separation must be non-negative");
    if (labels.empty()) {
        for (int c = 0; c < n_classes; ++c) labels.push_back("c" + std::to_string(c + 1));
    }
    if (labels.size() != static_cast<std::size_t>(n_classes)) throw DomainError("label count differs from class count");

    // Helmert basis of the subspace orthogonal to (1, ..., 1): the images of
    // the unit vectors are pairwise sqrt(2) apart.
    const double scale = separation / std::sqrt(2.0);
    Engine engine = make_engine(seed);
    std::vector<GaussianClassSpec> out;
    for (int c = 0; c < n_classes; ++c) {
        Vector mean = Vector::Zero(dim);
        for (int j = 1; j < n_classes; ++j) {
            const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
            double h = 0.0;
            if (c < j) h = 1.0 / norm;
            else if (c == j) h = -static_cast<double>(j) / norm;
            mean(j - 1) = scale * h;
        }
        Matrix cov = Matrix::Identity(dim, dim);
        if (!shared_cov) {
            Matrix g(dim, dim);
            for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = standard_normal(engine);
            const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
            Vector lambda(dim);
            for (int i = 0; i < dim; ++i) lambda(i) = 0.5 + uniform_open(engine);
            cov = q * lambda.asDiagonal() * q.transpose();
            cov = 0.5 * (cov + cov.transpose());
        }
        out.push_back({labels[static_cast<std::size_t>(c)], mean, cov});
    }
    return out;
}

StratifiedSplit stratified_draw(const LabeledDataset& pool, std::size_t n_per_class, const RngSeed& seed) {
    pool.validate();
    auto rows = pool.class_rows();
    Engine engine = make_engine(seed);
    std::vector<std::size_t> picked;
    std::vector<bool> taken(pool.rows(), false);
    for (std::size_t c = 0; c < rows.size(); ++c) {
        if (rows[c].size() < n_per_class) {
            throw DomainError("class '" + pool.classes[c] + "' has only " + std::to_string(rows[c].size()) +
                              " rows, " + std::to_string(n_per_class) + " requested");
        }
        shuffle(rows[c].begin(), rows[c].end(), engine);
        for (std::size_t i = 0; i < n_per_class; ++i) {
            picked.push_back(rows[c][i]);
            taken[rows[c][i]] = true;
        }
    }
    // Pool order is kept, so drawing the whole pool reproduces it.
    std::sort(picked.begin(), picked.end());
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.rows(); ++i) {
        if (!taken[i]) rest.push_back(i);
    }
    return {pool.subset(picked), pool.subset(rest)};
}

std::vector<LabeledDataset> growing_sequence(const LabeledDataset& pool, const std::vector<std::size_t>& sizes,
                                             const RngSeed& seed) {
    check_sizes(sizes);
    pool.validate();
    auto rows = pool.class_rows();
    Engine engine = make_engine(seed);
    for (std::size_t c = 0; c < rows.size(); ++c) {
        if (rows[c].size() < sizes.back()) {
            throw DomainError("class '" + pool.classes[c] + "' is too small for the largest growing size");
        }
        shuffle(rows[c].begin(), rows[c].end(), engine);
    }
    return nest(pool, rows, sizes);
}

std::vector<LabeledDataset> growing_sequence(const Population& population, const std::vector<std::size_t>& sizes,
                                             const RngSeed& seed) {
    check_sizes(sizes);
    const LabeledDataset source = population.sample(sizes.back(), seed);
    return nest(source, source.class_rows(), sizes);
}

}  // namespace sampsize
