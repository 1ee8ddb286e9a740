#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sampsize/dataset.hpp"
#include "sampsize/error.hpp"
#include "sampsize/rng.hpp"
#include "sampsize/simgen.hpp"

using namespace sampsize;

namespace {

Matrix random_spd(Engine& engine, int d) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a(i, j) = standard_normal(engine);
    }
    return a * a.transpose() / d + 0.01 * Matrix::Identity(d, d);
}

LabeledDataset pool_with_sizes(const std::vector<std::size_t>& sizes) {
    LabeledDataset data;
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    data.features.resize(static_cast<Eigen::Index>(n), 2);
    std::size_t row = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        data.classes.push_back("c" + std::to_string(c));
        for (std::size_t i = 0; i < sizes[c]; ++i, ++row) {
            data.labels.push_back(static_cast<int>(c));
            data.features(static_cast<Eigen::Index>(row), 0) = static_cast<double>(row);
            data.features(static_cast<Eigen::Index>(row), 1) = -static_cast<double>(row);
        }
    }
    return data;
}

// Multiset of rows keyed by the unique first feature.
std::multiset<double> row_keys(const LabeledDataset& d) {
    std::multiset<double> keys;
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) keys.insert(d.features(i, 0));
    return keys;
}

bool same_rows(const LabeledDataset& a, const LabeledDataset& b) {
    return a.features == b.features && a.labels == b.labels && a.classes == b.classes;
}

}  // namespace

TEST_SUITE("simgen") {
    TEST_CASE("rng substreams") {
        const RngSeed s{42, 0};
        CHECK(s.child(3) == s.child(3));
        CHECK(!(s.child(3) == s.child(4)));
        CHECK(!(s.child(1).child(2) == s.child(2).child(1)));
        Engine a = make_engine(s);
        Engine b = make_engine(s);
        for (int i = 0; i < 10; ++i) CHECK(a() == b());
        Engine c = make_engine(RngSeed{42, 1});
        Engine d = make_engine(RngSeed{43, 0});
        CHECK(make_engine(s)() != c());
        CHECK(make_engine(s)() != d());
    }

    TEST_CASE("uniform and index draws") {
        Engine e = make_engine({1, 2});
        std::array<int, 7> counts{};
        for (int i = 0; i < 70000; ++i) {
            const double u = uniform_open(e);
            CHECK(u > 0.0);
            CHECK(u < 1.0);
            ++counts[uniform_index(e, 7)];
        }
        double chi2 = 0.0;
        for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
        const boost::math::chi_squared_distribution<> dist(6);
        CHECK(chi2 < boost::math::quantile(dist, 0.999));

        std::vector<int> v(20);
        std::iota(v.begin(), v.end(), 0);
        auto w = v;
        shuffle(w.begin(), w.end(), e);
        CHECK(w != v);
        std::sort(w.begin(), w.end());
        CHECK(w == v);
    }

    TEST_CASE("matrix root") {
        CHECK(matrix_root(Matrix::Identity(4, 4)).isApprox(Matrix::Identity(4, 4), 1e-14));
        Matrix diag = Matrix::Zero(2, 2);
        diag(0, 0) = 4;
        diag(1, 1) = 9;
        const Matrix r = matrix_root(diag);
        CHECK(r(0, 0) == doctest::Approx(2.0));
        CHECK(r(1, 1) == doctest::Approx(3.0));
        CHECK(std::abs(r(0, 1)) < 1e-14);

        Engine e = make_engine({3, 0});
        for (int i = 0; i < 100; ++i) {
            const int d = 1 + i % 50;
            const Matrix cov = random_spd(e, d);
            const Matrix root = matrix_root(cov);
            CHECK((root * root.transpose() - cov).norm() <= 1e-8 * cov.norm());
        }

        Matrix asym = Matrix::Identity(2, 2);
        asym(0, 1) = 0.1;
        CHECK_THROWS_AS(matrix_root(asym), DomainError);
        Matrix indefinite = Matrix::Identity(2, 2);
        indefinite(1, 1) = -0.5;
        CHECK_THROWS_AS(matrix_root(indefinite), DomainError);
        // Tiny negative eigenvalues from rounding are clipped.
        Matrix nearly = Matrix::Identity(2, 2);
        nearly(1, 1) = -1e-12;
        CHECK_NOTHROW(matrix_root(nearly));
    }

    TEST_CASE("sample moments") {
        GaussianClassSpec spec{"a", Vector::Zero(3), Matrix::Identity(3, 3)};
        const auto data = sample_mvn(spec, 100000, {5, 0});
        const Vector mean = data.features.colwise().mean();
        for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(j)) < 4.0 / std::sqrt(1e5));
        const auto est = estimate_class_moments(data);
        CHECK((est[0].covariance - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);

        Engine e = make_engine({6, 0});
        GaussianClassSpec general{"g", Vector::LinSpaced(4, -1.0, 2.0), random_spd(e, 4)};
        const auto back = estimate_class_moments(sample_mvn(general, 100000, {7, 0}));
        CHECK((back[0].mean - general.mean).cwiseAbs().maxCoeff() < 0.02);
        CHECK((back[0].covariance - general.covariance).cwiseAbs().maxCoeff() < 0.03);

        GaussianClassSpec zero{"z", Vector::Constant(2, 1.5), Matrix::Zero(2, 2)};
        const auto flat = sample_mvn(zero, 10, {8, 0});
        for (Eigen::Index i = 0; i < 10; ++i) CHECK(flat.features.row(i) == zero.mean.transpose());

        CHECK(same_rows(sample_mvn(general, 50, {9, 1}), sample_mvn(general, 50, {9, 1})));
        CHECK(!same_rows(sample_mvn(general, 50, {9, 1}), sample_mvn(general, 50, {9, 2})));
        GaussianClassSpec wrong{"w", Vector::Zero(3), Matrix::Identity(2, 2)};
        CHECK_THROWS_AS(sample_mvn(wrong, 5, {}), DomainError);
    }

    TEST_CASE("mardia normality tests") {
        Engine e = make_engine({10, 0});
        GaussianClassSpec spec{"m", Vector::LinSpaced(5, 0.0, 4.0), random_spd(e, 5)};
        const auto data = sample_mvn(spec, 10000, {11, 0});
        const Eigen::Index n = data.features.rows();
        const double p = 5;
        const Matrix centered = data.features.rowwise() - data.features.colwise().mean();
        const Matrix s = centered.transpose() * centered / static_cast<double>(n);
        const Matrix g = centered * s.llt().solve(centered.transpose());
        const double b1 = g.array().cube().sum() / (double(n) * double(n));
        const double b2 = g.diagonal().array().square().sum() / double(n);
        const double skew_stat = double(n) * b1 / 6.0;
        const boost::math::chi_squared_distribution<> chi(p * (p + 1) * (p + 2) / 6);
        CHECK(skew_stat < boost::math::quantile(chi, 0.99));
        const double kurt_z = (b2 - p * (p + 2)) / std::sqrt(8 * p * (p + 2) / double(n));
        CHECK(std::abs(kurt_z) < 2.5758);
    }

    TEST_CASE("moment estimation by hand") {
        LabeledDataset two;
        two.features.resize(2, 2);
        two.features << 0, 0, 2, 2;
        two.labels = {0, 0};
        two.classes = {"a"};
        const auto est = estimate_class_moments(two);
        CHECK(est[0].mean(0) == 1.0);
        CHECK(est[0].mean(1) == 1.0);
        CHECK(est[0].covariance(0, 0) == 2.0);
        CHECK(est[0].covariance(0, 1) == 2.0);
        CHECK(est[0].covariance(1, 1) == 2.0);

        LabeledDataset constant = two;
        constant.features << 3, 3, 3, 3;
        CHECK(estimate_class_moments(constant)[0].covariance.isZero());

        LabeledDataset single = two;
        single.classes = {"a", "b"};
        single.labels = {0, 1};
        CHECK_THROWS_AS(estimate_class_moments(single), DomainError);
    }

    TEST_CASE("simplex problems") {
        for (double sep : {0.0, 1.0, 3.25}) {
            const auto specs = make_problem(5, 20, sep, true, {12, 0});
            CHECK(specs.size() == 5);
            for (std::size_t i = 0; i < 5; ++i) {
                CHECK(specs[i].covariance.isApprox(Matrix::Identity(20, 20)));
                for (std::size_t j = i + 1; j < 5; ++j) {
                    CHECK((specs[i].mean - specs[j].mean).norm() == doctest::Approx(sep).epsilon(1e-12));
                }
            }
            CHECK(specs[0].label == "c1");
        }
        const auto hetero = make_problem(3, 4, 2.0, false, {13, 0}, {"x", "y", "z"});
        for (const auto& s : hetero) {
            const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.covariance);
            CHECK(eig.eigenvalues().minCoeff() >= 0.5 - 1e-12);
            CHECK(eig.eigenvalues().maxCoeff() <= 1.5 + 1e-12);
        }
        CHECK(hetero[2].label == "z");
        CHECK_THROWS_AS(make_problem(5, 3, 1.0, true, {}), DomainError);
        CHECK_THROWS_AS(make_problem(1, 3, 1.0, true, {}), DomainError);
        CHECK_THROWS_AS(make_problem(2, 3, -1.0, true, {}), DomainError);
    }

    TEST_CASE("population sampling") {
        const Population pop(make_problem(3, 4, 2.0, true, {14, 0}));
        const auto data = pop.sample(10, {15, 0});
        CHECK(data.rows() == 30);
        CHECK(data.class_counts() == std::vector<std::size_t>{10, 10, 10});
        CHECK(data.provenance.seed == 15);
        CHECK(data.provenance.spec_hash == pop.hash());
        CHECK(same_rows(data, pop.sample(10, {15, 0})));
        const Population other(make_problem(3, 4, 2.5, true, {14, 0}));
        CHECK(pop.hash() != other.hash());
    }

    TEST_CASE("stratified draw") {
        const auto pool = pool_with_sizes({372, 569, 558, 532, 518});
        const auto split = stratified_draw(pool, 25, {16, 0});
        CHECK(split.small.class_counts() == std::vector<std::size_t>{25, 25, 25, 25, 25});
        CHECK(split.remainder.class_counts() == std::vector<std::size_t>{347, 544, 533, 507, 493});
        auto all = row_keys(split.small);
        const auto rest = row_keys(split.remainder);
        all.insert(rest.begin(), rest.end());
        CHECK(all == row_keys(pool));
        CHECK(same_rows(split.small, stratified_draw(pool, 25, {16, 0}).small));

        const auto small_pool = pool_with_sizes({4, 4});
        const auto full = stratified_draw(small_pool, 4, {17, 0});
        CHECK(full.remainder.rows() == 0);
        CHECK(same_rows(full.small, small_pool));
        CHECK_THROWS_AS(stratified_draw(small_pool, 5, {}), DomainError);
    }

    TEST_CASE("growing sequences") {
        std::vector<std::size_t> sizes;
        for (std::size_t s = 2; s <= 25; ++s) sizes.push_back(s);
        const auto pool = pool_with_sizes({40, 40, 40});
        const auto seq = growing_sequence(pool, sizes, {18, 0});
        CHECK(seq.size() == 24);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            CHECK(seq[i].class_counts() == std::vector<std::size_t>(3, sizes[i]));
            if (i == 0) continue;
            // Predecessor rows come first, unchanged.
            const auto& prev = seq[i - 1];
            CHECK(seq[i].features.topRows(prev.features.rows()) == prev.features);
            const auto big = row_keys(seq[i]);
            for (double k : row_keys(prev)) CHECK(big.count(k) >= 1);
        }
        CHECK(growing_sequence(pool, {5}, {18, 0}).size() == 1);
        CHECK_THROWS_AS(growing_sequence(pool, {5, 5}, {}), DomainError);
        CHECK_THROWS_AS(growing_sequence(pool, {6, 3}, {}), DomainError);
        CHECK_THROWS_AS(growing_sequence(pool, {41}, {}), DomainError);

        const Population pop(make_problem(2, 3, 1.0, true, {19, 0}));
        const auto gen = growing_sequence(pop, {3, 7, 12}, {20, 0});
        CHECK(gen.back().rows() == 24);
        CHECK(gen[1].features.topRows(6) == gen[0].features);
    }

    TEST_CASE("dataset persistence") {
        const Population pop(make_problem(3, 5, 2.0, false, {21, 0}, {"a", "b", "c"}));
        const auto data = pop.sample(7, {22, 3});

        std::stringstream csv;
        write_dataset_csv(csv, data);
        CHECK(csv.str().rfind("label,f1,f2,f3,f4,f5\n", 0) == 0);
        const auto back = read_dataset_csv(csv);
        CHECK(back.features == data.features);
        CHECK(back.labels == data.labels);
        CHECK(back.classes == data.classes);

        std::stringstream bin;
        write_dataset_binary(bin, data);
        const auto restored = read_dataset_binary(bin);
        CHECK(restored == data);
        CHECK(restored.provenance == data.provenance);

        std::stringstream junk("not a container");
        CHECK_THROWS_AS(read_dataset_binary(junk), IoError);
        std::stringstream bad_csv("label,f1\na,1.0\nb,xyz\n");
        CHECK_THROWS_AS(read_dataset_csv(bad_csv), IoError);
        std::string truncated = bin.str();
        truncated.resize(truncated.size() / 2);
        std::stringstream cut(truncated);
        CHECK_THROWS_AS(read_dataset_binary(cut), IoError);
    }
}
