#include "sampsize/validate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sampsize/error.hpp"
#include "sampsize/optimize.hpp"
#include "sampsize/parallel.hpp"

namespace sampsize {

namespace {

LearningCurve make_curve(CurveView view, const std::vector<std::string>& classes) {
    LearningCurve curve;
    curve.view = view;
    curve.classes = classes;
    return curve;
}

void finish_point(CurvePoint& point) {
    point.bands.clear();
    for (const auto& v : point.values) point.bands.push_back(percentile_band(v));
}

// values[c][r] from one confusion matrix per replicate r.
std::vector<std::vector<double>> sensitivities(const std::vector<ConfusionMatrix>& matrices, std::size_t n_classes) {
    std::vector<std::vector<double>> values(n_classes, std::vector<double>(matrices.size()));
    for (std::size_t r = 0; r < matrices.size(); ++r) {
        for (std::size_t c = 0; c < n_classes; ++c) values[c][r] = matrices[r].sensitivity(c);
    }
    return values;
}

void check_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) throw DomainError("learning curve needs at least one size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw DomainError("learning curve sizes must be positive");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw DomainError("learning curve sizes must be strictly ascending");
    }
}

GrowingCurves growing_from_sequence(const std::vector<LabeledDataset>& sequence, const std::vector<std::size_t>& sizes,
                                    const CvSpec& cv, const ModelConfig& model, const LabeledDataset& large_test,
                                    unsigned threads) {
    const auto& classes = large_test.classes;
    GrowingCurves out{make_curve(CurveView::growing_cv, classes), make_curve(CurveView::growing_truth, classes)};
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        CvSpec spec = cv;
        spec.seed = cv.seed.child(sizes[s]);
        const CvResult result = iterated_cv(sequence[s], model, spec, &large_test, threads);

        std::vector<ConfusionMatrix> truth;
        for (std::size_t i = 0; i < result.iterations.size(); ++i) truth.push_back(result.pooled_external(i));

        const double train_size = static_cast<double>(cv.k - 1) / cv.k * static_cast<double>(sizes[s]);
        CurvePoint cv_point{train_size, sizes[s], sensitivities(result.iterations, classes.size()), {}};
        CurvePoint truth_point{train_size, sizes[s], sensitivities(truth, classes.size()), {}};
        finish_point(cv_point);
        finish_point(truth_point);
        out.cv.points.push_back(std::move(cv_point));
        out.truth.points.push_back(std::move(truth_point));
    }
    return out;
}

struct LinearFit {
    double a;
    double b;
    double rss;
};

double rss_of(std::span<const double> x, std::span<const double> p, double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = p[i] - (a - b * x[i]);
        s += r * r;
    }
    return s;
}

// Best (a, b) for p = a - b x with a in [0, 1], b >= 0.
LinearFit constrained_linear_fit(std::span<const double> x, std::span<const double> p) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mp = std::accumulate(p.begin(), p.end(), 0.0) / n;
    double sxx = 0.0;
    double sxp = 0.0;
    double sx2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxp += (x[i] - mx) * (p[i] - mp);
        sx2 += x[i] * x[i];
    }

    std::vector<std::pair<double, double>> candidates;
    if (sxx > 1e-300) {
        const double b = -sxp / sxx;
        candidates.emplace_back(mp + b * mx, b);
    }
    candidates.emplace_back(std::clamp(mp, 0.0, 1.0), 0.0);
    for (double a : {0.0, 1.0}) {
        double num = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) num += (a - p[i]) * x[i];
        candidates.emplace_back(a, sx2 > 0.0 ? std::max(0.0, num / sx2) : 0.0);
    }

    LinearFit best{0.0, 0.0, INFINITY};
    for (const auto& [a, b] : candidates) {
        if (!(a >= 0.0 && a <= 1.0 && b >= 0.0)) continue;
        const double r = rss_of(x, p, a, b);
        if (r < best.rss) best = {a, b, r};
    }
    return best;
}

}  // namespace

void CvSpec::validate() const {
    if (k < 2) throw DomainError("cross-validation needs k >= 2");
    if (iterations < 1) throw DomainError("cross-validation needs at least one iteration");
}

std::vector<int> make_folds(const std::vector<int>& labels, std::size_t n_classes, int k, bool stratified,
                            const RngSeed& seed) {
    if (k < 2) throw DomainError("cross-validation needs k >= 2");
    if (static_cast<std::size_t>(k) > labels.size()) {
        throw DomainError("k = " + std::to_string(k) + " exceeds the number of rows (" + std::to_string(labels.size()) + ")");
    }
    Engine engine = make_engine(seed);
    std::vector<int> folds(labels.size(), 0);
    std::vector<std::vector<std::size_t>> groups;
    if (stratified) {
        groups.resize(n_classes);
        for (std::size_t i = 0; i < labels.size(); ++i) groups.at(static_cast<std::size_t>(labels[i])).push_back(i);
    } else {
        groups.emplace_back(labels.size());
        std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
    }
    // Round robin continues across classes so that overall fold sizes stay
    // balanced as well.
    std::size_t offset = 0;
    for (auto& g : groups) {
        shuffle(g.begin(), g.end(), engine);
        for (std::size_t j = 0; j < g.size(); ++j) folds[g[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
        offset += g.size();
    }
    return folds;
}

ConfusionMatrix CvResult::pooled_external(std::size_t iteration) const {
    const auto& per_fold = external.at(iteration);
    if (per_fold.empty()) throw DomainError("no external test results recorded");
    ConfusionMatrix sum = per_fold.front();
    for (std::size_t f = 1; f < per_fold.size(); ++f) sum += per_fold[f];
    return sum;
}

ConfusionMatrix evaluate(const TrainedModel& model, const LabeledDataset& test, RowSampling sampling) {
    test.validate();
    const auto predicted = model.predict(test.features);
    ConfusionMatrix cm(test.classes, sampling);
    for (std::size_t i = 0; i < test.rows(); ++i) {
        cm.accumulate(static_cast<std::size_t>(test.labels[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

CvResult iterated_cv(const LabeledDataset& data, const ModelConfig& model, const CvSpec& cv,
                     const LabeledDataset* external_test, unsigned threads) {
    cv.validate();
    data.validate();
    if (external_test && external_test->classes != data.classes) {
        throw DomainError("external test set declares different classes");
    }
    const auto n_iter = static_cast<std::size_t>(cv.iterations);
    const auto k = static_cast<std::size_t>(cv.k);

    CvResult result;
    result.dataset_size = data.rows();
    result.effective_training_size = static_cast<double>(cv.k - 1) / cv.k * static_cast<double>(data.rows());
    result.iterations.assign(n_iter, ConfusionMatrix(data.classes, RowSampling::stratified));
    result.external.assign(n_iter, {});
    result.training_rows.assign(n_iter, std::vector<std::size_t>(k, 0));

    parallel_for(n_iter, threads, [&](std::size_t it) {
        const auto folds = make_folds(data.labels, data.classes.size(), cv.k, cv.stratified, cv.seed.child(it));
        ConfusionMatrix pooled(data.classes, RowSampling::stratified);
        std::vector<ConfusionMatrix> external;
        for (std::size_t f = 0; f < k; ++f) {
            std::vector<std::size_t> train_rows;
            std::vector<std::size_t> test_rows;
            for (std::size_t i = 0; i < folds.size(); ++i) {
                (static_cast<std::size_t>(folds[i]) == f ? test_rows : train_rows).push_back(i);
            }
            const LabeledDataset train_set = data.subset(train_rows);
            const auto counts = train_set.class_counts();
            for (std::size_t c = 0; c < counts.size(); ++c) {
                if (counts[c] == 0) {
                    throw DomainError("iteration " + std::to_string(it) + ", fold " + std::to_string(f) +
                                      " leaves class '" + data.classes[c] +
                                      "' without training rows; use stratified folds or more rows per class");
                }
            }
            const TrainedModel surrogate = train(model, train_set);
            const auto predicted = surrogate.predict(data.subset(test_rows).features);
            for (std::size_t j = 0; j < test_rows.size(); ++j) {
                pooled.accumulate(static_cast<std::size_t>(data.labels[test_rows[j]]),
                                  static_cast<std::size_t>(predicted[j]));
            }
            if (external_test) external.push_back(evaluate(surrogate, *external_test));
            result.training_rows[it][f] = train_rows.size();
        }
        result.iterations[it] = std::move(pooled);
        result.external[it] = std::move(external);
    });
    return result;
}

Band percentile_band(std::span<const double> values, double lo, double hi) {
    if (values.empty()) throw DomainError("percentile band of an empty sample");
    if (!(lo >= 0.0 && lo <= hi && hi <= 100.0)) throw DomainError("percentiles must satisfy 0 <= lo <= hi <= 100");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double h = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
        const auto i = static_cast<std::size_t>(std::floor(h));
        if (i + 1 >= sorted.size()) return sorted.back();
        return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
    };
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    // Guard the ordering against rounding in the mean of near-constant data.
    const double lower = quantile(lo);
    const double upper = quantile(hi);
    return {lower, std::clamp(mean, lower, upper), upper};
}

std::string_view to_string(CurveView view) {
    switch (view) {
        case CurveView::population: return "population";
        case CurveView::growing_truth: return "growing_truth";
        case CurveView::growing_cv: return "growing_cv";
        case CurveView::retrospective: return "retrospective";
    }
    return "?";
}

GrowingCurves learning_curve_growing(const Population& population, const std::vector<std::size_t>& sizes,
                                     const CvSpec& cv, const ModelConfig& model, const LabeledDataset& large_test,
                                     unsigned threads) {
    check_sizes(sizes);
    cv.validate();
    const auto sequence = growing_sequence(population, sizes, cv.seed.child(0x67726f77ULL));
    return growing_from_sequence(sequence, sizes, cv, model, large_test, threads);
}

GrowingCurves learning_curve_growing(const LabeledDataset& pool, const std::vector<std::size_t>& sizes,
                                     const CvSpec& cv, const ModelConfig& model, const LabeledDataset& large_test,
                                     unsigned threads) {
    check_sizes(sizes);
    cv.validate();
    const auto sequence = growing_sequence(pool, sizes, cv.seed.child(0x67726f77ULL));
    return growing_from_sequence(sequence, sizes, cv, model, large_test, threads);
}

LearningCurve learning_curve_population(const Population& population, const std::vector<std::size_t>& sizes,
                                        int n_datasets, const ModelConfig& model, const LabeledDataset& large_test,
                                        const RngSeed& seed, unsigned threads) {
    check_sizes(sizes);
    if (n_datasets < 1) throw DomainError("population curve needs at least one dataset per size");
    LearningCurve curve = make_curve(CurveView::population, large_test.classes);
    for (std::size_t size : sizes) {
        std::vector<ConfusionMatrix> results(static_cast<std::size_t>(n_datasets));
        parallel_for(results.size(), threads, [&](std::size_t j) {
            const LabeledDataset data = population.sample(size, seed.child(size).child(j));
            results[j] = evaluate(train(model, data), large_test);
        });
        CurvePoint point{static_cast<double>(size), size, sensitivities(results, large_test.classes.size()), {}};
        finish_point(point);
        curve.points.push_back(std::move(point));
    }
    return curve;
}

LearningCurve retrospective_curve(const LabeledDataset& pool, const std::vector<std::size_t>& sizes, int n_redraws,
                                  const ModelConfig& model, const LabeledDataset& large_test, const RngSeed& seed,
                                  unsigned threads) {
    check_sizes(sizes);
    if (n_redraws < 1) throw DomainError("retrospective curve needs at least one redraw");
    const auto counts = pool.class_counts();
    if (!counts.empty() && sizes.back() > *std::min_element(counts.begin(), counts.end())) {
        throw DomainError("retrospective size " + std::to_string(sizes.back()) + " exceeds the pool");
    }
    LearningCurve curve = make_curve(CurveView::retrospective, large_test.classes);
    for (std::size_t size : sizes) {
        std::vector<ConfusionMatrix> results(static_cast<std::size_t>(n_redraws));
        parallel_for(results.size(), threads, [&](std::size_t j) {
            const auto split = stratified_draw(pool, size, seed.child(size).child(j));
            results[j] = evaluate(train(model, split.small), large_test);
        });
        CurvePoint point{static_cast<double>(size), size, sensitivities(results, large_test.classes.size()), {}};
        finish_point(point);
        curve.points.push_back(std::move(point));
    }
    return curve;
}

double PowerLawFit::operator()(double n) const {
    return a - b * std::pow(n, -c);
}

PowerLawFit fit_inverse_power_law(std::span<const double> n, std::span<const double> p) {
    if (n.size() != p.size()) throw DomainError("power-law fit: size and performance counts differ");
    if (n.size() < 4) throw DomainError("power-law fit needs at least four points");
    std::vector<double> sorted(n.begin(), n.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i] > 0.0)) throw DomainError("power-law fit needs positive sizes");
        if (i > 0 && sorted[i] == sorted[i - 1]) throw DomainError("power-law fit needs distinct sizes");
    }

    std::vector<double> x(n.size());
    const auto profile = [&](double c) {
        for (std::size_t i = 0; i < n.size(); ++i) x[i] = std::pow(n[i], -c);
        return constrained_linear_fit(x, p);
    };

    // Grid over the exponent, then Brent refinement around the best cell.
    const double c_max = 5.0;
    const double step = 0.01;
    double best_c = 0.0;
    double best_rss = INFINITY;
    for (int i = 0; i * step <= c_max + 1e-12; ++i) {
        const double c = i * step;
        const double r = profile(c).rss;
        if (r < best_rss) {
            best_rss = r;
            best_c = c;
        }
    }
    const double lo = std::max(0.0, best_c - step);
    const double hi = std::min(c_max, best_c + step);
    const auto refined = optimize::brent([&](double c) { return profile(c).rss; }, lo, hi, 1e-14);
    const double c = refined.value <= best_rss ? refined.x : best_c;
    const LinearFit fit = profile(c);
    if (!std::isfinite(fit.rss)) throw SolverError("power-law fit failed", c, fit.rss, refined.iterations);
    return {fit.a, fit.b, c, std::sqrt(fit.rss)};
}

void write_curves_csv(std::ostream& out, const std::vector<LearningCurve>& curves, const RngSeed& seed,
                      std::uint64_t config_hash, int precision, bool header) {
    const auto fixed = [precision](double v) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
        return std::string(buf, res.ptr);
    };
    char hash_buf[17];
    const auto hres = std::to_chars(hash_buf, hash_buf + 16, config_hash, 16);
    const std::string hash(hash_buf, hres.ptr);

    if (header) out << "view,class,train_size_per_class,statistic,value,seed,config_hash\n";
    for (const auto& curve : curves) {
        for (const auto& point : curve.points) {
            for (std::size_t c = 0; c < curve.classes.size(); ++c) {
                const Band& band = point.bands.at(c);
                const std::pair<const char*, double> stats[] = {{"mean", band.mean}, {"p5", band.lower}, {"p95", band.upper}};
                for (const auto& [name, value] : stats) {
                    out << to_string(curve.view) << ',' << curve.classes[c] << ','
                        << format_shortest(point.train_size_per_class) << ',' << name << ',' << fixed(value) << ','
                        << seed.seed << ',' << hash << '\n';
                }
            }
        }
    }
}

}  // namespace sampsize
