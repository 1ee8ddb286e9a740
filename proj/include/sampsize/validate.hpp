#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sampsize/classify.hpp"
#include "sampsize/confusion.hpp"
#include "sampsize/dataset.hpp"
#include "sampsize/rng.hpp"
#include "sampsize/simgen.hpp"

namespace sampsize {

struct CvSpec {
    int k = 5;
    int iterations = 100;
    RngSeed seed{};
    bool stratified = true;

    void validate() const;
};

// Fold index per row. Stratified: within every class the fold counts differ
// by at most one. Throws DomainError for k < 2 or k > n.
std::vector<int> make_folds(const std::vector<int>& labels, std::size_t n_classes, int k, bool stratified,
                            const RngSeed& seed);

struct CvResult {
    // Held-out predictions of all k surrogates, one matrix per iteration.
    std::vector<ConfusionMatrix> iterations;
    // external[i][f]: surrogate f of iteration i on the external test set.
    std::vector<std::vector<ConfusionMatrix>> external;
    // Rows each surrogate was trained on, [iteration][fold].
    std::vector<std::vector<std::size_t>> training_rows;
    std::size_t dataset_size = 0;
    // (k - 1) / k * dataset_size.
    double effective_training_size = 0.0;

    // Sum of the k surrogate matrices of one iteration.
    ConfusionMatrix pooled_external(std::size_t iteration) const;
};

// Iterated k-fold cross-validation: a fresh fold assignment per iteration
// (substream seed.child(iteration)), k surrogate models each. Each surrogate
// is also applied to `external_test` when given.
CvResult iterated_cv(const LabeledDataset& data, const ModelConfig& model, const CvSpec& cv,
                     const LabeledDataset* external_test = nullptr, unsigned threads = 1);

// Confusion matrix of a model on a labelled test set.
ConfusionMatrix evaluate(const TrainedModel& model, const LabeledDataset& test,
                         RowSampling sampling = RowSampling::stratified);

struct Band {
    double lower = 0.0;
    double mean = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
};

// Percentiles by linear interpolation between order statistics
// (position (n - 1) * q, zero based) and the arithmetic mean.
Band percentile_band(std::span<const double> values, double lo = 5.0, double hi = 95.0);

enum class CurveView { population, growing_truth, growing_cv, retrospective };

std::string_view to_string(CurveView view);

struct CurvePoint {
    // Training rows per class behind each value (for CV views (k-1)/k of the dataset size).
    double train_size_per_class = 0.0;
    std::size_t dataset_size_per_class = 0;
    // values[c]: one sensitivity per replicate (dataset, redraw or CV iteration).
    std::vector<std::vector<double>> values;
    std::vector<Band> bands;
};

struct LearningCurve {
    CurveView view = CurveView::population;
    std::vector<std::string> classes;
    std::vector<CurvePoint> points;
};

struct GrowingCurves {
    LearningCurve cv;
    LearningCurve truth;
};

// One nested growing dataset; at each size iterated CV gives the CV view and
// the same surrogates on `large_test` the truth view. Both bands run over
// CV iterations (surrogates of one iteration pooled).
GrowingCurves learning_curve_growing(const Population& population, const std::vector<std::size_t>& sizes,
                                     const CvSpec& cv, const ModelConfig& model, const LabeledDataset& large_test,
                                     unsigned threads = 1);
GrowingCurves learning_curve_growing(const LabeledDataset& pool, const std::vector<std::size_t>& sizes,
                                     const CvSpec& cv, const ModelConfig& model, const LabeledDataset& large_test,
                                     unsigned threads = 1);

// One model per independent dataset of each size, tested on `large_test`.
LearningCurve learning_curve_population(const Population& population, const std::vector<std::size_t>& sizes,
                                        int n_datasets, const ModelConfig& model, const LabeledDataset& large_test,
                                        const RngSeed& seed, unsigned threads = 1);

// Subsets redrawn without replacement from one fixed pool.
LearningCurve retrospective_curve(const LabeledDataset& pool, const std::vector<std::size_t>& sizes, int n_redraws,
                                  const ModelConfig& model, const LabeledDataset& large_test, const RngSeed& seed,
                                  unsigned threads = 1);

struct PowerLawFit {
    double a = 0.0;  // asymptote
    double b = 0.0;
    double c = 0.0;  // decay exponent
    double residual_norm = 0.0;

    double operator()(double n) const;
};

// Least-squares fit of p(n) = a - b n^-c with a in [0, 1], b >= 0, c >= 0.
PowerLawFit fit_inverse_power_law(std::span<const double> n, std::span<const double> p);

// Tidy CSV: view,class,train_size_per_class,statistic,value,seed,config_hash.
void write_curves_csv(std::ostream& out, const std::vector<LearningCurve>& curves, const RngSeed& seed,
                      std::uint64_t config_hash, int precision = 4, bool header = true);

}  // namespace sampsize
