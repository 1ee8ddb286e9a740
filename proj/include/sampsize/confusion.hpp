#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sampsize {

// How the rows of a confusion matrix were sampled. Stratified rows do not
// reflect class prevalence, so predictive values need explicit prevalences.
enum class RowSampling { representative, stratified };

// Counts indexed (reference class, predicted class). Counts may be real
// valued (averaged or pooled tables).
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> classes,
                             RowSampling sampling = RowSampling::representative);

    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t size() const { return classes_.size(); }
    RowSampling sampling() const { return sampling_; }
    void set_sampling(RowSampling sampling) { sampling_ = sampling; }

    // Throws DomainError for unknown labels.
    std::size_t index_of(const std::string& label) const;

    double operator()(std::size_t reference, std::size_t predicted) const {
        return counts_[reference * size() + predicted];
    }
    double& operator()(std::size_t reference, std::size_t predicted) {
        return counts_[reference * size() + predicted];
    }

    ConfusionMatrix& accumulate(const std::string& reference, const std::string& predicted, double weight = 1.0);
    ConfusionMatrix& accumulate(std::size_t reference, std::size_t predicted, double weight = 1.0);

    // Element-wise addition; classes must match.
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    double row_sum(std::size_t reference) const;
    double column_sum(std::size_t predicted) const;
    double total() const;

    double sensitivity(std::size_t c) const;
    double specificity(std::size_t c) const;
    double ppv(std::size_t c, std::optional<std::span<const double>> prevalence = std::nullopt) const;
    double npv(std::size_t c, std::optional<std::span<const double>> prevalence = std::nullopt) const;
    double overall_accuracy() const;

    double sensitivity(const std::string& label) const { return sensitivity(index_of(label)); }
    double specificity(const std::string& label) const { return specificity(index_of(label)); }

    // Rows divided by their sums; the diagonal then holds the sensitivities.
    ConfusionMatrix row_normalize() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<double> row_weights(std::optional<std::span<const double>> prevalence) const;

    std::vector<std::string> classes_;
    std::vector<double> counts_;
    RowSampling sampling_ = RowSampling::representative;
};

struct ClassMetrics {
    std::string label;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double ppv = 0.0;
    double npv = 0.0;
    double support = 0.0;
};

struct GuessingBaseline {
    std::vector<ClassMetrics> per_class;
    double overall_accuracy = 0.0;
};

// Expected metrics when predictions are drawn with probability proportional
// to class prevalence, independently of the features.
GuessingBaseline guessing_baseline(std::span<const double> class_sizes,
                                   std::vector<std::string> labels = {});

// CSV: header "reference,<labels...>", then one row per reference class.
void write_csv(std::ostream& out, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(std::istream& in);

}  // namespace sampsize
