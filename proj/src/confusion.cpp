#include "sampsize/confusion.hpp"

#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sampsize/error.hpp"

namespace sampsize {

namespace {

std::string format_count(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double ratio(double numerator, double denominator, const char* metric, const std::string& label) {
    if (!(denominator > 0.0)) {
        throw UndefinedMetricError(std::string(metric) + " of class '" + label + "' has an empty denominator");
    }
    return numerator / denominator;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes, RowSampling sampling)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0.0), sampling_(sampling) {
    if (classes_.empty()) throw DomainError("confusion matrix needs at least one class");
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (classes_[i] == classes_[j]) throw DomainError("duplicate class label '" + classes_[i] + "'");
        }
    }
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] == label) return i;
    }
    throw DomainError("unknown class label '" + label + "'");
}

ConfusionMatrix& ConfusionMatrix::accumulate(const std::string& reference, const std::string& predicted,
                                             double weight) {
    return accumulate(index_of(reference), index_of(predicted), weight);
}

ConfusionMatrix& ConfusionMatrix::accumulate(std::size_t reference, std::size_t predicted, double weight) {
    if (reference >= size() || predicted >= size()) throw DomainError("class index out of range");
    if (!(weight > 0.0)) throw DomainError("accumulation weight must be positive");
    (*this)(reference, predicted) += weight;
    return *this;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw DomainError("cannot add confusion matrices over different classes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

double ConfusionMatrix::row_sum(std::size_t reference) const {
    double s = 0.0;
    for (std::size_t p = 0; p < size(); ++p) s += (*this)(reference, p);
    return s;
}

double ConfusionMatrix::column_sum(std::size_t predicted) const {
    double s = 0.0;
    for (std::size_t r = 0; r < size(); ++r) s += (*this)(r, predicted);
    return s;
}

double ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

double ConfusionMatrix::sensitivity(std::size_t c) const {
    return ratio((*this)(c, c), row_sum(c), "sensitivity", classes_.at(c));
}

double ConfusionMatrix::specificity(std::size_t c) const {
    double negatives = 0.0;
    double true_negatives = 0.0;
    for (std::size_t r = 0; r < size(); ++r) {
        if (r == c) continue;
        for (std::size_t p = 0; p < size(); ++p) {
            negatives += (*this)(r, p);
            if (p != c) true_negatives += (*this)(r, p);
        }
    }
    return ratio(true_negatives, negatives, "specificity", classes_.at(c));
}

std::vector<double> ConfusionMatrix::row_weights(std::optional<std::span<const double>> prevalence) const {
    std::vector<double> w(size(), 1.0);
    if (!prevalence) {
        if (sampling_ == RowSampling::stratified) {
            throw DomainError("predictive values of stratified data need class prevalences");
        }
        return w;
    }
    if (prevalence->size() != size()) throw DomainError("prevalence vector length differs from class count");
    for (std::size_t r = 0; r < size(); ++r) {
        const double prev = (*prevalence)[r];
        if (!(prev >= 0.0)) throw DomainError("prevalences must be non-negative");
        const double n = row_sum(r);
        if (prev > 0.0 && !(n > 0.0)) {
            throw UndefinedMetricError("class '" + classes_[r] + "' has prevalence but no test cases");
        }
        w[r] = prev > 0.0 ? prev / n : 0.0;
    }
    return w;
}

double ConfusionMatrix::ppv(std::size_t c, std::optional<std::span<const double>> prevalence) const {
    const auto w = row_weights(prevalence);
    double predicted = 0.0;
    for (std::size_t r = 0; r < size(); ++r) predicted += w[r] * (*this)(r, c);
    return ratio(w[c] * (*this)(c, c), predicted, "PPV", classes_.at(c));
}

double ConfusionMatrix::npv(std::size_t c, std::optional<std::span<const double>> prevalence) const {
    const auto w = row_weights(prevalence);
    double predicted_negative = 0.0;
    double true_negative = 0.0;
    for (std::size_t r = 0; r < size(); ++r) {
        for (std::size_t p = 0; p < size(); ++p) {
            if (p == c) continue;
            predicted_negative += w[r] * (*this)(r, p);
            if (r != c) true_negative += w[r] * (*this)(r, p);
        }
    }
    return ratio(true_negative, predicted_negative, "NPV", classes_.at(c));
}

double ConfusionMatrix::overall_accuracy() const {
    double diag = 0.0;
    for (std::size_t c = 0; c < size(); ++c) diag += (*this)(c, c);
    const double t = total();
    if (!(t > 0.0)) throw UndefinedMetricError("overall accuracy of an empty confusion matrix");
    return diag / t;
}

ConfusionMatrix ConfusionMatrix::row_normalize() const {
    ConfusionMatrix out(classes_, sampling_);
    for (std::size_t r = 0; r < size(); ++r) {
        const double n = row_sum(r);
        if (!(n > 0.0)) throw UndefinedMetricError("class '" + classes_[r] + "' has an empty row");
        for (std::size_t p = 0; p < size(); ++p) out(r, p) = (*this)(r, p) / n;
    }
    return out;
}

GuessingBaseline guessing_baseline(std::span<const double> class_sizes, std::vector<std::string> labels) {
    if (class_sizes.empty()) throw DomainError("guessing baseline needs at least one class");
    if (labels.empty()) {
        for (std::size_t i = 0; i < class_sizes.size(); ++i) labels.push_back("class" + std::to_string(i + 1));
    }
    if (labels.size() != class_sizes.size()) throw DomainError("label count differs from class count");
    double total = 0.0;
    for (double s : class_sizes) {
        if (!(s > 0.0)) throw DomainError("class sizes must be positive");
        total += s;
    }
    GuessingBaseline out;
    for (std::size_t i = 0; i < class_sizes.size(); ++i) {
        const double prev = class_sizes[i] / total;
        out.per_class.push_back({labels[i], prev, 1.0 - prev, prev, 1.0 - prev, class_sizes[i]});
        out.overall_accuracy += prev * prev;
    }
    return out;
}

void write_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "reference";
    for (const auto& c : cm.classes()) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < cm.size(); ++r) {
        out << cm.classes()[r];
        for (std::size_t p = 0; p < cm.size(); ++p) out << ',' << format_count(cm(r, p));
        out << '\n';
    }
}

ConfusionMatrix read_confusion_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("confusion CSV: missing header");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw IoError("confusion CSV: header needs at least one class");
    std::vector<std::string> classes(header.begin() + 1, header.end());
    ConfusionMatrix cm(classes);
    for (std::size_t r = 0; r < classes.size(); ++r) {
        if (!std::getline(in, line)) throw IoError("confusion CSV: missing row " + std::to_string(r + 2));
        auto fields = split_csv_line(line);
        if (fields.size() != classes.size() + 1 || fields[0] != classes[r]) {
            throw IoError("confusion CSV: malformed row " + std::to_string(r + 2));
        }
        for (std::size_t p = 0; p < classes.size(); ++p) {
            const auto& f = fields[p + 1];
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || v < 0.0) {
                throw IoError("confusion CSV: bad count '" + f + "' in row " + std::to_string(r + 2));
            }
            cm(r, p) = v;
        }
    }
    return cm;
}

}  // namespace sampsize
