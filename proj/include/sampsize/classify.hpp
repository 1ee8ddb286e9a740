#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sampsize/dataset.hpp"

namespace sampsize {

enum class PriorMode { equal, empirical };

// Linear discriminant analysis with a ridge-stabilized pooled covariance.
// Score of class k: x' S^-1 m_k - m_k' S^-1 m_k / 2 + log(prior_k).
struct LdaModel {
    std::vector<std::string> classes;
    Matrix class_means;        // K x d
    Matrix pooled_covariance;  // d x d, ridge included
    Vector priors;             // K
    Matrix weights;            // K x d
    Vector offsets;            // K

    std::size_t dim() const { return static_cast<std::size_t>(class_means.cols()); }
};

struct LdaPrediction {
    std::vector<int> labels;
    Matrix scores;  // n x K
};

// Pooled within-class covariance S_w + ridge * trace(S_w) / d * I. Every
// declared class needs at least one training row.
LdaModel fit_lda(const LabeledDataset& train, double ridge = 1e-8, PriorMode priors = PriorMode::equal);

// Argmax of the discriminant scores; ties go to the earlier class.
LdaPrediction predict_lda(const LdaModel& model, const Matrix& features);

// Multi-response PLS projection on centered data, deflating X only.
struct PlsProjection {
    Vector x_mean;
    Matrix weights;   // d x L
    Matrix loadings;  // d x L
    Matrix rotation;  // d x L, maps centered X to scores

    int latent_variables() const { return static_cast<int>(weights.cols()); }
    Matrix project(const Matrix& features) const;
};

// One indicator column per class.
Matrix indicator_matrix(const std::vector<int>& labels, std::size_t n_classes);

// Requires 1 <= latent_variables <= min(d, n - 1). Stops early if X has no
// covariance with Y left, so the result may hold fewer components.
PlsProjection fit_pls(const Matrix& x, const Matrix& y, int latent_variables);

struct PipelineModel {
    PlsProjection projection;
    LdaModel lda;
};

// min(requested, floor(n_total / 2)): at most half the training rows.
int effective_latent_variables(int requested, std::size_t n_total);

PipelineModel fit_pls_lda(const LabeledDataset& train, int requested_latent_variables = 10, double ridge = 1e-8,
                          PriorMode priors = PriorMode::equal);

std::vector<int> predict(const PipelineModel& model, const Matrix& features);

// Versioned binary container; `config_hash` identifies the fit settings.
void save_model(std::ostream& out, const PipelineModel& model, std::uint64_t config_hash);
PipelineModel load_model(std::istream& in, std::uint64_t* config_hash = nullptr);

// Model choices for resampling studies.
enum class ModelKind { pls_lda, lda, constant };

struct ModelConfig {
    ModelKind kind = ModelKind::pls_lda;
    int latent_variables = 10;
    double ridge = 1e-8;
    PriorMode priors = PriorMode::equal;
    int constant_class = 0;  // for ModelKind::constant

    std::uint64_t hash() const;
};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ConstantModel {
    int label = 0;
    std::size_t dim = 0;
};

class TrainedModel {
public:
    using Variant = std::variant<PipelineModel, LdaModel, ConstantModel>;

    explicit TrainedModel(Variant model) : model_(std::move(model)) {}

    std::vector<int> predict(const Matrix& features) const;
    const Variant& model() const { return model_; }

private:
    Variant model_;
};

TrainedModel train(const ModelConfig& config, const LabeledDataset& data);

}  // namespace sampsize
