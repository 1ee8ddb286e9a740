#include "sampsize/classify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "sampsize/error.hpp"

namespace sampsize {

namespace {

constexpr char kModelMagic[8] = {'S', 'S', 'Z', 'M', 'O', 'D', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;

void check_dim(std::size_t expected, const Matrix& features) {
    if (static_cast<std::size_t>(features.cols()) != expected) {
        throw DomainError("feature dimension " + std::to_string(features.cols()) + " does not match model dimension " +
                          std::to_string(expected));
    }
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("model container truncated");
    return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) put<double>(out, m(i, j));
    }
}

Matrix get_matrix(std::istream& in) {
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows > (1u << 24) || cols > (1u << 24)) throw IoError("model container: implausible matrix shape");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = get<double>(in);
    }
    return m;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto len = get<std::uint32_t>(in);
    if (len > (1u << 20)) throw IoError("model container: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IoError("model container truncated");
    return s;
}

}  // namespace

LdaModel fit_lda(const LabeledDataset& train, double ridge, PriorMode priors) {
    train.validate();
    if (!(ridge >= 0.0)) throw DomainError("ridge must be non-negative");
    const std::size_t k = train.classes.size();
    if (k < 2) throw DomainError("LDA needs at least two classes");
    const auto d = train.features.cols();
    if (d < 1) throw DomainError("LDA needs at least one feature");
    const auto counts = train.class_counts();
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw DomainError("class '" + train.classes[c] + "' has no training rows");
    }

    LdaModel model;
    model.classes = train.classes;
    model.class_means = Matrix::Zero(static_cast<Eigen::Index>(k), d);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        model.class_means.row(train.labels[i]) += train.features.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t c = 0; c < k; ++c) model.class_means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);

    Matrix centered = train.features;
    for (std::size_t i = 0; i < train.rows(); ++i) {
        centered.row(static_cast<Eigen::Index>(i)) -= model.class_means.row(train.labels[i]);
    }
    const double dof = std::max<double>(1.0, static_cast<double>(train.rows()) - static_cast<double>(k));
    Matrix cov = centered.transpose() * centered / dof;
    cov = 0.5 * (cov + cov.transpose());
    const double trace = cov.trace();
    if (ridge > 0.0) {
        if (!(trace > 0.0)) throw DomainError("pooled covariance is zero; LDA is undefined");
        cov.diagonal().array() += ridge * trace / static_cast<double>(d);
    }
    model.pooled_covariance = cov;

    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw DomainError("pooled covariance is singular; use ridge > 0");
    if (ridge == 0.0) {
        const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
        if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
            throw DomainError("pooled covariance is singular; use ridge > 0");
        }
    }

    model.priors.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        model.priors(static_cast<Eigen::Index>(c)) = priors == PriorMode::equal
                                                         ? 1.0 / static_cast<double>(k)
                                                         : static_cast<double>(counts[c]) / static_cast<double>(train.rows());
    }

    const Matrix solved = llt.solve(model.class_means.transpose());  // d x K
    model.weights = solved.transpose();
    model.offsets.resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c) {
        model.offsets(c) = -0.5 * model.class_means.row(c).dot(solved.col(c)) + std::log(model.priors(c));
    }
    return model;
}

LdaPrediction predict_lda(const LdaModel& model, const Matrix& features) {
    check_dim(model.dim(), features);
    LdaPrediction out;
    out.scores = features * model.weights.transpose();
    out.scores.rowwise() += model.offsets.transpose();
    out.labels.resize(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < out.scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < out.scores.cols(); ++c) {
            if (out.scores(i, c) > out.scores(i, best)) best = c;
        }
        out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

Matrix PlsProjection::project(const Matrix& features) const {
    check_dim(static_cast<std::size_t>(x_mean.size()), features);
    return (features.rowwise() - x_mean.transpose()) * rotation;
}

Matrix indicator_matrix(const std::vector<int>& labels, std::size_t n_classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) throw DomainError("label out of range");
        y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return y;
}

PlsProjection fit_pls(const Matrix& x, const Matrix& y, int latent_variables) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (y.rows() != n) throw DomainError("PLS: X and Y row counts differ");
    if (latent_variables < 1) throw DomainError("PLS needs at least one latent variable");
    if (latent_variables > std::min<Eigen::Index>(d, n - 1)) {
        throw DomainError("PLS: " + std::to_string(latent_variables) + " latent variables exceed min(d, n - 1)");
    }

    PlsProjection proj;
    proj.x_mean = x.colwise().mean();
    Matrix xa = x.rowwise() - proj.x_mean.transpose();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    Matrix w_all(d, latent_variables);
    Matrix p_all(d, latent_variables);

    const double initial = (xa.transpose() * yc).norm();
    int kept = 0;
    for (int a = 0; a < latent_variables; ++a) {
        const Matrix cross = xa.transpose() * yc;  // d x K
        if (!(cross.norm() > 1e-12 * initial)) break;
        // The inner NIPALS loop converges to the dominant left singular
        // vector of X'Y; take it from the SVD directly.
        Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU);
        Vector w = svd.matrixU().col(0);
        Eigen::Index pivot = 0;
        w.cwiseAbs().maxCoeff(&pivot);
        if (w(pivot) < 0.0) w = -w;
        const Vector t = xa * w;
        const double tt = t.squaredNorm();
        if (!(tt > 0.0)) break;
        const Vector p = xa.transpose() * t / tt;
        xa -= t * p.transpose();
        w_all.col(kept) = w;
        p_all.col(kept) = p;
        ++kept;
    }
    if (kept == 0) throw DomainError("PLS: X carries no covariance with Y");
    proj.weights = w_all.leftCols(kept);
    proj.loadings = p_all.leftCols(kept);
    const Matrix pw = proj.loadings.transpose() * proj.weights;
    proj.rotation = proj.weights * pw.partialPivLu().inverse();
    return proj;
}

int effective_latent_variables(int requested, std::size_t n_total) {
    if (requested < 1) throw DomainError("at least one latent variable must be requested");
    if (n_total < 2) throw DomainError("PLS-LDA needs at least two training rows");
    return std::min(requested, static_cast<int>(n_total / 2));
}

PipelineModel fit_pls_lda(const LabeledDataset& train, int requested_latent_variables, double ridge,
                          PriorMode priors) {
    train.validate();
    if (train.classes.size() < 2) throw DomainError("PLS-LDA needs at least two classes");
    int lv = effective_latent_variables(requested_latent_variables, train.rows());
    lv = std::min<int>(lv, static_cast<int>(train.dim()));
    lv = std::min<int>(lv, static_cast<int>(train.rows()) - 1);
    const auto counts = train.class_counts();
    for (std::size_t c = 0; c < train.classes.size(); ++c) {
        if (counts[c] == 0) throw DomainError("class '" + train.classes[c] + "' has no training rows");
    }

    PipelineModel model;
    model.projection = fit_pls(train.features, indicator_matrix(train.labels, train.classes.size()), lv);
    LabeledDataset scores;
    scores.features = model.projection.project(train.features);
    scores.labels = train.labels;
    scores.classes = train.classes;
    model.lda = fit_lda(scores, ridge, priors);
    return model;
}

std::vector<int> predict(const PipelineModel& model, const Matrix& features) {
    return predict_lda(model.lda, model.projection.project(features)).labels;
}

void save_model(std::ostream& out, const PipelineModel& model, std::uint64_t config_hash) {
    out.write(kModelMagic, sizeof kModelMagic);
    put<std::uint32_t>(out, kModelVersion);
    put<std::uint64_t>(out, config_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.lda.classes.size()));
    for (const auto& c : model.lda.classes) put_string(out, c);
    put_matrix(out, model.projection.x_mean);
    put_matrix(out, model.projection.weights);
    put_matrix(out, model.projection.loadings);
    put_matrix(out, model.projection.rotation);
    put_matrix(out, model.lda.class_means);
    put_matrix(out, model.lda.pooled_covariance);
    put_matrix(out, model.lda.priors);
    put_matrix(out, model.lda.weights);
    put_matrix(out, model.lda.offsets);
    if (!out) throw IoError("failed writing model container");
}

PipelineModel load_model(std::istream& in, std::uint64_t* config_hash) {
    char magic[sizeof kModelMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(magic, magic + sizeof magic, kModelMagic)) throw IoError("not a model container");
    if (get<std::uint32_t>(in) != kModelVersion) throw IoError("unsupported model container version");
    const auto hash = get<std::uint64_t>(in);
    if (config_hash) *config_hash = hash;
    PipelineModel model;
    const auto k = get<std::uint32_t>(in);
    for (std::uint32_t c = 0; c < k; ++c) model.lda.classes.push_back(get_string(in));
    model.projection.x_mean = get_matrix(in);
    model.projection.weights = get_matrix(in);
    model.projection.loadings = get_matrix(in);
    model.projection.rotation = get_matrix(in);
    model.lda.class_means = get_matrix(in);
    model.lda.pooled_covariance = get_matrix(in);
    model.lda.priors = get_matrix(in);
    model.lda.weights = get_matrix(in);
    model.lda.offsets = get_matrix(in);
    if (model.lda.weights.rows() != static_cast<Eigen::Index>(k) ||
        model.lda.weights.cols() != model.projection.rotation.cols()) {
        throw IoError("model container: inconsistent shapes");
    }
    return model;
}

std::uint64_t ModelConfig::hash() const {
    std::uint64_t h = fnv1a(to_string(kind).data(), to_string(kind).size());
    h = fnv1a(&latent_variables, sizeof latent_variables, h);
    h = fnv1a(&ridge, sizeof ridge, h);
    const int prior_code = priors == PriorMode::equal ? 0 : 1;
    h = fnv1a(&prior_code, sizeof prior_code, h);
    return fnv1a(&constant_class, sizeof constant_class, h);
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::pls_lda: return "pls-lda";
        case ModelKind::lda: return "lda";
        case ModelKind::constant: return "constant";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "pls-lda" || name == "pls_lda") return ModelKind::pls_lda;
    if (name == "lda") return ModelKind::lda;
    if (name == "constant") return ModelKind::constant;
    throw DomainError("unknown model kind '" + std::string(name) + "'");
}

std::vector<int> TrainedModel::predict(const Matrix& features) const {
    return std::visit(
        [&](const auto& m) -> std::vector<int> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PipelineModel>) {
                return sampsize::predict(m, features);
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                return predict_lda(m, features).labels;
            } else {
                check_dim(m.dim, features);
                return std::vector<int>(static_cast<std::size_t>(features.rows()), m.label);
            }
        },
        model_);
}

TrainedModel train(const ModelConfig& config, const LabeledDataset& data) {
    switch (config.kind) {
        case ModelKind::pls_lda:
            return TrainedModel(fit_pls_lda(data, config.latent_variables, config.ridge, config.priors));
        case ModelKind::lda:
            return TrainedModel(fit_lda(data, config.ridge, config.priors));
        case ModelKind::constant:
            if (config.constant_class < 0 || static_cast<std::size_t>(config.constant_class) >= data.classes.size()) {
                throw DomainError("constant model class out of range");
            }
            return TrainedModel(ConstantModel{config.constant_class, data.dim()});
    }
    throw DomainError("unknown model kind");
}

}  // namespace sampsize
