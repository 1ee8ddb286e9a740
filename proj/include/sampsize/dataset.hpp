#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sampsize {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Provenance {
    std::string generator = "unknown";
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t spec_hash = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// n x d feature matrix with one class index per row. `classes` names every
// class the data may contain, including classes with no rows.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> classes;
    Provenance provenance;

    std::size_t rows() const { return labels.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

    // Row count per class index.
    std::vector<std::size_t> class_counts() const;

    // Row indices of each class, in row order.
    std::vector<std::vector<std::size_t>> class_rows() const;

    LabeledDataset subset(const std::vector<std::size_t>& rows) const;

    // Throws DomainError if labels and features disagree or a label is out of range.
    void validate() const;

    friend bool operator==(const LabeledDataset& a, const LabeledDataset& b);
};

// Rows of `tail` appended below `head`; both must share classes and dimension.
LabeledDataset concatenate(const LabeledDataset& head, const LabeledDataset& tail);

// CSV with header "label,f1,...,fd"; values in shortest round-trip form.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset_csv(std::istream& in);

// Little-endian binary container carrying the provenance record.
void write_dataset_binary(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset_binary(std::istream& in);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& text);

std::string format_shortest(double v);

}  // namespace sampsize
