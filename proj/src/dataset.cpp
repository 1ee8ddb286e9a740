#include "sampsize/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sampsize/error.hpp"

namespace sampsize {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'Z', 'D', 'A', 'T', 'A', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("dataset container truncated");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto len = get<std::uint32_t>(in);
    if (len > (1u << 20)) throw IoError("dataset container: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IoError("dataset container truncated");
    return s;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
    return counts;
}

std::vector<std::vector<std::size_t>> LabeledDataset::class_rows() const {
    std::vector<std::vector<std::size_t>> rows(classes.size());
    for (std::size_t i = 0; i < labels.size(); ++i) rows.at(static_cast<std::size_t>(labels[i])).push_back(i);
    return rows;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& rows) const {
    LabeledDataset out;
    out.classes = classes;
    out.provenance = provenance;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(labels.at(rows[i]));
    }
    return out;
}

void LabeledDataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw DomainError("dataset: feature rows and labels differ in count");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes.size()) throw DomainError("dataset: label out of range");
    }
}

bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
    return a.labels == b.labels && a.classes == b.classes && a.provenance == b.provenance &&
           a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           (a.features.array() == b.features.array()).all();
}

LabeledDataset concatenate(const LabeledDataset& head, const LabeledDataset& tail) {
    if (head.rows() == 0) return tail;
    if (tail.rows() == 0) return head;
    if (head.classes != tail.classes || head.dim() != tail.dim()) {
        throw DomainError("concatenate: datasets differ in classes or dimension");
    }
    LabeledDataset out;
    out.classes = head.classes;
    out.provenance = head.provenance;
    out.features.resize(head.features.rows() + tail.features.rows(), head.features.cols());
    out.features << head.features, tail.features;
    out.labels = head.labels;
    out.labels.insert(out.labels.end(), tail.labels.begin(), tail.labels.end());
    return out;
}

std::string format_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
    data.validate();
    out << "label";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out << data.classes[static_cast<std::size_t>(data.labels[i])];
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
            out << ',' << format_shortest(data.features(static_cast<Eigen::Index>(i), j));
        }
        out << '\n';
    }
}

LabeledDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset CSV: missing header");
    const auto dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (line.rfind("label", 0) != 0) throw IoError("dataset CSV: header must start with 'label'");

    LabeledDataset data;
    data.provenance.generator = "csv";
    std::map<std::string, int> index;
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        auto [it, inserted] = index.try_emplace(field, static_cast<int>(data.classes.size()));
        if (inserted) data.classes.push_back(field);
        data.labels.push_back(it->second);
        std::size_t count = 0;
        while (std::getline(ss, field, ',')) {
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
                throw IoError("dataset CSV line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            values.push_back(v);
            ++count;
        }
        if (count != dim) throw IoError("dataset CSV line " + std::to_string(line_no) + ": wrong field count");
    }
    data.features.resize(static_cast<Eigen::Index>(data.labels.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * dim + j];
        }
    }
    return data;
}

void write_dataset_binary(std::ostream& out, const LabeledDataset& data) {
    data.validate();
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put_string(out, data.provenance.generator);
    put<std::uint64_t>(out, data.provenance.seed);
    put<std::uint64_t>(out, data.provenance.stream);
    put<std::uint64_t>(out, data.provenance.spec_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.classes.size()));
    for (const auto& c : data.classes) put_string(out, c);
    put<std::uint64_t>(out, data.rows());
    put<std::uint64_t>(out, data.dim());
    for (int l : data.labels) put<std::int32_t>(out, l);
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) put<double>(out, data.features(i, j));
    }
    if (!out) throw IoError("failed writing dataset container");
}

LabeledDataset read_dataset_binary(std::istream& in) {
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError("not a dataset container");
    if (get<std::uint32_t>(in) != kVersion) throw IoError("unsupported dataset container version");
    LabeledDataset data;
    data.provenance.generator = get_string(in);
    data.provenance.seed = get<std::uint64_t>(in);
    data.provenance.stream = get<std::uint64_t>(in);
    data.provenance.spec_hash = get<std::uint64_t>(in);
    const auto n_classes = get<std::uint32_t>(in);
    for (std::uint32_t c = 0; c < n_classes; ++c) data.classes.push_back(get_string(in));
    const auto rows = get<std::uint64_t>(in);
    const auto dim = get<std::uint64_t>(in);
    data.labels.reserve(rows);
    for (std::uint64_t i = 0; i < rows; ++i) data.labels.push_back(get<std::int32_t>(in));
    data.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) data.features(i, j) = get<double>(in);
    }
    data.validate();
    return data;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t hash) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t fnv1a(const std::string& text) {
    return fnv1a(text.data(), text.size());
}

}  // namespace sampsize
