#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dropkan/matrix.hpp"
#include "dropkan/train.hpp"

namespace dropkan {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed CSV: header plus string cells. Empty cells are missing values.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // rectangular
    std::size_t label_col = 0;                   // defaults to the last column

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }
    static bool is_missing(const std::string& cell) { return cell.empty(); }
};

/// Parse a comma-separated file with a header row. Quoted fields ("" escapes
/// a quote) are supported; malformed or ragged rows raise CsvError with the
/// 1-based line number.
RawTable load_csv(const std::string& path);
RawTable parse_csv(const std::string& text, const std::string& origin = "<string>");

/// Per-column preprocessing parameters. Everything here is fit on the
/// training rows only; applying the schema to other rows cannot leak
/// information from them.
struct ColumnSchema {
    enum class Kind { numeric, categorical };

    struct Column {
        Kind kind = Kind::numeric;
        // numeric
        double min = 0.0;
        double max = 0.0;
        double median = 0.0;  // imputation value
        // categorical
        std::vector<std::string> vocab;  // order of first appearance in train rows
        std::unordered_map<std::string, int> code;
        std::string mode_value;  // imputation value

        int unknown_code() const { return static_cast<int>(vocab.size()); }
    };

    std::vector<Column> features;  // indexed by feature position (label column skipped)
    std::vector<std::size_t> feature_cols;  // original column index per feature
    std::size_t label_col = 0;
    std::vector<std::string> label_vocab;  // dense class codes, order of first appearance
    std::unordered_map<std::string, int> label_code;

    std::size_t n_classes() const { return label_vocab.size(); }
};

/// Fit column kinds, ranges, vocabularies and imputation statistics on the
/// given training rows. The label vocabulary is the one exception: it is fit
/// on the whole table so class ids cover every split.
ColumnSchema fit_schema(const RawTable& table, const std::vector<std::size_t>& train_rows);

struct TransformResult {
    Matrix features;          // scaled to [-1, 1] on train data, clamped to [-1.5, 1.5]
    std::vector<int> labels;  // in [0, n_classes)
    std::vector<std::size_t> rejected_rows;  // original indices of rows with a missing label
};

/// Apply a fitted schema to a row subset: impute, encode, min-max scale to
/// [-1, 1] (train range), clamp to [-1.5, 1.5]. Rows with a missing label
/// are rejected and reported.
TransformResult transform(const RawTable& table, const ColumnSchema& schema,
                          const std::vector<std::size_t>& rows);

struct SplitFractions {
    double train = 0.6;
    double valid = 0.2;
    double test = 0.2;
};

struct DatasetSplits {
    SplitData train;
    SplitData valid;
    SplitData test;
    std::size_t n_classes = 0;
    std::vector<std::string> class_names;
    ColumnSchema schema;
    std::vector<std::size_t> train_rows, valid_rows, test_rows;  // original row indices
    std::size_t rejected = 0;  // rows dropped for a missing label

    std::size_t n_features() const { return train.features.cols(); }
};

/// Deterministic shuffle by seed, contiguous train/valid/test partition,
/// schema fit on the train part only, then transform of all three parts.
DatasetSplits split_dataset(const RawTable& table, const SplitFractions& fractions,
                            std::uint64_t seed);

/// JSON bundle with schema, split indices and transformed matrices, so an
/// experiment can be replayed without the source CSV.
std::string splits_to_json(const DatasetSplits& splits);
DatasetSplits splits_from_json(const std::string& text);
void save_splits(const DatasetSplits& splits, const std::string& path);
DatasetSplits load_splits(const std::string& path);

}  // namespace dropkan
