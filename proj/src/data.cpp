#include "dropkan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "dropkan/rng.hpp"

namespace dropkan {

namespace {

// Strict full-string parse; locale-independent.
bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no,
                                        const std::string& origin) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            if (!cur.empty())
                throw CsvError(origin + ":" + std::to_string(line_no) +
                               ": stray quote inside unquoted field");
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted)
        throw CsvError(origin + ":" + std::to_string(line_no) + ": unterminated quoted field");
    cells.push_back(std::move(cur));
    return cells;
}

double scale_to_range(double value, double lo, double hi) {
    if (hi <= lo) return 0.0;  // width-0 range maps to the center
    const double t = -1.0 + 2.0 * (value - lo) / (hi - lo);
    return std::clamp(t, -1.5, 1.5);
}

}  // namespace

RawTable parse_csv(const std::string& text, const std::string& origin) {
    RawTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        std::vector<std::string> cells = split_csv_line(line, line_no, origin);
        if (table.columns.empty()) {
            table.columns = std::move(cells);
            if (table.columns.size() < 2)
                throw CsvError(origin + ": need at least two columns (features + label)");
            continue;
        }
        if (cells.size() != table.columns.size())
            throw CsvError(origin + ":" + std::to_string(line_no) + ": row has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(table.columns.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.columns.empty()) throw CsvError(origin + ": empty file");
    table.label_col = table.columns.size() - 1;
    return table;
}

RawTable load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(text, path);
}

ColumnSchema fit_schema(const RawTable& table, const std::vector<std::size_t>& train_rows) {
    for (std::size_t r : train_rows)
        if (r >= table.n_rows()) throw std::invalid_argument("fit_schema: row index out of range");
    if (table.label_col >= table.n_cols())
        throw std::invalid_argument("fit_schema: label column out of range");

    ColumnSchema schema;
    schema.label_col = table.label_col;

    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (c == table.label_col) continue;
        schema.feature_cols.push_back(c);
        ColumnSchema::Column col;

        // Numeric iff every non-missing training cell parses as a finite double.
        std::vector<double> values;
        bool numeric = true;
        for (std::size_t r : train_rows) {
            const std::string& cell = table.rows[r][c];
            if (RawTable::is_missing(cell)) continue;
            double v;
            if (!parse_double(cell, v)) {
                numeric = false;
                break;
            }
            values.push_back(v);
        }

        if (numeric) {
            col.kind = ColumnSchema::Kind::numeric;
            if (!values.empty()) {
                auto [mn, mx] = std::minmax_element(values.begin(), values.end());
                col.min = *mn;
                col.max = *mx;
                std::sort(values.begin(), values.end());
                const std::size_t n = values.size();
                col.median = (n % 2 == 1) ? values[n / 2]
                                          : 0.5 * (values[n / 2 - 1] + values[n / 2]);
            }
        } else {
            col.kind = ColumnSchema::Kind::categorical;
            std::unordered_map<std::string, std::size_t> freq;
            for (std::size_t r : train_rows) {
                const std::string& cell = table.rows[r][c];
                if (RawTable::is_missing(cell)) continue;
                if (col.code.find(cell) == col.code.end()) {
                    col.code[cell] = static_cast<int>(col.vocab.size());
                    col.vocab.push_back(cell);
                }
                ++freq[cell];
            }
            // Mode for imputation; ties toward the earlier vocabulary entry.
            std::size_t best = 0;
            for (const std::string& v : col.vocab) {
                if (freq[v] > best) {
                    best = freq[v];
                    col.mode_value = v;
                }
            }
        }
        schema.features.push_back(std::move(col));
    }

    // Label vocabulary covers the whole table so that every split's labels
    // stay inside [0, n_classes).
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const std::string& cell = table.rows[r][table.label_col];
        if (RawTable::is_missing(cell)) continue;
        if (schema.label_code.find(cell) == schema.label_code.end()) {
            schema.label_code[cell] = static_cast<int>(schema.label_vocab.size());
            schema.label_vocab.push_back(cell);
        }
    }
    return schema;
}

TransformResult transform(const RawTable& table, const ColumnSchema& schema,
                          const std::vector<std::size_t>& rows) {
    TransformResult res;
    std::vector<std::size_t> kept;
    kept.reserve(rows.size());
    for (std::size_t r : rows) {
        const std::string& label = table.rows[r][schema.label_col];
        if (RawTable::is_missing(label)) {
            res.rejected_rows.push_back(r);
            continue;
        }
        kept.push_back(r);
    }

    res.features = Matrix(kept.size(), schema.features.size());
    res.labels.resize(kept.size());
    for (std::size_t out_r = 0; out_r < kept.size(); ++out_r) {
        const std::size_t r = kept[out_r];
        for (std::size_t fc = 0; fc < schema.features.size(); ++fc) {
            const ColumnSchema::Column& col = schema.features[fc];
            const std::string& cell = table.rows[r][schema.feature_cols[fc]];
            double value;
            if (col.kind == ColumnSchema::Kind::numeric) {
                double v;
                if (RawTable::is_missing(cell) || !parse_double(cell, v)) v = col.median;
                value = scale_to_range(v, col.min, col.max);
            } else {
                int code;
                if (RawTable::is_missing(cell)) {
                    auto it = col.code.find(col.mode_value);
                    code = it == col.code.end() ? col.unknown_code() : it->second;
                } else {
                    auto it = col.code.find(cell);
                    code = it == col.code.end() ? col.unknown_code() : it->second;
                }
                value = scale_to_range(static_cast<double>(code), 0.0,
                                       static_cast<double>(col.vocab.size()) - 1.0);
            }
            res.features(out_r, fc) = value;
        }
        auto it = schema.label_code.find(table.rows[r][schema.label_col]);
        if (it == schema.label_code.end())
            throw std::invalid_argument("transform: label value not in schema vocabulary");
        res.labels[out_r] = it->second;
    }
    return res;
}

DatasetSplits split_dataset(const RawTable& table, const SplitFractions& fractions,
                            std::uint64_t seed) {
    const double sum = fractions.train + fractions.valid + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: fractions must sum to 1");
    if (fractions.train <= 0.0 || fractions.valid < 0.0 || fractions.test < 0.0)
        throw std::invalid_argument("split_dataset: bad fractions");

    // Rows without a label cannot be used by any split.
    std::vector<std::size_t> usable;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        if (!RawTable::is_missing(table.rows[r][table.label_col])) usable.push_back(r);
    if (usable.size() < 10)
        throw std::invalid_argument("split_dataset: need at least 10 labeled rows, got " +
                                    std::to_string(usable.size()));

    Rng rng(seed);
    rng.shuffle(usable);

    const std::size_t n = usable.size();
    const std::size_t n_train = static_cast<std::size_t>(fractions.train * n);
    const std::size_t n_valid = static_cast<std::size_t>(fractions.valid * n);

    DatasetSplits out;
    out.rejected = table.n_rows() - usable.size();
    out.train_rows.assign(usable.begin(), usable.begin() + n_train);
    out.valid_rows.assign(usable.begin() + n_train, usable.begin() + n_train + n_valid);
    out.test_rows.assign(usable.begin() + n_train + n_valid, usable.end());

    out.schema = fit_schema(table, out.train_rows);
    out.n_classes = out.schema.n_classes();
    out.class_names = out.schema.label_vocab;

    auto make_split = [&](const std::vector<std::size_t>& rows) {
        TransformResult t = transform(table, out.schema, rows);
        return SplitData{std::move(t.features), std::move(t.labels)};
    };
    out.train = make_split(out.train_rows);
    out.valid = make_split(out.valid_rows);
    out.test = make_split(out.test_rows);
    return out;
}

namespace {

nlohmann::json split_to_json(const SplitData& s) {
    nlohmann::json j;
    j["rows"] = s.features.rows();
    j["cols"] = s.features.cols();
    j["features"] = s.features.data();
    j["labels"] = s.labels;
    return j;
}

SplitData split_from_json(const nlohmann::json& j) {
    SplitData s;
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    s.features = Matrix(rows, cols);
    s.features.data() = j.at("features").get<std::vector<double>>();
    if (s.features.data().size() != rows * cols)
        throw std::invalid_argument("splits_from_json: matrix size mismatch");
    s.labels = j.at("labels").get<std::vector<int>>();
    if (s.labels.size() != rows)
        throw std::invalid_argument("splits_from_json: label count mismatch");
    return s;
}

nlohmann::json schema_to_json(const ColumnSchema& schema) {
    nlohmann::json cols = nlohmann::json::array();
    for (const ColumnSchema::Column& c : schema.features) {
        nlohmann::json jc;
        jc["kind"] = c.kind == ColumnSchema::Kind::numeric ? "numeric" : "categorical";
        jc["min"] = c.min;
        jc["max"] = c.max;
        jc["median"] = c.median;
        jc["vocab"] = c.vocab;
        jc["mode"] = c.mode_value;
        cols.push_back(std::move(jc));
    }
    return nlohmann::json{{"columns", std::move(cols)},
                          {"feature_cols", schema.feature_cols},
                          {"label_col", schema.label_col},
                          {"label_vocab", schema.label_vocab}};
}

ColumnSchema schema_from_json(const nlohmann::json& j) {
    ColumnSchema schema;
    schema.label_col = j.at("label_col").get<std::size_t>();
    schema.feature_cols = j.at("feature_cols").get<std::vector<std::size_t>>();
    schema.label_vocab = j.at("label_vocab").get<std::vector<std::string>>();
    for (std::size_t k = 0; k < schema.label_vocab.size(); ++k)
        schema.label_code[schema.label_vocab[k]] = static_cast<int>(k);
    for (const nlohmann::json& jc : j.at("columns")) {
        ColumnSchema::Column c;
        c.kind = jc.at("kind").get<std::string>() == "numeric" ? ColumnSchema::Kind::numeric
                                                               : ColumnSchema::Kind::categorical;
        c.min = jc.at("min").get<double>();
        c.max = jc.at("max").get<double>();
        c.median = jc.at("median").get<double>();
        c.vocab = jc.at("vocab").get<std::vector<std::string>>();
        c.mode_value = jc.at("mode").get<std::string>();
        for (std::size_t k = 0; k < c.vocab.size(); ++k)
            c.code[c.vocab[k]] = static_cast<int>(k);
        schema.features.push_back(std::move(c));
    }
    return schema;
}

}  // namespace

std::string splits_to_json(const DatasetSplits& splits) {
    nlohmann::json doc;
    doc["format"] = "dropkan-dataset";
    doc["version"] = 1;
    doc["n_classes"] = splits.n_classes;
    doc["class_names"] = splits.class_names;
    doc["schema"] = schema_to_json(splits.schema);
    doc["train_rows"] = splits.train_rows;
    doc["valid_rows"] = splits.valid_rows;
    doc["test_rows"] = splits.test_rows;
    doc["rejected"] = splits.rejected;
    doc["train"] = split_to_json(splits.train);
    doc["valid"] = split_to_json(splits.valid);
    doc["test"] = split_to_json(splits.test);
    return doc.dump();
}

DatasetSplits splits_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "dropkan-dataset")
        throw std::invalid_argument("splits_from_json: not a dataset bundle");
    if (doc.value("version", -1) != 1)
        throw std::invalid_argument("splits_from_json: unsupported version");
    DatasetSplits s;
    s.n_classes = doc.at("n_classes").get<std::size_t>();
    s.class_names = doc.at("class_names").get<std::vector<std::string>>();
    s.schema = schema_from_json(doc.at("schema"));
    s.train_rows = doc.at("train_rows").get<std::vector<std::size_t>>();
    s.valid_rows = doc.at("valid_rows").get<std::vector<std::size_t>>();
    s.test_rows = doc.at("test_rows").get<std::vector<std::size_t>>();
    s.rejected = doc.at("rejected").get<std::size_t>();
    s.train = split_from_json(doc.at("train"));
    s.valid = split_from_json(doc.at("valid"));
    s.test = split_from_json(doc.at("test"));
    return s;
}

void save_splits(const DatasetSplits& splits, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_splits: cannot open " + path);
    out << splits_to_json(splits) << '\n';
    if (!out) throw std::runtime_error("save_splits: write failed for " + path);
}

DatasetSplits load_splits(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_splits: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return splits_from_json(text);
}

}  // namespace dropkan
