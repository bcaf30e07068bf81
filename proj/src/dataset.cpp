#include "dgf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dgf/errors.hpp"
#include "dgf/rng.hpp"

namespace dgf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

// Parses one cell. Returns false for a missing value (empty or non-finite);
// throws for non-numeric garbage.
bool parse_cell(const std::string& tok, double& out, std::size_t row, const std::string& col) {
    if (tok.empty()) return false;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw DataError("csv: non-numeric value '" + tok + "' in column '" + col + "', data row " +
                        std::to_string(row));
    }
    return std::isfinite(out);
}

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::string zero_pad(std::size_t value, std::size_t width) {
    std::string s = std::to_string(value);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& id_column, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);

    std::ptrdiff_t label_idx = -1, id_idx = -1;
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) {
            if (label_idx >= 0) throw DataError("csv: duplicate label column '" + label_column + "'");
            label_idx = static_cast<std::ptrdiff_t>(c);
        } else if (!id_column.empty() && header[c] == id_column) {
            if (id_idx >= 0) throw DataError("csv: duplicate id column '" + id_column + "'");
            id_idx = static_cast<std::ptrdiff_t>(c);
        } else {
            feature_cols.push_back(c);
            feature_names.push_back(header[c]);
        }
    }
    if (label_idx < 0) throw DataError("csv: label column '" + label_column + "' not found");
    if (!id_column.empty() && id_idx < 0) {
        throw DataError("csv: id column '" + id_column + "' not found");
    }
    if (feature_cols.empty()) throw DataError("csv: no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::vector<std::string> ids;
    std::size_t dropped = 0;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("csv: data row " + std::to_string(row_no) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        const std::string& label = fields[static_cast<std::size_t>(label_idx)];
        if (label.empty()) {
            ++dropped;
            continue;
        }
        std::vector<double> values(feature_cols.size());
        bool complete = true;
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            if (!parse_cell(fields[feature_cols[f]], values[f], row_no, feature_names[f])) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(values));
        raw_labels.push_back(label);
        ids.push_back(id_idx >= 0 ? fields[static_cast<std::size_t>(id_idx)]
                                  : "row" + std::to_string(row_no));
    }
    if (report) report->dropped_rows = dropped;
    if (rows.size() < 2) {
        throw DataError("csv: need at least 2 usable rows, got " + std::to_string(rows.size()));
    }

    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() != 2) {
        throw DataError("csv: label column '" + label_column + "' has " +
                        std::to_string(distinct.size()) + " distinct values, expected exactly 2");
    }

    Dataset ds;
    ds.class_names.assign(distinct.begin(), distinct.end());  // sorted by std::set
    std::map<std::string, int> encode;
    encode[ds.class_names[0]] = 0;
    encode[ds.class_names[1]] = 1;

    ds.X = Matrix(rows.size(), feature_cols.size());
    ds.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t f = 0; f < feature_cols.size(); ++f) ds.X(i, f) = rows[i][f];
        ds.y[i] = encode[raw_labels[i]];
    }
    ds.feature_names = std::move(feature_names);
    ds.subject_ids = std::move(ids);
    return ds;
}

std::string format_csv(const Dataset& ds) {
    std::string out = "id,label";
    for (const std::string& name : ds.feature_names) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += ds.subject_ids[i];
        out += ',';
        out += ds.class_names[static_cast<std::size_t>(ds.y[i])];
        for (std::size_t f = 0; f < ds.dim(); ++f) {
            out += ',';
            append_g17(out, ds.X(i, f));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("csv: cannot open '" + path + "' for writing");
    out << format_csv(ds);
    if (!out) throw DataError("csv: write to '" + path + "' failed");
}

Matrix Standardizer::apply(const Matrix& X) const {
    if (X.cols() != mean.size()) {
        throw std::invalid_argument("standardize: column count differs from fitted transform");
    }
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j)
            out(i, j) = (X(i, j) - mean[j]) / stddev[j];
    return out;
}

Standardizer fit_standardizer(const Matrix& X, const std::vector<std::uint8_t>& train_mask) {
    if (train_mask.size() != X.rows()) {
        throw std::invalid_argument("standardize: mask size mismatch");
    }
    std::size_t n_train = 0;
    for (std::uint8_t m : train_mask) n_train += m ? 1 : 0;
    if (n_train == 0) throw std::invalid_argument("standardize: no training rows");

    Standardizer s;
    s.mean.assign(X.cols(), 0.0);
    s.stddev.assign(X.cols(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(n_train);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i)
            if (train_mask[i]) sum += X(i, j);
        s.mean[j] = sum * inv_n;
        double sq = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            if (!train_mask[i]) continue;
            const double d = X(i, j) - s.mean[j];
            sq += d * d;
        }
        s.stddev[j] = std::max(std::sqrt(sq * inv_n), 1e-8);
    }
    return s;
}

Dataset synthesize(std::size_t n_per_class, std::size_t d_total, std::size_t d_informative,
                   double gap, std::uint64_t seed) {
    if (n_per_class == 0 || d_total == 0) {
        throw std::invalid_argument("synthesize: n_per_class and d_total must be positive");
    }
    if (d_informative > d_total) {
        throw std::invalid_argument("synthesize: d_informative exceeds d_total");
    }
    if (gap < 0.0) throw std::invalid_argument("synthesize: gap must be >= 0");

    Dataset ds;
    ds.class_names = {"class0", "class1"};
    const std::size_t n = 2 * n_per_class;
    ds.X = Matrix(n, d_total);
    ds.y.resize(n);
    ds.subject_ids.resize(n);
    ds.feature_names.resize(d_total);

    const std::size_t id_width = std::to_string(n - 1).size();
    const std::size_t f_width = std::to_string(d_total - 1).size();
    for (std::size_t f = 0; f < d_total; ++f) ds.feature_names[f] = "f" + zero_pad(f, f_width);

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        const double shift = (label == 0 ? -0.5 : 0.5) * gap;
        ds.y[i] = label;
        ds.subject_ids[i] = "s" + zero_pad(i, id_width);
        for (std::size_t f = 0; f < d_total; ++f) {
            double v = rng.normal();
            if (f < d_informative) v += shift;
            ds.X(i, f) = v;
        }
    }
    return ds;
}

}  // namespace dgf
