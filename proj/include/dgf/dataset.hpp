#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgf/matrix.hpp"

namespace dgf {

/// A fully ingested binary-classification table. Labels are encoded by the
/// sorted order of the distinct label strings: class_names is sorted
/// ascending and y[i] indexes into it.
struct Dataset {
    Matrix X;                                // N x d
    std::vector<int> y;                      // values in {0, 1}
    std::vector<std::string> feature_names;  // d entries
    std::vector<std::string> subject_ids;    // N entries
    std::vector<std::string> class_names;    // 2 entries, sorted

    std::size_t size() const { return X.rows(); }
    std::size_t dim() const { return X.cols(); }
};

struct LoadReport {
    std::size_t dropped_rows = 0;  // rows removed for missing/non-finite cells
};

/// Reads a comma-separated table with a header row. The label column and
/// (optionally) the id column are pulled out by name; every remaining column
/// must parse as a number. Cells that are empty or parse to a non-finite
/// value count as missing and drop the whole row (tallied in the report).
/// Pass an empty id_column to have ids generated from row numbers.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& id_column, LoadReport* report = nullptr);

/// Writes the same schema back (id, label, features) with numerics at 17
/// significant digits, so save/load round-trips are bit-exact.
void save_csv(const Dataset& ds, const std::string& path);
std::string format_csv(const Dataset& ds);

/// Per-feature z-scoring fitted on the training rows only (population std,
/// floored at 1e-8) and applied to every row.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    Matrix apply(const Matrix& X) const;
};

Standardizer fit_standardizer(const Matrix& X, const std::vector<std::uint8_t>& train_mask);

/// Two-Gaussian synthetic dataset: the first d_informative features have
/// class means -gap/2 and +gap/2 at unit variance, the rest are
/// standard-normal noise in both classes. Class counts are exact and the
/// output is a pure function of the arguments.
Dataset synthesize(std::size_t n_per_class, std::size_t d_total, std::size_t d_informative,
                   double gap, std::uint64_t seed);

}  // namespace dgf
