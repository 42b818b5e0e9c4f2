#pragma once

#include "cht/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cht {

/// N x p numeric matrix with a class label (1 or 2) per row.
///
/// Construct through `make_dataset` or `load_csv`; both enforce the
/// invariants (finite entries, labels in {1,2}, at least two rows per class,
/// p >= 2).
struct ClassedDataset {
    Matrix<double> x;
    std::vector<int> y;
    Index n1 = 0;
    Index n2 = 0;
    std::vector<std::string> feature_names;

    Index rows() const { return x.rows(); }
    Index features() const { return x.cols(); }
};

ClassedDataset make_dataset(Matrix<double> x, std::vector<int> y,
                            std::vector<std::string> feature_names = {});

/// Same observations with labels 1 and 2 exchanged.
ClassedDataset swap_labels(const ClassedDataset& data);

/// Dataset restricted to the given rows, in the given order.
ClassedDataset subset_rows(const ClassedDataset& data, const std::vector<Index>& rows);

struct CsvOptions {
    bool has_header = true;
    /// Zero-based column holding the class label.
    Index label_column = 0;
};

ClassedDataset load_csv(const std::string& path, const CsvOptions& options = {});
ClassedDataset parse_csv(std::istream& in, const CsvOptions& options = {});

/// Writes label first, then features, with 17 significant digits so that
/// reloading reproduces every value exactly.
void write_csv(std::ostream& out, const ClassedDataset& data);

struct DegeneracyReport {
    Index feature = 0;
    std::string feature_name;
    int class_label = 1;
};

/// Features whose within-class sample standard deviation is zero.
std::vector<DegeneracyReport> validate(const ClassedDataset& data);

}  // namespace cht
