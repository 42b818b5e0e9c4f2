#include "cht/dataset.hpp"

#include "cht/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cht {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string where(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column + 1);
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
        throw InputError("missing value at " + where(line, column));
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw InputError("cannot parse '" + std::string(cell) + "' as a number at " + where(line, column));
    if (!std::isfinite(value)) throw InputError("non-finite value at " + where(line, column));
    return value;
}

}  // namespace

ClassedDataset make_dataset(Matrix<double> x, std::vector<int> y, std::vector<std::string> feature_names) {
    if (static_cast<Index>(y.size()) != x.rows())
        throw InputError("label count " + std::to_string(y.size()) + " does not match row count " +
                         std::to_string(x.rows()));
    if (x.cols() < 2) throw InputError("at least two features are required, got " + std::to_string(x.cols()));
    ClassedDataset data;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            ++data.n1;
        } else if (y[i] == 2) {
            ++data.n2;
        } else {
            throw InputError("invalid class label " + std::to_string(y[i]) + " at row " + std::to_string(i + 1));
        }
    }
    if (data.n1 < 2 || data.n2 < 2)
        throw InputError("class too small: class 1 has " + std::to_string(data.n1) + " rows, class 2 has " +
                         std::to_string(data.n2) + " (need at least 2 each)");
    if (!x.allFinite()) throw InputError("non-finite value in feature matrix");
    if (feature_names.empty()) {
        for (Index j = 0; j < x.cols(); ++j) feature_names.push_back("V" + std::to_string(j + 1));
    } else if (static_cast<Index>(feature_names.size()) != x.cols()) {
        throw InputError("feature name count does not match feature count");
    }
    data.x = std::move(x);
    data.y = std::move(y);
    data.feature_names = std::move(feature_names);
    return data;
}

ClassedDataset swap_labels(const ClassedDataset& data) {
    std::vector<int> y = data.y;
    for (int& label : y) label = 3 - label;
    return make_dataset(data.x, std::move(y), data.feature_names);
}

ClassedDataset subset_rows(const ClassedDataset& data, const std::vector<Index>& rows) {
    Matrix<double> x(static_cast<Index>(rows.size()), data.features());
    std::vector<int> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        x.row(static_cast<Index>(r)) = data.x.row(rows[r]);
        y[r] = data.y[static_cast<std::size_t>(rows[r])];
    }
    return make_dataset(std::move(x), std::move(y), data.feature_names);
}

ClassedDataset parse_csv(std::istream& in, const CsvOptions& options) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t width = 0;
    std::size_t line_no = 0;
    bool header_pending = options.has_header;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_commas(line);
        if (width == 0) {
            width = cells.size();
            if (options.label_column < 0 || static_cast<std::size_t>(options.label_column) >= width)
                throw InputError("label column " + std::to_string(options.label_column) + " out of range for " +
                                 std::to_string(width) + " columns");
        } else if (cells.size() != width) {
            throw InputError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                             " columns, expected " + std::to_string(width));
        }
        const auto label_col = static_cast<std::size_t>(options.label_column);
        if (header_pending) {
            header_pending = false;
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (c != label_col) names.emplace_back(cells[c]);
            continue;
        }
        std::vector<double> values;
        values.reserve(width - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_col) {
                double label = parse_cell(cells[c], line_no, c);
                if (label != 1.0 && label != 2.0)
                    throw InputError("invalid class label '" + std::string(cells[c]) + "' at row " +
                                     std::to_string(rows.size() + 1) + " (line " + std::to_string(line_no) + ")");
                labels.push_back(static_cast<int>(label));
            } else {
                values.push_back(parse_cell(cells[c], line_no, c));
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw InputError("no data rows");
    Matrix<double> x(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j + 1 < width; ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return make_dataset(std::move(x), std::move(labels), std::move(names));
}

ClassedDataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return parse_csv(in, options);
}

void write_csv(std::ostream& out, const ClassedDataset& data) {
    out << "label";
    for (const auto& name : data.feature_names) out << ',' << name;
    out << '\n';
    for (Index i = 0; i < data.rows(); ++i) {
        out << data.y[static_cast<std::size_t>(i)];
        for (Index j = 0; j < data.features(); ++j) out << ',' << format_real(data.x(i, j));
        out << '\n';
    }
}

std::vector<DegeneracyReport> validate(const ClassedDataset& data) {
    std::vector<DegeneracyReport> reports;
    for (Index j = 0; j < data.features(); ++j) {
        for (int label : {1, 2}) {
            bool seen = false;
            bool varies = false;
            double first = 0.0;
            for (Index i = 0; i < data.rows() && !varies; ++i) {
                if (data.y[static_cast<std::size_t>(i)] != label) continue;
                if (!seen) {
                    first = data.x(i, j);
                    seen = true;
                } else if (data.x(i, j) != first) {
                    varies = true;
                }
            }
            if (!varies) reports.push_back({j, data.feature_names[static_cast<std::size_t>(j)], label});
        }
    }
    return reports;
}

}  // namespace cht
