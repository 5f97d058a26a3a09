#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <alrisk/random.hpp>

namespace alrisk {

//! A binary-classification table: X in R^{n x d}, Y in {0,1}^n.
struct Dataset
{
    Eigen::MatrixXd features;               //!< n x d
    Eigen::VectorXi labels;                  //!< entries are 0 or 1
    std::vector<std::string> feature_names;  //!< d names
    std::string source_id;

    int n() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

//! Disjoint labeled/unlabeled/test index sets over one Dataset.
struct IndexPartition
{
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    std::vector<int> test;
    std::uint64_t seed = 0;
};

//! Options controlling CSV ingestion.
//!
//! `label_column` and entries of `drop_columns` are matched against header
//! names first; a value that is no header name but parses as a non-negative
//! integer is treated as a 0-based column index.
struct LoadOptions
{
    std::string label_column = "label";
    std::string positive_label = "1";
    std::vector<std::string> drop_columns;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline int resolve_column(const std::vector<std::string>& header,
                          const std::string& spec,
                          const std::string& what)
{
    const auto it = std::find(header.begin(), header.end(), spec);
    if (it != header.end())
        return static_cast<int>(it - header.begin());
    int idx = -1;
    const auto res = std::from_chars(spec.data(), spec.data() + spec.size(), idx);
    if (res.ec == std::errc() && res.ptr == spec.data() + spec.size() && idx >= 0
        && idx < static_cast<int>(header.size()))
        return idx;
    throw std::runtime_error(what + " '" + spec + "' matches no column in the header");
}

} // namespace detail

//! Reads a comma-delimited file with a header row into a Dataset.
//!
//! The label column's two distinct values are mapped to 1
//! (`opts.positive_label`) and 0 (the other value); all remaining columns
//! except `opts.drop_columns` must be numeric and become features.
//! Errors name the offending file location (line number, column name).
inline Dataset load_csv(const std::string& path, const LoadOptions& opts = {})
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_csv: cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv: '" + path + "' is empty");
    const std::vector<std::string> header = detail::split_csv_line(line);

    const int label_col = detail::resolve_column(header, opts.label_column, "label column");
    std::vector<bool> dropped(header.size(), false);
    for (const auto& d : opts.drop_columns)
        dropped[detail::resolve_column(header, d, "drop column")] = true;
    if (dropped[label_col])
        throw std::runtime_error("load_csv: label column '" + opts.label_column
                                 + "' is also listed in drop_columns");

    std::vector<std::string> feature_names;
    std::vector<int> feature_cols;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (c == label_col || dropped[c])
            continue;
        feature_cols.push_back(c);
        feature_names.push_back(header[c]);
    }
    if (feature_cols.empty())
        throw std::runtime_error("load_csv: no feature columns remain after drops");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) + " has "
                                     + std::to_string(cells.size()) + " cells, expected "
                                     + std::to_string(header.size()));
        std::vector<double> row(feature_cols.size());
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            const std::string& cell = cells[feature_cols[j]];
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()
                || !std::isfinite(v))
                throw std::runtime_error("load_csv: non-numeric feature cell '" + cell
                                         + "' at line " + std::to_string(line_no)
                                         + ", column '" + feature_names[j] + "'");
            row[j] = v;
        }
        rows.push_back(std::move(row));
        raw_labels.push_back(cells[label_col]);
    }

    if (rows.size() < 3)
        throw std::runtime_error("load_csv: need at least 3 data rows, got "
                                 + std::to_string(rows.size()));

    std::vector<std::string> classes;
    for (const auto& l : raw_labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end())
            classes.push_back(l);
    if (classes.size() != 2) {
        std::string msg = "load_csv: label column '" + opts.label_column + "' has "
                          + std::to_string(classes.size()) + " distinct values (";
        for (std::size_t i = 0; i < classes.size() && i < 5; ++i)
            msg += (i ? ", " : "") + classes[i];
        throw std::runtime_error(msg + "), expected exactly 2");
    }
    if (std::find(classes.begin(), classes.end(), opts.positive_label) == classes.end())
        throw std::runtime_error("load_csv: positive_label '" + opts.positive_label
                                 + "' does not occur in column '" + opts.label_column + "'");

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(feature_cols.size()));
    ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
        ds.labels(static_cast<Eigen::Index>(i)) = (raw_labels[i] == opts.positive_label);
    }
    ds.feature_names = std::move(feature_names);
    ds.source_id = path;
    return ds;
}

//! Writes a Dataset back to CSV ("label" column first, then features).
//! Doubles are printed with 17 significant digits so that
//! load_csv(write_csv(d)) reproduces `d` exactly.
inline void write_csv(const Dataset& ds, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_csv: cannot open file '" + path + "' for writing");
    out << "label";
    for (const auto& name : ds.feature_names)
        out << ',' << name;
    out << '\n';
    char buf[64];
    for (int i = 0; i < ds.n(); ++i) {
        out << ds.labels(i);
        for (int j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

//! Rescales every feature column to sample mean 0 and sample standard
//! deviation 1 (ddof = 1). Constant columns become all-zeros.
inline Dataset standardize(const Dataset& ds)
{
    Dataset out = ds;
    const int n = ds.n();
    if (n < 2)
        throw std::invalid_argument("standardize: need at least 2 rows");
    for (int j = 0; j < ds.dim(); ++j) {
        const double mean = ds.features.col(j).mean();
        const double ss = (ds.features.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / (n - 1));
        if (sd > 0.0)
            out.features.col(j) = (ds.features.col(j).array() - mean) / sd;
        else
            out.features.col(j).setZero();
    }
    return out;
}

//! Draws a seeded L/U/T split: T gets round(n * test_fraction) points,
//! L gets `warmup_size` of the remainder, U the rest. Index sets are
//! returned sorted ascending; the same seed reproduces the same split.
inline IndexPartition make_partition(const Dataset& ds, int warmup_size,
                                     double test_fraction, std::uint64_t seed)
{
    const int n = ds.n();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("make_partition: test_fraction must be in (0,1)");
    if (warmup_size < 0)
        throw std::invalid_argument("make_partition: warmup_size must be >= 0");
    const int nt = static_cast<int>(std::lround(n * test_fraction));
    if (nt < 1)
        throw std::invalid_argument("make_partition: test set would be empty");
    if (warmup_size + 1 > n - nt)
        throw std::invalid_argument("make_partition: warmup_size "
                                    + std::to_string(warmup_size)
                                    + " too large for a pool of " + std::to_string(n - nt));

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);

    IndexPartition p;
    p.seed = seed;
    p.test.assign(perm.begin(), perm.begin() + nt);
    p.labeled.assign(perm.begin() + nt, perm.begin() + nt + warmup_size);
    p.unlabeled.assign(perm.begin() + nt + warmup_size, perm.end());
    std::sort(p.test.begin(), p.test.end());
    std::sort(p.labeled.begin(), p.labeled.end());
    std::sort(p.unlabeled.begin(), p.unlabeled.end());
    return p;
}

//! Rows of `ds.features` at `idx`, stacked in the given order.
inline Eigen::MatrixXd rows_at(const Dataset& ds, const std::vector<int>& idx)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), ds.dim());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = ds.features.row(idx[i]);
    return out;
}

//! Labels of `ds` at `idx`, in the given order.
inline Eigen::VectorXi labels_at(const Dataset& ds, const std::vector<int>& idx)
{
    Eigen::VectorXi out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = ds.labels(idx[i]);
    return out;
}

} // namespace alrisk
