#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ebpred/errors.hpp"

namespace ebpred {

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline bool parse_cell(std::string_view cell, double& out) {
    // trim spaces and a possible CR
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() &&
           (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
        cell.remove_suffix(1);
    if (cell.empty()) return false;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

}  // namespace detail

struct CsvTable {
    std::vector<std::string> header;  // empty if the file had none
    Eigen::MatrixXd values;
};

/// Parse a rectangular numeric CSV. A non-numeric first row is treated as a
/// header. Errors carry the offending 1-based line (and column) number.
inline CsvTable load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    CsvTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t cidx = 0; cidx < cells.size(); ++cidx) {
            if (!detail::parse_cell(cells[cidx], row[cidx])) {
                numeric = false;
                bad_col = cidx;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty() && table.header.empty() && line_no == 1) {
                for (const auto& c : cells) table.header.emplace_back(c);
                continue;
            }
            throw NonNumericCell("non-numeric cell at line " + std::to_string(line_no) +
                                 ", column " + std::to_string(bad_col + 1) + " of " +
                                 path.string());
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw RaggedRows("line " + std::to_string(line_no) + " of " + path.string() +
                             " has " + std::to_string(row.size()) + " cells, expected " +
                             std::to_string(rows.front().size()));
        if (!table.header.empty() && row.size() != table.header.size())
            throw RaggedRows("line " + std::to_string(line_no) + " of " + path.string() +
                             " does not match the header width");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no data rows in " + path.string());

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

inline Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    return load_csv(path).values;
}

/// Load a one-column (or one-row) CSV as a vector.
inline Eigen::VectorXd load_vector(const std::filesystem::path& path) {
    const Eigen::MatrixXd m = load_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw DimensionMismatch(path.string() + " is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected a vector");
}

/// Incremental CSV writer with round-trip-exact numeric formatting.
class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw IoError("cannot write " + path.string());
    }

    void write_header(const std::vector<std::string>& names) { write_row_strings(names); }

    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void write_row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(cells[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

inline void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                        const std::vector<std::string>& header = {}) {
    CsvWriter w(path);
    if (!header.empty()) w.write_header(header);
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        w.write_row(row);
    }
}

}  // namespace ebpred
