#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "specgraph/admm.hpp"
#include "specgraph/bench.hpp"
#include "specgraph/common.hpp"
#include "specgraph/select.hpp"
#include "specgraph/spectral.hpp"

// CSV conventions
//   series:    header = variable names, one row per time sample (n rows x p columns)
//   matrices:  real  -> optional header of labels, p rows of p values
//              complex -> header re_1,im_1,...,re_p,im_p, p rows of 2p values
//   edges:     header i,j,weight with one-based node indices, i < j
// Doubles are written with 17 significant digits so a re-read is exact.
namespace specgraph::io {

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> out;
    std::string_view rest(line);
    while (true) {
        const auto pos = rest.find(',');
        out.emplace_back(trim(rest.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
    }
    return out;
}

inline double parse_double(std::string_view cell, const std::string& where)
{
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last)
        throw Error(ErrorCode::ingest_error, "non-numeric cell '" + std::string(cell) + "' at " + where);
    return v;
}

inline std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ingest_error, "cannot open '" + path.string() + "'");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ingest_error, "cannot write '" + path.string() + "'");
    return out;
}

/// Non-empty lines of a file.
inline std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!trim(line).empty()) lines.push_back(line);
    return lines;
}

inline std::string join(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

} // namespace detail

struct LabeledSeries {
    std::vector<std::string> labels;
    /// p x n, rows are variables.
    RMatrix values;
};

/// Reads a time-by-variable CSV and transposes it to variables-by-time.
inline LabeledSeries read_series_csv(const std::filesystem::path& path)
{
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw Error(ErrorCode::ingest_error, "'" + path.string() + "' is empty");
    LabeledSeries out;
    out.labels = detail::split_row(lines.front());
    const auto p = static_cast<Eigen::Index>(out.labels.size());
    const auto n = static_cast<Eigen::Index>(lines.size() - 1);
    out.values.resize(p, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto cells = detail::split_row(lines[static_cast<std::size_t>(t + 1)]);
        if (static_cast<Eigen::Index>(cells.size()) != p)
            throw Error(ErrorCode::ingest_error, "row " + std::to_string(t + 2) + " has " +
                                                     std::to_string(cells.size()) + " cells, expected " +
                                                     std::to_string(p));
        for (Eigen::Index i = 0; i < p; ++i) {
            const double v = detail::parse_double(cells[static_cast<std::size_t>(i)],
                                                  "row " + std::to_string(t + 2) + ", column " + std::to_string(i + 1));
            if (!std::isfinite(v)) throw Error(ErrorCode::ingest_error, "non-finite value in row " + std::to_string(t + 2));
            out.values(i, t) = v;
        }
    }
    return out;
}

inline void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                             const TimeSeriesMatrix& x)
{
    auto out = detail::open_out(path);
    out << detail::join(labels) << '\n';
    for (std::size_t t = 0; t < x.n(); ++t) {
        for (std::size_t i = 0; i < x.p(); ++i) {
            if (i) out << ',';
            out << format_double(x.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        }
        out << '\n';
    }
}

/// x(t) = ln(y(t) / y(t-1)) per row; prices must be strictly positive.
inline RMatrix log_returns(const RMatrix& prices)
{
    if (prices.cols() < 2) throw Error(ErrorCode::ingest_error, "log returns need at least two samples");
    if ((prices.array() <= 0.0).any()) throw Error(ErrorCode::ingest_error, "log returns need positive prices");
    RMatrix out(prices.rows(), prices.cols() - 1);
    for (Eigen::Index t = 1; t < prices.cols(); ++t)
        out.col(t - 1) = (prices.col(t).array() / prices.col(t - 1).array()).log().matrix();
    return out;
}

inline std::vector<std::string> default_labels(std::size_t p)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < p; ++i) out.push_back("x" + std::to_string(i + 1));
    return out;
}

inline void write_matrix_csv(const std::filesystem::path& path, const RMatrix& m,
                             const std::vector<std::string>& header = {})
{
    auto out = detail::open_out(path);
    if (!header.empty()) out << detail::join(header) << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

/// Reads a numeric matrix; a first row that does not parse as numbers is taken as a header.
inline RMatrix read_matrix_csv(const std::filesystem::path& path)
{
    auto lines = detail::read_lines(path);
    if (lines.empty()) return RMatrix(0, 0);
    std::size_t first = 0;
    try {
        for (const auto& c : detail::split_row(lines.front())) detail::parse_double(c, "header");
    } catch (const Error&) {
        first = 1;
    }
    const auto rows = static_cast<Eigen::Index>(lines.size() - first);
    if (rows == 0) return RMatrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(detail::split_row(lines[first]).size());
    RMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto cells = detail::split_row(lines[first + static_cast<std::size_t>(r)]);
        if (static_cast<Eigen::Index>(cells.size()) != cols)
            throw Error(ErrorCode::ingest_error, "ragged matrix row in '" + path.string() + "'");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = detail::parse_double(cells[static_cast<std::size_t>(c)], path.string());
    }
    return m;
}

inline std::vector<std::string> complex_header(std::size_t p)
{
    std::vector<std::string> h;
    for (std::size_t j = 0; j < p; ++j) {
        h.push_back("re_" + std::to_string(j + 1));
        h.push_back("im_" + std::to_string(j + 1));
    }
    return h;
}

inline void write_complex_matrix_csv(const std::filesystem::path& path, const CMatrix& m)
{
    RMatrix flat(m.rows(), 2 * m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        flat.col(2 * c) = m.col(c).real();
        flat.col(2 * c + 1) = m.col(c).imag();
    }
    write_matrix_csv(path, flat, complex_header(static_cast<std::size_t>(m.cols())));
}

inline CMatrix read_complex_matrix_csv(const std::filesystem::path& path)
{
    const RMatrix flat = read_matrix_csv(path);
    if (flat.cols() % 2) throw Error(ErrorCode::ingest_error, "complex matrix needs paired re/im columns");
    CMatrix m(flat.rows(), flat.cols() / 2);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = Complex(flat(r, 2 * c), flat(r, 2 * c + 1));
    return m;
}

inline void write_edges_csv(const std::filesystem::path& path, const EdgeGraph& g)
{
    auto out = detail::open_out(path);
    out << "i,j,weight\n";
    for (const auto& e : g.edges) out << e.i + 1 << ',' << e.j + 1 << ',' << format_double(e.weight) << '\n';
}

/// Reads i,j[,weight] with one-based indices; p defaults to the largest index seen.
inline EdgeGraph read_edges_csv(const std::filesystem::path& path, std::size_t p = 0)
{
    const auto lines = detail::read_lines(path);
    EdgeGraph g;
    std::size_t top = 0;
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto cells = detail::split_row(lines[l]);
        if (l == 0 && !cells.empty() && cells[0] == "i") continue;
        if (cells.size() < 2) throw Error(ErrorCode::ingest_error, "edge row needs i and j in '" + path.string() + "'");
        const std::string where = path.string() + " line " + std::to_string(l + 1);
        const double a = detail::parse_double(cells[0], where);
        const double b = detail::parse_double(cells[1], where);
        if (a < 1 || b < 1 || a != std::floor(a) || b != std::floor(b) || a == b)
            throw Error(ErrorCode::ingest_error, "invalid node pair at " + where);
        Edge e;
        e.i = static_cast<std::size_t>(std::min(a, b)) - 1;
        e.j = static_cast<std::size_t>(std::max(a, b)) - 1;
        e.weight = cells.size() > 2 ? detail::parse_double(cells[2], where) : 1.0;
        top = std::max(top, e.j + 1);
        g.edges.push_back(e);
    }
    g.p = std::max(p, top);
    return g;
}

/// Table columns: method,n,K,M,trial,seed,lambda,alpha,precision,recall,f1,frob_error,runtime_ms
inline void write_trial_table(std::ostream& out, const std::vector<TrialRow>& rows, bool include_runtime = true)
{
    out << "method,n,K,M,trial,seed,lambda,alpha,precision,recall,f1,frob_error";
    if (include_runtime) out << ",runtime_ms";
    out << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.n << ',' << r.window << ',' << r.count << ',' << r.trial << ',' << r.seed << ','
            << format_double(r.lambda) << ',' << format_double(r.alpha) << ',' << format_double(r.metrics.precision)
            << ',' << format_double(r.metrics.recall) << ',' << format_double(r.metrics.f1) << ','
            << format_double(r.metrics.frob_error);
        if (include_runtime) out << ',' << format_double(r.runtime_ms);
        out << '\n';
    }
}

inline void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows)
{
    out << "method,n,trials,f1_mean,f1_stderr,precision_mean,recall_mean,frob_mean,frob_stderr\n";
    for (const auto& s : rows)
        out << s.method << ',' << s.n << ',' << s.trials << ',' << format_double(s.f1_mean) << ','
            << format_double(s.f1_stderr) << ',' << format_double(s.precision_mean) << ','
            << format_double(s.recall_mean) << ',' << format_double(s.frob_mean) << ','
            << format_double(s.frob_stderr) << '\n';
}

inline void write_bic_table(std::ostream& out, const std::vector<BicRecord>& records)
{
    out << "stage,lambda,alpha,bic,edge_count,converged\n";
    for (const auto& r : records)
        out << r.stage << ',' << format_double(r.lambda) << ',' << format_double(r.alpha) << ','
            << format_double(r.bic) << ',' << r.edge_count << ',' << (r.converged ? 1 : 0) << '\n';
}

/// 64-bit FNV-1a, used for config fingerprints.
inline std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace specgraph::io
