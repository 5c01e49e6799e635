#include "mlmc/matrix_market.hpp"

#include "mlmc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace mlmc {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

double parse_real(std::string_view tok, std::size_t line_no) {
    double v = 0.0;
    // from_chars does not accept a leading '+'.
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("cannot parse real value '" + std::string(tok) + "'", line_no);
    }
    return v;
}

std::size_t parse_count(std::string_view tok, std::size_t line_no) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("cannot parse integer '" + std::string(tok) + "'", line_no);
    }
    return v;
}

struct Header {
    std::string format;   // coordinate | array
    std::string field;    // real | integer
    std::string symmetry; // general | symmetric
};

Header parse_header(const std::string& line) {
    const auto toks = split_ws(line);
    if (toks.size() != 5 || lower(std::string(toks[0])) != "%%matrixmarket" || lower(std::string(toks[1])) != "matrix") {
        throw ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>' header", 1);
    }
    Header h{lower(std::string(toks[2])), lower(std::string(toks[3])), lower(std::string(toks[4]))};
    if (h.format != "coordinate" && h.format != "array") throw ParseError("unsupported format '" + h.format + "'", 1);
    if (h.field != "real" && h.field != "integer" && h.field != "double") {
        throw ParseError("unsupported field '" + h.field + "' (only real matrices are supported)", 1);
    }
    if (h.symmetry != "general" && h.symmetry != "symmetric") {
        throw ParseError("unsupported symmetry '" + h.symmetry + "'", 1);
    }
    return h;
}

// Returns the next non-comment, non-blank line; false at EOF.
bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line) || line.front() == '%') continue;
        return true;
    }
    return false;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "' for reading", 0);
    return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 0);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const Header h = parse_header(line);
    if (h.format != "coordinate") throw ParseError("expected a coordinate (sparse) matrix", 1);

    if (!next_data_line(in, line, line_no)) throw ParseError("missing size line", line_no);
    const auto size_toks = split_ws(line);
    if (size_toks.size() != 3) throw ParseError("size line must hold 'rows cols entries'", line_no);
    const std::size_t rows = parse_count(size_toks[0], line_no);
    const std::size_t cols = parse_count(size_toks[1], line_no);
    const std::size_t declared = parse_count(size_toks[2], line_no);
    const bool symmetric = h.symmetry == "symmetric";
    if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", line_no);

    struct Entry {
        Triplet t;
        std::size_t line;
    };
    std::vector<Entry> entries;
    entries.reserve(symmetric ? 2 * declared : declared);
    std::size_t seen = 0;
    while (next_data_line(in, line, line_no)) {
        const auto toks = split_ws(line);
        if (toks.size() != 3) throw ParseError("entry line must hold 'row col value'", line_no);
        const std::size_t i = parse_count(toks[0], line_no);
        const std::size_t j = parse_count(toks[1], line_no);
        const double v = parse_real(toks[2], line_no);
        if (i < 1 || i > rows || j < 1 || j > cols) {
            throw ParseError("index (" + std::string(toks[0]) + ", " + std::string(toks[1]) + ") out of range", line_no);
        }
        ++seen;
        if (seen > declared) throw ParseError("more entries than the declared " + std::to_string(declared), line_no);
        entries.push_back({{static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v}, line_no});
        if (symmetric && i != j) entries.push_back({{static_cast<index_t>(j - 1), static_cast<index_t>(i - 1), v}, line_no});
    }
    if (seen != declared) {
        throw ParseError("declared " + std::to_string(declared) + " entries but found " + std::to_string(seen), line_no);
    }

    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.t.row != b.t.row ? a.t.row < b.t.row : a.t.col < b.t.col;
    });
    for (std::size_t k = 1; k < entries.size(); ++k) {
        if (entries[k].t.row == entries[k - 1].t.row && entries[k].t.col == entries[k - 1].t.col) {
            const std::size_t where = std::max(entries[k].line, entries[k - 1].line);
            throw ParseError("duplicate entry (" + std::to_string(entries[k].t.row + 1) + ", " +
                                 std::to_string(entries[k].t.col + 1) + ")",
                             where);
        }
    }
    std::vector<Triplet> triplets;
    triplets.reserve(entries.size());
    for (const auto& e : entries) triplets.push_back(e.t);
    return SparseMatrix::from_triplets(rows, cols, std::move(triplets));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows() << ' ' << a.n_cols() << ' ' << a.nnz() << '\n';
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            out << (i + 1) << ' ' << (cols[k] + 1) << ' ' << format_double(vals[k]) << '\n';
        }
    }
}

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_matrix_market(a, out);
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

std::vector<double> read_vector(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> v;

    const int first = in.peek();
    if (first == '%') {
        std::getline(in, line);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("%%", 0) == 0) {
            const Header h = parse_header(line);
            if (h.format != "array") throw ParseError("vector files must use the array format", 1);
            if (!next_data_line(in, line, line_no)) throw ParseError("missing size line", line_no);
            const auto toks = split_ws(line);
            if (toks.size() != 2) throw ParseError("array size line must hold 'rows cols'", line_no);
            const std::size_t rows = parse_count(toks[0], line_no);
            const std::size_t cols = parse_count(toks[1], line_no);
            if (cols != 1) throw ParseError("vector array must have exactly one column", line_no);
            v.reserve(rows);
            while (next_data_line(in, line, line_no)) {
                const auto vt = split_ws(line);
                if (vt.size() != 1) throw ParseError("expected one value per line", line_no);
                if (v.size() == rows) throw ParseError("more values than the declared " + std::to_string(rows), line_no);
                v.push_back(parse_real(vt[0], line_no));
            }
            if (v.size() != rows) throw ParseError("declared " + std::to_string(rows) + " values but found " +
                                                       std::to_string(v.size()), line_no);
            return v;
        }
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line) || line.front() == '%' || line.front() == '#') continue;
        const auto toks = split_ws(line);
        if (toks.size() != 1) throw ParseError("expected one value per line", line_no);
        v.push_back(parse_real(toks[0], line_no));
    }
    return v;
}

std::vector<double> read_vector(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return read_vector(in);
}

void write_vector(std::span<const double> v, std::ostream& out) {
    for (const double x : v) out << format_double(x) << '\n';
}

void write_vector(std::span<const double> v, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_vector(v, out);
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

} // namespace mlmc
