#include "mlmc/partial_io.hpp"

#include "mlmc/errors.hpp"
#include "mlmc/matrix_market.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mlmc {

namespace {

constexpr const char* kMagic = "MLMC-PARTIAL";
constexpr int kVersion = 1;

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::vector<std::string> next() {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError("unexpected end of partial file", line_no_ + 1);
        ++line_no_;
        std::istringstream ss(line);
        std::vector<std::string> toks;
        for (std::string tok; ss >> tok;) toks.push_back(tok);
        return toks;
    }

    std::vector<std::string> keyed(const std::string& key, std::size_t n_values) {
        auto toks = next();
        if (toks.size() != n_values + 1 || toks[0] != key) {
            throw ParseError("expected '" + key + "' with " + std::to_string(n_values) + " value(s)", line_no_);
        }
        return toks;
    }

    template <typename T>
    T number(const std::string& tok) const {
        T v{};
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw ParseError("cannot parse number '" + tok + "'", line_no_);
        }
        return v;
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

} // namespace

void write_partial(const PartialSums& p, std::ostream& out) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "mode " << to_string(p.mode) << '\n';
    out << "dimension " << p.dimension << '\n';
    out << "worker " << p.worker_id << ' ' << p.worker_count << '\n';
    out << "alpha " << format_double(p.alpha) << '\n';
    out << "t " << format_double(p.t) << '\n';
    out << "seed " << p.root_seed << '\n';
    out << "paths " << p.n_paths << '\n';
    out << "events " << p.event_count << '\n';
    out << "values " << p.indices.size() << '\n';
    for (std::size_t i = 0; i < p.indices.size(); ++i) {
        out << p.indices[i] << ' ' << format_double(p.shift[i]) << ' ' << format_double(p.sum[i]) << ' '
            << format_double(p.sum_sq[i]) << '\n';
    }
    out << "end\n";
}

void write_partial(const PartialSums& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
    write_partial(p, out);
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

PartialSums read_partial(std::istream& in) {
    LineReader r(in);
    const auto head = r.next();
    if (head.size() != 2 || head[0] != kMagic) throw ParseError("not a partial-sums file (bad magic)", r.line());
    if (r.number<int>(head[1]) != kVersion) {
        throw ParseError("unsupported partial-sums version " + head[1], r.line());
    }
    PartialSums p;
    try {
        p.mode = parse_solve_mode(r.keyed("mode", 1)[1]);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), r.line());
    }
    p.dimension = r.number<std::uint64_t>(r.keyed("dimension", 1)[1]);
    const auto worker = r.keyed("worker", 2);
    p.worker_id = r.number<unsigned>(worker[1]);
    p.worker_count = r.number<unsigned>(worker[2]);
    if (p.worker_count == 0 || p.worker_id >= p.worker_count) throw ParseError("worker id out of range", r.line());
    p.alpha = r.number<double>(r.keyed("alpha", 1)[1]);
    p.t = r.number<double>(r.keyed("t", 1)[1]);
    p.root_seed = r.number<std::uint64_t>(r.keyed("seed", 1)[1]);
    p.n_paths = r.number<std::uint64_t>(r.keyed("paths", 1)[1]);
    p.event_count = r.number<std::uint64_t>(r.keyed("events", 1)[1]);
    const auto m = r.number<std::size_t>(r.keyed("values", 1)[1]);
    if (m > p.dimension) throw ParseError("more values than the system dimension", r.line());
    p.indices.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto toks = r.next();
        if (toks.size() != 4) throw ParseError("expected '<index> <shift> <sum> <sum_sq>'", r.line());
        const auto idx = r.number<index_t>(toks[0]);
        if (idx >= p.dimension) throw ParseError("index out of range", r.line());
        p.indices.push_back(idx);
        p.shift.push_back(r.number<double>(toks[1]));
        p.sum.push_back(r.number<double>(toks[2]));
        p.sum_sq.push_back(r.number<double>(toks[3]));
    }
    const auto tail = r.next();
    if (tail.size() != 1 || tail[0] != "end") throw ParseError("expected 'end'", r.line());
    return p;
}

PartialSums read_partial(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open partial file '" + path.string() + "'", 0);
    return read_partial(in);
}

} // namespace mlmc
