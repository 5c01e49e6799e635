#include "mlmc/report_io.hpp"

#include "mlmc/errors.hpp"
#include "mlmc/matrix_market.hpp"

#include <fstream>
#include <ostream>

namespace mlmc {

nlohmann::json report_to_json(const EstimateReport& r) {
    return {
        {"mode", to_string(r.mode)},
        {"alpha", r.alpha},
        {"t", r.t},
        {"n_paths", r.n_paths},
        {"root_seed", r.root_seed},
        {"workers", r.workers},
        {"confidence", r.confidence},
        {"mean_events_per_path", r.mean_events_per_path},
        {"total_events", r.total_events},
        {"indices", r.indices},
        {"values", r.values},
        {"sample_variance", r.sample_variance},
        {"ci_halfwidth", r.ci_halfwidth},
    };
}

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("report is missing '") + key + "'", 0);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report field '") + key + "': " + e.what(), 0);
    }
}

} // namespace

EstimateReport report_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("report must be a JSON object", 0);
    EstimateReport r;
    r.mode = parse_solve_mode(field<std::string>(j, "mode"));
    r.alpha = field<double>(j, "alpha");
    r.t = field<double>(j, "t");
    r.n_paths = field<std::uint64_t>(j, "n_paths");
    r.root_seed = field<std::uint64_t>(j, "root_seed");
    r.workers = field<unsigned>(j, "workers");
    r.confidence = field<double>(j, "confidence");
    r.mean_events_per_path = field<double>(j, "mean_events_per_path");
    r.total_events = field<std::uint64_t>(j, "total_events");
    r.indices = field<std::vector<index_t>>(j, "indices");
    r.values = field<std::vector<double>>(j, "values");
    r.sample_variance = field<std::vector<double>>(j, "sample_variance");
    r.ci_halfwidth = field<std::vector<double>>(j, "ci_halfwidth");
    const std::size_t n = r.indices.size();
    if (r.values.size() != n || r.sample_variance.size() != n || r.ci_halfwidth.size() != n) {
        throw DimensionError("report arrays differ in length");
    }
    return r;
}

EstimateReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("report '" + path.string() + "' is not valid JSON: " + e.what(), 0);
    }
    return report_from_json(j);
}

void write_report_csv(const EstimateReport& r, std::ostream& out) {
    out << "# mode=" << to_string(r.mode) << '\n'
        << "# alpha=" << format_double(r.alpha) << '\n'
        << "# t=" << format_double(r.t) << '\n'
        << "# n_paths=" << r.n_paths << '\n'
        << "# root_seed=" << r.root_seed << '\n'
        << "# workers=" << r.workers << '\n'
        << "# confidence=" << format_double(r.confidence) << '\n'
        << "# mean_events_per_path=" << format_double(r.mean_events_per_path) << '\n'
        << "# total_events=" << r.total_events << '\n'
        << "index,value,sample_variance,ci_halfwidth\n";
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        out << r.indices[k] << ',' << format_double(r.values[k]) << ',' << format_double(r.sample_variance[k]) << ','
            << format_double(r.ci_halfwidth[k]) << '\n';
    }
}

} // namespace mlmc
