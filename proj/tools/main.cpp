// mlmc command-line front end. Exit codes: 0 success, 2 usage error,
// 3 input validation, 4 numeric domain refusal.

#include "mlmc/dense_oracle.hpp"
#include "mlmc/engine.hpp"
#include "mlmc/errors.hpp"
#include "mlmc/fit.hpp"
#include "mlmc/matrix_market.hpp"
#include "mlmc/partial_io.hpp"
#include "mlmc/problems.hpp"
#include "mlmc/report_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace mlmc;

enum class Format { json, csv };

struct CommonFlags {
    double alpha = 1.0;
    double t = 0.0;
    double paths = 1e4;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double confidence = 0.95;
    bool allow_absorbing = false;
};

struct SystemFlags {
    std::string matrix;
    std::string vector;
    std::string mass;
};

struct DiffusionFlags {
    std::size_t m = 16;
    double mu = 1.0;
    double c = 1.0 / 4096.0;
};

struct Options {
    CommonFlags common;
    SystemFlags system;
    DiffusionFlags diffusion;
    std::vector<index_t> entries;
    bool full = false;
    std::string out;
    Format format = Format::json;
    std::optional<unsigned> shard;
    std::string compare;
    std::vector<double> paths_list;
    std::string sweep;
    std::vector<double> sweep_values;
    std::vector<std::string> partials;
};

/// Path counts are accepted in scientific notation ("1e5") but must be integral.
std::uint64_t path_count(double x) {
    if (!(x >= 1.0) || x > 0x1.0p53 || std::floor(x) != x) {
        throw ValidationError("path count must be a positive integer, got " + format_double(x));
    }
    return static_cast<std::uint64_t>(x);
}

SolveRequest make_request(const Options& o) {
    SolveRequest r;
    r.alpha = o.common.alpha;
    r.t = o.common.t;
    r.n_paths = path_count(o.common.paths);
    r.root_seed = o.common.seed;
    r.workers = o.common.workers;
    r.confidence = o.common.confidence;
    r.allow_absorbing = o.common.allow_absorbing;
    if (!o.entries.empty()) {
        r.mode = SolveMode::entries;
        r.entries = o.entries;
    } else {
        r.mode = SolveMode::full;
    }
    return r;
}

DiffusionSpec diffusion_spec(const Options& o) {
    DiffusionSpec s;
    s.m = o.diffusion.m;
    s.mu = o.diffusion.mu;
    s.c_strength = o.diffusion.c;
    s.t = o.common.t;
    s.alpha = o.common.alpha;
    return s;
}

ProblemBundle load_system(const SystemFlags& f) {
    if (f.matrix.empty() || f.vector.empty()) throw ValidationError("--matrix and --vector are both required");
    if (!f.mass.empty()) return load_fem_system(f.matrix, f.mass, f.vector);
    ProblemBundle b;
    b.a = read_matrix_market(f.matrix);
    b.u0 = read_vector(f.vector);
    b.metadata = {{"kind", "file"}, {"matrix", f.matrix}, {"vector", f.vector}};
    return b;
}

/// Writes through `emit` to --out, or to stdout when --out is empty.
template <typename Emit>
void write_output(const std::string& path, Emit emit) {
    if (path.empty()) {
        emit(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    emit(out);
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const json& j) {
    write_output(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void write_report(const Options& o, const EstimateReport& r) {
    if (o.format == Format::json) {
        write_json(o.out, report_to_json(r));
    } else {
        write_output(o.out, [&](std::ostream& os) { write_report_csv(r, os); });
    }
}

/// Timing is kept out of the primary output so reruns stay byte-identical.
void log_wall_time(double seconds) { std::cerr << json{{"log", {{"wall_time_s", seconds}}}}.dump() << '\n'; }

double max_abs_diff(const EstimateReport& r, const std::vector<double>& exact) {
    double worst = 0.0;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        worst = std::max(worst, std::abs(r.values[k] - exact[r.indices[k]]));
    }
    return worst;
}

int cmd_gen_diffusion(const Options& o) {
    if (o.out.empty()) throw ValidationError("--out PREFIX is required");
    DiffusionSpec s = diffusion_spec(o);
    s.t = 0.0;
    s.alpha = 1.0;
    const ProblemBundle b = build_diffusion_2d(s);
    write_matrix_market(b.a, o.out + ".mtx");
    write_vector(b.u0, o.out + ".vec");
    write_json(o.out + ".json", b.metadata);
    return 0;
}

int cmd_solve(const Options& o) {
    const ProblemBundle b = load_system(o.system);
    const SolveRequest req = make_request(o);
    if (o.shard) {
        if (*o.shard >= req.workers) throw ValidationError("--shard must be below --workers");
        const Job job(b.a, b.u0, req);
        const auto start = std::chrono::steady_clock::now();
        const PartialSums part = job.run_worker(*o.shard, req.workers);
        log_wall_time(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        write_output(o.out, [&](std::ostream& os) { write_partial(part, os); });
        return 0;
    }
    const EstimateReport r = solve(b.a, b.u0, req);
    log_wall_time(r.wall_time_s);
    write_report(o, r);
    return 0;
}

int cmd_oracle(const Options& o) {
    std::vector<double> exact;
    json meta;
    if (!o.system.matrix.empty()) {
        const ProblemBundle b = load_system(o.system);
        if (!b.a.is_square() || b.a.n_rows() != b.u0.size()) {
            throw DimensionError("matrix and vector dimensions do not agree");
        }
        if (!(o.common.t >= 0.0) || !std::isfinite(o.common.t)) throw ValidationError("t must be finite and >= 0");
        if (o.common.t == 0.0) {
            exact = b.u0;
        } else {
            const DenseMatrix e = dense_ml_oracle(DenseMatrix::from_sparse(b.a), o.common.alpha, o.common.t);
            exact = e.apply(b.u0);
        }
        meta = b.metadata;
    } else {
        const DiffusionSpec s = diffusion_spec(o);
        exact = o.system.vector.empty() ? diffusion_analytic_solution(s)
                                        : diffusion_analytic_solution(s, read_vector(o.system.vector));
        meta = {{"kind", "diffusion_2d"}, {"m", s.m}, {"mu", s.mu}, {"c", s.c_strength}};
    }

    std::optional<EstimateReport> est;
    if (!o.compare.empty()) {
        est = read_report(o.compare);
        for (const index_t i : est->indices) {
            if (i >= exact.size()) throw DimensionError("compared report has index beyond the oracle dimension");
        }
    }

    if (o.format == Format::csv) {
        write_output(o.out, [&](std::ostream& os) {
            if (!est) {
                os << "index,oracle\n";
                for (std::size_t i = 0; i < exact.size(); ++i) os << i << ',' << format_double(exact[i]) << '\n';
                return;
            }
            os << "# max_abs_diff=" << format_double(max_abs_diff(*est, exact)) << '\n'
               << "index,oracle,estimate,diff,ci_halfwidth\n";
            for (std::size_t k = 0; k < est->values.size(); ++k) {
                const index_t i = est->indices[k];
                os << i << ',' << format_double(exact[i]) << ',' << format_double(est->values[k]) << ','
                   << format_double(est->values[k] - exact[i]) << ',' << format_double(est->ci_halfwidth[k]) << '\n';
            }
        });
        return 0;
    }

    json j = {{"alpha", o.common.alpha}, {"t", o.common.t}, {"problem", meta}, {"values", exact}};
    if (est) {
        std::vector<double> diff(est->values.size());
        double max_ci = 0.0;
        for (std::size_t k = 0; k < diff.size(); ++k) {
            diff[k] = est->values[k] - exact[est->indices[k]];
            max_ci = std::max(max_ci, est->ci_halfwidth[k]);
        }
        j["compare"] = {{"indices", est->indices},
                        {"diff", diff},
                        {"max_abs_diff", max_abs_diff(*est, exact)},
                        {"max_ci_halfwidth", max_ci}};
    }
    write_json(o.out, j);
    return 0;
}

int cmd_convergence(const Options& o) {
    if (o.paths_list.empty()) throw ValidationError("--paths-list needs at least one value");
    const DiffusionSpec s = diffusion_spec(o);
    const ProblemBundle b = build_diffusion_2d(s);
    const std::vector<double> exact = diffusion_analytic_solution(s);

    std::vector<double> n_paths, errors, times;
    for (const double p : o.paths_list) {
        Options run = o;
        run.common.paths = p;
        const EstimateReport r = solve(b.a, b.u0, make_request(run));
        n_paths.push_back(static_cast<double>(r.n_paths));
        errors.push_back(max_abs_diff(r, exact));
        times.push_back(r.wall_time_s);
    }
    std::optional<LinearFit> fit;
    if (n_paths.size() >= 2) fit = loglog_fit(n_paths, errors);

    if (o.format == Format::csv) {
        write_output(o.out, [&](std::ostream& os) {
            os << "n_paths,max_abs_error,wall_time_s\n";
            for (std::size_t k = 0; k < n_paths.size(); ++k) {
                os << static_cast<std::uint64_t>(n_paths[k]) << ',' << format_double(errors[k]) << ','
                   << format_double(times[k]) << '\n';
            }
            if (fit) os << "# loglog_slope=" << format_double(fit->slope) << '\n';
        });
        return 0;
    }
    json rows = json::array();
    for (std::size_t k = 0; k < n_paths.size(); ++k) {
        rows.push_back({{"n_paths", static_cast<std::uint64_t>(n_paths[k])},
                        {"max_abs_error", errors[k]},
                        {"wall_time_s", times[k]}});
    }
    json j = {{"rows", rows}};
    j["loglog_slope"] = fit ? json(fit->slope) : json(nullptr);
    write_json(o.out, j);
    return 0;
}

int cmd_scaling(const Options& o) {
    if (o.sweep != "t" && o.sweep != "n" && o.sweep != "workers") {
        throw ValidationError("--sweep must be one of t, n, workers");
    }
    if (o.sweep_values.empty()) throw ValidationError("--values needs at least one value");

    struct Row {
        double value;
        std::size_t dimension;
        double wall;
        std::uint64_t events;
        double mean_events;
    };
    std::vector<Row> rows;
    for (const double v : o.sweep_values) {
        Options run = o;
        if (o.sweep == "t") run.common.t = v;
        if (o.sweep == "n") {
            if (!(v >= 2.0) || std::floor(v) != v) throw ValidationError("n-sweep values are grid sizes m >= 2");
            run.diffusion.m = static_cast<std::size_t>(v);
        }
        if (o.sweep == "workers") {
            if (!(v >= 1.0) || std::floor(v) != v) throw ValidationError("worker counts must be positive integers");
            run.common.workers = static_cast<unsigned>(v);
        }
        const ProblemBundle b = build_diffusion_2d(diffusion_spec(run));
        const EstimateReport r = solve(b.a, b.u0, make_request(run));
        rows.push_back({v, b.u0.size(), r.wall_time_s, r.total_events, r.mean_events_per_path});
    }

    // t and n sweeps fit log(wall) against log(t) or log(N); the worker sweep
    // reports speedup against its first row.
    std::optional<LinearFit> fit;
    if (o.sweep != "workers" && rows.size() >= 2) {
        std::vector<double> x, y;
        for (const Row& r : rows) {
            x.push_back(o.sweep == "t" ? r.value : static_cast<double>(r.dimension));
            y.push_back(r.wall);
        }
        fit = loglog_fit(x, y);
    }
    const double base = rows.front().wall;

    if (o.format == Format::csv) {
        write_output(o.out, [&](std::ostream& os) {
            os << o.sweep << ",dimension,wall_time_s,total_events,mean_events_per_path"
               << (o.sweep == "workers" ? ",speedup" : "") << '\n';
            for (const Row& r : rows) {
                os << format_double(r.value) << ',' << r.dimension << ',' << format_double(r.wall) << ',' << r.events
                   << ',' << format_double(r.mean_events);
                if (o.sweep == "workers") os << ',' << format_double(base / r.wall);
                os << '\n';
            }
            if (fit) os << "# loglog_slope=" << format_double(fit->slope) << '\n';
        });
        return 0;
    }
    json out_rows = json::array();
    for (const Row& r : rows) {
        json row = {{o.sweep, r.value},
                    {"dimension", r.dimension},
                    {"wall_time_s", r.wall},
                    {"total_events", r.events},
                    {"mean_events_per_path", r.mean_events}};
        if (o.sweep == "workers") row["speedup"] = base / r.wall;
        out_rows.push_back(row);
    }
    json j = {{"sweep", o.sweep}, {"rows", out_rows}};
    if (fit) j["loglog_slope"] = fit->slope;
    write_json(o.out, j);
    return 0;
}

int cmd_merge(const Options& o) {
    std::vector<PartialSums> parts;
    parts.reserve(o.partials.size());
    for (const std::string& p : o.partials) parts.push_back(read_partial(p));
    const EstimateReport r = merge_partials(std::move(parts), o.common.confidence);
    write_report(o, r);
    return 0;
}

void add_common(CLI::App* app, Options& o, bool with_paths) {
    app->add_option("--alpha", o.common.alpha, "fractional order in (0, 1]")->capture_default_str();
    app->add_option("--time", o.common.t, "final time t >= 0")->capture_default_str();
    if (with_paths) app->add_option("--paths", o.common.paths, "paths per estimate")->capture_default_str();
    app->add_option("--seed", o.common.seed, "root seed")->capture_default_str();
    app->add_option("--workers", o.common.workers, "worker threads (or shard count)")->capture_default_str();
    app->add_option("--confidence", o.common.confidence, "two-sided confidence level")->capture_default_str();
    app->add_flag("--allow-absorbing", o.common.allow_absorbing, "accept rows that only kill walks");
}

void add_mode(CLI::App* app, Options& o) {
    auto* entries = app->add_option("--entries", o.entries, "estimate these 0-based entries")->delimiter(',');
    app->add_flag("--full", o.full, "estimate every entry (default)")->excludes(entries);
}

void add_system(CLI::App* app, Options& o) {
    app->add_option("--matrix", o.system.matrix, "generator (or stiffness) matrix, Matrix Market");
    app->add_option("--vector", o.system.vector, "initial vector file");
    app->add_option("--mass", o.system.mass, "lumped mass diagonal; matrix is then the stiffness");
}

void add_diffusion(CLI::App* app, Options& o) {
    app->add_option("--m", o.diffusion.m, "interior grid points per side")->capture_default_str();
    app->add_option("--mu", o.diffusion.mu, "diffusivity")->capture_default_str();
    app->add_option("--c", o.diffusion.c, "impulse strength")->capture_default_str();
}

void add_output(CLI::App* app, Options& o) {
    app->add_option("--out", o.out, "output path (stdout when omitted)");
    app->add_option("--format", o.format, "json or csv")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::json}, {"csv", Format::csv}}));
}

void print_error(const char* kind, const std::string& message, int code) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Monte Carlo action of the Mittag-Leffler matrix function, E_alpha(A t^alpha) u"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-diffusion", "write the 2D diffusion system: PREFIX.mtx, PREFIX.vec, PREFIX.json");
    add_diffusion(gen, o);
    gen->add_option("--out", o.out, "output prefix")->required();

    auto* solve_cmd = app.add_subcommand("solve", "estimate E_alpha(A t^alpha) u by random walks");
    add_common(solve_cmd, o, true);
    add_system(solve_cmd, o);
    add_mode(solve_cmd, o);
    add_output(solve_cmd, o);
    solve_cmd->add_option("--shard", o.shard, "run only this worker of --workers and write its partial sums");

    auto* oracle = app.add_subcommand("oracle", "deterministic reference: analytic diffusion or dense system");
    add_common(oracle, o, false);
    add_system(oracle, o);
    add_diffusion(oracle, o);
    add_output(oracle, o);
    oracle->add_option("--compare", o.compare, "JSON report to difference against the oracle");

    auto* conv = app.add_subcommand("convergence", "max-abs error against the analytic diffusion solution vs paths");
    add_common(conv, o, false);
    add_diffusion(conv, o);
    add_mode(conv, o);
    add_output(conv, o);
    conv->add_option("--paths-list", o.paths_list, "comma-separated path counts")->delimiter(',')->required();

    auto* scaling = app.add_subcommand("scaling", "wall time of diffusion solves vs t, grid size or workers");
    add_common(scaling, o, true);
    add_diffusion(scaling, o);
    add_mode(scaling, o);
    add_output(scaling, o);
    scaling->add_option("--sweep", o.sweep, "t, n or workers")->required();
    scaling->add_option("--values", o.sweep_values, "comma-separated sweep values (grid sizes m for n)")
        ->delimiter(',')
        ->required();

    auto* merge = app.add_subcommand("merge", "combine partial-sum files into one report");
    merge->add_option("partials", o.partials, "partial files")->required()->check(CLI::ExistingFile);
    merge->add_option("--confidence", o.common.confidence, "two-sided confidence level")->capture_default_str();
    add_output(merge, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what(), 2);
        return 2;
    }

    try {
        if (*gen) return cmd_gen_diffusion(o);
        if (*solve_cmd) return cmd_solve(o);
        if (*oracle) return cmd_oracle(o);
        if (*conv) return cmd_convergence(o);
        if (*scaling) return cmd_scaling(o);
        if (*merge) return cmd_merge(o);
    } catch (const ParseError& e) {
        print_error("ParseError", e.what(), 3);
        return 3;
    } catch (const DimensionError& e) {
        print_error("DimensionError", e.what(), 3);
        return 3;
    } catch (const ValidationError& e) {
        print_error("ValidationError", e.what(), 3);
        return 3;
    } catch (const DomainError& e) {
        print_error("DomainError", e.what(), 4);
        return 4;
    } catch (const OracleUnavailable& e) {
        print_error("OracleUnavailable", e.what(), 4);
        return 4;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what(), 1);
        return 1;
    }
    return 2;
}
