#ifndef KHINCHIN_TOOLS_CLI_HPP
#define KHINCHIN_TOOLS_CLI_HPP

// Batch command-line front end. Every command builds a flat table (one row
// per grid point or per (m, s) pair) plus a few report-level fields, then
// writes it as CSV or JSON. JSON objects carry schema_version 1 and keys
// in sorted order, so a parse/dump round trip is byte-identical.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <khinchin/khinchin.hpp>

namespace khinchin::cli {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

enum ExitCode { exit_ok = 0, exit_validation = 2, exit_failure = 3 };

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
    std::string command;
    json meta = json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    bool failed = false;          // a checked inequality or tolerance did not hold
    std::string failure_message;
};

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
                if (!std::isfinite(v)) return json(format_double(v));
                return json(v);
            } else {
                return json(v);
            }
        },
        c);
}

inline std::string cell_csv(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<V, std::int64_t>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<V, bool>)
                return v ? "true" : "false";
            else {
                if (v.find_first_of(",\"\n") == std::string::npos) return v;
                std::string q = "\"";
                for (char ch : v) {
                    if (ch == '"') q += '"';
                    q += ch;
                }
                return q + "\"";
            }
        },
        c);
}

inline json to_json(const Table& t) {
    json j = t.meta;
    j["schema_version"] = schema_version;
    j["command"] = t.command;
    j["columns"] = t.columns;
    json rows = json::array();
    for (const auto& r : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + cell_csv(r[i]);
        s += "\n";
    }
    return s;
}

inline double d(const xreal& x) { return to_double(x); }

// ---------------------------------------------------------------------------
// Options

struct Options {
    std::string model;
    std::vector<std::string> t_values;
    std::string t_grid;
    int kmax = 6;
    int order = 4;
    double tail_tol = 1e-13;
    double rel_tol = 1e-12;
    std::string format = "json";
    std::string out;
    unsigned jobs = 1;
    std::vector<int> m;
    std::vector<double> s;
    int p = 1;
    int k = 1;
    std::size_t samples = 256;
    std::string route = "auto";
};

inline std::vector<xreal> parse_list(const std::string& text, const char* what) {
    std::vector<xreal> out;
    for (const auto& item : khinchin::detail::split(text, ',')) {
        if (item.empty()) throw validation_error(std::string(what) + ": empty list entry");
        out.push_back(to_xreal(parse_decimal(item)));
    }
    return out;
}

/// --t values or --t-grid ("default" or a comma list); a model-dependent
/// default when both are absent.
inline std::vector<xreal> resolve_grid(const Options& o, const SeriesModel& f, bool allow_default) {
    std::vector<xreal> g;
    for (const auto& t : o.t_values) {
        auto part = parse_list(t, "--t");
        g.insert(g.end(), part.begin(), part.end());
    }
    if (!o.t_grid.empty()) {
        if (!g.empty()) throw validation_error("--t and --t-grid are mutually exclusive");
        if (o.t_grid == "default")
            g = default_grid(f);
        else
            g = parse_list(o.t_grid, "--t-grid");
    }
    if (g.empty()) {
        if (!allow_default) throw validation_error("this command needs --t or --t-grid");
        g = default_grid(f);
    }
    for (const auto& t : g) f.check_domain(t);
    return g;
}

inline RoutePreference parse_route(const std::string& r) {
    if (r == "auto") return RoutePreference::analytic_preferred;
    if (r == "analytic") return RoutePreference::analytic_only;
    if (r == "moments") return RoutePreference::from_moments_only;
    throw validation_error("--route must be auto, analytic or moments");
}

inline void check_common(const Options& o) {
    if (o.format != "json" && o.format != "csv") throw validation_error("--format must be csv or json");
    if (!(o.tail_tol > 0 && o.tail_tol <= 1e-3)) throw validation_error("--tail-tol must lie in (0, 1e-3]");
    if (!(o.rel_tol > 0 && o.rel_tol < 1)) throw validation_error("--rel-tol must lie in (0, 1)");
    if (o.jobs < 1 || o.jobs > 256) throw validation_error("--jobs must lie in [1, 256]");
}

// ---------------------------------------------------------------------------
// Commands

inline Table cmd_family(const Options& o) {
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, false);
    const auto slices = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
        return distribution(*f, grid[i], xreal(o.tail_tol));
    });
    Table t{"family"};
    t.meta["model"] = f->label();
    t.columns = {"t", "n", "p_n", "tail_mass_bound"};
    for (const auto& s : slices)
        for (std::size_t n = 0; n < s.probs.size(); ++n)
            t.rows.push_back({d(s.t), static_cast<std::int64_t>(n), d(s.probs[n]), d(s.tail_mass_bound)});
    return t;
}

inline Table cmd_moments(const Options& o) {
    if (o.order < 2 || o.order > 10) throw validation_error("--order must lie in [2, 10]");
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, false);
    const auto reps = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
        return direct_moments(distribution(*f, grid[i], xreal(o.tail_tol)), o.order);
    });
    Table t{"moments"};
    t.meta["model"] = f->label();
    t.meta["order"] = o.order;
    t.columns = {"t", "mean", "variance"};
    for (int k = 1; k <= o.order; ++k) t.columns.push_back("raw_" + std::to_string(k));
    for (int k = 2; k <= o.order; ++k) t.columns.push_back("central_" + std::to_string(k));
    for (int k = 3; k <= o.order; ++k) t.columns.push_back("nu_" + std::to_string(k));
    for (const auto& r : reps) {
        std::vector<Cell> row{d(r.t), d(r.mean), d(r.variance)};
        for (int k = 1; k <= o.order; ++k) row.push_back(d(r.raw[k]));
        for (int k = 2; k <= o.order; ++k) row.push_back(d(r.central[k]));
        for (int k = 3; k <= o.order; ++k) row.push_back(d(r.normalized[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table cmd_cumulants(const Options& o) {
    if (o.kmax < 2 || o.kmax > 10) throw validation_error("--kmax must lie in [2, 10]");
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, false);
    const RoutePreference pref = parse_route(o.route);
    const auto cvs = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
        return cumulants(*f, grid[i], o.kmax, pref, xreal(1e-20), xreal(o.tail_tol));
    });
    Table t{"cumulants"};
    t.meta["model"] = f->label();
    t.meta["kmax"] = o.kmax;
    t.columns = {"t", "s", "route"};
    for (int k = 1; k <= o.kmax; ++k) t.columns.push_back("kappa_" + std::to_string(k));
    for (int k = 3; k <= o.kmax; ++k) t.columns.push_back("q_" + std::to_string(k));
    for (const auto& cv : cvs) {
        std::vector<Cell> row{d(cv.t), d(cv.s), std::string(to_string(cv.route))};
        for (int k = 1; k <= o.kmax; ++k) row.push_back(d(cv.kappa[k]));
        const QuotientVector qv = quotients(cv);
        for (int k = 3; k <= o.kmax; ++k) row.push_back(d(qv.q[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table cmd_criteria(const Options& o) {
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, true);
    DiagnoseOptions dopt;
    dopt.route = parse_route(o.route);
    dopt.tail_tol = xreal(o.tail_tol);
    dopt.jobs = o.jobs;
    const QuotientDiagnostics dg = diagnose(*f, grid, o.kmax, dopt);
    Table t{"criteria"};
    t.meta["model"] = f->label();
    t.meta["kmax"] = o.kmax;
    t.meta["verdict"] = to_string(dg.verdict);
    t.meta["thresholds"] = {{"vanishing_cut", dg.thresholds.vanishing_cut},
                            {"oscillation_band", dg.thresholds.oscillation_band},
                            {"divergence_factor", dg.thresholds.divergence_factor}};
    json trends = json::object(), bounded = json::object();
    for (int k = 3; k <= dg.K; ++k) trends[std::to_string(k)] = to_string(dg.trend(k));
    for (const auto& b : bounded_moments_report(dg)) bounded[std::to_string(b.k)] = b.bounded;
    t.meta["trends"] = trends;
    t.meta["bounded_moments"] = bounded;
    t.columns = {"k", "t", "route", "q", "trend", "verdict"};
    for (int k = 3; k <= dg.K; ++k)
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.rows.push_back({static_cast<std::int64_t>(k), d(grid[i]), std::string(to_string(dg.routes[i])),
                              dg.values[k][i], std::string(to_string(dg.trend(k))),
                              std::string(to_string(dg.verdict))});
    return t;
}

inline Table cmd_asymptotics(const Options& o) {
    auto f = build(o.model);
    std::vector<int> ms = o.m.empty() ? std::vector<int>{0, 1, 2, 3, 4} : o.m;
    std::vector<double> ss = o.s.empty() ? std::vector<double>{0.1, 0.05, 0.02, 0.01} : o.s;
    const auto reps = parallel_map(ms.size(), o.jobs, [&](std::size_t i) {
        return asymptotic_constant_check(*f, ms[i], ss);
    });
    Table t{"asymptotics"};
    t.meta["model"] = f->label();
    t.columns = {"m", "s", "alpha", "constant", "derivative", "ratio", "tolerance", "monotone_toward_one",
                 "within_tolerance"};
    for (const auto& r : reps) {
        for (const auto& row : r.rows)
            t.rows.push_back({static_cast<std::int64_t>(r.m), row.s, r.alpha, r.constant, d(row.derivative),
                              row.ratio, r.tolerance, r.monotone_toward_one, r.within_tolerance});
        if (!r.monotone_toward_one || !r.within_tolerance) {
            t.failed = true;
            t.failure_message = "ratio for m = " + std::to_string(r.m) + " misses the convergence check";
        }
    }
    return t;
}

inline Table cmd_ks(const Options& o) {
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, false);
    const auto rows = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
        const DistributionSlice s = distribution(*f, grid[i], xreal(o.tail_tol));
        return std::vector<Cell>{d(s.t), ks_distance_to_normal(s), d(s.mean_hint), d(s.sigma_hint),
                                 static_cast<std::int64_t>(s.probs.size())};
    });
    Table t{"ks"};
    t.meta["model"] = f->label();
    t.columns = {"t", "ks_distance", "mean", "sigma", "terms"};
    t.rows = rows;
    return t;
}

inline Table cmd_zerofree(const Options& o) {
    auto f = build(o.model);
    const auto grid = resolve_grid(o, *f, false);
    const auto reps = parallel_map(grid.size(), o.jobs, [&](std::size_t i) {
        return zero_free_check(*f, grid[i], o.samples);
    });
    Table t{"zerofree"};
    t.meta["model"] = f->label();
    t.columns = {"t", "sigma", "theta_max", "min_modulus", "argmin_theta", "samples", "zero_free"};
    for (const auto& r : reps) {
        const bool ok = r.min_modulus > 0;
        t.rows.push_back({d(r.t), d(r.sigma), d(r.theta_max), d(r.min_modulus), d(r.argmin_theta),
                          static_cast<std::int64_t>(r.samples), ok});
        if (!ok) {
            t.failed = true;
            t.failure_message = "vanishing modulus inside the zero-free sector";
        }
    }
    return t;
}

inline Table cmd_euler(const Options& o) {
    std::vector<int> ms = o.m.empty() ? std::vector<int>{1} : o.m;
    std::vector<double> ss = o.s.empty() ? std::vector<double>{1, 0.5, 0.1, 0.01} : o.s;
    Table t{"euler"};
    t.meta["p"] = o.p;
    t.meta["k"] = o.k;
    t.columns = {"m", "p", "k", "s", "riemann_sum", "integral", "L", "R1", "R2", "holds_r1", "holds_r2"};
    for (int m : ms) {
        const EulerReport r = euler_bound_harness(m, o.p, o.k, ss);
        t.meta["tolerance"] = r.tolerance;
        for (const auto& row : r.rows)
            t.rows.push_back({static_cast<std::int64_t>(m), static_cast<std::int64_t>(o.p),
                              static_cast<std::int64_t>(o.k), row.s, row.riemann_sum, row.integral, row.L, row.R1,
                              row.R2, row.holds_r1, row.holds_r2});
        if (!r.all_hold()) {
            t.failed = true;
            t.failure_message = "Euler summation inequality violated";
        }
    }
    return t;
}

// ---------------------------------------------------------------------------

inline int exit_code_for(const khinchin::error& e) {
    const std::string& c = e.code();
    if (c == "budget_exceeded" || c == "tail_too_heavy" || c == "quadrature_error" || c == "consistency_error")
        return exit_failure;
    return exit_validation;
}

inline void report_error(std::ostream& err, const std::string& code, const std::string& message) {
    json j = {{"schema_version", schema_version}, {"error_code", code}, {"message", message}};
    err << j.dump() << "\n";
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Khinchin families: moments, cumulants and Gaussianity diagnostics", "khinchin"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--format", o.format, "csv or json")->capture_default_str();
        sc->add_option("--out", o.out, "output path (default stdout)");
        sc->add_option("--jobs", o.jobs, "worker threads over grid points")->capture_default_str();
    };
    auto add_model = [&](CLI::App* sc) { sc->add_option("--model", o.model, "model spec")->required(); };
    auto add_grid = [&](CLI::App* sc) {
        sc->add_option("--t", o.t_values, "evaluation points (comma list, repeatable)");
        sc->add_option("--t-grid", o.t_grid, "'default' or a comma list");
    };
    auto add_tol = [&](CLI::App* sc) {
        sc->add_option("--tail-tol", o.tail_tol, "slice tail tolerance")->capture_default_str();
        sc->add_option("--rel-tol", o.rel_tol, "series relative tolerance")->capture_default_str();
    };

    struct Sub {
        CLI::App* app;
        Table (*fn)(const Options&);
    };
    std::vector<Sub> subs;
    auto sub = [&](const char* name, const char* help, Table (*fn)(const Options&)) {
        CLI::App* sc = app.add_subcommand(name, help);
        add_common(sc);
        subs.push_back({sc, fn});
        return sc;
    };

    auto* fam = sub("family", "distribution slice table (n, p_n)", cmd_family);
    add_model(fam);
    add_grid(fam);
    add_tol(fam);

    auto* mom = sub("moments", "raw, central and normalized moments per t", cmd_moments);
    add_model(mom);
    add_grid(mom);
    add_tol(mom);
    mom->add_option("--order", o.order, "moment order K")->capture_default_str();

    auto* cum = sub("cumulants", "fulcrum derivatives with route tag", cmd_cumulants);
    add_model(cum);
    add_grid(cum);
    add_tol(cum);
    cum->add_option("--kmax", o.kmax, "highest cumulant order")->capture_default_str();
    cum->add_option("--route", o.route, "auto, analytic or moments")->capture_default_str();

    auto* cri = sub("criteria", "quotient diagnostics and verdict", cmd_criteria);
    add_model(cri);
    add_grid(cri);
    add_tol(cri);
    cri->add_option("--kmax", o.kmax, "highest quotient order")->capture_default_str();
    cri->add_option("--route", o.route, "auto, analytic or moments")->capture_default_str();

    auto* asy = sub("asymptotics", "ratio of the fulcrum to its asymptotic constant", cmd_asymptotics);
    add_model(asy);
    asy->add_option("--m", o.m, "derivative orders (comma list)")->delimiter(',');
    asy->add_option("--s", o.s, "s values, decreasing (comma list)")->delimiter(',');

    auto* ks = sub("ks", "Kolmogorov distance to the standard normal", cmd_ks);
    add_model(ks);
    add_grid(ks);
    add_tol(ks);

    auto* zf = sub("zerofree", "minimum modulus over the zero-free sector", cmd_zerofree);
    add_model(zf);
    add_grid(zf);
    zf->add_option("--samples", o.samples, "angles sampled")->capture_default_str();

    auto* eu = sub("euler", "Euler summation bound harness", cmd_euler);
    eu->add_option("--m", o.m, "exponent m (comma list)")->delimiter(',');
    eu->add_option("--p", o.p, "power p")->capture_default_str();
    eu->add_option("--k", o.k, "index k")->capture_default_str();
    eu->add_option("--s", o.s, "s values (comma list)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        report_error(err, "validation_error", e.what());
        return exit_validation;
    }

    try {
        check_common(o);
        const Sub* chosen = nullptr;
        for (const auto& s : subs)
            if (s.app->parsed()) chosen = &s;
        if (!chosen) throw validation_error("no subcommand given");
        const Table table = chosen->fn(o);
        const std::string text = o.format == "csv" ? to_csv(table) : to_json(table).dump(2) + "\n";
        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw validation_error("cannot open output file '" + o.out + "'");
            f << text;
        }
        if (table.failed) {
            report_error(err, "tolerance_failure", table.failure_message);
            return exit_failure;
        }
        return exit_ok;
    } catch (const khinchin::error& e) {
        report_error(err, e.code(), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        report_error(err, "internal_error", e.what());
        return exit_failure;
    }
}

}  // namespace khinchin::cli

#endif  // KHINCHIN_TOOLS_CLI_HPP
