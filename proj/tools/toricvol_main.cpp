#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "toricvol/condition.hpp"
#include "toricvol/errors.hpp"
#include "toricvol/json_io.hpp"
#include "toricvol/quadrature.hpp"
#include "toricvol/real_roots.hpp"
#include "toricvol/solver.hpp"
#include "toricvol/supports.hpp"
#include "toricvol/toric.hpp"
#include "toricvol/version.hpp"

namespace {

using toricvol::ordered_json;

struct RunConfig {
    std::string command;
    std::string system_path;
    std::string region_path;
    std::string pbox;
    std::string point;
    std::string qpoint;
    std::string xi;
    std::string coeffs_path;
    std::string eps_csv;
    std::string out_path;
    std::string format = "json";
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::uint64_t index = 0;
    double tol = 1e-6;
    double t = 1.0;
    int workers = 1;
    int support_index = 0;
    bool timing = false;
};

ordered_json vec_json(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ordered_json rowvec_json(const Eigen::RowVectorXd& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ordered_json mat_json(const Eigen::MatrixXd& m) {
    ordered_json a = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        a.push_back(std::move(row));
    }
    return a;
}

ordered_json cvec_json(const Eigen::VectorXcd& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i)
        a.push_back(ordered_json::array({v[i].real(), v[i].imag()}));
    return a;
}

std::vector<double> parse_eps(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw toricvol::ValidationError("eps: cannot parse \"" + part + "\"");
        }
        if (out.back() <= 0.0)
            throw toricvol::ValidationError("eps values must be positive");
    }
    if (out.empty()) throw toricvol::ValidationError("eps: empty list");
    return out;
}

toricvol::Region resolve_region(const RunConfig& cfg, int dims) {
    if (!cfg.region_path.empty()) return toricvol::parse_region_file(cfg.region_path);
    if (!cfg.pbox.empty())
        return toricvol::Region::p_box(toricvol::parse_box_arg(cfg.pbox));
    return toricvol::Region::full_space(dims);
}

toricvol::PolySample load_coeffs(const toricvol::SystemSpec& spec,
                                 const std::string& path) {
    std::ifstream in(path);
    if (!in) throw toricvol::ValidationError("cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw toricvol::ValidationError(path + std::string(": ") + e.what());
    }
    if (!j.is_array() || static_cast<int>(j.size()) != spec.size())
        throw toricvol::ValidationError(
            "coeffs: expected one coefficient array per polynomial");
    toricvol::PolySample f;
    for (int i = 0; i < spec.size(); ++i) {
        const auto& rows = j[static_cast<std::size_t>(i)];
        if (!rows.is_array() ||
            static_cast<int>(rows.size()) != spec.support(i).rows())
            throw toricvol::ValidationError(
                "coeffs: entry count must match the support rows");
        Eigen::VectorXcd mono(spec.support(i).rows());
        for (int r = 0; r < mono.size(); ++r) {
            const auto& e = rows[static_cast<std::size_t>(r)];
            if (e.is_number())
                mono[r] = e.get<double>();
            else if (e.is_array() && e.size() == 2)
                mono[r] = {e[0].get<double>(), e[1].get<double>()};
            else
                throw toricvol::ValidationError(
                    "coeffs: entries must be numbers or [re, im] pairs");
        }
        f.coeffs.push_back(toricvol::ortho_coeffs(spec.support(i), mono));
    }
    return f;
}

ordered_json roots_json(const toricvol::RootSet& rs) {
    ordered_json out;
    out["ok"] = rs.ok;
    if (!rs.note.empty()) out["note"] = rs.note;
    out["count"] = rs.roots.size();
    ordered_json arr = ordered_json::array();
    for (const auto& r : rs.roots) {
        ordered_json root;
        root["z"] = cvec_json(r.z);
        root["p"] = vec_json(r.at.p);
        root["q"] = vec_json(r.at.q);
        root["residual"] = r.residual;
        arr.push_back(std::move(root));
    }
    out["roots"] = std::move(arr);
    return out;
}

ordered_json config_json(const RunConfig& cfg, const toricvol::SystemSpec* spec,
                         const toricvol::Region* region) {
    ordered_json c;
    if (spec) c["system"] = toricvol::system_to_json(*spec);
    if (region) c["region"] = toricvol::region_to_json(*region);
    if (!cfg.point.empty()) c["point"] = cfg.point;
    if (!cfg.qpoint.empty()) c["q"] = cfg.qpoint;
    if (!cfg.xi.empty()) c["xi"] = cfg.xi;
    if (!cfg.coeffs_path.empty()) c["coeffs"] = cfg.coeffs_path;
    if (!region && !cfg.pbox.empty()) c["pbox"] = cfg.pbox;
    if (cfg.samples) c["samples"] = cfg.samples;
    if (cfg.has_seed) c["seed"] = cfg.seed;
    if (!cfg.eps_csv.empty()) c["eps"] = cfg.eps_csv;
    c["tol"] = cfg.tol;
    if (cfg.command == "flow") c["t"] = cfg.t;
    if (cfg.command == "solve" || cfg.command == "flow")
        c["index"] = cfg.index;
    c["workers"] = cfg.workers;
    return c;
}

void flatten_csv(const ordered_json& j, const std::string& prefix,
                 std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            flatten_csv(v, prefix.empty() ? k : prefix + "." + k, os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten_csv(j[i], prefix + "[" + std::to_string(i) + "]", os);
    } else {
        os << prefix << "," << j.dump() << "\n";
    }
}

void emit(const RunConfig& cfg, const ordered_json& report) {
    std::ostringstream body;
    if (cfg.format == "csv") {
        body << "key,value\n";
        flatten_csv(report, "", body);
    } else {
        body << report.dump(2) << "\n";
    }
    if (cfg.out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(cfg.out_path);
        if (!out) throw toricvol::ValidationError("cannot write " + cfg.out_path);
        out << body.str();
    }
}

ordered_json run_eval(const RunConfig& cfg, const toricvol::SystemSpec& spec) {
    if (cfg.point.empty()) throw toricvol::ValidationError("eval needs --point");
    toricvol::ToricPoint at;
    at.p = toricvol::parse_vector_arg(cfg.point);
    at.q = cfg.qpoint.empty() ? Eigen::VectorXd::Zero(spec.dims()).eval()
                              : toricvol::parse_vector_arg(cfg.qpoint);
    if (at.p.size() != spec.dims() || at.q.size() != spec.dims())
        throw toricvol::ValidationError("point dimension mismatch");
    ordered_json result;
    result["p"] = vec_json(at.p);
    result["q"] = vec_json(at.q);
    ordered_json sups = ordered_json::array();
    for (const auto& s : spec.supports()) {
        const toricvol::KahlerEval ev = toricvol::kahler_eval(s, at);
        ordered_json e;
        e["g"] = ev.g;
        e["momentum"] = rowvec_json(ev.grad);
        e["metric"] = mat_json(ev.metric);
        sups.push_back(std::move(e));
    }
    result["supports"] = std::move(sups);
    result["density"] = toricvol::root_density(spec, at.p);
    return result;
}

ordered_json run_solve(const RunConfig& cfg, const toricvol::SystemSpec& spec) {
    toricvol::PolySample f;
    if (!cfg.coeffs_path.empty()) {
        f = load_coeffs(spec, cfg.coeffs_path);
    } else if (cfg.has_seed) {
        f = toricvol::sample_system(spec, cfg.seed, cfg.index);
    } else {
        throw toricvol::ValidationError("solve needs --coeffs or --seed");
    }
    const toricvol::RootSet rs = toricvol::solve_system(spec, f);
    ordered_json result = roots_json(rs);
    if (!cfg.region_path.empty() || !cfg.pbox.empty()) {
        const toricvol::Region region = resolve_region(cfg, spec.dims());
        result["count_in_region"] = toricvol::count_in_region(rs, region);
    }
    return result;
}

ordered_json run_mixed_volume(const RunConfig& cfg,
                               const toricvol::SystemSpec& spec) {
    const toricvol::Region full = toricvol::Region::full_space(spec.dims());
    const toricvol::QuadResult quad =
        toricvol::integrate_density(spec, full, cfg.tol);
    std::vector<toricvol::Polytope> polys;
    for (const auto& s : spec.supports()) polys.push_back(toricvol::polytope_of(s));
    const double oracle = toricvol::bernshtein_count(polys);
    ordered_json result;
    result["quad"] = quad.value;
    result["quad_converged"] = quad.converged;
    result["oracle"] = oracle;
    result["mixed_volume"] = toricvol::mixed_volume(polys);
    result["abs_diff"] = std::abs(quad.value - oracle);
    result["rel_diff"] =
        oracle != 0.0 ? std::abs(quad.value - oracle) / oracle : 0.0;
    return result;
}

ordered_json run_expected_roots(const RunConfig& cfg,
                                const toricvol::SystemSpec& spec,
                                const toricvol::Region& region) {
    const toricvol::QuadResult quad =
        toricvol::integrate_density(spec, region, cfg.tol);
    ordered_json result;
    result["quadrature"] = {{"value", quad.value},
                            {"error", quad.error},
                            {"converged", quad.converged}};
    if (cfg.samples) {
        const toricvol::CountMcResult mc = toricvol::count_roots_mc(
            spec, region, cfg.samples, cfg.seed, cfg.workers);
        result["mc"] = {{"mean", mc.mean},
                        {"stderr", mc.stderr_},
                        {"samples", mc.samples},
                        {"rejected", mc.rejected}};
        const double z = mc.stderr_ > 0.0
                             ? std::abs(mc.mean - quad.value) / mc.stderr_
                             : 0.0;
        result["z_score"] = z;
        result["pass_3_sigma"] = z <= 3.0;
    }
    return result;
}

ordered_json run_condition_tail(const RunConfig& cfg,
                                const toricvol::SystemSpec& spec,
                                const toricvol::Region& region) {
    const std::vector<double> eps = parse_eps(cfg.eps_csv);
    if (!cfg.samples)
        throw toricvol::ValidationError("condition-tail needs --samples");
    const toricvol::TailReport rep = toricvol::nu_tail_mc(
        spec, region, eps, cfg.samples, cfg.seed, cfg.workers);
    ordered_json result;
    result["kappa_hat"] = rep.kappa_hat;
    result["density_ratio"] = rep.density_ratio;
    result["samples"] = rep.samples;
    result["rejected"] = rep.rejected;
    ordered_json pts = ordered_json::array();
    for (const auto& pt : rep.points) {
        ordered_json e;
        e["eps"] = pt.eps;
        e["empirical"] = pt.empirical;
        e["wilson_lo"] = pt.wilson_lo;
        e["wilson_hi"] = pt.wilson_hi;
        e["theorem3_rhs"] = pt.rhs;
        e["tail_count"] = pt.tail_count;
        pts.push_back(std::move(e));
    }
    result["points"] = std::move(pts);
    return result;
}

ordered_json run_real(const RunConfig& cfg, const toricvol::SystemSpec& spec) {
    if (cfg.pbox.empty()) throw toricvol::ValidationError("real needs --pbox");
    const std::vector<toricvol::Interval> box = toricvol::parse_box_arg(cfg.pbox);
    if (!cfg.samples) throw toricvol::ValidationError("real needs --samples");
    const toricvol::RealMcResult mc = toricvol::expected_real_mc(
        spec, box, cfg.samples, cfg.seed, cfg.workers);
    ordered_json result;
    result["mc"] = {{"mean", mc.mean},
                    {"stderr", mc.stderr_},
                    {"samples", mc.samples},
                    {"reject_rate", mc.reject_rate}};
    result["theorem4_bound"] = toricvol::real_count_bound(spec, box, cfg.tol);
    if (spec.dims() == 1 && spec.unmixed())
        result["density_count"] = toricvol::real_density_count(spec, box);
    if (!cfg.eps_csv.empty()) {
        const std::vector<double> eps = parse_eps(cfg.eps_csv);
        const toricvol::RealTailReport rep = toricvol::real_condition_tail(
            spec, box, eps, cfg.samples, cfg.seed, cfg.workers);
        ordered_json tail;
        tail["e_of_u"] = rep.e_of_u;
        ordered_json pts = ordered_json::array();
        for (const auto& pt : rep.points) {
            ordered_json e;
            e["eps"] = pt.eps;
            e["empirical"] = pt.empirical;
            e["wilson_lo"] = pt.wilson_lo;
            e["wilson_hi"] = pt.wilson_hi;
            e["nu_real"] = pt.nu_real;
            e["rhs"] = pt.rhs;
            e["tail_count"] = pt.tail_count;
            pts.push_back(std::move(e));
        }
        tail["points"] = std::move(pts);
        result["tail"] = std::move(tail);
    }
    return result;
}

ordered_json run_flow(const RunConfig& cfg, const toricvol::SystemSpec& spec) {
    if (cfg.point.empty() || cfg.xi.empty())
        throw toricvol::ValidationError("flow needs --point and --xi");
    if (cfg.index >= static_cast<std::uint64_t>(spec.size()))
        throw toricvol::ValidationError("flow: --index out of range");
    const toricvol::SupportSpec& sup = spec.support(static_cast<int>(cfg.index));
    toricvol::ToricPoint start;
    start.p = toricvol::parse_vector_arg(cfg.point);
    start.q = cfg.qpoint.empty() ? Eigen::VectorXd::Zero(spec.dims()).eval()
                                 : toricvol::parse_vector_arg(cfg.qpoint);
    const Eigen::VectorXd xi = toricvol::parse_vector_arg(cfg.xi);
    if (start.p.size() != spec.dims() || xi.size() != spec.dims())
        throw toricvol::ValidationError("flow: dimension mismatch");
    const toricvol::FlowResult fr =
        toricvol::hamiltonian_flow(sup, start, xi, cfg.t);
    ordered_json result;
    result["start"] = {{"p", vec_json(fr.start.p)}, {"q", vec_json(fr.start.q)}};
    result["end"] = {{"p", vec_json(fr.end.p)}, {"q", vec_json(fr.end.q)}};
    result["q_end_raw"] = vec_json(fr.q_end_raw);
    result["h_start"] = fr.h_start;
    result["h_end"] = fr.h_end;
    result["h_drift"] = fr.h_end - fr.h_start;
    return result;
}

int run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ordered_json result;
    const toricvol::SystemSpec spec = toricvol::parse_system_file(cfg.system_path);
    toricvol::Region region_echo = toricvol::Region::full_space(spec.dims());
    bool echo_region = false;

    if (cfg.command == "eval") {
        result = run_eval(cfg, spec);
    } else if (cfg.command == "solve") {
        result = run_solve(cfg, spec);
    } else if (cfg.command == "mixed-volume") {
        result = run_mixed_volume(cfg, spec);
    } else if (cfg.command == "expected-roots") {
        region_echo = resolve_region(cfg, spec.dims());
        echo_region = true;
        result = run_expected_roots(cfg, spec, region_echo);
    } else if (cfg.command == "condition-tail") {
        region_echo = resolve_region(cfg, spec.dims());
        echo_region = true;
        result = run_condition_tail(cfg, spec, region_echo);
    } else if (cfg.command == "real") {
        result = run_real(cfg, spec);
    } else if (cfg.command == "flow") {
        result = run_flow(cfg, spec);
    }

    ordered_json report;
    report["command"] = cfg.command;
    report["version"] = toricvol::version();
    report["config"] = config_json(cfg, &spec, echo_region ? &region_echo : nullptr);
    report["result"] = std::move(result);
    if (cfg.timing) {
        const auto t1 = std::chrono::steady_clock::now();
        report["wall_ms"] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    emit(cfg, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toric geometry of sparse random polynomial systems"};
    app.set_version_flag("--version", std::string(toricvol::version()));
    app.require_subcommand(1);

    RunConfig cfg;
    const auto add_common = [&](CLI::App* sub, bool needs_system) {
        if (needs_system)
            sub->add_option("--system", cfg.system_path, "system spec JSON file")
                ->required();
        sub->add_option("--out", cfg.out_path, "write the report to this file");
        sub->add_option("--format", cfg.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--tol", cfg.tol, "quadrature relative tolerance");
        sub->add_flag("--timing", cfg.timing, "embed wall-clock in the report");
    };
    const auto add_region = [&](CLI::App* sub) {
        sub->add_option("--region", cfg.region_path, "region JSON file");
        sub->add_option("--pbox", cfg.pbox, "p box, e.g. \"-1,1;-1,1\" (q full)");
    };
    const auto add_stochastic = [&](CLI::App* sub, bool required) {
        auto* seed = sub->add_option("--seed", cfg.seed, "master RNG seed");
        if (required) seed->required();
        seed->each([&](const std::string&) { cfg.has_seed = true; });
        sub->add_option("--samples", cfg.samples, "Monte Carlo sample count");
        sub->add_option("--workers", cfg.workers, "worker thread count")
            ->check(CLI::PositiveNumber);
    };

    auto* eval = app.add_subcommand("eval", "potential, momentum, metric, density at a point");
    add_common(eval, true);
    eval->add_option("--point", cfg.point, "p coordinates, comma separated")->required();
    eval->add_option("--q", cfg.qpoint, "q coordinates, default 0");

    auto* solve = app.add_subcommand("solve", "roots of one sampled or given system");
    add_common(solve, true);
    add_region(solve);
    add_stochastic(solve, false);
    solve->add_option("--coeffs", cfg.coeffs_path,
                      "monomial coefficients JSON (one array per polynomial)");
    solve->add_option("--index", cfg.index, "trial index when sampling");

    auto* mv = app.add_subcommand("mixed-volume", "expected root count: quadrature vs oracle");
    add_common(mv, true);

    auto* er = app.add_subcommand("expected-roots", "region root count: quadrature vs Monte Carlo");
    add_common(er, true);
    add_region(er);
    add_stochastic(er, true);

    auto* ct = app.add_subcommand("condition-tail", "tail of the condition over a region vs the comparison bound");
    add_common(ct, true);
    add_region(ct);
    add_stochastic(ct, true);
    ct->add_option("--eps", cfg.eps_csv, "epsilon list, comma separated")->required();

    auto* real = app.add_subcommand("real", "real positive roots in a log box");
    add_common(real, true);
    real->add_option("--pbox", cfg.pbox, "p box, e.g. \"-1,1\"")->required();
    add_stochastic(real, true);
    real->add_option("--eps", cfg.eps_csv, "epsilon list for the real condition tail");

    auto* flow = app.add_subcommand("flow", "torus-action Hamiltonian flow endpoint");
    add_common(flow, true);
    flow->add_option("--point", cfg.point, "start p coordinates")->required();
    flow->add_option("--q", cfg.qpoint, "start q coordinates, default 0");
    flow->add_option("--xi", cfg.xi, "flow direction")->required();
    flow->add_option("--t", cfg.t, "flow time");
    flow->add_option("--index", cfg.index, "which support drives the flow");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    try {
        return run(cfg);
    } catch (const toricvol::DimensionLimitError& e) {
        std::cerr << "dimension limit: " << e.what() << "\n";
        return 3;
    } catch (const toricvol::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const toricvol::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
