// Command-line front end: every experiment as a reproducible, seed-stamped
// job emitting CSV/JSON.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "phgeo/builtins.hpp"
#include "phgeo/heisenberg_jacobi.hpp"
#include "phgeo/index_form.hpp"
#include "phgeo/shooting.hpp"
#include "phgeo/suite.hpp"
#include "phgeo/variation.hpp"

namespace {

using namespace phgeo;
using nlohmann::json;

Vec parse_vec(const std::string& csv, int expect_dim) {
    std::vector<double> vals;
    std::string tok;
    std::stringstream ss(csv);
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (expect_dim > 0 && static_cast<int>(vals.size()) != expect_dim)
        throw Error("expected " + std::to_string(expect_dim) + " components, got " +
                    std::to_string(vals.size()));
    Vec v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void emit(const json& j, const std::string& out_dir, const std::string& name, bool as_json) {
    std::string text = j.dump(2) + "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir + "/" + name + ".json", text);
    }
    if (as_json || out_dir.empty()) std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-Hermitian geometry engine"};
    app.require_subcommand(1);

    std::string manifold = "heisenberg1";
    uint64_t seed = 1;
    double tol_scale = 1.0;
    int jobs = 1;
    std::string out_dir;
    bool as_json = false;
    app.add_option("--manifold", manifold, "builtin name or file:<chart.json>")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--tol-scale", tol_scale, "scale factor on all tolerances")->capture_default_str();
    app.add_option("--jobs", jobs, "parallel jobs for sweeps")->capture_default_str();
    app.add_option("--out-dir", out_dir, "directory for artifacts");
    app.add_flag("--json", as_json, "print JSON to stdout");

    auto* list = app.add_subcommand("list-manifolds", "registered charts");

    auto* validate = app.add_subcommand("validate", "structure and connection axioms");
    int samples = 1000;
    validate->add_option("--samples", samples, "sample count")->capture_default_str();

    auto* geodesic = app.add_subcommand("geodesic", "integrate a geodesic");
    std::string start_s, dir_s;
    double length = 1.0, step = 1e-3;
    std::string out_fmt = "csv";
    geodesic->add_option("--start", start_s, "start point (comma separated)")->required();
    geodesic->add_option("--dir", dir_s, "initial velocity")->required();
    geodesic->add_option("--length", length)->capture_default_str();
    geodesic->add_option("--step", step)->capture_default_str();
    geodesic->add_option("--out", out_fmt, "csv|json")->capture_default_str();

    auto* delta = app.add_subcommand("delta", "broken-geodesic distance upper bound");
    std::string from_s, to_s;
    int segments = 1, restarts = 4;
    delta->add_option("--from", from_s)->required();
    delta->add_option("--to", to_s)->required();
    delta->add_option("--segments", segments)->capture_default_str();
    delta->add_option("--restarts", restarts)->capture_default_str();

    auto* jacobi_cmd = app.add_subcommand("jacobi", "integrate a Jacobi field");
    std::string v0_s, v0p_s, mode_s = "auto";
    jacobi_cmd->add_option("--start", start_s)->required();
    jacobi_cmd->add_option("--dir", dir_s)->required();
    jacobi_cmd->add_option("--V0", v0_s)->required();
    jacobi_cmd->add_option("--V0p", v0p_s)->required();
    jacobi_cmd->add_option("--length", length)->capture_default_str();
    jacobi_cmd->add_option("--mode", mode_s, "auto|general|sasakian|split")->capture_default_str();
    jacobi_cmd->add_option("--out", out_fmt, "csv|json")->capture_default_str();

    auto* conjugate = app.add_subcommand("conjugate", "locate conjugate points");
    double max_length = 10.0;
    conjugate->add_option("--start", start_s)->required();
    conjugate->add_option("--dir", dir_s)->required();
    conjugate->add_option("--max-length", max_length)->capture_default_str();

    auto* expansion = app.add_subcommand("expansion", "radial expansion coefficients");
    std::string w_s;
    expansion->add_option("--start", start_s)->required();
    expansion->add_option("--dir", dir_s)->required();
    expansion->add_option("--w", w_s)->required();

    auto* index = app.add_subcommand("index", "index-form comparison");
    std::string geodesic_spec, field_spec = "random:100";
    index->add_option("--geodesic", geodesic_spec, "start;dir;length")->required();
    index->add_option("--field", field_spec, "random:N")->capture_default_str();

    auto* bonnet = app.add_subcommand("bonnet-myers", "conjugate bound sweep by slant");
    std::string slants_s = "0,0.25,0.5,0.75,0.9";
    bonnet->add_option("--slants", slants_s)->capture_default_str();

    auto* cartan = app.add_subcommand("cartan-hadamard", "conjugate-free sweep");
    int dirs = 64;
    cartan->add_option("--dirs", dirs)->capture_default_str();
    cartan->add_option("--max-length", max_length)->capture_default_str();

    auto* paper = app.add_subcommand("paper-suite", "full verification battery");
    std::string config_path, filter;
    paper->add_option("--config", config_path, "JSON config");
    paper->add_option("--filter", filter, "run experiments matching substring");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& n : list_manifolds()) std::cout << n << "\n";
            return 0;
        }

        ChartPtr chart = make_chart(manifold);
        TWConnection conn(chart);
        const int n = chart->dim();

        if (validate->parsed()) {
            StructureValidationReport vr = validate_structure(*chart, samples, tol_scale);
            json j = {{"chart", chart->name()},
                      {"samples", vr.samples},
                      {"pass", vr.pass()},
                      {"levi_degenerate", vr.levi_degenerate},
                      {"tool_version", kToolVersion},
                      {"seed", seed}};
            for (const auto& r : vr.residuals)
                j["residuals"].push_back(
                    {{"name", r.name}, {"residual", r.residual}, {"tolerance", r.tolerance}});
            // Connection axioms at a few interior points.
            ConnectionAxiomResiduals worst;
            for (const Vec& p : halton_points(chart->domain(), 10, 0.2)) {
                ConnectionAxiomResiduals r = conn.axiom_residuals(p);
                worst.metric = std::max(worst.metric, r.metric);
                worst.complex_structure = std::max(worst.complex_structure, r.complex_structure);
                worst.reeb = std::max(worst.reeb, r.reeb);
                worst.horizontality = std::max(worst.horizontality, r.horizontality);
                worst.torsion_formula = std::max(worst.torsion_formula, r.torsion_formula);
            }
            j["connection_axioms"] = {{"nabla_g", worst.metric},
                                      {"nabla_J", worst.complex_structure},
                                      {"nabla_xi", worst.reeb},
                                      {"horizontality", worst.horizontality},
                                      {"torsion", worst.torsion_formula}};
            emit(j, out_dir, "validate", true);
            return vr.pass() ? 0 : 1;
        }

        if (geodesic->parsed()) {
            Vec p = parse_vec(start_s, n), v = parse_vec(dir_s, n);
            IntegrateOptions opts;
            opts.step = step;
            GeodesicPath path = integrate_geodesic(conn, p, v, length, opts);
            if (out_fmt == "json" || as_json) {
                json j = {{"chart", chart->name()}, {"slant", path.slant()},
                          {"speed", path.speed()}, {"samples", path.samples().size()},
                          {"seed", seed}, {"tool_version", kToolVersion}};
                emit(j, out_dir, "geodesic", true);
            }
            std::vector<std::vector<std::string>> rows;
            for (const auto& s : path.samples()) {
                StructurePacket st = structure_at(*chart, s.x);
                std::vector<std::string> row{fmt(s.t)};
                for (int i = 0; i < n; ++i) row.push_back(fmt(s.x[i]));
                for (int i = 0; i < n; ++i) row.push_back(fmt(s.v[i]));
                row.push_back(fmt(st.inner(s.v, st.xi)));
                row.push_back(fmt(st.norm(s.v)));
                rows.push_back(std::move(row));
            }
            std::vector<std::string> header{"t"};
            for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
            for (int i = 0; i < n; ++i) header.push_back("v" + std::to_string(i));
            header.push_back("slant");
            header.push_back("speed");
            std::string path_out = out_dir.empty() ? "geodesic.csv" : out_dir + "/geodesic.csv";
            if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
            write_csv(path_out, header, rows);
            std::cerr << "wrote " << path_out << "\n";
            return 0;
        }

        if (delta->parsed()) {
            Vec p = parse_vec(from_s, n), q = parse_vec(to_s, n);
            DeltaOptions opts;
            opts.restarts = restarts;
            opts.seed = static_cast<unsigned>(seed);
            DeltaBound b = delta_upper_bound(conn, p, q, segments, opts);
            double d = riemannian_distance(conn, p, q, opts.shoot);
            json j = {{"chart", chart->name()}, {"segments", segments},
                      {"upper_bound", b.value}, {"riemannian_distance", d},
                      {"joint_mismatch", b.best.max_joint_mismatch},
                      {"seed", seed}, {"tool_version", kToolVersion}};
            emit(j, out_dir, "delta", true);
            return 0;
        }

        if (jacobi_cmd->parsed()) {
            Vec p = parse_vec(start_s, n), v = parse_vec(dir_s, n);
            Vec V0 = parse_vec(v0_s, n), V0p = parse_vec(v0p_s, n);
            GeodesicPath path = integrate_geodesic(conn, p, v, length);
            JacobiMode mode = JacobiMode::sasakian;
            if (mode_s == "general") mode = JacobiMode::general;
            else if (mode_s == "split") mode = JacobiMode::split;
            else if (mode_s == "sasakian") mode = JacobiMode::sasakian;
            else if (mode_s == "auto")
                mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                 : JacobiMode::sasakian;
            else throw Error("unknown mode: " + mode_s);
            JacobiSolution sol = integrate_jacobi(conn, path, V0, V0p, mode);
            std::vector<std::vector<std::string>> rows;
            for (const auto& s : sol.samples()) {
                std::vector<std::string> row{fmt(s.t)};
                for (int i = 0; i < n; ++i) row.push_back(fmt(s.V[i]));
                for (int i = 0; i < n; ++i) row.push_back(fmt(s.U[i]));
                rows.push_back(std::move(row));
            }
            std::vector<std::string> header{"t"};
            for (int i = 0; i < n; ++i) header.push_back("V" + std::to_string(i));
            for (int i = 0; i < n; ++i) header.push_back("DV" + std::to_string(i));
            std::string path_out = out_dir.empty() ? "jacobi.csv" : out_dir + "/jacobi.csv";
            if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
            write_csv(path_out, header, rows);
            std::cerr << "wrote " << path_out << " (error estimate "
                      << fmt(sol.error_estimate()) << ")\n";
            return 0;
        }

        if (conjugate->parsed()) {
            Vec p = parse_vec(start_s, n), v = parse_vec(dir_s, n);
            ConjugateSearchResult cs = conjugate_search(conn, p, v, max_length);
            json j = {{"chart", chart->name()}, {"searched_length", cs.searched_length},
                      {"truncated", cs.truncated}, {"seed", seed},
                      {"tool_version", kToolVersion}};
            for (const auto& cp : cs.points)
                j["conjugate_points"].push_back({{"t", cp.t}, {"multiplicity", cp.multiplicity}});
            for (const auto& [t, sig] : cs.sigma_trace)
                j["sigma_trace"].push_back({{"t", t}, {"sigma_min", sig}});
            emit(j, out_dir, "conjugate", true);
            return 0;
        }

        if (expansion->parsed()) {
            Vec p = parse_vec(start_s, n), v = parse_vec(dir_s, n), w = parse_vec(w_s, n);
            ExpansionReport er = taylor_expansion_check(conn, p, v, w);
            json j = {{"chart", chart->name()},
                      {"c2", er.c2}, {"c3", er.c3}, {"c4", er.c4},
                      {"c2_predicted", er.c2_predicted},
                      {"c3_predicted", er.c3_predicted},
                      {"c4_predicted", er.c4_predicted},
                      {"fit_rms", er.fit_rms},
                      {"seed", seed}, {"tool_version", kToolVersion}};
            emit(j, out_dir, "expansion", true);
            return 0;
        }

        if (index->parsed()) {
            auto semi1 = geodesic_spec.find(';');
            auto semi2 = geodesic_spec.rfind(';');
            if (semi1 == std::string::npos || semi2 == semi1)
                throw Error("--geodesic expects start;dir;length");
            Vec p = parse_vec(geodesic_spec.substr(0, semi1), n);
            Vec v = parse_vec(geodesic_spec.substr(semi1 + 1, semi2 - semi1 - 1), n);
            double l = std::stod(geodesic_spec.substr(semi2 + 1));
            int trials = 100;
            if (field_spec.rfind("random:", 0) == 0) trials = std::stoi(field_spec.substr(7));
            GeodesicPath path = integrate_geodesic(conn, p, v, l);
            StructurePacket sl = structure_at(*chart, path.position(l));
            Vec gpl = path.velocity(l);
            Vec yend = l * (gpl - sl.inner(gpl, sl.xi) * sl.xi);
            IndexComparisonOptions iopts;
            iopts.trials = trials;
            iopts.seed = static_cast<unsigned>(seed);
            IndexComparisonReport r = index_comparison(conn, path, yend, iopts);
            json j = {{"chart", chart->name()}, {"I_Y", r.I_Y}, {"min_gap", r.min_gap},
                      {"violations", r.violations}, {"identity_residual", r.identity_residual},
                      {"reciprocity_residual", r.reciprocity_residual},
                      {"trials", r.trials}, {"seed", seed}, {"tool_version", kToolVersion}};
            emit(j, out_dir, "index", true);
            return r.violations == 0 ? 0 : 1;
        }

        if (bonnet->parsed()) {
            std::vector<double> slants;
            std::stringstream ss(slants_s);
            std::string tok;
            while (std::getline(ss, tok, ',')) slants.push_back(std::stod(tok));
            BonnetMyersOptions opts;
            opts.seed = static_cast<unsigned>(seed);
            BonnetMyersReport bm = bonnet_myers_experiment(conn, slants, opts);
            json j = {{"chart", chart->name()}, {"k0", bm.k0}, {"ric0", bm.ric0},
                      {"monotone", bm.monotone}, {"pass", bm.pass},
                      {"seed", seed}, {"tool_version", kToolVersion}};
            for (const auto& row : bm.rows)
                j["rows"].push_back({{"slant", row.slant}, {"t_star", row.t_star},
                                     {"bound_sectional", row.bound_sectional},
                                     {"bound_ricci", row.bound_ricci},
                                     {"within_bound", row.within_bound},
                                     {"status", row.status}});
            emit(j, out_dir, "bonnet-myers", true);
            return bm.pass ? 0 : 1;
        }

        if (cartan->parsed()) {
            CartanHadamardOptions opts;
            opts.seed = static_cast<unsigned>(seed);
            CartanHadamardReport chr = cartan_hadamard_sweep(conn, dirs, max_length, opts);
            json j = {{"chart", chart->name()}, {"directions", chr.directions},
                      {"conjugate_points_found", chr.conjugate_points_found},
                      {"min_sigma", chr.min_sigma_beyond_eps},
                      {"truncated_paths", chr.truncated_paths}, {"pass", chr.pass},
                      {"seed", seed}, {"tool_version", kToolVersion}};
            emit(j, out_dir, "cartan-hadamard", true);
            return chr.pass ? 0 : 1;
        }

        if (paper->parsed()) {
            SuiteConfig cfg;
            if (!config_path.empty()) cfg = SuiteConfig::from_json_file(config_path);
            cfg.seed = seed;
            cfg.tol_scale = tol_scale;
            cfg.jobs = jobs;
            if (!filter.empty()) cfg.filter = filter;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            auto reports = run_paper_suite(cfg);
            for (const auto& r : reports)
                std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << " (max residual "
                          << fmt(r.max_residual()) << ", " << fmt(r.wall_ms) << " ms)\n";
            if (as_json) std::cout << serialize_reports(reports, false) << "\n";
            return suite_exit_code(reports);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
