#include "phgeo/suite.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "phgeo/builtins.hpp"
#include "phgeo/heisenberg_jacobi.hpp"
#include "phgeo/index_form.hpp"
#include "phgeo/shooting.hpp"
#include "phgeo/variation.hpp"

namespace phgeo {

namespace {

using Clock = std::chrono::steady_clock;

struct Ctx {
    const SuiteConfig& cfg;
    std::mt19937_64 rng;
    explicit Ctx(const SuiteConfig& c, const std::string& name)
        : cfg(c), rng(c.seed * 1000003ull + std::hash<std::string>{}(name)) {}

    double tol(double base) const { return base * cfg.tol_scale; }
    Vec unit_vector(const StructurePacket& s) {
        std::normal_distribution<double> g(0.0, 1.0);
        Vec v(s.theta.size());
        for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
        return v / s.norm(v);
    }
    Vec gauss_vector(int n) {
        std::normal_distribution<double> g(0.0, 1.0);
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = g(rng);
        return v;
    }
    double uniform(double a, double b) {
        std::uniform_real_distribution<double> u(a, b);
        return u(rng);
    }
};

ExperimentReport base_report(const std::string& name, const Chart& chart, const Ctx& ctx) {
    ExperimentReport rep;
    rep.name = name;
    rep.chart = chart.name();
    rep.ledger_hash = phgeo::ledger_hash(chart.convention_ledger());
    rep.seed = ctx.cfg.seed;
    return rep;
}

// Base point for sphere experiments whose vertical flow must avoid the
// chart's excluded antipode.
Vec sphere_safe_base() {
    Vec u(3);
    u << 0.0, 0.414, 0.0;
    return u;
}

Vec random_interior_point(Ctx& ctx, const Chart& chart, double shrink) {
    const Box& box = chart.domain();
    Vec p(chart.dim());
    for (int i = 0; i < chart.dim(); ++i) {
        double mid = 0.5 * (box.lo[i] + box.hi[i]);
        double half = 0.5 * shrink * (box.hi[i] - box.lo[i]);
        p[i] = mid + ctx.uniform(-1.0, 1.0) * half;
    }
    return p;
}

// ---- experiments -----------------------------------------------------------

ExperimentReport exp_structure_axioms(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "structure-axioms");
    ExperimentReport rep;
    rep.name = "structure-axioms";
    rep.chart = "heisenberg1,heisenberg2,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"samples", 1000}, {"axiom_points", 40}};

    for (const std::string& name : {"heisenberg1", "heisenberg2", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        StructureValidationReport vr = validate_structure(*chart, 1000, cfg.tol_scale);
        double vmax = 0.0;
        for (const auto& r : vr.residuals) vmax = std::max(vmax, r.residual);
        rep.add(name + ".structure", vr.levi_degenerate ? 1.0 : vmax, ctx.tol(1e-7));

        ConnectionAxiomResiduals worst;
        auto pts = halton_points(chart->domain(), 40, name == "sphere3" ? 0.25 : 0.02);
        unsigned probe = 0;
        for (const Vec& p : pts) {
            ConnectionAxiomResiduals r = conn.axiom_residuals(p, probe++);
            worst.horizontality = std::max(worst.horizontality, r.horizontality);
            worst.metric = std::max(worst.metric, r.metric);
            worst.complex_structure = std::max(worst.complex_structure, r.complex_structure);
            worst.reeb = std::max(worst.reeb, r.reeb);
            worst.torsion_formula = std::max(worst.torsion_formula, r.torsion_formula);
            worst.torsion_purity = std::max(worst.torsion_purity, r.torsion_purity);
            worst.tau_reeb = std::max(worst.tau_reeb, r.tau_reeb);
            worst.tau_purity = std::max(worst.tau_purity, r.tau_purity);
        }
        rep.add(name + ".horizontality", worst.horizontality, ctx.tol(1e-7));
        rep.add(name + ".nabla_g", worst.metric, ctx.tol(1e-7));
        rep.add(name + ".nabla_J", worst.complex_structure, ctx.tol(1e-7));
        rep.add(name + ".nabla_xi", worst.reeb, ctx.tol(1e-7));
        rep.add(name + ".torsion", std::max(worst.torsion_formula, worst.torsion_purity),
                ctx.tol(1e-7));
    }
    return rep;
}

ExperimentReport exp_levi_civita_roundtrip(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "levi-civita-roundtrip");
    ExperimentReport rep;
    rep.name = "levi-civita-roundtrip";
    rep.chart = "heisenberg1,heisenberg2,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"points", 200}};

    for (const std::string& name : {"heisenberg1", "heisenberg2", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            Vec p = random_interior_point(ctx, *chart, name == "sphere3" ? 0.3 : 0.02);
            Tensor3 direct = conn.levi_civita_christoffels(p);
            Tensor3 reasm = conn.reassembled_levi_civita(p);
            const int n = chart->dim();
            for (int a = 0; a < n; ++a)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        worst = std::max(worst, std::abs(direct(a, i, j) - reasm(a, i, j)));
        }
        rep.add(name + ".roundtrip", worst, ctx.tol(1e-7));
    }
    return rep;
}

ExperimentReport exp_flatness(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "flatness");
    ExperimentReport rep;
    rep.name = "flatness";
    rep.chart = "heisenberg1,heisenberg2";
    rep.seed = cfg.seed;
    rep.parameters = {{"points", 1000}};

    for (const std::string& name : {"heisenberg1", "heisenberg2"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        double worst = 0.0;
        for (const Vec& p : halton_points(chart->domain(), 1000, 0.05))
            worst = std::max(worst, conn.curvature(p).max_abs());
        rep.add(name + ".max_R", worst, ctx.tol(1e-6));
    }
    return rep;
}

ExperimentReport exp_slant_speed(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "slant-speed");
    ExperimentReport rep;
    rep.name = "slant-speed";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"geodesics", 100}, {"length", 10.0}};

    for (const std::string& name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        bool sphere = name == "sphere3";
        double worst_slant = 0.0, worst_speed = 0.0, worst_class = 0.0;
        int done = 0, attempts = 0;
        while (done < 100 && attempts < 400) {
            ++attempts;
            Vec p = sphere ? Vec(sphere_safe_base() + 0.2 * ctx.gauss_vector(3))
                           : random_interior_point(ctx, *chart, 0.01);
            StructurePacket s = structure_at(*chart, p);
            Vec v = ctx.unit_vector(s);
            IntegrateOptions opts;
            opts.step = 5e-3;
            opts.clip_to_domain = true;
            GeodesicPath path = integrate_geodesic(conn, p, v, 10.0, opts);
            if (path.truncated()) continue;
            ++done;
            double slant0 = path.slant(), speed0 = path.speed();
            for (size_t k = 0; k < path.samples().size(); k += 5) {
                const auto& ps = path.samples()[k];
                StructurePacket st = structure_at(*chart, ps.x);
                worst_slant = std::max(worst_slant,
                                       std::abs(st.inner(ps.v, st.xi) - slant0));
                worst_speed = std::max(worst_speed, std::abs(st.norm(ps.v) - speed0));
            }
            // Horizontal / vertical launches stay so.
            if (done % 10 == 0) {
                Vec vv = s.pi_h * v;
                if (s.norm(vv) > 1e-6) {
                    vv /= s.norm(vv);
                    GeodesicPath hp = integrate_geodesic(conn, p, vv, 5.0, opts);
                    if (!hp.truncated())
                        for (size_t k = 0; k < hp.samples().size(); k += 5) {
                            StructurePacket st = structure_at(*chart, hp.samples()[k].x);
                            worst_class = std::max(
                                worst_class, std::abs(st.theta_of(hp.samples()[k].v)));
                        }
                }
            }
        }
        rep.add(name + ".slant_drift", worst_slant, ctx.tol(1e-7));
        rep.add(name + ".speed_drift", worst_speed, ctx.tol(1e-7));
        rep.add(name + ".horizontal_stays", worst_class, ctx.tol(1e-7));
        rep.add(name + ".completed", done >= 100 ? 0.0 : 1.0, 0.5);
    }
    return rep;
}

ExperimentReport exp_jacobi_closed_form(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "jacobi-closed-form");
    ExperimentReport rep;
    rep.name = "jacobi-closed-form";
    rep.chart = "heisenberg1,heisenberg2";
    rep.seed = cfg.seed;
    rep.parameters = {{"cases", 100}, {"t_range", 5.0}};

    for (const std::string& name : {"heisenberg1", "heisenberg2"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        const int n = chart->dim();
        int cases = name == "heisenberg1" ? 70 : 30;
        double worst = 0.0;
        for (int k = 0; k < cases; ++k) {
            Vec p = random_interior_point(ctx, *chart, 0.01);
            StructurePacket s = structure_at(*chart, p);
            // Mix of generic, vertical, and horizontal launches.
            Vec v;
            if (k % 9 == 7) {
                v = s.xi;
            } else if (k % 9 == 8) {
                v = s.pi_h * ctx.gauss_vector(n);
                v /= s.norm(v);
            } else {
                v = ctx.unit_vector(s);
            }
            IntegrateOptions gopts;
            gopts.step = 5e-3;
            GeodesicPath path = integrate_geodesic(conn, p, v, 5.0, gopts);
            HeisenbergJacobiOracle oracle(path);
            Vec V0 = ctx.gauss_vector(n);
            Vec V0p = ctx.gauss_vector(n);
            JacobiOptions jopts;
            jopts.step = 0.05;
            JacobiSolution sol = integrate_jacobi(conn, path, V0, V0p, JacobiMode::sasakian, jopts);
            auto [aA, bA] = oracle.coefficients_from_initial(V0, V0p);
            for (double t = 0.0; t <= 5.0 + 1e-9; t += 0.25) {
                Vec diff = sol.value(t) - oracle.value(aA, bA, t);
                worst = std::max(worst, diff.lpNorm<Eigen::Infinity>());
            }
        }
        rep.add(name + ".oracle_sup_error", worst, ctx.tol(1e-7));
    }
    return rep;
}

ExperimentReport exp_expansion(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "expansion");
    ExperimentReport rep;
    rep.name = "expansion";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"pairs_per_chart", 12}};

    for (const std::string& name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        const int n = chart->dim();
        double worst_c2 = 0.0, worst_c3 = 0.0, worst_c4 = 0.0;
        for (int k = 0; k < 12; ++k) {
            Vec p = name == "sphere3" ? Vec(0.15 * ctx.gauss_vector(3))
                                      : random_interior_point(ctx, *chart, 0.005);
            StructurePacket s = structure_at(*chart, p);
            Vec v, w;
            // Three qualitative regimes: vertical v; horizontal with w = Jv;
            // horizontal with <Jv,w> = 0; and generic slanted fills.
            int regime = k % 4;
            if (regime == 0) {
                v = s.xi;
                w = s.pi_h * ctx.gauss_vector(n);
            } else if (regime == 1) {
                v = s.pi_h * ctx.gauss_vector(n);
                v /= s.norm(v);
                w = s.J * v;
            } else if (regime == 2) {
                v = s.pi_h * ctx.gauss_vector(n);
                v /= s.norm(v);
                w = s.xi;  // horizontal v, vertical w: <Jv,w> = 0
            } else {
                v = ctx.unit_vector(s);
                w = ctx.gauss_vector(n);
            }
            w -= s.inner(w, v) / s.inner(v, v) * v;
            double wn = s.norm(w);
            if (wn < 1e-8) continue;
            w /= wn;
            v /= s.norm(v);
            ExpansionReport er = taylor_expansion_check(conn, p, v, w);
            worst_c2 = std::max(worst_c2, std::abs(er.c2 - 1.0));
            worst_c3 = std::max(worst_c3, std::abs(er.c3 - er.c3_predicted));
            worst_c4 = std::max(worst_c4, std::abs(er.c4 - er.c4_predicted) /
                                              std::max(1.0, std::abs(er.c4_predicted)));
        }
        rep.add(name + ".c2", worst_c2, ctx.tol(1e-6));
        rep.add(name + ".c3", worst_c3, ctx.tol(1e-4));
        rep.add(name + ".c4_rel", worst_c4, ctx.tol(1e-3));
    }
    return rep;
}

ExperimentReport exp_gauss_defect(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "gauss-defect");
    ExperimentReport rep;
    rep.name = "gauss-defect";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"t_grid", "0.1..1.0"}};

    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.1 * i);

    {
        ChartPtr chart = make_chart("heisenberg1");
        TWConnection conn(chart);
        Vec p = Vec::Zero(3);
        StructurePacket s = structure_at(*chart, p);

        // Slanted launch: the pairing must be genuinely nonzero and match
        // the quadrature route.
        Vec x1(3), x2(3);
        x1 << 1, 0, 0;
        x2 << 0, 1, 0;
        Vec v = (x1 + s.xi) / std::sqrt(2.0);
        Vec w = x2;
        auto rows = gauss_lemma_defect(conn, p, v, w, grid);
        double worst = 0.0, at_one = 0.0;
        for (const auto& r : rows) {
            worst = std::max(worst, r.defect);
            if (std::abs(r.t - 1.0) < 1e-9) at_one = std::abs(r.radial_pairing);
        }
        rep.add("heisenberg1.slanted_match", worst, ctx.tol(2e-6));
        rep.add("heisenberg1.slanted_nonzero", at_one > 1e-3 ? 0.0 : 1.0, 0.5);

        // Vertical launch: pairing vanishes.
        auto vrows = gauss_lemma_defect(conn, p, s.xi, x1, grid);
        double vmax = 0.0;
        for (const auto& r : vrows) vmax = std::max(vmax, std::abs(r.radial_pairing));
        rep.add("heisenberg1.vertical_zero", vmax, ctx.tol(1e-6));

        // Horizontal launch on a torsion-free chart: pairing vanishes.
        auto hrows = gauss_lemma_defect(conn, p, x1, x2, grid);
        double hmax = 0.0;
        for (const auto& r : hrows) hmax = std::max(hmax, std::abs(r.radial_pairing));
        rep.add("heisenberg1.horizontal_zero", hmax, ctx.tol(1e-6));
    }
    {
        ChartPtr chart = make_chart("sphere3");
        TWConnection conn(chart);
        Vec p = Vec::Zero(3);
        StructurePacket s = structure_at(*chart, p);
        Vec v = s.pi_h * ctx.gauss_vector(3);
        v /= s.norm(v);
        Vec w = s.J * v;
        auto rows = gauss_lemma_defect(conn, p, v, w, grid);
        double hmax = 0.0;
        for (const auto& r : rows) hmax = std::max(hmax, std::abs(r.radial_pairing));
        rep.add("sphere3.horizontal_zero", hmax, ctx.tol(1e-6));

        auto vrows = gauss_lemma_defect(conn, p, s.xi, v, grid);
        double vmax = 0.0;
        for (const auto& r : vrows) vmax = std::max(vmax, std::abs(r.radial_pairing));
        rep.add("sphere3.vertical_zero", vmax, ctx.tol(1e-6));
    }
    return rep;
}

ExperimentReport exp_decomposition(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "decomposition");
    ExperimentReport rep;
    rep.name = "decomposition";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"fields", 100}};

    double worst_recon = 0.0, worst_integral = 0.0, worst_perp = 0.0;
    for (const std::string& name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        const int n = chart->dim();
        bool sphere = name == "sphere3";
        int fields = 50;
        for (int k = 0; k < fields; ++k) {
            Vec p = sphere ? Vec(0.2 * ctx.gauss_vector(3))
                           : random_interior_point(ctx, *chart, 0.01);
            StructurePacket s = structure_at(*chart, p);
            int kind = k % 5;
            Vec v;
            if (kind == 3) {
                v = s.pi_h * ctx.gauss_vector(n);  // horizontal geodesic case
                v /= s.norm(v);
            } else if (kind == 4) {
                v = s.xi;  // vertical geodesic case
            } else {
                v = ctx.unit_vector(s);
            }
            IntegrateOptions gopts;
            gopts.step = 5e-3;
            double len = sphere ? 2.0 : 4.0;
            GeodesicPath path = integrate_geodesic(conn, p, v, len, gopts);
            Vec V0, V0p;
            if (kind == 2) {
                V0 = s.xi;  // V perpendicular to J gamma' for all t
                V0p = Vec::Zero(n);
            } else {
                V0 = ctx.gauss_vector(n);
                V0p = ctx.gauss_vector(n);
            }
            JacobiOptions jopts;
            jopts.step = sphere ? 0.02 : 0.05;
            JacobiSolution sol = integrate_jacobi(conn, path, V0, V0p, JacobiMode::sasakian, jopts);
            JacobiDecomposition d = decompose(sol);
            worst_recon = std::max(worst_recon, d.reconstruction_residual);
            worst_integral = std::max(worst_integral, d.integral_residual);
            if (kind >= 2) worst_perp = std::max(worst_perp, d.max_tangential);
        }
    }
    rep.add("reconstruction", worst_recon, ctx.tol(1e-7));
    rep.add("tangential_integral", worst_integral, ctx.tol(1e-6));
    rep.add("perpendicular_cases", worst_perp, ctx.tol(1e-6));
    return rep;
}

ExperimentReport exp_conservation(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "conservation");
    ExperimentReport rep;
    rep.name = "conservation";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"solutions", 40}};

    double worst = 0.0;
    for (const std::string& name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        const int n = chart->dim();
        bool sphere = name == "sphere3";
        for (int k = 0; k < 20; ++k) {
            Vec p = sphere ? Vec(0.2 * ctx.gauss_vector(3))
                           : random_interior_point(ctx, *chart, 0.01);
            StructurePacket s = structure_at(*chart, p);
            Vec v = ctx.unit_vector(s);
            IntegrateOptions gopts;
            gopts.step = 5e-3;
            GeodesicPath path = integrate_geodesic(conn, p, v, sphere ? 2.0 : 4.0, gopts);
            JacobiOptions jopts;
            jopts.step = sphere ? 0.02 : 0.05;
            JacobiSolution sol = integrate_jacobi(conn, path, ctx.gauss_vector(n),
                                                  ctx.gauss_vector(n), JacobiMode::sasakian, jopts);
            // q(t) = <U, gamma'> - 2 <xi,gamma'> <J gamma', V>, constant.
            double c = path.slant();
            double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
            for (const auto& js : sol.samples()) {
                StructurePacket st = structure_at(*chart, path.position(js.t));
                Vec gp = path.velocity(js.t);
                double q = st.inner(js.U, gp) - 2.0 * c * st.inner(st.J * gp, js.V);
                qmin = std::min(qmin, q);
                qmax = std::max(qmax, q);
            }
            worst = std::max(worst, qmax - qmin);
        }
    }
    rep.add("conserved_quantity_spread", worst, ctx.tol(1e-6));
    return rep;
}

ExperimentReport exp_cartan_hadamard(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "cartan-hadamard");
    ExperimentReport rep;
    rep.name = "cartan-hadamard";
    rep.chart = "heisenberg1,heisenberg2,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"directions", 64}, {"max_length", 20.0}};

    for (const std::string& name : {"heisenberg1", "heisenberg2"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        CartanHadamardOptions opts;
        opts.seed = static_cast<unsigned>(cfg.seed + 5);
        CartanHadamardReport chr = cartan_hadamard_sweep(conn, 64, 20.0, opts);
        rep.add(name + ".conjugate_count", static_cast<double>(chr.conjugate_points_found), 0.5);
        rep.add(name + ".sigma_margin",
                chr.min_sigma_beyond_eps > 1e-4 ? 0.0 : 1.0, 0.5);
    }
    {
        // Non-vacuity guard: the same detector must fire on the sphere.
        ChartPtr chart = make_chart("sphere3");
        TWConnection conn(chart);
        StructurePacket s = structure_at(*chart, Vec::Zero(3));
        Vec v = s.pi_h * ctx.gauss_vector(3);
        v /= s.norm(v);
        ConjugateSearchResult cs = conjugate_search(conn, Vec::Zero(3), v, 2.2);
        rep.add("sphere3.detector_fires", cs.points.empty() ? 1.0 : 0.0, 0.5);
    }
    return rep;
}

ExperimentReport exp_vertical_nonconjugacy(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "vertical-nonconjugacy");
    ExperimentReport rep;
    rep.name = "vertical-nonconjugacy";
    rep.chart = "sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"length", 20.0}};

    ChartPtr chart = make_chart("sphere3");
    TWConnection conn(chart);
    Vec base = sphere_safe_base();
    StructurePacket s = structure_at(*chart, base);
    ConjugateSearchResult cs = conjugate_search(conn, base, s.xi, 20.0);
    rep.add("conjugate_count", static_cast<double>(cs.points.size()), 0.5);
    rep.add("searched_full_length", cs.truncated ? 1.0 : 0.0, 0.5);
    (void)ctx;
    return rep;
}

ExperimentReport exp_bonnet_myers(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "bonnet-myers");
    ExperimentReport rep;
    rep.name = "bonnet-myers";
    rep.chart = "sphere3";
    rep.seed = cfg.seed;

    ChartPtr chart = make_chart("sphere3");
    TWConnection conn(chart);
    BonnetMyersOptions opts;
    opts.seed = static_cast<unsigned>(cfg.seed + 11);
    BonnetMyersReport bm =
        bonnet_myers_experiment(conn, {0.0, 0.25, 0.5, 0.75, 0.9}, opts);
    rep.parameters = {{"k0", bm.k0}, {"ric0", bm.ric0}};
    for (const auto& row : bm.rows) {
        std::string tag = "slant_" + std::to_string(row.slant).substr(0, 4);
        if (row.status != "ok") continue;
        double excess = row.t_star > 0.0 ? row.t_star - row.bound_sectional : 1.0;
        rep.add(tag + ".bound", std::max(0.0, excess), ctx.tol(1e-3));
        nlohmann::json jr = {{"slant", row.slant},
                             {"t_star", row.t_star},
                             {"bound_sectional", row.bound_sectional},
                             {"bound_ricci", row.bound_ricci}};
        rep.parameters["rows"].push_back(jr);
    }
    rep.add("monotone_in_slant", bm.monotone ? 0.0 : 1.0, 0.5);
    return rep;
}

ExperimentReport exp_index_comparison(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "index-comparison");
    ExperimentReport rep;
    rep.name = "index-comparison";
    rep.chart = "heisenberg1,sphere3";
    rep.seed = cfg.seed;
    rep.parameters = {{"trials", 200}};

    for (const std::string& name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        const int n = chart->dim();
        bool sphere = name == "sphere3";
        Vec p = sphere ? Vec(Vec::Zero(3)) : Vec(Vec::Zero(3));
        StructurePacket s = structure_at(*chart, p);

        // Slanted conjugate-free segment.
        Vec v = 0.5 * s.xi + std::sqrt(0.75) * (s.pi_h * ctx.gauss_vector(n)).normalized();
        {  // normalize in the metric
            v = 0.5 * s.xi;
            Vec h = s.pi_h * ctx.gauss_vector(n);
            h /= s.norm(h);
            v += std::sqrt(0.75) * h;
        }
        double l = sphere ? 1.2 : 2.0;
        IntegrateOptions gopts;
        gopts.step = 2e-3;
        GeodesicPath path = integrate_geodesic(conn, p, v, l, gopts);

        // Endpoint of the radial-horizontal Jacobi field t * gamma'_H.
        StructurePacket sl = structure_at(*chart, path.position(l));
        Vec gpl = path.velocity(l);
        Vec yend = l * (gpl - sl.inner(gpl, sl.xi) * sl.xi);

        IndexComparisonOptions iopts;
        iopts.trials = 100;
        iopts.seed = static_cast<unsigned>(cfg.seed + 17);
        IndexComparisonReport r1 = index_comparison(conn, path, yend, iopts);
        rep.add(name + ".violations", static_cast<double>(r1.violations), 0.5);
        rep.add(name + ".identity_rel", r1.identity_residual, ctx.tol(1e-6));
        rep.add(name + ".reciprocity", r1.reciprocity_residual, ctx.tol(1e-7));

        // Null endpoint: I(X) >= 0 with equality only near X = 0.
        IndexComparisonReport r0 = index_comparison(conn, path, Vec::Zero(n), iopts);
        rep.add(name + ".null_violations", static_cast<double>(r0.violations), 0.5);
        rep.add(name + ".equality_consistency",
                static_cast<double>(r0.equality_mismatches + r1.equality_mismatches), 0.5);
    }
    return rep;
}

ExperimentReport exp_delta_sandwich(const SuiteConfig& cfg) {
    Ctx ctx(cfg, "delta-sandwich");
    ExperimentReport rep;
    rep.name = "delta-sandwich";
    rep.chart = "heisenberg1";
    rep.seed = cfg.seed;
    rep.parameters = {{"pairs", 3}};

    ChartPtr chart = make_chart("heisenberg1");
    TWConnection conn(chart);
    std::vector<std::pair<Vec, Vec>> pairs;
    {
        Vec a = Vec::Zero(3), b(3);
        b << 1, 0, 0;
        pairs.push_back({a, b});
        Vec c(3);
        c << 0.5, 0.4, 0.3;
        pairs.push_back({a, c});
        Vec d(3);
        d << 0.0, 0.0, 0.8;
        pairs.push_back({a, d});
    }
    double worst_sandwich = 0.0, worst_monotone = 0.0;
    int idx = 0;
    for (const auto& [p, q] : pairs) {
        DeltaOptions dopts;
        dopts.seed = static_cast<unsigned>(cfg.seed + 23 + idx);
        dopts.restarts = 2;
        dopts.nelder_mead_iters = 40;
        dopts.shoot.geodesic_step = 5e-3;
        DeltaBound d1 = delta_upper_bound(conn, p, q, 1, dopts);
        DeltaBound d2 = delta_upper_bound(conn, p, q, 2, dopts);
        double dist = riemannian_distance(conn, p, q, dopts.shoot);
        worst_sandwich = std::max(worst_sandwich,
                                  std::max(dist - d1.value, dist - d2.value));
        worst_monotone = std::max(worst_monotone, d2.value - d1.value);
        nlohmann::json jr = {{"d", dist}, {"delta1", d1.value}, {"delta2", d2.value}};
        rep.parameters["rows"].push_back(jr);
        ++idx;
    }
    rep.add("riemannian_below_delta", worst_sandwich, ctx.tol(1e-6));
    rep.add("k2_below_k1", worst_monotone, ctx.tol(1e-9));
    return rep;
}

using ExperimentFn = ExperimentReport (*)(const SuiteConfig&);

const std::vector<std::pair<std::string, ExperimentFn>>& experiment_table() {
    static const std::vector<std::pair<std::string, ExperimentFn>> table = {
        {"structure-axioms", exp_structure_axioms},
        {"levi-civita-roundtrip", exp_levi_civita_roundtrip},
        {"flatness", exp_flatness},
        {"slant-speed", exp_slant_speed},
        {"jacobi-closed-form", exp_jacobi_closed_form},
        {"expansion", exp_expansion},
        {"gauss-defect", exp_gauss_defect},
        {"decomposition", exp_decomposition},
        {"conservation", exp_conservation},
        {"cartan-hadamard", exp_cartan_hadamard},
        {"vertical-nonconjugacy", exp_vertical_nonconjugacy},
        {"bonnet-myers", exp_bonnet_myers},
        {"index-comparison", exp_index_comparison},
        {"delta-sandwich", exp_delta_sandwich},
    };
    return table;
}

}  // namespace

std::vector<std::string> suite_experiment_names() {
    std::vector<std::string> names;
    for (const auto& [n, f] : experiment_table()) names.push_back(n);
    return names;
}

ExperimentReport run_experiment(const std::string& name, const SuiteConfig& config) {
    for (const auto& [n, f] : experiment_table())
        if (n == name) {
            auto start = Clock::now();
            ExperimentReport rep = f(config);
            rep.wall_ms =
                std::chrono::duration<double, std::milli>(Clock::now() - start).count();
            return rep;
        }
    throw Error("unknown experiment: " + name);
}

std::vector<ExperimentReport> run_paper_suite(const SuiteConfig& config) {
    std::vector<ExperimentReport> reports;
    for (const auto& [name, fn] : experiment_table()) {
        if (!config.filter.empty() && name.find(config.filter) == std::string::npos) continue;
        ExperimentReport rep;
        try {
            rep = run_experiment(name, config);
        } catch (const std::exception& e) {
            rep.name = name;
            rep.chart = "-";
            rep.seed = config.seed;
            rep.add("exception:" + std::string(e.what()), 1.0, 0.5);
        }
        reports.push_back(std::move(rep));
    }

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        write_text_file(config.out_dir + "/report.json", serialize_reports(reports, false));
        for (const auto& rep : reports) {
            std::vector<std::vector<std::string>> rows;
            for (const auto& a : rep.assertions)
                rows.push_back({a.name, std::to_string(a.residual), std::to_string(a.tolerance),
                                a.pass() ? "pass" : "fail"});
            write_csv(config.out_dir + "/" + rep.name + ".csv",
                      {"assertion", "residual", "tolerance", "status"}, rows);
        }
    }
    return reports;
}

int suite_exit_code(const std::vector<ExperimentReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass()) return 1;
    return 0;
}

SuiteConfig SuiteConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    nlohmann::json j;
    in >> j;
    SuiteConfig c;
    c.seed = j.value("seed", c.seed);
    c.tol_scale = j.value("tol_scale", c.tol_scale);
    c.jobs = j.value("jobs", c.jobs);
    c.filter = j.value("filter", c.filter);
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

}  // namespace phgeo
