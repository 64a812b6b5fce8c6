#include "phgeo/variation.hpp"

namespace phgeo {

namespace {

double integrand(const StructurePacket& s, const Mat& tau, const Vec& c, const Vec& V) {
    double th_c = s.theta_of(c);
    Vec tau_c = tau * c;
    return 2.0 * s.inner(s.J * c, V) * th_c + th_c * s.inner(tau_c, V) -
           s.theta_of(V) * s.inner(tau_c, c);
}

}  // namespace

std::vector<double> variation_integral(const TWConnection& conn, const GeodesicPath& path,
                                       const std::function<Vec(double)>& V) {
    const auto& ss = path.samples();
    const size_t m = ss.size();
    std::vector<double> out(m, 0.0);

    auto f_at = [&](double t, const Vec& x, const Vec& c) {
        StructurePacket s = structure_at(conn.chart(), x);
        Mat tau = conn.tau_matrix(x);
        return integrand(s, tau, c, V(t));
    };

    double prev_f = f_at(ss[0].t, ss[0].x, ss[0].v);
    double acc = 0.0;
    for (size_t k = 1; k < m; ++k) {
        double h = ss[k].t - ss[k - 1].t;
        double tm = 0.5 * (ss[k - 1].t + ss[k].t);
        double fm = f_at(tm, path.position(tm), path.velocity(tm));
        double fk = f_at(ss[k].t, ss[k].x, ss[k].v);
        acc += h / 6.0 * (prev_f + 4.0 * fm + fk);
        out[k] = acc;
        prev_f = fk;
    }
    return out;
}

std::vector<double> variation_integral(const TWConnection& conn, const GeodesicPath& path,
                                       const std::vector<Vec>& V_samples) {
    if (V_samples.size() != path.samples().size())
        throw GridMismatch("variation field not sampled on the geodesic grid");
    const auto& ss = path.samples();
    auto V = [&](double t) -> Vec {
        // Piecewise-cubic through the grid: locate and Catmull-Rom.
        int k = path.node_before(t);
        double h = ss[k + 1].t - ss[k].t;
        double u = (t - ss[k].t) / h;
        if (u == 0.0) return V_samples[k];
        const Vec& y1 = V_samples[k];
        const Vec& y2 = V_samples[k + 1];
        Vec d1 = (k > 0) ? Vec((y2 - V_samples[k - 1]) / 2.0) : Vec(y2 - y1);
        Vec d2 = (k + 2 < static_cast<int>(ss.size())) ? Vec((V_samples[k + 2] - y1) / 2.0)
                                                       : Vec(y2 - y1);
        double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y1 + (u3 - 2 * u2 + u) * d1 + (-2 * u3 + 3 * u2) * y2 +
               (u3 - u2) * d2;
    };
    return variation_integral(conn, path, V);
}

std::vector<GaussDefectRow> gauss_lemma_defect(const TWConnection& conn, const Vec& p,
                                               const Vec& v, const Vec& w,
                                               const std::vector<double>& t_grid) {
    double t_max = *std::max_element(t_grid.begin(), t_grid.end());
    IntegrateOptions gopts;
    gopts.step = std::min(1e-3, t_max / 100.0);
    GeodesicPath path = integrate_geodesic(conn, p, v, t_max, gopts);

    JacobiMode mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                : JacobiMode::sasakian;
    JacobiOptions jopts;
    jopts.step = 2.0 * gopts.step;
    JacobiSolution sol = integrate_jacobi(conn, path, Vec::Zero(p.size()), w, mode, jopts);

    std::vector<double> cumulative =
        variation_integral(conn, path, [&sol](double t) { return sol.value(t); });

    const auto& ss = path.samples();
    std::vector<GaussDefectRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        GaussDefectRow row;
        row.t = t;
        Vec x = path.position(t);
        StructurePacket s = structure_at(conn.chart(), x);
        row.radial_pairing = s.inner(sol.value(t), path.velocity(t));
        // Cumulative integral at t: node part plus a partial Simpson tail.
        int k = path.node_before(t);
        double tail = 0.0;
        if (t > ss[k].t + 1e-15) {
            auto f_at = [&](double tt) {
                Vec xx = path.position(tt);
                StructurePacket sq = structure_at(conn.chart(), xx);
                Mat tau = conn.tau_matrix(xx);
                return integrand(sq, tau, path.velocity(tt), sol.value(tt));
            };
            double h = t - ss[k].t;
            tail = h / 6.0 *
                   (f_at(ss[k].t) + 4.0 * f_at(ss[k].t + 0.5 * h) + f_at(t));
        }
        row.integral = cumulative[k] + tail;
        row.defect = std::abs(row.radial_pairing - row.integral);
        rows.push_back(row);
    }
    return rows;
}

FirstVariationResult first_variation_check(const TWConnection& conn, const CurveFamily& family,
                                           const FirstVariationOptions& opts) {
    const int N = opts.grid % 2 ? opts.grid + 1 : opts.grid;
    const double t0 = family.t0, t1 = family.t1;
    const double h = (t1 - t0) / N;

    // d/dt and d/ds of the family by small central differences.
    const double ht = 1e-5;
    auto T_of = [&](double t, double s) {
        return Vec((8.0 * (family.pos(t + ht, s) - family.pos(t - ht, s)) -
                    (family.pos(t + 2 * ht, s) - family.pos(t - 2 * ht, s))) /
                   (12.0 * ht));
    };
    auto length_of = [&](double s) {
        // Composite Simpson of |T| dt.
        auto speed = [&](double t) {
            Vec x = family.pos(t, s);
            StructurePacket sp = structure_at(conn.chart(), x);
            return sp.norm(T_of(t, s));
        };
        double acc = 0.0;
        for (int k = 0; k < N; k += 2)
            acc += h / 3.0 * (speed(t0 + k * h) + 4.0 * speed(t0 + (k + 1) * h) +
                              speed(t0 + (k + 2) * h));
        return acc;
    };

    FirstVariationResult res;
    const double es = opts.eps_s;
    res.fd_value = (length_of(es) - length_of(-es)) / (2.0 * es);

    // Formula side along the center curve.
    auto V_of = [&](double t) {
        return Vec((family.pos(t, es) - family.pos(t, -es)) / (2.0 * es));
    };
    auto term = [&](double t) {
        Vec x = family.pos(t, 0.0);
        StructurePacket s = structure_at(conn.chart(), x);
        Vec T = T_of(t, 0.0);
        // nabla_T T = T' + Gamma(T, T).
        Vec Tp = (8.0 * (T_of(t + ht, 0.0) - T_of(t - ht, 0.0)) -
                  (T_of(t + 2 * ht, 0.0) - T_of(t - 2 * ht, 0.0))) /
                 (12.0 * ht);
        Vec covTT = Tp + conn.tw_christoffels(x).apply(T, T);
        Vec V = V_of(t);
        Vec tors = conn.torsion(x, V, T);
        return s.inner(V, covTT) - s.inner(tors, T);
    };
    double integral = 0.0;
    for (int k = 0; k < N; k += 2)
        integral += h / 3.0 * (term(t0 + k * h) + 4.0 * term(t0 + (k + 1) * h) +
                               term(t0 + (k + 2) * h));

    auto boundary = [&](double t) {
        Vec x = family.pos(t, 0.0);
        StructurePacket s = structure_at(conn.chart(), x);
        return s.inner(V_of(t), T_of(t, 0.0));
    };
    res.formula_value = boundary(t1) - boundary(t0) - integral;
    res.residual = std::abs(res.fd_value - res.formula_value);
    return res;
}

}  // namespace phgeo
