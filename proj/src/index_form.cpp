#include "phgeo/index_form.hpp"

#include <Eigen/SVD>

namespace phgeo {

GeodesicQuadrature build_quadrature(const TWConnection& conn, const GeodesicPath& path,
                                    double element) {
    GeodesicQuadrature q;
    q.path = &path;
    // Snap the element width to an even multiple of the node step so grid
    // points coincide with path nodes (parallel frames line up exactly).
    int stride = std::max(2, 2 * static_cast<int>(std::llround(element / (2.0 * path.node_step()))));
    int last = static_cast<int>(path.samples().size()) - 1;
    int half = stride / 2;
    int elements = std::max(2, last / stride);
    q.h = stride * path.node_step();

    const int n = path.dim();
    for (int e = 0; e <= 2 * elements; ++e) {
        int node = std::min(e * half, last);
        const PathSample& ps = path.samples()[node];
        StructurePacket s = structure_at(conn.chart(), ps.x);
        Tensor4 R = conn.curvature(ps.x);
        Mat BV = Mat::Zero(n, n);
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k) v += R(l, i, j, k) * ps.v[i] * ps.v[k];
                BV(l, j) = v;
            }
        q.t.push_back(ps.t);
        q.c.push_back(ps.v);
        q.g.push_back(s.g);
        q.Q.push_back(-BV.transpose() * s.g);
        q.xi.push_back(s.xi);
        q.J.push_back(s.J);
    }
    return q;
}

IndexValue index_form(const GeodesicQuadrature& quad, const FieldFn& X,
                      const std::vector<double>& breakpoints) {
    (void)breakpoints;  // pieces are integrated element-wise; corners sit on element boundaries
    if (std::abs(quad.path->speed() - 1.0) > 1e-7)
        throw NotArcLength("index form requires an arc-length geodesic");

    const size_t m = quad.t.size();
    std::vector<double> phi(m);
    for (size_t k = 0; k < m; ++k) {
        FieldEval fe = X(quad.t[k]);
        phi[k] = fe.DX.dot(quad.g[k] * fe.DX) + fe.X.dot(quad.Q[k] * fe.X);
    }
    double fine = 0.0, coarse = 0.0;
    for (size_t k = 0; k + 2 < m + 1; k += 2) {
        double h = quad.t[k + 2] - quad.t[k];
        fine += h / 6.0 * (phi[k] + 4.0 * phi[k + 1] + phi[k + 2]);
    }
    for (size_t k = 0; k + 4 < m + 1; k += 4) {
        double h = quad.t[k + 4] - quad.t[k];
        coarse += h / 6.0 * (phi[k] + 4.0 * phi[k + 2] + phi[k + 4]);
    }
    IndexValue out;
    out.value = fine;
    out.error_estimate = std::abs(fine - coarse) / 15.0;
    return out;
}

JacobiSolution solve_eq53(const TWConnection& conn, const GeodesicPath& path, const Vec& Z0,
                          const Vec& Z0p, const JacobiOptions& opts) {
    return integrate_jacobi(conn, path, Z0, Z0p, JacobiMode::comparison, opts);
}

ComparisonBasis build_comparison_basis(const TWConnection& conn, const GeodesicPath& path,
                                       const GeodesicQuadrature& quad,
                                       const JacobiOptions& opts) {
    const int n = path.dim();
    const Vec& p = path.samples().front().x;
    const Vec& v = path.samples().front().v;
    StructurePacket s0 = structure_at(conn.chart(), p);

    // Initial derivatives: radial, Reeb (when independent), then completed.
    std::vector<Vec> dirs;
    dirs.push_back(v);
    Vec vh = v - s0.inner(v, s0.xi) * s0.xi;
    if (s0.norm(vh) > 1e-9) dirs.push_back(s0.xi);
    for (int cand = 0; cand < n && static_cast<int>(dirs.size()) < n; ++cand) {
        Vec e = Vec::Zero(n);
        e[cand] = 1.0;
        for (const Vec& d : dirs) e -= s0.inner(e, d) / s0.inner(d, d) * d;
        double norm = s0.norm(e);
        if (norm > 1e-8) dirs.push_back(e / norm);
    }

    ComparisonBasis basis;
    for (const Vec& d : dirs)
        basis.Z.push_back(solve_eq53(conn, path, Vec::Zero(n), d, opts));

    // Independence persistence and reciprocity over the quadrature grid.
    basis.min_sigma = std::numeric_limits<double>::infinity();
    for (size_t k = 2; k < quad.t.size(); k += 2) {
        double t = quad.t[k];
        Mat M(n, n);
        for (int a = 0; a < n; ++a) M.col(a) = basis.Z[a].value(t) / t;
        Eigen::JacobiSVD<Mat> svd(M);
        double smax = svd.singularValues()(0);
        basis.min_sigma = std::min(basis.min_sigma, svd.singularValues()(n - 1) / smax);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                double lhs = basis.Z[a].value(t).dot(quad.g[k] * basis.Z[b].derivative(t));
                double rhs = basis.Z[b].value(t).dot(quad.g[k] * basis.Z[a].derivative(t));
                basis.reciprocity_residual =
                    std::max(basis.reciprocity_residual, std::abs(lhs - rhs));
            }
    }
    return basis;
}

namespace {

size_t grid_index(const GeodesicQuadrature& quad, double t) {
    double step = 0.5 * quad.h;
    auto k = static_cast<long long>(std::llround((t - quad.t.front()) / step));
    k = std::max(0ll, std::min<long long>(k, static_cast<long long>(quad.t.size()) - 1));
    return static_cast<size_t>(k);
}

}  // namespace

IndexComparisonReport index_comparison(const TWConnection& conn, const GeodesicPath& path,
                                       const Vec& Y_endpoint,
                                       const IndexComparisonOptions& opts) {
    const int n = path.dim();
    const double l = path.t1();
    const Vec& p = path.samples().front().x;
    const Vec& v = path.samples().front().v;

    {
        ConjugateSearchOptions copts;
        copts.stop_at_first = true;
        ConjugateSearchResult cs = conjugate_search(conn, p, v, l, copts);
        if (!cs.points.empty() && cs.points.front().t <= l + 1e-9)
            throw ConjugatePointPresent("segment carries an interior conjugate point");
    }

    GeodesicQuadrature quad = build_quadrature(conn, path);
    ComparisonBasis basis = build_comparison_basis(conn, path, quad);

    IndexComparisonReport rep;
    rep.reciprocity_residual = basis.reciprocity_residual;
    rep.trials = opts.trials;

    // Coefficients of Y in the comparison basis from the endpoint condition.
    Mat Ml(n, n);
    for (int a = 0; a < n; ++a) Ml.col(a) = basis.Z[a].value(l);
    Vec d = Ml.colPivHouseholderQr().solve(Y_endpoint);

    auto combo_field = [&](const std::vector<std::function<double(double)>>& f,
                           const std::vector<std::function<double(double)>>& fp) {
        return [&basis, f, fp, n](double t) {
            FieldEval fe;
            fe.X = Vec::Zero(n);
            fe.DX = Vec::Zero(n);
            for (int a = 0; a < n; ++a) {
                double fa = f[a](t), fpa = fp[a](t);
                fe.X += fa * basis.Z[a].value(t);
                fe.DX += fpa * basis.Z[a].value(t) + fa * basis.Z[a].derivative(t);
            }
            return fe;
        };
    };

    std::vector<std::function<double(double)>> fY(n), fYp(n);
    for (int a = 0; a < n; ++a) {
        double da = d[a];
        fY[a] = [da](double) { return da; };
        fYp[a] = [](double) { return 0.0; };
    }
    FieldFn Yfield = combo_field(fY, fYp);
    IndexValue IY = index_form(quad, Yfield);
    rep.I_Y = IY.value;

    // Parallel-transported random frame for the bump trials.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<Vec>> parallel;  // [frame][node]
    for (int f = 0; f < 3; ++f) {
        Vec w(n);
        for (int i = 0; i < n; ++i) w[i] = gauss(rng);
        parallel.push_back(parallel_transport(conn, path, w));
    }

    rep.min_gap = std::numeric_limits<double>::infinity();
    double max_identity = 0.0;

    for (int trial = 0; trial < opts.trials; ++trial) {
        bool basis_trial = (trial % 2 == 0);
        bool corner = opts.corner_family && (trial % 7 == 3);
        double IX;
        double field_distance;  // sup |X - Y|

        if (basis_trial) {
            // f^A(t) = d^A + perturbation vanishing at t = l.
            std::vector<std::function<double(double)>> f(n), fp(n);
            std::vector<std::vector<double>> amps(n);
            for (int a = 0; a < n; ++a) {
                amps[a].resize(opts.sine_modes);
                for (int k = 0; k < opts.sine_modes; ++k)
                    amps[a][k] = 0.4 * gauss(rng) / (k + 1);
            }
            double cl = l;
            bool with_corner = corner;
            for (int a = 0; a < n; ++a) {
                double da = d[a];
                auto amp = amps[a];
                double hat_amp = with_corner ? 0.3 * gauss(rng) : 0.0;
                f[a] = [da, amp, cl, hat_amp](double t) {
                    double s = da;
                    for (size_t k = 0; k < amp.size(); ++k)
                        s += amp[k] * std::sin((k + 1) * M_PI * (cl - t) / cl);
                    s += hat_amp * (t < 0.5 * cl ? t / cl : (cl - t) / cl);
                    return s;
                };
                fp[a] = [amp, cl, hat_amp](double t) {
                    double s = 0.0;
                    for (size_t k = 0; k < amp.size(); ++k)
                        s -= amp[k] * (k + 1) * M_PI / cl *
                             std::cos((k + 1) * M_PI * (cl - t) / cl);
                    s += hat_amp * (t < 0.5 * cl ? 1.0 / cl : -1.0 / cl);
                    return s;
                };
            }
            FieldFn Xfield = combo_field(f, fp);
            IndexValue IXv = index_form(quad, Xfield, corner ? std::vector<double>{0.5 * l}
                                                             : std::vector<double>{});
            IX = IXv.value;

            // Identity: I(X) = <sum f Z, sum f Z'>(l) + int |sum f' Z|^2.
            size_t kl = quad.t.size() - 1;
            Vec Xl = Vec::Zero(n), XZp = Vec::Zero(n);
            for (int a = 0; a < n; ++a) {
                Xl += f[a](l) * basis.Z[a].value(l);
                XZp += f[a](l) * basis.Z[a].derivative(l);
            }
            double endpoint_term = Xl.dot(quad.g[kl] * XZp);
            std::vector<double> integrand(quad.t.size());
            for (size_t k = 0; k < quad.t.size(); ++k) {
                Vec S = Vec::Zero(n);
                for (int a = 0; a < n; ++a) S += fp[a](quad.t[k]) * basis.Z[a].value(quad.t[k]);
                integrand[k] = S.dot(quad.g[k] * S);
            }
            double integral = 0.0;
            for (size_t k = 0; k + 2 < quad.t.size() + 1; k += 2) {
                double hh = quad.t[k + 2] - quad.t[k];
                integral += hh / 6.0 * (integrand[k] + 4.0 * integrand[k + 1] + integrand[k + 2]);
            }
            double identity = endpoint_term + integral;
            max_identity = std::max(max_identity,
                                    std::abs(IX - identity) / std::max(1.0, std::abs(IX)));

            field_distance = 0.0;
            for (size_t k = 0; k < quad.t.size(); k += 2) {
                FieldEval fx = Xfield(quad.t[k]);
                FieldEval fy = Yfield(quad.t[k]);
                field_distance =
                    std::max(field_distance, (fx.X - fy.X).lpNorm<Eigen::Infinity>());
            }
        } else {
            // Y plus parallel-frame sine bumps (vanishing at both ends).
            std::vector<std::vector<double>> amp(parallel.size());
            for (auto& row : amp) {
                row.resize(opts.sine_modes);
                for (int k = 0; k < opts.sine_modes; ++k) row[k] = 0.4 * gauss(rng) / (k + 1);
            }
            const GeodesicPath* pp = &path;
            FieldFn Xfield = [&, pp](double t) {
                FieldEval fe = Yfield(t);
                int node = pp->node_before(t);
                for (size_t fidx = 0; fidx < parallel.size(); ++fidx) {
                    const Vec& B = parallel[fidx][node];
                    for (int k = 0; k < opts.sine_modes; ++k) {
                        double w = (k + 1) * M_PI / l;
                        fe.X += amp[fidx][k] * std::sin(w * t) * B;
                        fe.DX += amp[fidx][k] * w * std::cos(w * t) * B;
                    }
                }
                return fe;
            };
            IX = index_form(quad, Xfield).value;
            field_distance = 0.0;
            for (size_t k = 0; k < quad.t.size(); k += 2) {
                FieldEval fx = Xfield(quad.t[k]);
                FieldEval fy = Yfield(quad.t[k]);
                field_distance =
                    std::max(field_distance, (fx.X - fy.X).lpNorm<Eigen::Infinity>());
            }
        }

        double gap = IX - rep.I_Y;
        rep.min_gap = std::min(rep.min_gap, gap);
        if (gap < -opts.tol) ++rep.violations;
        bool near_equal = std::abs(gap) < opts.tol;
        bool same_field = field_distance < opts.equality_eps;
        if (near_equal != same_field && std::abs(gap) < 1e-9) ++rep.equality_mismatches;
    }
    rep.identity_residual = max_identity;
    return rep;
}

CurvatureScan scan_horizontal_curvature(const TWConnection& conn, int samples, unsigned seed,
                                        double shrink) {
    const int n = conn.chart().dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CurvatureScan scan;
    scan.min_sectional = std::numeric_limits<double>::infinity();
    scan.max_sectional = -std::numeric_limits<double>::infinity();
    scan.min_ricci_horizontal = std::numeric_limits<double>::infinity();

    for (const Vec& p : halton_points(conn.chart().domain(), samples, shrink)) {
        StructurePacket s = structure_at(conn.chart(), p);
        Tensor4 R = conn.curvature(p);
        for (int rep = 0; rep < 3; ++rep) {
            Vec a(n), b(n);
            for (int i = 0; i < n; ++i) {
                a[i] = gauss(rng);
                b[i] = gauss(rng);
            }
            Vec X = s.pi_h * a;
            Vec Y = s.pi_h * b;
            double xx = s.inner(X, X), yy = s.inner(Y, Y), xy = s.inner(X, Y);
            double area2 = xx * yy - xy * xy;
            if (area2 < 1e-10) continue;
            double K = TWConnection::lowered(R, s.g, X, Y, Y, X) / area2;
            scan.min_sectional = std::min(scan.min_sectional, K);
            scan.max_sectional = std::max(scan.max_sectional, K);
            double ric = conn.ricci(R, X, X) / xx;
            scan.min_ricci_horizontal = std::min(scan.min_ricci_horizontal, ric);
        }
    }
    return scan;
}

BonnetMyersReport bonnet_myers_experiment(const TWConnection& conn,
                                          const std::vector<double>& slants,
                                          const BonnetMyersOptions& opts) {
    const int n = conn.chart().dim();
    const int m = conn.chart().cr_rank();
    BonnetMyersReport rep;

    CurvatureScan scan = scan_horizontal_curvature(conn, opts.curvature_samples, opts.seed);
    rep.k0 = scan.min_sectional - 1e-6;
    rep.ric0 = scan.min_ricci_horizontal / (2 * m - 1) - 1e-6;
    if (rep.k0 <= 0.0) {
        rep.pass = false;
        return rep;
    }

    Vec base = opts.base_point;
    if (base.size() == 0) base = Vec::Zero(n);
    StructurePacket s = structure_at(conn.chart(), base);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec h0(n);
    for (int i = 0; i < n; ++i) h0[i] = gauss(rng);
    h0 = s.pi_h * h0;
    h0 /= s.norm(h0);

    double prev_t = 0.0;
    for (double c : slants) {
        BonnetMyersRow row;
        row.slant = c;
        if (c >= 1.0 - 1e-12) {
            row.status = "no-conjugate-expected";
            row.bound_sectional = std::numeric_limits<double>::infinity();
            row.bound_ricci = std::numeric_limits<double>::infinity();
            row.t_star = -1.0;
            row.within_bound = true;
            rep.rows.push_back(row);
            continue;
        }
        row.status = "ok";
        double oneminus = 1.0 - c * c;
        row.bound_sectional = M_PI / std::sqrt(rep.k0 * oneminus);
        row.bound_ricci = rep.ric0 > 0.0 ? M_PI / std::sqrt(rep.ric0 * oneminus)
                                         : std::numeric_limits<double>::infinity();
        Vec v = c * s.xi + std::sqrt(oneminus) * h0;

        ConjugateSearchOptions copts;
        copts.stop_at_first = true;
        ConjugateSearchResult cs =
            conjugate_search(conn, base, v, opts.search_factor * row.bound_sectional, copts);
        row.t_star = cs.points.empty() ? -1.0 : cs.points.front().t;
        row.within_bound =
            row.t_star > 0.0 && row.t_star <= row.bound_sectional + opts.margin;
        if (!row.within_bound) rep.pass = false;
        if (row.t_star > 0.0) {
            if (row.t_star + 1e-9 < prev_t) rep.monotone = false;
            prev_t = row.t_star;
        }
        rep.rows.push_back(row);
    }
    if (!rep.monotone) rep.pass = false;
    return rep;
}

CartanHadamardReport cartan_hadamard_sweep(const TWConnection& conn, int directions,
                                           double L_max, const CartanHadamardOptions& opts) {
    const int n = conn.chart().dim();
    CartanHadamardReport rep;
    rep.directions = directions;
    rep.min_sigma_beyond_eps = std::numeric_limits<double>::infinity();

    Vec base = opts.base_point;
    if (base.size() == 0) base = Vec::Zero(n);
    StructurePacket s = structure_at(conn.chart(), base);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int d = 0; d < directions; ++d) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        v /= s.norm(v);
        ConjugateSearchResult cs = conjugate_search(conn, base, v, L_max);
        rep.conjugate_points_found += static_cast<int>(cs.points.size());
        if (cs.truncated) ++rep.truncated_paths;
        for (const auto& [t, sigma] : cs.sigma_trace)
            if (t >= opts.sigma_floor_from)
                rep.min_sigma_beyond_eps = std::min(rep.min_sigma_beyond_eps, sigma);
    }
    rep.pass = rep.conjugate_points_found == 0;
    return rep;
}

}  // namespace phgeo
