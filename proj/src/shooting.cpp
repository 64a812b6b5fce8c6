#include "phgeo/shooting.hpp"

#include <random>

#include <Eigen/SVD>

namespace phgeo {

namespace {

// Fixed-step RK4 endpoint of x'' + Gamma(x)(x',x') = 0 over unit parameter,
// with the Christoffel provider as a parameter so both connections share
// the flow.
template <typename GammaFn>
Vec flow_endpoint(const GammaFn& christoffels, const Box& box, const Vec& p, const Vec& v,
                  double step) {
    int steps = std::max(8, static_cast<int>(std::ceil(1.0 / step)));
    double h = 1.0 / steps;
    Vec x = p, u = v;
    auto acc = [&](const Vec& xx, const Vec& uu) { return Vec(-christoffels(xx).apply(uu, uu)); };
    for (int k = 0; k < steps; ++k) {
        if (!box.contains(x, 0.05 * (box.hi - box.lo).lpNorm<Eigen::Infinity>()))
            throw LeftDomain(static_cast<double>(k) * h, "shooting flow left chart domain");
        Vec k1x = u, k1u = acc(x, u);
        Vec x2 = x + 0.5 * h * k1x, u2 = u + 0.5 * h * k1u;
        Vec k2x = u2, k2u = acc(x2, u2);
        Vec x3 = x + 0.5 * h * k2x, u3 = u + 0.5 * h * k2u;
        Vec k3x = u3, k3u = acc(x3, u3);
        Vec x4 = x + h * k3x, u4 = u + h * k3u;
        Vec k4x = u4, k4u = acc(x4, u4);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    }
    return x;
}

}  // namespace

ShootResult shoot_boundary_value(const TWConnection& conn, const Vec& p, const Vec& q,
                                 const Vec& v0, const ShootOptions& opts) {
    const int n = static_cast<int>(p.size());
    StructurePacket sp = structure_at(conn.chart(), p);

    if ((q - p).lpNorm<Eigen::Infinity>() < 1e-14) {
        return {Vec::Zero(n), 0.0, 0.0, 0};
    }

    auto endpoint = [&](const Vec& v) -> Vec {
        if (opts.kind == ConnectionKind::tanaka_webster)
            return flow_endpoint([&](const Vec& x) { return conn.tw_christoffels(x); },
                                 conn.chart().domain(), p, v, opts.geodesic_step);
        return flow_endpoint([&](const Vec& x) { return conn.levi_civita_christoffels(x); },
                             conn.chart().domain(), p, v, opts.geodesic_step);
    };

    auto jacobian = [&](const Vec& v) -> Mat {
        if (opts.kind == ConnectionKind::tanaka_webster) {
            IntegrateOptions gopts;
            gopts.step = opts.geodesic_step;
            GeodesicPath path = integrate_geodesic(conn, p, v, 1.0, gopts);
            return dexp_jacobian(conn, path, 1.0);
        }
        // Finite differences of the Levi-Civita flow.
        Mat J(n, n);
        double h = 1e-6 * std::max(1.0, v.lpNorm<Eigen::Infinity>());
        for (int j = 0; j < n; ++j) {
            Vec e = Vec::Zero(n);
            e[j] = h;
            J.col(j) = (endpoint(v + e) - endpoint(v - e)) / (2.0 * h);
        }
        return J;
    };

    Vec v = v0;
    double best_res = std::numeric_limits<double>::infinity();
    Vec best_v = v;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (sp.norm(v) > opts.length_cap)
            throw NoConvergence(it, best_res);
        Vec r;
        try {
            r = endpoint(v) - q;
        } catch (const LeftDomain&) {
            throw NoConvergence(it, best_res);
        }
        double res = r.norm();
        if (res < best_res) {
            best_res = res;
            best_v = v;
        }
        if (res < opts.tol) {
            return {v, sp.norm(v), res, it};
        }
        Mat J = jacobian(v);
        Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double smax = svd.singularValues()(0);
        double smin = svd.singularValues()(n - 1);
        if (smin <= 1e-10 * std::max(1.0, smax))
            throw SingularJacobian("exponential differential singular along the Newton path");
        Vec step = svd.solve(r);
        // Backtracking on the residual.
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 10; ++bt) {
            Vec trial = v - lambda * step;
            try {
                double tr = (endpoint(trial) - q).norm();
                if (tr < res) {
                    v = trial;
                    accepted = true;
                    break;
                }
            } catch (const LeftDomain&) {
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NoConvergence(it + 1, best_res);
    }
    throw NoConvergence(it, best_res);
}

double riemannian_distance(const TWConnection& conn, const Vec& p, const Vec& q,
                           const ShootOptions& opts_in) {
    ShootOptions opts = opts_in;
    opts.kind = ConnectionKind::levi_civita;
    ShootResult r = shoot_boundary_value(conn, p, q, q - p, opts);
    return r.length;
}

namespace {

// Compact Nelder-Mead over R^d.
template <typename F>
std::pair<Vec, double> nelder_mead(const F& f, const Vec& x0, double scale, int iters) {
    const int d = static_cast<int>(x0.size());
    std::vector<Vec> xs(d + 1, x0);
    std::vector<double> fs(d + 1);
    for (int i = 1; i <= d; ++i) xs[i][i - 1] += scale;
    for (int i = 0; i <= d; ++i) fs[i] = f(xs[i]);

    auto order = [&]() {
        std::vector<int> idx(d + 1);
        for (int i = 0; i <= d; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<Vec> xs2(d + 1);
        std::vector<double> fs2(d + 1);
        for (int i = 0; i <= d; ++i) {
            xs2[i] = xs[idx[i]];
            fs2[i] = fs[idx[i]];
        }
        xs = std::move(xs2);
        fs = std::move(fs2);
    };

    for (int it = 0; it < iters; ++it) {
        order();
        if (std::abs(fs[d] - fs[0]) < 1e-12 * (1.0 + std::abs(fs[0]))) break;
        Vec centroid = Vec::Zero(d);
        for (int i = 0; i < d; ++i) centroid += xs[i];
        centroid /= d;
        Vec xr = centroid + (centroid - xs[d]);
        double fr = f(xr);
        if (fr < fs[0]) {
            Vec xe = centroid + 2.0 * (centroid - xs[d]);
            double fe = f(xe);
            if (fe < fr) {
                xs[d] = xe;
                fs[d] = fe;
            } else {
                xs[d] = xr;
                fs[d] = fr;
            }
        } else if (fr < fs[d - 1]) {
            xs[d] = xr;
            fs[d] = fr;
        } else {
            Vec xc = centroid + 0.5 * (xs[d] - centroid);
            double fc = f(xc);
            if (fc < fs[d]) {
                xs[d] = xc;
                fs[d] = fc;
            } else {
                for (int i = 1; i <= d; ++i) {
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    order();
    return {xs[0], fs[0]};
}

}  // namespace

DeltaBound delta_upper_bound(const TWConnection& conn, const Vec& p, const Vec& q, int k,
                             const DeltaOptions& opts) {
    if (k < 1) throw Error("delta bound needs at least one segment");
    const int n = static_cast<int>(p.size());

    auto solve_chain = [&](const std::vector<Vec>& joints) -> BrokenGeodesic {
        BrokenGeodesic bg;
        bg.joints = joints;
        for (size_t i = 0; i + 1 < joints.size(); ++i) {
            Vec guess = joints[i + 1] - joints[i];
            ShootResult sr = shoot_boundary_value(conn, joints[i], joints[i + 1], guess, opts.shoot);
            bg.max_joint_mismatch = std::max(bg.max_joint_mismatch, sr.residual);
            bg.total_length += sr.length;
            bg.segments.push_back(std::move(sr));
        }
        return bg;
    };

    if (k == 1) {
        BrokenGeodesic bg = solve_chain({p, q});
        return {bg.total_length, std::move(bg)};
    }

    const int d = (k - 1) * n;
    auto unpack = [&](const Vec& z) {
        std::vector<Vec> joints;
        joints.push_back(p);
        for (int i = 0; i < k - 1; ++i) joints.push_back(z.segment(i * n, n));
        joints.push_back(q);
        return joints;
    };
    auto objective = [&](const Vec& z) -> double {
        try {
            return solve_chain(unpack(z)).total_length;
        } catch (const Error&) {
            return 1e6;
        }
    };

    std::vector<Vec> seeds;
    {
        // Equal spacing along the coordinate segment.
        Vec z(d);
        for (int i = 0; i < k - 1; ++i)
            z.segment(i * n, n) = p + (q - p) * (double(i + 1) / k);
        seeds.push_back(z);
        for (const Vec& hint : opts.waypoint_hints) {
            Vec zh(d);
            for (int i = 0; i < k - 1; ++i) zh.segment(i * n, n) = hint;
            seeds.push_back(zh);
        }
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> gauss(0.0, 0.15 * std::max(1e-3, (q - p).norm()));
        for (int r = 0; r < opts.restarts; ++r) {
            Vec zr = seeds[0];
            for (int i = 0; i < d; ++i) zr[i] += gauss(rng);
            seeds.push_back(zr);
        }
    }

    double best = std::numeric_limits<double>::infinity();
    Vec best_z = seeds[0];
    for (const Vec& s : seeds) {
        double f0 = objective(s);
        auto [z, f] = nelder_mead(objective, s, 0.1 * std::max(1e-3, (q - p).norm()),
                                  opts.nelder_mead_iters);
        double fv = std::min(f, f0);
        const Vec& zv = (f <= f0) ? z : s;
        if (fv < best) {
            best = fv;
            best_z = zv;
        }
    }
    if (!std::isfinite(best) || best >= 1e6)
        throw NoConvergence(opts.restarts, best);
    BrokenGeodesic bg = solve_chain(unpack(best_z));
    return {bg.total_length, std::move(bg)};
}

}  // namespace phgeo
