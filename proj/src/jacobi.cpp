#include "phgeo/jacobi.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

namespace phgeo {

namespace {

// Stage operators of the first-order linear system for (V, U = nabla V):
//   V' = U - Gc V,   U' = BV V + BU U.
struct StageOps {
    Mat Gc;
    Mat BV;
    Mat BU;
};

class FieldIntegrator {
  public:
    FieldIntegrator(const TWConnection& conn, const GeodesicPath& path, JacobiMode mode)
        : conn_(conn), path_(path), mode_(mode) {
        if (conn.tau_mode() == TauMode::user_supplied && mode != JacobiMode::general)
            throw ModeMismatch("connection carries user torsion; use the general mode");
        n_ = path.dim();
        h_half_ = 0.5 * path.node_step();
        n_half_ = 2 * (static_cast<int>(path.samples().size()) - 1) + 1;
        cache_.resize(n_half_);
    }

    int dim() const { return n_; }
    int node_count() const { return (n_half_ + 1) / 2; }
    double node_time(int k) const { return path_.samples()[k].t; }

    const StageOps& ops(int half_idx) {
        auto& slot = cache_[half_idx];
        if (!slot) {
            if (half_idx % 2 == 0) {
                const PathSample& ps = path_.samples()[half_idx / 2];
                slot = build_ops(ps.x, ps.v);
            } else {
                double t = path_.t0() + half_idx * h_half_;
                slot = build_ops(path_.position(t), path_.velocity(t));
            }
        }
        return *slot;
    }

    StageOps ops_at_time(double t) const { return *build_ops(path_.position(t), path_.velocity(t)); }

    struct Run {
        std::vector<double> times;
        std::vector<Mat> V, U, dV, dU;
    };

    // Integrate from node 0 to the last node with RK4 steps of `stride`
    // path nodes (stages land on cached half-nodes).
    Run run(int stride, const Mat& V0, const Mat& U0) {
        Run r;
        int last = node_count() - 1;
        Mat V = V0, U = U0;
        int k = 0;
        record(r, 0, V, U);
        while (k < last) {
            int s = std::min(stride, last - k);
            const StageOps& o1 = ops(2 * k);
            const StageOps& o2 = ops(2 * k + s);
            const StageOps& o3 = ops(2 * k + 2 * s);
            rk4(o1, o2, o3, 2.0 * s * h_half_, V, U);
            k += s;
            record(r, k, V, U);
        }
        return r;
    }

    // One RK4 step with given stage operators; updates (V, U) in place.
    static void rk4(const StageOps& o1, const StageOps& o2, const StageOps& o3, double h,
                    Mat& V, Mat& U) {
        Mat k1V = U - o1.Gc * V;
        Mat k1U = o1.BV * V + o1.BU * U;
        Mat V2 = V + 0.5 * h * k1V, U2 = U + 0.5 * h * k1U;
        Mat k2V = U2 - o2.Gc * V2;
        Mat k2U = o2.BV * V2 + o2.BU * U2;
        Mat V3 = V + 0.5 * h * k2V, U3 = U + 0.5 * h * k2U;
        Mat k3V = U3 - o2.Gc * V3;
        Mat k3U = o2.BV * V3 + o2.BU * U3;
        Mat V4 = V + h * k3V, U4 = U + h * k3U;
        Mat k4V = U4 - o3.Gc * V4;
        Mat k4U = o3.BV * V4 + o3.BU * U4;
        V += (h / 6.0) * (k1V + 2.0 * k2V + 2.0 * k3V + k4V);
        U += (h / 6.0) * (k1U + 2.0 * k2U + 2.0 * k3U + k4U);
    }

  private:
    void record(Run& r, int node, const Mat& V, const Mat& U) {
        const StageOps& o = ops(2 * node);
        r.times.push_back(node_time(node));
        r.V.push_back(V);
        r.U.push_back(U);
        r.dV.push_back(U - o.Gc * V);
        r.dU.push_back(o.BV * V + o.BU * U);
    }

    std::optional<StageOps> build_ops(const Vec& x, const Vec& c) const {
        StageOps o;
        StructurePacket s = structure_at(conn_.chart(), x);
        Tensor3 gamma = conn_.tw_christoffels(x);
        o.Gc = gamma.apply_left(c);

        // Curvature block: BV(l,j) = sum_{i,k} R(l,i,j,k) c^i c^k.
        Tensor4 R = conn_.curvature(x);
        o.BV = Mat::Zero(n_, n_);
        for (int l = 0; l < n_; ++l)
            for (int j = 0; j < n_; ++j) {
                double v = 0.0;
                for (int i = 0; i < n_; ++i) {
                    if (c[i] == 0.0) continue;
                    for (int k = 0; k < n_; ++k) v += R(l, i, j, k) * c[i] * c[k];
                }
                o.BV(l, j) = v;
            }

        o.BU = -o.Gc;
        switch (mode_) {
            case JacobiMode::comparison:
                break;
            case JacobiMode::sasakian:
            case JacobiMode::split:
                // + 2 dtheta(gamma', U) xi
                o.BU += 2.0 * s.xi * (s.dtheta.transpose() * c).transpose();
                break;
            case JacobiMode::general: {
                Mat tau = conn_.tau_matrix(x);
                Mat dtau = covariant_tau_derivative(x, c, gamma, tau);
                double th_c = s.theta_of(c);
                o.BU += 2.0 * s.xi * (s.dtheta.transpose() * c).transpose();
                o.BU += th_c * tau - (tau * c) * s.theta.transpose();
                o.BV += th_c * dtau - (dtau * c) * s.theta.transpose();
                break;
            }
        }
        return o;
    }

    // (nabla_c tau) as a matrix: directional derivative of the tau field
    // corrected by the connection commutator.
    Mat covariant_tau_derivative(const Vec& x, const Vec& c, const Tensor3& gamma,
                                 const Mat& tau) const {
        const double h = fd::scaled_step(1e-4, x);
        auto tf = [this](const Vec& q) { return conn_.tau_matrix(q); };
        Mat d = Mat::Zero(n_, n_);
        for (int k = 0; k < n_; ++k) {
            if (c[k] == 0.0) continue;
            d += c[k] * fd::partial4_mat(tf, x, k, h);
        }
        Mat Gc = gamma.apply_left(c);
        return d + Gc * tau - tau * Gc;
    }

    const TWConnection& conn_;
    const GeodesicPath& path_;
    JacobiMode mode_;
    int n_;
    int n_half_;
    double h_half_;
    std::vector<std::optional<StageOps>> cache_;
};

struct RichardsonRun {
    FieldIntegrator::Run run;
    double estimate;
};

RichardsonRun integrate_with_monitor(FieldIntegrator& integ, const GeodesicPath& path,
                                     const Mat& V0, const Mat& U0, const JacobiOptions& opts) {
    int last = integ.node_count() - 1;
    int stride = std::max(
        1, static_cast<int>(std::llround(opts.step / path.node_step())));
    stride = std::min(stride, std::max(1, last / 2));
    if (stride % 2) ++stride;
    stride = std::max(2, stride);

    double arc = std::max(1.0, path.arc_length(path.t1()));
    FieldIntegrator::Run coarse = integ.run(stride, V0, U0);
    for (;;) {
        int fine_stride = stride / 2;
        FieldIntegrator::Run fine = integ.run(fine_stride, V0, U0);
        // Coarse sample times are a subset of fine sample times.
        double err = 0.0;
        size_t fi = 0;
        for (size_t ci = 0; ci < coarse.times.size(); ++ci) {
            while (fi < fine.times.size() && fine.times[fi] < coarse.times[ci] - 1e-12) ++fi;
            if (fi >= fine.times.size()) break;
            double scale = std::max(1.0, fine.V[fi].lpNorm<Eigen::Infinity>());
            err = std::max(err,
                           (coarse.V[ci] - fine.V[fi]).lpNorm<Eigen::Infinity>() / scale);
        }
        double est = err / 15.0 / arc;
        if (est <= opts.err_tol_per_unit || fine_stride == 1)
            return {std::move(fine), est};
        stride = fine_stride;
        if (stride % 2) ++stride;
        coarse = std::move(fine);
    }
}

std::vector<JacobiSample> to_samples(const FieldIntegrator::Run& run) {
    std::vector<JacobiSample> out;
    out.reserve(run.times.size());
    for (size_t k = 0; k < run.times.size(); ++k)
        out.push_back({run.times[k], run.V[k].col(0), run.U[k].col(0), run.dV[k].col(0),
                       run.dU[k].col(0)});
    return out;
}

}  // namespace

JacobiSolution::JacobiSolution(const GeodesicPath* path, JacobiMode mode,
                               std::vector<JacobiSample> samples, Vec V0, Vec U0, double err)
    : path_(path), mode_(mode), samples_(std::move(samples)), V0_(std::move(V0)),
      U0_(std::move(U0)), err_(err) {
    step_ = samples_.size() > 1 ? samples_[1].t - samples_[0].t : 1.0;
}

namespace {

Vec hermite_vec(const Vec& y0, const Vec& d0, const Vec& y1, const Vec& d1, double h, double s) {
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + ((s3 - 2 * s2 + s) * h) * d0 +
           (-2 * s3 + 3 * s2) * y1 + ((s3 - s2) * h) * d1;
}

}  // namespace

Vec JacobiSolution::value(double t) const {
    if (t <= samples_.front().t) return samples_.front().V;
    if (t >= samples_.back().t) return samples_.back().V;
    size_t k = std::min(static_cast<size_t>((t - samples_.front().t) / step_),
                        samples_.size() - 2);
    while (k > 0 && samples_[k].t > t) --k;
    while (k + 2 < samples_.size() && samples_[k + 1].t <= t) ++k;
    const auto& a = samples_[k];
    const auto& b = samples_[k + 1];
    double h = b.t - a.t;
    return hermite_vec(a.V, a.dV, b.V, b.dV, h, (t - a.t) / h);
}

Vec JacobiSolution::derivative(double t) const {
    if (t <= samples_.front().t) return samples_.front().U;
    if (t >= samples_.back().t) return samples_.back().U;
    size_t k = std::min(static_cast<size_t>((t - samples_.front().t) / step_),
                        samples_.size() - 2);
    while (k > 0 && samples_[k].t > t) --k;
    while (k + 2 < samples_.size() && samples_[k + 1].t <= t) ++k;
    const auto& a = samples_[k];
    const auto& b = samples_[k + 1];
    double h = b.t - a.t;
    return hermite_vec(a.U, a.dU, b.U, b.dU, h, (t - a.t) / h);
}

JacobiSolution integrate_jacobi(const TWConnection& conn, const GeodesicPath& path,
                                const Vec& V0, const Vec& V0p, JacobiMode mode,
                                const JacobiOptions& opts) {
    if (mode == JacobiMode::split) return split_integrate(conn, path, V0, V0p, opts);
    FieldIntegrator integ(conn, path, mode);
    RichardsonRun rr = integrate_with_monitor(integ, path, V0, V0p, opts);
    return JacobiSolution(&path, mode, to_samples(rr.run), V0, V0p, rr.estimate);
}

Vec dexp(const TWConnection& conn, const Vec& p, const Vec& v, const Vec& w, double t,
         const IntegrateOptions& geo_opts, const JacobiOptions& jac_opts) {
    if (t == 0.0) return Vec::Zero(p.size());
    GeodesicPath path = integrate_geodesic(conn, p, v, t, geo_opts);
    JacobiMode mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                : JacobiMode::sasakian;
    JacobiSolution sol = integrate_jacobi(conn, path, Vec::Zero(p.size()), w, mode, jac_opts);
    return sol.value(t);
}

Mat dexp_jacobian(const TWConnection& conn, const GeodesicPath& path, double t,
                  const JacobiOptions& opts) {
    const int n = path.dim();
    JacobiMode mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                : JacobiMode::sasakian;
    FieldIntegrator integ(conn, path, mode);
    RichardsonRun rr = integrate_with_monitor(integ, path, Mat::Zero(n, n), Mat::Identity(n, n),
                                              opts);
    // Interpolate the matrix solution at t (columns independently).
    const auto& run = rr.run;
    if (t >= run.times.back()) return run.V.back() / run.times.back();
    size_t k = 0;
    while (k + 2 < run.times.size() && run.times[k + 1] <= t) ++k;
    double h = run.times[k + 1] - run.times[k];
    double s = (t - run.times[k]) / h;
    Mat V(n, n);
    for (int j = 0; j < n; ++j)
        V.col(j) = hermite_vec(run.V[k].col(j), run.dV[k].col(j), run.V[k + 1].col(j),
                               run.dV[k + 1].col(j), h, s);
    return V / t;
}

// ---- decomposition ---------------------------------------------------------

JacobiDecomposition decompose(const JacobiSolution& solution) {
    if (solution.mode() == JacobiMode::comparison)
        throw ModeMismatch("decompose needs a Jacobi solution, not a comparison solution");
    const GeodesicPath& path = solution.path();
    if (std::abs(path.speed() - 1.0) > 1e-7)
        throw NotArcLength("decomposition requires an arc-length geodesic");

    const auto& ss = solution.samples();
    StructurePacket s0 = structure_at(path.connection().chart(), path.samples().front().x);
    Vec g0 = path.samples().front().v;
    double c = path.slant();

    JacobiDecomposition d;
    d.a = s0.inner(solution.initial_value(), g0);
    d.b = s0.inner(solution.initial_derivative(), g0) -
          2.0 * c * s0.inner(s0.J * g0, solution.initial_value());

    // Integrand <V, J gamma'> on the sample grid, cumulative Simpson with
    // interpolated midpoints.
    size_t m = ss.size();
    d.times.resize(m);
    d.W.resize(m);
    d.tangential.resize(m);
    d.tangential_integral.resize(m);

    std::vector<double> f(m), fmid(m > 1 ? m - 1 : 0);
    std::vector<Vec> gp(m);
    std::vector<StructurePacket> packs(m);
    for (size_t k = 0; k < m; ++k) {
        double t = ss[k].t;
        d.times[k] = t;
        packs[k] = structure_at(path.connection().chart(), path.position(t));
        gp[k] = path.velocity(t);
        f[k] = packs[k].inner(ss[k].V, packs[k].J * gp[k]);
    }
    for (size_t k = 0; k + 1 < m; ++k) {
        double tm = 0.5 * (ss[k].t + ss[k + 1].t);
        StructurePacket sm = structure_at(path.connection().chart(), path.position(tm));
        fmid[k] = sm.inner(solution.value(tm), sm.J * path.velocity(tm));
    }
    double acc = 0.0;
    for (size_t k = 0; k < m; ++k) {
        if (k > 0) {
            double h = ss[k].t - ss[k - 1].t;
            acc += h / 6.0 * (f[k - 1] + 4.0 * fmid[k - 1] + f[k]);
        }
        d.tangential_integral[k] = 2.0 * c * acc;
        d.W[k] = ss[k].V - (d.a + d.b * ss[k].t) * gp[k];
        d.tangential[k] = packs[k].inner(d.W[k], gp[k]);
        d.max_tangential = std::max(d.max_tangential, std::abs(d.tangential[k]));
        d.integral_residual =
            std::max(d.integral_residual, std::abs(d.tangential[k] - d.tangential_integral[k]));
        Vec recon = (d.a + d.b * ss[k].t) * gp[k] + d.W[k];
        d.reconstruction_residual =
            std::max(d.reconstruction_residual, (recon - ss[k].V).lpNorm<Eigen::Infinity>());
    }
    return d;
}

// ---- split system ----------------------------------------------------------

JacobiSolution split_integrate(const TWConnection& conn, const GeodesicPath& path,
                               const Vec& V0, const Vec& V0p, const JacobiOptions& opts) {
    if (conn.tau_mode() == TauMode::user_supplied)
        throw ModeMismatch("split integration requires vanishing pseudo-Hermitian torsion");
    const int n = path.dim();
    StructurePacket s0 = structure_at(conn.chart(), path.samples().front().x);

    Vec Vh0 = s0.pi_h * V0;
    Vec Uh0 = s0.pi_h * V0p;
    FieldIntegrator integ(conn, path, JacobiMode::comparison);
    RichardsonRun rr = integrate_with_monitor(integ, path, Vh0, Uh0, opts);
    const auto& run = rr.run;

    // Vertical component f xi from double quadrature of 2 <J gamma', U_H>.
    size_t m = run.times.size();
    std::vector<double> src(m);
    std::vector<StructurePacket> packs(m);
    std::vector<Vec> gp(m);
    for (size_t k = 0; k < m; ++k) {
        packs[k] = structure_at(conn.chart(), path.position(run.times[k]));
        gp[k] = path.velocity(run.times[k]);
        src[k] = 2.0 * packs[k].inner(packs[k].J * gp[k], run.U[k].col(0));
    }
    // f(t) = f0 + f0p t + int_0^t (t - u) src(u) du; the kernel integral is
    // t*I0 - I1 with I0 = int src, I1 = int u src (trapezoid-refined Simpson
    // on the run grid).
    double f0 = s0.theta_of(V0);
    double f0p = s0.theta_of(V0p);
    std::vector<double> I0(m, 0.0), I1(m, 0.0);
    for (size_t k = 1; k < m; ++k) {
        double h = run.times[k] - run.times[k - 1];
        double tm = 0.5 * (run.times[k - 1] + run.times[k]);
        // midpoint source via linear interpolation of U_H (second order is
        // enough under the double integral; refined below by Richardson of
        // the grid itself)
        double sm = 0.5 * (src[k - 1] + src[k]);
        I0[k] = I0[k - 1] + h / 6.0 * (src[k - 1] + 4.0 * sm + src[k]);
        I1[k] = I1[k - 1] +
                h / 6.0 * (run.times[k - 1] * src[k - 1] + 4.0 * tm * sm + run.times[k] * src[k]);
    }

    std::vector<JacobiSample> samples(m);
    for (size_t k = 0; k < m; ++k) {
        double t = run.times[k];
        double f = f0 + f0p * t + t * I0[k] - I1[k];
        double fp = f0p + I0[k];
        JacobiSample js;
        js.t = t;
        js.V = run.V[k].col(0) + f * packs[k].xi;
        js.U = run.U[k].col(0) + fp * packs[k].xi;
        // Coordinate derivatives for interpolation: dV = U - Gamma(c, V).
        Tensor3 gamma = conn.tw_christoffels(path.position(t));
        js.dV = js.U - gamma.apply(gp[k], js.V);
        Vec rhs = Vec::Zero(n);  // not needed beyond interpolation accuracy
        js.dU = rhs - gamma.apply(gp[k], js.U);
        samples[k] = std::move(js);
    }
    return JacobiSolution(&path, JacobiMode::split, std::move(samples), V0, V0p, rr.estimate);
}

// ---- conjugate search -------------------------------------------------------

namespace {

struct MonitorPoint {
    double t;
    Mat V, U;
    double sigma_min_normalized;
    double det;
};

double normalized_sigma_min(const Mat& N, double* det_out) {
    Eigen::JacobiSVD<Mat> svd(N);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(N.rows() - 1);
    if (det_out) *det_out = N.determinant();
    return smax > 0.0 ? smin / smax : 0.0;
}

}  // namespace

ConjugateSearchResult conjugate_search(const TWConnection& conn, const Vec& p, const Vec& v,
                                       double L_max, const ConjugateSearchOptions& opts) {
    const int n = static_cast<int>(p.size());
    ConjugateSearchResult result;

    IntegrateOptions gopts;
    gopts.step = opts.geodesic_step;
    gopts.clip_to_domain = true;
    GeodesicPath path = integrate_geodesic(conn, p, v, L_max, gopts);
    result.truncated = path.truncated();
    result.searched_length = path.t1();

    JacobiMode mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                : JacobiMode::sasakian;
    FieldIntegrator integ(conn, path, mode);

    int last = integ.node_count() - 1;
    int stride = std::max(1, static_cast<int>(std::llround(opts.jacobi_step / path.node_step())));
    stride = std::min(stride, std::max(1, last / 4));

    // March the full basis V(0)=0, U(0)=I and record monitor data.
    std::vector<MonitorPoint> trace;
    {
        Mat V = Mat::Zero(n, n), U = Mat::Identity(n, n);
        int k = 0;
        while (k < last) {
            int s = std::min(stride, last - k);
            FieldIntegrator::rk4(integ.ops(2 * k), integ.ops(2 * k + s), integ.ops(2 * k + 2 * s),
                                 2.0 * s * (0.5 * path.node_step()), V, U);
            k += s;
            double t = integ.node_time(k);
            MonitorPoint mp;
            mp.t = t;
            mp.V = V;
            mp.U = U;
            mp.sigma_min_normalized = normalized_sigma_min(V / t, &mp.det);
            trace.push_back(std::move(mp));
        }
    }
    for (const auto& mp : trace) result.sigma_trace.push_back({mp.t, mp.sigma_min_normalized});

    // Re-integrate from the state at a monitor point to an arbitrary t.
    auto state_at = [&](const MonitorPoint& from, double t_query, Mat& V, Mat& U) {
        V = from.V;
        U = from.U;
        double span = t_query - from.t;
        if (span <= 0.0) return;
        int sub = std::max(2, static_cast<int>(std::ceil(span / (0.5 * opts.jacobi_step))));
        double h = span / sub;
        for (int j = 0; j < sub; ++j) {
            double ta = from.t + j * h;
            StageOps o1 = integ.ops_at_time(ta);
            StageOps o2 = integ.ops_at_time(ta + 0.5 * h);
            StageOps o3 = integ.ops_at_time(ta + h);
            FieldIntegrator::rk4(o1, o2, o3, h, V, U);
        }
    };
    auto eval = [&](const MonitorPoint& from, double t_query, double* det_out) {
        Mat V, U;
        state_at(from, t_query, V, U);
        return normalized_sigma_min(V / t_query, det_out);
    };

    auto push_conjugate = [&](const MonitorPoint& from, double t_star) {
        Mat V, U;
        state_at(from, t_star, V, U);
        Eigen::JacobiSVD<Mat> svd(V / t_star);
        double smax = svd.singularValues()(0);
        int mult = 0;
        for (int i = 0; i < n; ++i)
            if (svd.singularValues()(i) < opts.singular_threshold * std::max(1.0, smax)) ++mult;
        result.points.push_back({t_star, std::max(1, mult)});
    };

    for (size_t k = 0; k + 1 < trace.size(); ++k) {
        const MonitorPoint& a = trace[k];
        const MonitorPoint& b = trace[k + 1];
        if (a.det * b.det < 0.0) {
            // Bisect the sign change.
            double lo = a.t, hi = b.t, dlo = a.det;
            while (hi - lo > opts.refine_tol) {
                double mid = 0.5 * (lo + hi);
                double dmid;
                eval(a, mid, &dmid);
                if (dlo * dmid <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dmid;
                }
            }
            push_conjugate(a, 0.5 * (lo + hi));
            if (opts.stop_at_first) return result;
        } else if (b.sigma_min_normalized < opts.sigma_dip &&
                   (k + 2 >= trace.size() ||
                    trace[k + 2].sigma_min_normalized > b.sigma_min_normalized)) {
            // Dip without sign change: golden-section refine around b.
            double lo = a.t, hi = (k + 2 < trace.size()) ? trace[k + 2].t : b.t;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = eval(a, x1, nullptr), f2 = eval(a, x2, nullptr);
            while (hi - lo > opts.refine_tol) {
                if (f1 < f2) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = eval(a, x1, nullptr);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + gr * (hi - lo);
                    f2 = eval(a, x2, nullptr);
                }
            }
            double t_star = 0.5 * (lo + hi);
            if (eval(a, t_star, nullptr) < 1e-7) {
                push_conjugate(a, t_star);
                if (opts.stop_at_first) return result;
            }
        }
    }
    return result;
}

// ---- Taylor expansion -------------------------------------------------------

ExpansionReport taylor_expansion_check(const TWConnection& conn, const Vec& p, const Vec& v,
                                       const Vec& w, const ExpansionOptions& opts) {
    StructurePacket s = structure_at(conn.chart(), p);
    if (std::abs(s.norm(v) - 1.0) > 1e-9 || std::abs(s.norm(w) - 1.0) > 1e-9)
        throw Error("expansion check requires unit v, w");
    if (std::abs(s.inner(v, w)) > 1e-9) throw Error("expansion check requires <v,w> = 0");

    ExpansionReport rep;
    Vec Jv = s.J * v;
    rep.c3_predicted = 2.0 * s.inner(Jv, w) * s.theta_of(w);
    Tensor4 R0 = conn.curvature(p);
    rep.c4_predicted = s.inner(Jv, w) * s.inner(Jv, w) -
                       (1.0 / 3.0) * TWConnection::lowered(R0, s.g, w, v, v, w);

    IntegrateOptions gopts;
    gopts.step = std::min(1e-3, opts.t_max / 200.0);
    GeodesicPath path = integrate_geodesic(conn, p, v, opts.t_max, gopts);
    JacobiOptions jopts;
    jopts.step = 2.0 * gopts.step;
    jopts.err_tol_per_unit = 1e-9;
    JacobiMode mode = conn.tau_mode() == TauMode::user_supplied ? JacobiMode::general
                                                                : JacobiMode::sasakian;
    JacobiSolution sol =
        integrate_jacobi(conn, path, Vec::Zero(p.size()), w, mode, jopts);

    // F(t_j) on a geometric grid; weighted fit of c2..c6 in tau = t/t_max.
    const int J = opts.levels;
    Mat M(J, 5);
    Vec rhs(J);
    for (int j = 0; j < J; ++j) {
        double t = opts.t_max * std::pow(opts.ratio, j);
        StructurePacket st = structure_at(conn.chart(), path.position(t));
        Vec V = sol.value(t);
        double F = st.inner(V, V);
        rep.table.push_back({t, F});
        double tau = t / opts.t_max;
        double w0 = 1.0 / (tau * tau);
        for (int k = 0; k < 5; ++k) M(j, k) = w0 * std::pow(tau, k + 2);
        rhs[j] = w0 * F;
    }
    Vec b = M.colPivHouseholderQr().solve(rhs);
    rep.fit_rms = std::sqrt((M * b - rhs).squaredNorm() / J);
    rep.c2 = b[0] / std::pow(opts.t_max, 2);
    rep.c3 = b[1] / std::pow(opts.t_max, 3);
    rep.c4 = b[2] / std::pow(opts.t_max, 4);
    return rep;
}

}  // namespace phgeo
