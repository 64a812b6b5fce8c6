#include "phgeo/geodesic.hpp"

namespace phgeo {

namespace {

struct State {
    Vec x, v;
};

State rk4_step(const TWConnection& conn, const State& y, double h) {
    auto acc = [&conn](const Vec& x, const Vec& v) { return Vec(-conn.tw_christoffels(x).apply(v, v)); };
    Vec k1x = y.v, k1v = acc(y.x, y.v);
    Vec x2 = y.x + 0.5 * h * k1x, v2 = y.v + 0.5 * h * k1v;
    Vec k2x = v2, k2v = acc(x2, v2);
    Vec x3 = y.x + 0.5 * h * k2x, v3 = y.v + 0.5 * h * k2v;
    Vec k3x = v3, k3v = acc(x3, v3);
    Vec x4 = y.x + h * k3x, v4 = y.v + h * k3v;
    Vec k4x = v4, k4v = acc(x4, v4);
    State out;
    out.x = y.x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    out.v = y.v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    return out;
}

struct RawRun {
    std::vector<PathSample> samples;
    bool exited = false;
    double t_exit = 0.0;
};

RawRun raw_integrate(const TWConnection& conn, const Vec& p, const Vec& v, double length,
                     int steps) {
    const Box& box = conn.chart().domain();
    RawRun run;
    run.samples.reserve(steps + 1);
    double h = length / steps;
    State y{p, v};
    double t = 0.0;
    auto push = [&](double tt, const State& s) {
        PathSample ps;
        ps.t = tt;
        ps.x = s.x;
        ps.v = s.v;
        ps.a = -conn.tw_christoffels(s.x).apply(s.v, s.v);
        run.samples.push_back(std::move(ps));
    };
    push(t, y);
    for (int k = 0; k < steps; ++k) {
        State next = rk4_step(conn, y, h);
        if (!box.contains(next.x)) {
            // Bisect the step to locate the crossing time.
            double lo = 0.0, hi = h;
            State inside = y;
            for (int it = 0; it < 60 && (hi - lo) > 1e-13 * std::max(1.0, h); ++it) {
                double mid = 0.5 * (lo + hi);
                State trial = rk4_step(conn, y, mid);
                if (box.contains(trial.x)) {
                    lo = mid;
                    inside = trial;
                } else {
                    hi = mid;
                }
            }
            run.exited = true;
            run.t_exit = t + lo;
            if (lo > 0.0) push(t + lo, inside);
            return run;
        }
        y = next;
        t += h;
        push(t, y);
    }
    return run;
}

}  // namespace

GeodesicPath::GeodesicPath(TWConnection conn, std::vector<PathSample> samples, bool truncated,
                           double t_exit)
    : conn_(std::move(conn)), samples_(std::move(samples)), truncated_(truncated),
      t_exit_(t_exit) {
    if (samples_.size() < 2) throw Error("geodesic path needs at least two samples");
    step_ = samples_[1].t - samples_[0].t;
    StructurePacket s = structure_at(conn_.chart(), samples_.front().x);
    slant_ = s.inner(samples_.front().v, s.xi);
    speed_ = s.norm(samples_.front().v);
}

int GeodesicPath::node_before(double t) const {
    if (t <= samples_.front().t) return 0;
    int k = static_cast<int>((t - samples_.front().t) / step_);
    k = std::min(k, static_cast<int>(samples_.size()) - 2);
    while (k > 0 && samples_[k].t > t) --k;
    while (k + 2 < static_cast<int>(samples_.size()) && samples_[k + 1].t <= t) ++k;
    return k;
}

namespace {

Vec hermite(const Vec& y0, const Vec& d0, const Vec& y1, const Vec& d1, double h, double s) {
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1;
}

}  // namespace

Vec GeodesicPath::position(double t) const {
    int k = node_before(t);
    const PathSample& a = samples_[k];
    const PathSample& b = samples_[k + 1];
    double h = b.t - a.t;
    return hermite(a.x, a.v, b.x, b.v, h, (t - a.t) / h);
}

Vec GeodesicPath::velocity(double t) const {
    int k = node_before(t);
    const PathSample& a = samples_[k];
    const PathSample& b = samples_[k + 1];
    double h = b.t - a.t;
    return hermite(a.v, a.a, b.v, b.a, h, (t - a.t) / h);
}

GeodesicPath integrate_geodesic(const TWConnection& conn, const Vec& p, const Vec& v,
                                double length, const IntegrateOptions& opts) {
    if (length <= 0.0) throw Error("geodesic length must be positive");
    if (!conn.chart().domain().contains(p)) throw LeftDomain(0.0, "start point outside domain");

    int steps = std::max(2, static_cast<int>(std::ceil(length / opts.step)));
    if (steps % 2) ++steps;

    RawRun coarse = raw_integrate(conn, p, v, length, steps);
    for (int halving = 0;; ++halving) {
        RawRun fine = raw_integrate(conn, p, v, length, 2 * steps);
        // Compare on the common prefix of coarse nodes.
        size_t nc = std::min(coarse.samples.size(), (fine.samples.size() + 1) / 2);
        double err = 0.0;
        for (size_t k = 0; k < nc; ++k) {
            size_t kf = 2 * k;
            if (kf >= fine.samples.size()) break;
            err = std::max(err, (coarse.samples[k].x - fine.samples[kf].x).lpNorm<Eigen::Infinity>());
        }
        double speed = structure_at(conn.chart(), p).norm(v);
        double arc = std::max(1e-12, speed * (fine.samples.back().t - fine.samples.front().t));
        double est = err / 15.0 / std::max(1.0, arc);

        if (est <= opts.err_tol_per_unit || halving >= opts.max_halvings) {
            if (est > opts.err_tol_per_unit)
                throw StepTooLarge("geodesic error estimate " + std::to_string(est) +
                                   " above tolerance at smallest step");
            bool exited = fine.exited;
            double t_exit = fine.t_exit;
            if (exited && !opts.clip_to_domain) throw LeftDomain(t_exit);
            return GeodesicPath(conn, std::move(fine.samples), exited, exited ? t_exit : length);
        }
        steps *= 2;
        coarse = std::move(fine);
    }
}

Vec exp_map(const TWConnection& conn, const Vec& p, const Vec& v, const IntegrateOptions& opts) {
    if (v.lpNorm<Eigen::Infinity>() < 1e-15) return p;
    GeodesicPath path = integrate_geodesic(conn, p, v, 1.0, opts);
    return path.samples().back().x;
}

namespace {

// RK4 for the linear transport system W' = -Gamma(x(t))(c(t), W) using
// exact node data: steps span pairs of path nodes so every stage lands on
// a node.
std::vector<Vec> transport_on_nodes(const TWConnection& conn,
                                    const std::vector<Vec>& xs, const std::vector<Vec>& cs,
                                    double h2, const Vec& w0) {
    size_t n_nodes = xs.size();
    std::vector<Mat> A(n_nodes);
    for (size_t k = 0; k < n_nodes; ++k)
        A[k] = -conn.tw_christoffels(xs[k]).apply_left(cs[k]);

    std::vector<Vec> out;
    out.reserve(n_nodes);
    Vec w = w0;
    out.push_back(w);

    // Single RK4 step over [j, j+1] with the midpoint operator interpolated
    // from the endpoints (fourth-order for a linear system).
    auto half_step = [&](size_t j, const Vec& win) {
        Mat Am = 0.5 * (A[j] + A[j + 1]);
        Vec k1 = A[j] * win;
        Vec k2 = Am * (win + 0.5 * h2 * k1);
        Vec k3 = Am * (win + 0.5 * h2 * k2);
        Vec k4 = A[j + 1] * (win + h2 * k3);
        return Vec(win + (h2 / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };

    size_t k = 0;
    while (k + 2 <= n_nodes - 1) {
        // Double step: every stage lands on a node, no operator interpolation.
        double h = 2.0 * h2;
        Vec k1 = A[k] * w;
        Vec k2 = A[k + 1] * (w + 0.5 * h * k1);
        Vec k3 = A[k + 1] * (w + 0.5 * h * k2);
        Vec k4 = A[k + 2] * (w + h * k3);
        Vec w_next = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(half_step(k, w));
        out.push_back(w_next);
        w = w_next;
        k += 2;
    }
    while (out.size() < n_nodes) {
        w = half_step(out.size() - 1, w);
        out.push_back(w);
    }
    return out;
}

}  // namespace

std::vector<Vec> parallel_transport(const TWConnection& conn, const GeodesicPath& path,
                                    const Vec& w0) {
    const auto& ss = path.samples();
    std::vector<Vec> xs(ss.size()), cs(ss.size());
    for (size_t k = 0; k < ss.size(); ++k) {
        xs[k] = ss[k].x;
        cs[k] = ss[k].v;
    }
    return transport_on_nodes(conn, xs, cs, path.node_step(), w0);
}

std::vector<Vec> parallel_transport_curve(const TWConnection& conn,
                                          const std::function<Vec(double)>& pos,
                                          const std::function<Vec(double)>& vel, double T,
                                          int steps, const Vec& w0) {
    if (steps % 2) ++steps;
    double h2 = T / steps;
    std::vector<Vec> xs(steps + 1), cs(steps + 1);
    for (int k = 0; k <= steps; ++k) {
        xs[k] = pos(h2 * k);
        cs[k] = vel(h2 * k);
    }
    return transport_on_nodes(conn, xs, cs, h2, w0);
}

}  // namespace phgeo
