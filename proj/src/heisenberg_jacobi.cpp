#include "phgeo/heisenberg_jacobi.hpp"

namespace phgeo {

namespace {

// Left-invariant frame (X_1..X_m, Y_1..Y_m, xi) at q, one column each.
Mat left_frame(int m, const Vec& q) {
    const int n = 2 * m + 1;
    Mat P = Mat::Zero(n, n);
    for (int i = 0; i < m; ++i) {
        P(i, i) = 1.0;
        P(n - 1, i) = q[m + i];      // X_i = dx_i + y^i dt
        P(m + i, m + i) = 1.0;
        P(n - 1, m + i) = -q[i];     // Y_i = dy_i - x^i dt
    }
    P(n - 1, n - 1) = 1.0;
    return P;
}

// Frame coefficients of a coordinate vector at q (analytic inverse).
Vec left_coeffs(int m, const Vec& q, const Vec& v) {
    const int n = 2 * m + 1;
    Vec c(n);
    double vert = v[n - 1];
    for (int i = 0; i < m; ++i) {
        c[i] = v[i];
        c[m + i] = v[m + i];
        vert -= q[m + i] * v[i] - q[i] * v[m + i];
    }
    c[n - 1] = vert;
    return c;
}

}  // namespace

HeisenbergJacobiOracle::HeisenbergJacobiOracle(const GeodesicPath& path) : path_(&path) {
    const Chart& chart = path.connection().chart();
    if (!chart.is_heisenberg())
        throw NotHeisenberg("closed-form Jacobi fields require a Heisenberg chart");
    n_ = chart.dim();
    m_ = chart.cr_rank();

    const Vec& p = path.samples().front().x;
    const Vec& v = path.samples().front().v;
    StructurePacket s = structure_at(chart, p);
    c_ = s.inner(v, s.xi);
    Vec vh = v - c_ * s.xi;
    double hn = s.norm(vh);
    Vec jv = s.J * v;
    jnorm_ = s.norm(jv);
    vertical_ = hn < 1e-10 * std::max(1.0, s.norm(v));

    // E_0 = xi, then the adapted horizontal frame, Gram-Schmidt completion
    // over the coordinate-horizontal candidates in coordinate order.
    std::vector<Vec> frame;
    frame.push_back(s.xi);
    if (!vertical_) {
        frame.push_back(jv / jnorm_);
        frame.push_back(vh / hn);
    }
    for (int cand = 0; cand < n_ - 1 && static_cast<int>(frame.size()) < n_; ++cand) {
        Vec e = Vec::Zero(n_);
        e[cand] = 1.0;
        Vec h = s.pi_h * e;
        for (const Vec& f : frame) h -= s.inner(h, f) / s.inner(f, f) * f;
        double norm = s.norm(h);
        if (norm > 1e-8) frame.push_back(h / norm);
    }
    if (static_cast<int>(frame.size()) != n_)
        throw Error("failed to complete the adapted Heisenberg frame");

    frame_coeffs_ = Mat(n_, n_);
    for (int a = 0; a < n_; ++a) frame_coeffs_.col(a) = left_coeffs(m_, p, frame[a]);
}

Mat HeisenbergJacobiOracle::frame(double t) const {
    Vec q = path_->position(t);
    return left_frame(m_, q) * frame_coeffs_;
}

std::pair<Vec, Vec> HeisenbergJacobiOracle::coefficients_from_initial(const Vec& V0,
                                                                      const Vec& V0p) const {
    const Vec& p = path_->samples().front().x;
    StructurePacket s = structure_at(path_->connection().chart(), p);
    Mat E0 = frame(path_->t0());
    Vec a(n_), b(n_);
    for (int A = 0; A < n_; ++A) {
        b[A] = s.inner(V0, E0.col(A));
        a[A] = s.inner(V0p, E0.col(A));
    }
    return {a, b};
}

Vec HeisenbergJacobiOracle::value(const Vec& aA, const Vec& bA, double t) const {
    double tt = t - path_->t0();
    Mat E = frame(t);
    Vec out = Vec::Zero(n_);
    for (int A = 0; A < n_; ++A) {
        double f = aA[A] * tt + bA[A];
        if (A == 0 && !vertical_) f += aA[1] * jnorm_ * tt * tt;
        out += f * E.col(A);
    }
    return out;
}

Vec HeisenbergJacobiOracle::derivative(const Vec& aA, const Vec& bA, double t) const {
    (void)bA;
    double tt = t - path_->t0();
    Mat E = frame(t);
    Vec out = Vec::Zero(n_);
    for (int A = 0; A < n_; ++A) {
        double fp = aA[A];
        if (A == 0 && !vertical_) fp += 2.0 * aA[1] * jnorm_ * tt;
        out += fp * E.col(A);
    }
    return out;
}

}  // namespace phgeo
