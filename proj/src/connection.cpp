#include "phgeo/connection.hpp"

#include <random>

namespace phgeo {

namespace {

// Fourth-order central difference of the metric field along every axis;
// out[l] = d_l g.
std::vector<Mat> metric_gradient(const Chart& chart, const Vec& p, double step) {
    const int n = chart.dim();
    const double h = fd::scaled_step(step, p);
    auto gf = [&chart](const Vec& q) { return structure_at(chart, q).g; };
    std::vector<Mat> dg(n);
    for (int l = 0; l < n; ++l) dg[l] = fd::partial4_mat(gf, p, l, h);
    return dg;
}

}  // namespace

TWConnection::TWConnection(ChartPtr chart, TauField tau)
    : chart_(std::move(chart)), tau_(std::move(tau)),
      mode_(tau_ ? TauMode::user_supplied : TauMode::sasakian_zero) {}

Mat TWConnection::tau_matrix(const Vec& p) const {
    if (!tau_) return Mat::Zero(chart_->dim(), chart_->dim());
    return tau_(p);
}

Tensor3 TWConnection::levi_civita_christoffels(const Vec& p) const {
    const int n = chart_->dim();
    StructurePacket s = structure_at(*chart_, p);
    std::vector<Mat> dg = metric_gradient(*chart_, p, fd_.metric);

    Tensor3 gamma(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double sum = 0.0;
                for (int l = 0; l < n; ++l)
                    sum += s.g_inv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
                gamma(k, i, j) = 0.5 * sum;
                gamma(k, j, i) = gamma(k, i, j);
            }
    return gamma;
}

Tensor3 TWConnection::tw_christoffels(const Vec& p) const {
    const int n = chart_->dim();
    StructurePacket s = structure_at(*chart_, p);
    Mat tau = tau_matrix(p);
    Mat A = tau.transpose() * s.g;  // A(e_i, e_j) = g(tau e_i, e_j)

    Tensor3 gamma = levi_civita_christoffels(p);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                gamma(k, i, j) += (s.dtheta(i, j) + A(i, j)) * s.xi[k] -
                                  s.theta[j] * tau(k, i) - s.theta[i] * s.J(k, j) -
                                  s.theta[j] * s.J(k, i);
    return gamma;
}

Tensor3 TWConnection::reassembled_levi_civita(const Vec& p) const {
    const int n = chart_->dim();
    StructurePacket s = structure_at(*chart_, p);
    Mat tau = tau_matrix(p);
    Mat A = tau.transpose() * s.g;

    Tensor3 gamma = tw_christoffels(p);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                gamma(k, i, j) -= (s.dtheta(i, j) + A(i, j)) * s.xi[k] -
                                  s.theta[j] * tau(k, i) - s.theta[i] * s.J(k, j) -
                                  s.theta[j] * s.J(k, i);
    return gamma;
}

Vec TWConnection::torsion(const Vec& p, const Vec& X, const Vec& Y) const {
    StructurePacket s = structure_at(*chart_, p);
    Mat tau = tau_matrix(p);
    return s.theta_of(X) * (tau * Y) - s.theta_of(Y) * (tau * X) +
           2.0 * s.dtheta_of(X, Y) * s.xi;
}

Tensor4 TWConnection::curvature(const Vec& p) const {
    const int n = chart_->dim();
    const double h = fd::scaled_step(fd_.christoffel, p);

    Tensor3 g0 = tw_christoffels(p);
    // dGamma[i] = d_i Gamma (fourth-order central differences).
    std::vector<Tensor3> dgamma(n, Tensor3(n));
    for (int axis = 0; axis < n; ++axis) {
        Vec e = Vec::Zero(n);
        e[axis] = 1.0;
        Tensor3 gp1 = tw_christoffels(p + h * e);
        Tensor3 gm1 = tw_christoffels(p - h * e);
        Tensor3 gp2 = tw_christoffels(p + 2.0 * h * e);
        Tensor3 gm2 = tw_christoffels(p - 2.0 * h * e);
        Tensor3& out = dgamma[axis];
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    out(k, i, j) = (8.0 * (gp1(k, i, j) - gm1(k, i, j)) -
                                    (gp2(k, i, j) - gm2(k, i, j))) /
                                   (12.0 * h);
    }

    // R(l,i,j,k): component l of R(e_i,e_j)e_k
    //   = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    //     + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}.
    Tensor4 R(n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = dgamma[i](l, j, k) - dgamma[j](l, i, k);
                    for (int m = 0; m < n; ++m)
                        v += g0(l, i, m) * g0(m, j, k) - g0(l, j, m) * g0(m, i, k);
                    R(l, i, j, k) = v;
                }
    return R;
}

double TWConnection::lowered(const Tensor4& R, const Mat& g, const Vec& X, const Vec& Y,
                             const Vec& Z, const Vec& W) {
    return W.dot(g * R.apply(X, Y, Z));
}

double TWConnection::horizontal_sectional_curvature(const Vec& p, const Vec& X,
                                                    const Vec& Y) const {
    StructurePacket s = structure_at(*chart_, p);
    double scale = std::max(X.norm(), Y.norm());
    if (std::abs(s.theta_of(X)) > 1e-9 * scale || std::abs(s.theta_of(Y)) > 1e-9 * scale)
        throw NotHorizontal("sectional curvature arguments must be horizontal");

    double xx = s.inner(X, X), yy = s.inner(Y, Y), xy = s.inner(X, Y);
    double area2 = xx * yy - xy * xy;
    if (area2 < 1e-12 * std::max(1.0, xx * yy))
        throw DegeneratePlane("horizontal plane is degenerate");

    Tensor4 R = curvature(p);
    return lowered(R, s.g, X, Y, Y, X) / area2;
}

double TWConnection::ricci(const Tensor4& R, const Vec& Y, const Vec& Z) const {
    const int n = R.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) s += R(i, i, j, k) * Z[j] * Y[k];
    return s;
}

double TWConnection::ricci(const Vec& p, const Vec& Y, const Vec& Z) const {
    return ricci(curvature(p), Y, Z);
}

ConnectionAxiomResiduals TWConnection::axiom_residuals(const Vec& p, unsigned probe_seed) const {
    const int n = chart_->dim();
    ConnectionAxiomResiduals out;
    StructurePacket s = structure_at(*chart_, p);
    Tensor3 gamma = tw_christoffels(p);
    Mat tau = tau_matrix(p);

    std::mt19937_64 rng(probe_seed * 2654435761ull + 12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto rand_vec = [&]() {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };

    // Independent stencil (deliberately different step) for the derivative
    // fields entering the axiom checks.
    const double h = fd::scaled_step(1.7e-3, p);

    // (ii) nabla g.
    auto gf = [this](const Vec& q) { return structure_at(*chart_, q).g; };
    for (int k = 0; k < n; ++k) {
        Mat dgk = fd::partial4_mat(gf, p, k, h);
        Mat res = dgk;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double c = 0.0;
                for (int m = 0; m < n; ++m)
                    c += gamma(m, k, i) * s.g(m, j) + gamma(m, k, j) * s.g(i, m);
                res(i, j) -= c;
            }
        out.metric = std::max(out.metric, res.lpNorm<Eigen::Infinity>());
    }

    // (ii) nabla J.
    auto jf = [this](const Vec& q) { return chart_->complex_structure(q); };
    for (int k = 0; k < n; ++k) {
        Mat djk = fd::partial4_mat(jf, p, k, h);
        Mat res = djk;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double c = 0.0;
                for (int m = 0; m < n; ++m)
                    c += gamma(i, k, m) * s.J(m, j) - s.J(i, m) * gamma(m, k, j);
                res(i, j) += c;
            }
        out.complex_structure = std::max(out.complex_structure, res.lpNorm<Eigen::Infinity>());
    }

    // (ii) nabla xi.
    auto xf = [this](const Vec& q) { return structure_at(*chart_, q).xi; };
    for (int k = 0; k < n; ++k) {
        Vec dxk = fd::partial4(xf, p, k, h);
        Vec res = dxk;
        for (int i = 0; i < n; ++i) {
            double c = 0.0;
            for (int m = 0; m < n; ++m) c += gamma(i, k, m) * s.xi[m];
            res[i] += c;
        }
        out.reeb = std::max(out.reeb, res.lpNorm<Eigen::Infinity>());
    }

    // (i) horizontality: nabla of the horizontal projection of a fixed vector.
    for (int probe = 0; probe < 3; ++probe) {
        Vec w = rand_vec();
        auto yf = [this, &w](const Vec& q) {
            StructurePacket sq = structure_at(*chart_, q);
            return Vec(sq.pi_h * w);
        };
        Vec y0 = s.pi_h * w;
        for (int k = 0; k < n; ++k) {
            Vec dy = fd::partial4(yf, p, k, h);
            Vec cov = dy;
            for (int i = 0; i < n; ++i) {
                double c = 0.0;
                for (int m = 0; m < n; ++m) c += gamma(i, k, m) * y0[m];
                cov[i] += c;
            }
            out.horizontality =
                std::max(out.horizontality, std::abs(s.theta_of(cov)) / std::max(1.0, cov.norm()));
        }
    }

    // (iii) torsion: Gamma antisymmetrization against the torsion formula,
    // purity of the horizontal part, and the tau conditions.
    for (int probe = 0; probe < 4; ++probe) {
        Vec X = rand_vec(), Y = rand_vec();
        Vec t_gamma = Vec::Zero(n);
        for (int k = 0; k < n; ++k) {
            double c = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) c += (gamma(k, i, j) - gamma(k, j, i)) * X[i] * Y[j];
            t_gamma[k] = c;
        }
        Vec t_formula = s.theta_of(X) * (tau * Y) - s.theta_of(Y) * (tau * X) +
                        2.0 * s.dtheta_of(X, Y) * s.xi;
        out.torsion_formula =
            std::max(out.torsion_formula, (t_gamma - t_formula).lpNorm<Eigen::Infinity>());

        Vec Xh = s.pi_h * X, Yh = s.pi_h * Y;
        Vec t_h = Vec::Zero(n);
        for (int k = 0; k < n; ++k) {
            double c = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    c += (gamma(k, i, j) - gamma(k, j, i)) * Xh[i] * Yh[j];
            t_h[k] = c;
        }
        out.torsion_purity =
            std::max(out.torsion_purity, (s.pi_h * t_h).lpNorm<Eigen::Infinity>());
    }
    out.tau_reeb = (tau * s.xi).lpNorm<Eigen::Infinity>();
    out.tau_purity = (s.pi_h * (tau * s.J + s.J * tau) * s.pi_h).lpNorm<Eigen::Infinity>();
    return out;
}

void validate_tau(const Chart& chart, const TauField& tau, int samples, double tol) {
    for (const Vec& p : halton_points(chart.domain(), samples, 0.5)) {
        StructurePacket s = structure_at(chart, p);
        Mat t = tau(p);
        if ((t * s.xi).lpNorm<Eigen::Infinity>() > tol)
            throw TorsionInvalid("tau(xi) != 0");
        Mat A = t.transpose() * s.g;
        if ((A - A.transpose()).lpNorm<Eigen::Infinity>() > tol)
            throw TorsionInvalid("A(X,Y) = g(tau X, Y) is not symmetric");
        if (std::abs(t.trace()) > tol) throw TorsionInvalid("tau is not trace-free");
        Mat purity = s.pi_h * (t * s.J + s.J * t) * s.pi_h;
        if (purity.lpNorm<Eigen::Infinity>() > tol)
            throw TorsionInvalid("tau J + J tau != 0 on the contact planes");
    }
}

}  // namespace phgeo
