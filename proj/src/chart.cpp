#include "phgeo/chart.hpp"

namespace phgeo {

void Chart::require_evaluable(const Vec& p) const {
    // Allow a stencil margin beyond the advertised box; integrators enforce
    // the strict box themselves.
    double slack = 0.25 * (domain_.hi - domain_.lo).lpNorm<Eigen::Infinity>();
    if (!domain_.contains(p, slack))
        throw ChartBoundary("point outside chart '" + name_ + "' evaluation region");
}

Mat Chart::dtheta(const Vec& p) const {
    const double h = fd::scaled_step(mode_.fd_step, p);
    const int n = dim_;
    Mat grad(n, n);  // grad(i,j) = d_i theta_j
    auto th = [this](const Vec& q) { return theta(q); };
    for (int i = 0; i < n; ++i) grad.row(i) = fd::partial4(th, p, i, h).transpose();
    return 0.5 * (grad - grad.transpose());
}

}  // namespace phgeo
