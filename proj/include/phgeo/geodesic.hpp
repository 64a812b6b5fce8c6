#pragma once

#include <functional>

#include "phgeo/connection.hpp"

namespace phgeo {

struct PathSample {
    double t;
    Vec x;  // position
    Vec v;  // velocity
    Vec a;  // acceleration -Gamma(x)(v,v), kept for C1 velocity interpolation
};

struct IntegrateOptions {
    double step = 1e-3;              // initial affine-parameter step
    double err_tol_per_unit = 1e-8;  // Richardson half-step target
    bool clip_to_domain = false;     // truncate instead of throwing LeftDomain
    int max_halvings = 6;
};

// A densely sampled solution of x'' + Gamma(x)(x',x') = 0 with cubic Hermite
// interpolation between nodes. Immutable after construction.
class GeodesicPath {
  public:
    GeodesicPath(TWConnection conn, std::vector<PathSample> samples, bool truncated,
                 double t_exit);

    const TWConnection& connection() const { return conn_; }
    const std::vector<PathSample>& samples() const { return samples_; }
    double t0() const { return samples_.front().t; }
    double t1() const { return samples_.back().t; }
    double node_step() const { return step_; }
    int dim() const { return static_cast<int>(samples_.front().x.size()); }

    // <gamma'(0), xi> and |gamma'(0)| at launch.
    double slant() const { return slant_; }
    double speed() const { return speed_; }

    bool truncated() const { return truncated_; }
    double t_exit() const { return t_exit_; }

    Vec position(double t) const;
    Vec velocity(double t) const;

    // Index of the last node with node time <= t.
    int node_before(double t) const;

    // Arc length of [t0, t] (speed is constant along a geodesic).
    double arc_length(double t) const { return speed_ * (t - t0()); }

  private:
    TWConnection conn_;
    std::vector<PathSample> samples_;
    double step_;
    double slant_;
    double speed_;
    bool truncated_;
    double t_exit_;
};

// RK4 with a Richardson half-step error monitor; the step is halved until
// the estimate meets err_tol_per_unit or max_halvings is exhausted
// (StepTooLarge). Throws LeftDomain when the path exits the chart box,
// unless clip_to_domain is set.
GeodesicPath integrate_geodesic(const TWConnection& conn, const Vec& p, const Vec& v,
                                double length, const IntegrateOptions& opts = {});

// gamma_v(1).
Vec exp_map(const TWConnection& conn, const Vec& p, const Vec& v,
            const IntegrateOptions& opts = {});

// Solves nabla_{gamma'} W = 0 along the path; returns W at every path node.
std::vector<Vec> parallel_transport(const TWConnection& conn, const GeodesicPath& path,
                                    const Vec& w0);

// Parallel transport along an arbitrary curve given by position and velocity
// callables on [0, T].
std::vector<Vec> parallel_transport_curve(const TWConnection& conn,
                                          const std::function<Vec(double)>& pos,
                                          const std::function<Vec(double)>& vel, double T,
                                          int steps, const Vec& w0);

}  // namespace phgeo
