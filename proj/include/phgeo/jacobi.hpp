#pragma once

#include "phgeo/geodesic.hpp"

namespace phgeo {

enum class JacobiMode {
    general,     // full torsion-augmented equation (user-supplied tau charts)
    sasakian,    // V'' = R(g',V)g' + 2<Jg', V'> xi
    split,       // horizontal block then vertical quadrature, assembled
    comparison,  // V'' = R(g',V)g'  (index-form comparison equation)
};

struct JacobiSample {
    double t;
    Vec V;   // field value
    Vec U;   // covariant derivative along the geodesic
    Vec dV;  // coordinate t-derivatives, for interpolation
    Vec dU;
};

struct JacobiOptions {
    double step = 5e-3;              // target parameter step (snapped to path nodes)
    double err_tol_per_unit = 1e-7;  // Richardson half-step target
};

class JacobiSolution {
  public:
    JacobiSolution(const GeodesicPath* path, JacobiMode mode, std::vector<JacobiSample> samples,
                   Vec V0, Vec U0, double err_estimate);

    const GeodesicPath& path() const { return *path_; }
    JacobiMode mode() const { return mode_; }
    const std::vector<JacobiSample>& samples() const { return samples_; }
    const Vec& initial_value() const { return V0_; }
    const Vec& initial_derivative() const { return U0_; }
    double error_estimate() const { return err_; }

    Vec value(double t) const;       // V(t)
    Vec derivative(double t) const;  // nabla_{gamma'} V at t

  private:
    const GeodesicPath* path_;
    JacobiMode mode_;
    std::vector<JacobiSample> samples_;
    Vec V0_, U0_;
    double err_;
    double step_;
};

// Second-order field equation along a geodesic, integrated with RK4 on a
// grid aligned with the path nodes (stages land on stored node data).
// ModeMismatch when the mode needs torsion data the connection lacks or
// vice versa.
JacobiSolution integrate_jacobi(const TWConnection& conn, const GeodesicPath& path,
                                const Vec& V0, const Vec& V0p, JacobiMode mode,
                                const JacobiOptions& opts = {});

// (d exp_p)_{tv}(t w): the field with V(0)=0, V'(0)=w evaluated at t.
Vec dexp(const TWConnection& conn, const Vec& p, const Vec& v, const Vec& w, double t,
         const IntegrateOptions& geo_opts = {}, const JacobiOptions& jac_opts = {});

// Matrix of (d exp_p)_{t v} in chart coordinates: columns V_j(t)/t for the
// canonical initial derivatives e_j. Singular exactly at conjugate points.
Mat dexp_jacobian(const TWConnection& conn, const GeodesicPath& path, double t,
                  const JacobiOptions& opts = {});

// ---- tangential decomposition ------------------------------------------

struct JacobiDecomposition {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> times;
    std::vector<Vec> W;                     // V - (a + b t) gamma'
    std::vector<double> tangential;         // <W, gamma'>(t)
    std::vector<double> tangential_integral;  // 2 <xi,gamma'> int_0^t <V, J gamma'>
    double reconstruction_residual = 0.0;   // | V - (a+bt) gamma' - W |
    double integral_residual = 0.0;         // tangential vs integral
    double max_tangential = 0.0;
};

// V = (a + b t) gamma' + W with a, b read off the initial data; the
// tangential component of W is reproduced by the slant-weighted integral
// of <V, J gamma'>. Requires an arc-length Sasakian solution.
JacobiDecomposition decompose(const JacobiSolution& solution);

// ---- split system --------------------------------------------------------

// Integrates the horizontal block V_H'' = R(g',V_H)g' by RK4 and the
// vertical component by double quadrature of 2<Jg', V_H'>; assembled result
// solves the same equation as the sasakian mode.
JacobiSolution split_integrate(const TWConnection& conn, const GeodesicPath& path,
                               const Vec& V0, const Vec& V0p, const JacobiOptions& opts = {});

// ---- conjugate points -----------------------------------------------------

struct ConjugatePoint {
    double t;
    int multiplicity;
};

struct ConjugateSearchResult {
    std::vector<ConjugatePoint> points;
    std::vector<std::pair<double, double>> sigma_trace;  // (t, sigma_min of dexp)
    double searched_length = 0.0;
    bool truncated = false;  // search stopped at the chart boundary
};

struct ConjugateSearchOptions {
    double geodesic_step = 5e-3;
    double jacobi_step = 5e-2;
    double refine_tol = 1e-8;       // bisection tolerance on t*
    double sigma_dip = 1e-4;        // normalized sigma_min triggering refinement
    double singular_threshold = 1e-6;  // multiplicity count threshold
    bool stop_at_first = false;
};

// Integrates the full basis of fields vanishing at t=0 and locates the
// parameters where the dexp matrix drops rank: sign changes of det are
// bisected, dips of sigma_min without a sign change are refined by golden
// section (even multiplicity).
ConjugateSearchResult conjugate_search(const TWConnection& conn, const Vec& p, const Vec& v,
                                       double L_max, const ConjugateSearchOptions& opts = {});

// ---- Taylor expansion of |dexp(tw)|^2 -------------------------------------

struct ExpansionReport {
    double c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double c2_predicted = 1.0;
    double c3_predicted = 0.0;  // 2 <Jv,w><xi,w>
    double c4_predicted = 0.0;  // <Jv,w>^2 - (1/3) <R(w,v)v,w>
    double fit_rms = 0.0;       // weighted residual of the polynomial fit
    std::vector<std::pair<double, double>> table;  // (t, |V(t)|^2)
};

struct ExpansionOptions {
    double t_max = 0.4;
    double ratio = 0.78;
    int levels = 16;
};

// Fits |(d exp)_{tv}(tw)|^2 = c2 t^2 + c3 t^3 + c4 t^4 + O(t^5) on a
// geometric grid and compares with the curvature/torsion predictions.
// Requires |v| = |w| = 1 and <v,w> = 0.
ExpansionReport taylor_expansion_check(const TWConnection& conn, const Vec& p, const Vec& v,
                                       const Vec& w, const ExpansionOptions& opts = {});

}  // namespace phgeo
