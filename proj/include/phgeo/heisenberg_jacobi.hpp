#pragma once

#include "phgeo/jacobi.hpp"

namespace phgeo {

// Closed-form Jacobi fields along Heisenberg geodesics, built from a
// parallel frame adapted to the geodesic: E_0 = xi, and for non-vertical
// geodesics E_1 ~ J gamma'_H, E_2 ~ gamma'_H, the rest completed by
// Gram-Schmidt in coordinate order. Field coefficients are affine except
// the vertical one, which picks up a quadratic term proportional to the
// E_1 slope:
//   f_0(t) = a_1 |J gamma'| t^2 + a_0 t + b_0,   f_i(t) = a_i t + b_i.
// On a vertical geodesic every coefficient is affine. Exact on Heisenberg
// because the adapted frame is left-invariant, hence parallel.
class HeisenbergJacobiOracle {
  public:
    // Throws NotHeisenberg unless the path's chart is a Heisenberg builtin.
    explicit HeisenbergJacobiOracle(const GeodesicPath& path);

    bool vertical() const { return vertical_; }
    double slant() const { return c_; }
    int dim() const { return n_; }

    // Coordinate columns of (E_0 .. E_{2m}) at parameter t.
    Mat frame(double t) const;

    // (a_A, b_A) reproducing the initial data V(0) = V0, nabla V(0) = V0p.
    std::pair<Vec, Vec> coefficients_from_initial(const Vec& V0, const Vec& V0p) const;

    // V(t) in chart coordinates.
    Vec value(const Vec& aA, const Vec& bA, double t) const;

    // nabla_{gamma'} V at t.
    Vec derivative(const Vec& aA, const Vec& bA, double t) const;

  private:
    const GeodesicPath* path_;
    int n_, m_;
    double c_;           // <gamma', xi>
    double jnorm_;       // |J gamma'|
    bool vertical_;
    Mat frame_coeffs_;   // left-invariant coefficients of E_A, one column each
};

}  // namespace phgeo
