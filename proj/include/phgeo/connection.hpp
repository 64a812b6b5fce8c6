#pragma once

#include <functional>
#include <optional>

#include "phgeo/structure.hpp"

namespace phgeo {

enum class TauMode { sasakian_zero, user_supplied };

// Pseudo-Hermitian torsion endomorphism field, tau(X) = T(xi, X).
using TauField = std::function<Mat(const Vec&)>;

struct ConnectionAxiomResiduals {
    double horizontality = 0.0;   // theta-component of nabla of a horizontal field
    double metric = 0.0;          // nabla g
    double complex_structure = 0.0;  // nabla J
    double reeb = 0.0;            // nabla xi
    double torsion_formula = 0.0; // Gamma antisymmetrization vs torsion formula
    double torsion_purity = 0.0;  // horizontal part of T on H x H
    double tau_reeb = 0.0;        // tau(xi)
    double tau_purity = 0.0;      // tau J + J tau on H
    double max() const {
        return std::max({horizontality, metric, complex_structure, reeb, torsion_formula,
                         torsion_purity, tau_reeb, tau_purity});
    }
};

// The canonical connection of a chart: preserves the contact planes, the
// Webster metric and J, and has pure torsion
//   T(X,Y) = theta(X) tau(Y) - theta(Y) tau(X) + 2 dtheta(X,Y) xi.
// Built from the Levi-Civita connection of the Webster metric plus the
// algebraic correction
//   nabla_X Y = nabla^g_X Y + (dtheta(X,Y) + A(X,Y)) xi
//               - theta(Y) tau(X) - theta(X) JY - theta(Y) JX,
// where A(X,Y) = g(tau X, Y). Immutable and safe to share across threads.
class TWConnection {
  public:
    explicit TWConnection(ChartPtr chart, TauField tau = nullptr);

    const Chart& chart() const { return *chart_; }
    ChartPtr chart_ptr() const { return chart_; }
    TauMode tau_mode() const { return mode_; }

    StructurePacket structure(const Vec& p) const { return structure_at(*chart_, p); }

    Mat tau_matrix(const Vec& p) const;

    // Levi-Civita coefficients of the Webster metric; symmetric in the
    // lower indices by construction.
    Tensor3 levi_civita_christoffels(const Vec& p) const;

    Tensor3 tw_christoffels(const Vec& p) const;

    // The Levi-Civita coefficients reassembled from the canonical connection
    // (inverting the correction term); compared against the direct
    // computation in tests.
    Tensor3 reassembled_levi_civita(const Vec& p) const;

    Vec torsion(const Vec& p, const Vec& X, const Vec& Y) const;

    Tensor4 curvature(const Vec& p) const;

    // K^H = <R(X,Y)Y,X> / (|X|^2 |Y|^2 - <X,Y>^2) for a horizontal 2-plane.
    double horizontal_sectional_curvature(const Vec& p, const Vec& X, const Vec& Y) const;

    // Ric(Y,Z) = trace{ X -> R(X,Z)Y }.
    double ricci(const Vec& p, const Vec& Y, const Vec& Z) const;
    double ricci(const Tensor4& R, const Vec& Y, const Vec& Z) const;

    // Lowered curvature <R(X,Y)Z,W> at a point with precomputed R and metric.
    static double lowered(const Tensor4& R, const Mat& g, const Vec& X, const Vec& Y,
                          const Vec& Z, const Vec& W);

    ConnectionAxiomResiduals axiom_residuals(const Vec& p, unsigned probe_seed = 0) const;

    // Step sizes for the internal finite differencing (scaled by |p|).
    struct FdSteps {
        double metric = 1e-3;
        double christoffel = 2e-3;
    };
    const FdSteps& fd_steps() const { return fd_; }

  private:
    ChartPtr chart_;
    TauField tau_;
    TauMode mode_;
    FdSteps fd_;
};

// Validates a user-supplied torsion candidate at sample points: tau(xi) = 0,
// A symmetric, trace-free, tau J + J tau = 0 on the contact planes.
// Throws TorsionInvalid with a description of the first violated property.
void validate_tau(const Chart& chart, const TauField& tau, int samples = 25,
                  double tol = 1e-8);

}  // namespace phgeo
