#pragma once

#include <stdexcept>
#include <string>

namespace phgeo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structure / chart errors.
struct SingularStructure : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct TorsionInvalid : Error { using Error::Error; };
struct ChartBoundary : Error { using Error::Error; };

// Integration errors.
struct LeftDomain : Error {
    double t_exit;
    explicit LeftDomain(double t, const std::string& what = "geodesic left chart domain")
        : Error(what + " at t=" + std::to_string(t)), t_exit(t) {}
};
struct StepTooLarge : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };

// Shooting / optimization errors.
struct NoConvergence : Error {
    int iterations;
    double best_residual;
    NoConvergence(int it, double res)
        : Error("no convergence after " + std::to_string(it) +
                " iterations, best residual " + std::to_string(res)),
          iterations(it), best_residual(res) {}
};
struct SingularJacobian : Error { using Error::Error; };

// Curvature / plane errors.
struct DegeneratePlane : Error { using Error::Error; };
struct NotHorizontal : Error { using Error::Error; };

// Jacobi / variational errors.
struct ModeMismatch : Error { using Error::Error; };
struct NotArcLength : Error { using Error::Error; };
struct NotHeisenberg : Error { using Error::Error; };
struct ConjugatePointPresent : Error { using Error::Error; };

}  // namespace phgeo
