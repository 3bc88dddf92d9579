#pragma once

#include <stdexcept>
#include <string>

namespace dsflow {

/// Profile left the spacelike class (min v^2 fell below the floor).
struct SpacelikeError : std::runtime_error {
    double min_v2;
    explicit SpacelikeError(double v2)
        : std::runtime_error("spacelike condition breached: min v^2 = " + std::to_string(v2)),
          min_v2(v2) {}
};

/// H1 dropped to the parabolicity floor somewhere on the surface.
struct MeanConvexityError : std::runtime_error {
    double min_H1;
    explicit MeanConvexityError(double h1)
        : std::runtime_error("mean convexity lost: min H1 = " + std::to_string(h1)),
          min_H1(h1) {}
};

/// Gauss-map duality requested on a surface that is not strictly convex.
struct NotConvexError : std::runtime_error {
    double min_kappa;
    explicit NotConvexError(double k)
        : std::runtime_error("not strictly convex: min principal curvature = " + std::to_string(k)),
          min_kappa(k) {}
};

/// Configuration file / scenario validation failure.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dsflow
