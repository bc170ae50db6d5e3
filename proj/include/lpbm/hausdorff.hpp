#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lpbm/detail/rng.hpp"
#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"

namespace lpbm {

/// Deterministic, roughly uniform directions on S^{n-1}: evenly spaced angles in
/// the plane, a Fibonacci lattice in R^3, fixed-seed Gaussian draws in R^4.
inline std::vector<Eigen::VectorXd> sphere_directions(int dim, int count) {
    std::vector<Eigen::VectorXd> out;
    if (count <= 0) return out;
    out.reserve(static_cast<std::size_t>(count));
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * (k + 0.5) / count;
            Eigen::VectorXd u(2);
            u << std::cos(t), std::sin(t);
            out.push_back(u);
        }
    } else if (dim == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Eigen::VectorXd u(3);
            u << r * std::cos(golden * k), r * std::sin(golden * k), z;
            out.push_back(u);
        }
    } else {
        detail::Rng rng(0x5eed5eedULL);
        for (int k = 0; k < count; ++k) out.push_back(rng.unit_vector(dim));
    }
    return out;
}

/// Sup-norm of h_A - h_B over the facet normals and vertex directions of both
/// bodies plus `samples` sphere points. The difference is piecewise linear, so
/// this is a sampled estimate of the Hausdorff distance.
inline double hausdorff_distance_upper(const SupportVector& a, const SupportVector& b, int samples = 256) {
    if (a.dim() != b.dim()) throw Error(ErrorCode::BadParameter, "hausdorff_distance_upper: dimension mismatch");
    const PolytopeGeometry ga = enumerate_geometry(a);
    const PolytopeGeometry gb = enumerate_geometry(b);

    std::vector<Eigen::VectorXd> directions = sphere_directions(a.dim(), samples);
    for (const auto* sv : {&a, &b}) {
        for (const auto& u : sv->normals()) directions.push_back(u);
    }
    for (const auto* g : {&ga, &gb}) {
        for (const auto& v : g->vertices()) {
            if (v.norm() > 0.0) directions.push_back(v.normalized());
        }
    }
    double best = 0.0;
    for (const auto& u : directions) best = std::max(best, std::abs(ga.support_value(u) - gb.support_value(u)));
    return best;
}

}  // namespace lpbm
