#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

/// Adjacent facets whose normals are closer than this to (anti)parallel make
/// csc/cot unusable.
inline constexpr double kParallelGuard = 1e-12;

struct FacetWeight {
    int index = 0;
    double weight = 0.0;
};

/// S_P = Σ |F_i| δ_{u_i}, nonempty facets only.
inline std::vector<FacetWeight> surface_measure(const PolytopeGeometry& geom) {
    std::vector<FacetWeight> out;
    for (int i = 0; i < geom.size(); ++i) {
        if (!geom.facet_empty(i)) out.push_back({i, geom.facet_measure(i)});
    }
    return out;
}

/// V(Q, P[n-1]) = (1/n) Σ h_i(Q) |F_i(P)|. Exact when the h_i(Q) are support
/// values of Q, in particular when Q is strongly isomorphic to P.
inline double mixed_volume_1(const SupportVector& q, const PolytopeGeometry& p) {
    require_same_normals(q, p.source(), "mixed_volume_1");
    double sum = 0.0;
    for (int i = 0; i < p.size(); ++i) sum += q.height(i) * p.facet_measure(i);
    return sum / p.dim();
}

/// Γ_ij = csc θ_ij |F_ij| on ridges, Γ_ii = -Σ_k cot θ_ik |F_ik|, 0 otherwise.
struct GammaMatrix {
    Eigen::MatrixXd entries;

    [[nodiscard]] double operator()(int i, int j) const { return entries(i, j); }
    [[nodiscard]] Eigen::Index size() const { return entries.rows(); }

    [[nodiscard]] double quadratic(const Eigen::VectorXd& x) const { return x.dot(entries * x); }
};

inline void require_all_facets(const PolytopeGeometry& geom, const char* context) {
    for (int i = 0; i < geom.size(); ++i) {
        if (geom.facet_empty(i)) {
            throw Error(ErrorCode::EmptyFacet, std::string(context) + ": facet " + std::to_string(i) + " is empty");
        }
    }
}

inline GammaMatrix gamma_matrix(const PolytopeGeometry& geom) {
    require_all_facets(geom, "gamma_matrix");
    const int n_facets = geom.size();
    GammaMatrix gamma{Eigen::MatrixXd::Zero(n_facets, n_facets)};
    for (const Ridge& r : geom.ridges()) {
        if (std::abs(r.cos_angle) > 1.0 - kParallelGuard) {
            throw Error(ErrorCode::NearParallelFacets, "facets " + std::to_string(r.i) + " and " +
                                                           std::to_string(r.j) + " are adjacent and nearly parallel");
        }
        const double sine = std::sqrt((1.0 - r.cos_angle) * (1.0 + r.cos_angle));
        const double csc = 1.0 / sine;
        const double cot = r.cos_angle / sine;
        gamma.entries(r.i, r.j) = csc * r.measure;
        gamma.entries(r.j, r.i) = csc * r.measure;
        gamma.entries(r.i, r.i) -= cot * r.measure;
        gamma.entries(r.j, r.j) -= cot * r.measure;
    }
    return gamma;
}

/// V(Q[2], P[n-2]) = (1/(n(n-1))) Σ_ij h_i(Q) h_j(Q) Γ_ij(P).
inline double mixed_volume_2(const SupportVector& q, const PolytopeGeometry& p, const GammaMatrix& gamma) {
    require_same_normals(q, p.source(), "mixed_volume_2");
    const int n = p.dim();
    return gamma.quadratic(q.height_vector()) / (n * (n - 1));
}

inline double mixed_volume_2(const SupportVector& q, const PolytopeGeometry& p) {
    return mixed_volume_2(q, p, gamma_matrix(p));
}

/// ∫ h_L^2 / h_K dS_K = Σ_i h_L(u_i)^2 / h_K(u_i) |F_i(K)|.
inline double weighted_integral(const SupportVector& l, const PolytopeGeometry& k) {
    require_same_normals(l, k.source(), "weighted_integral");
    double sum = 0.0;
    for (int i = 0; i < k.size(); ++i) {
        if (k.facet_empty(i)) continue;
        sum += l.height(i) * l.height(i) / k.source().height(i) * k.facet_measure(i);
    }
    return sum;
}

/// V(Q[k], P[n-k]) read off the polynomial t -> vol(P + tQ), interpolated
/// exactly at t = 0..n. P + tQ has support vector h_P + t h_Q because the two
/// bodies are strongly isomorphic.
inline double mixed_volume_oracle(const SupportVector& q, const SupportVector& p, int k,
                                  double tol = kDefaultFacetTolerance) {
    require_same_normals(q, p, "mixed_volume_oracle");
    const int n = p.dim();
    if (k < 0 || k > n) throw Error(ErrorCode::BadParameter, "mixed_volume_oracle: k must lie in [0, n]");
    Eigen::MatrixXd vandermonde(n + 1, n + 1);
    Eigen::VectorXd volumes(n + 1);
    for (int t = 0; t <= n; ++t) {
        std::vector<double> h(static_cast<std::size_t>(p.size()));
        for (int i = 0; i < p.size(); ++i) h[static_cast<std::size_t>(i)] = p.height(i) + t * q.height(i);
        volumes[t] = enumerate_geometry(p.with_heights(std::move(h)), tol).volume();
        for (int d = 0; d <= n; ++d) vandermonde(t, d) = std::pow(static_cast<double>(t), d);
    }
    const Eigen::VectorXd coeffs = vandermonde.fullPivLu().solve(volumes);
    double binom = 1.0;
    for (int d = 1; d <= k; ++d) binom = binom * (n - d + 1) / d;
    return coeffs[k] / binom;
}

}  // namespace lpbm
