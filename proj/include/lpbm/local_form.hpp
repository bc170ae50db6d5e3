#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/lp_combine.hpp"
#include "lpbm/mixed_volumes.hpp"

namespace lpbm {

inline constexpr double kDefaultNsdTolerance = 1e-9;
inline constexpr double kDefaultLocalTolerance = 1e-9;

/// Outcome of a local check. Fields not produced by a given check stay empty.
struct LocalVerdict {
    std::optional<double> lhs;
    double scale = 0.0;  // n(n-p) V(L, K[n-1])^2 when lhs is set
    std::optional<double> max_eigenvalue;
    std::optional<double> near_zero_eigenvalue;
    int kernel_multiplicity = 0;
    double kernel_residual = 0.0;
    double frobenius_norm = 0.0;
    std::optional<double> bonnesen_max;  // largest pointwise Bonnesen value (plane only)
    bool passed = false;
    double p = 0.0;
    double lambda = 0.0;
    double tol = 0.0;
};

/// vol(K) (n(n-1) V(L[2],K[n-2]) + (1-p) ∫ h_L^2/h_K dS_K) - n(n-p) V(L,K[n-1])^2.
/// The local L^p-Brunn-Minkowski inequality asserts this is <= 0.
inline double local_lhs(const PolytopeGeometry& k, const SupportVector& l, double p) {
    detail::check_p(p);
    const int n = k.dim();
    const double v1 = mixed_volume_1(l, k);
    const double v2 = mixed_volume_2(l, k);
    const double w = weighted_integral(l, k);
    return k.volume() * (n * (n - 1) * v2 + (1.0 - p) * w) - n * (n - p) * v1 * v1;
}

inline double local_scale(const PolytopeGeometry& k, const SupportVector& l, double p) {
    const int n = k.dim();
    const double v1 = mixed_volume_1(l, k);
    return n * (n - p) * v1 * v1;
}

inline LocalVerdict evaluate_local(const PolytopeGeometry& k, const SupportVector& l, double p,
                                   double tol = kDefaultLocalTolerance) {
    LocalVerdict v;
    v.lhs = local_lhs(k, l, p);
    v.scale = local_scale(k, l, p);
    v.passed = *v.lhs <= tol * v.scale;
    v.p = p;
    v.tol = tol;
    return v;
}

/// Matrix M of the quadratic form Ψ at K_λ:
/// Ψ(X) = n vol ((1-p) Σ X_i^2 |F_i| / h_i + Σ Γ_ij X_i X_j) - (n-p) (Σ X_i |F_i|)^2,
/// where h_i are the heights of K_λ.
struct PsiForm {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd support_vector;  // X_{K_λ}
    Eigen::VectorXd facet_measures;
    double p = 0.0;
    double lambda = 0.0;
    double volume = 0.0;
    int dim = 0;

    [[nodiscard]] double operator()(const Eigen::VectorXd& x) const { return x.dot(matrix * x); }

    [[nodiscard]] double kernel_residual() const {
        const double denom = matrix.norm() * support_vector.norm();
        return denom > 0.0 ? (matrix * support_vector).norm() / denom : 0.0;
    }
};

inline PsiForm psi_form(const PolytopeGeometry& k_lambda, double p, double lambda = 0.0) {
    detail::check_p(p);
    const GammaMatrix gamma = gamma_matrix(k_lambda);
    const int n = k_lambda.dim();
    const int n_facets = k_lambda.size();
    PsiForm form;
    form.p = p;
    form.lambda = lambda;
    form.dim = n;
    form.volume = k_lambda.volume();
    form.support_vector = k_lambda.source().height_vector();
    form.facet_measures = Eigen::Map<const Eigen::VectorXd>(k_lambda.facet_measures().data(), n_facets);

    Eigen::VectorXd diagonal(n_facets);
    for (int i = 0; i < n_facets; ++i) {
        diagonal[i] = (1.0 - p) * form.facet_measures[i] / form.support_vector[i];
    }
    form.matrix = n * form.volume * (Eigen::MatrixXd(diagonal.asDiagonal()) + gamma.entries) -
                  (n - p) * form.facet_measures * form.facet_measures.transpose();
    form.matrix = 0.5 * (form.matrix + form.matrix.transpose()).eval();
    return form;
}

inline PsiForm psi_form(const LambdaPath& path, double lambda) {
    return psi_form(enumerate_geometry(path.at(lambda)), path.p(), lambda);
}

/// Negative semidefiniteness of Ψ on even vectors (X_i = X_{i'} for antipodal
/// normals), the subspace spanned by support vectors of symmetric bodies. On
/// all of R^N the form is positive along translations when p < 1.
inline LocalVerdict check_nsd(const PsiForm& form, double tol = kDefaultNsdTolerance) {
    const Eigen::Index n_facets = form.matrix.rows();
    const Eigen::Index half = n_facets / 2;
    Eigen::MatrixXd even = Eigen::MatrixXd::Zero(n_facets, half);
    const double w = 1.0 / std::sqrt(2.0);
    for (Eigen::Index k = 0; k < half; ++k) {
        even(2 * k, k) = w;
        even(2 * k + 1, k) = w;
    }
    const Eigen::MatrixXd compressed = even.transpose() * form.matrix * even;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(compressed, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "symmetric eigensolver did not converge");
    const Eigen::VectorXd& eig = solver.eigenvalues();

    LocalVerdict v;
    v.frobenius_norm = form.matrix.norm();
    v.max_eigenvalue = eig.maxCoeff();
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < eig.size(); ++k) {
        if (std::abs(eig[k]) < std::abs(nearest)) nearest = eig[k];
        if (std::abs(eig[k]) <= tol * v.frobenius_norm) ++v.kernel_multiplicity;
    }
    v.near_zero_eigenvalue = nearest;
    v.kernel_residual = form.kernel_residual();
    v.passed = *v.max_eigenvalue <= tol * v.frobenius_norm;
    v.p = form.p;
    v.lambda = form.lambda;
    v.tol = tol;
    return v;
}

/// r(L,K) and R(L,K) for symmetric planar bodies: extremes of h_L/h_K. The
/// ratio is monotone between consecutive normals of either body, so checking
/// all normals of both is exact.
inline std::pair<double, double> relative_radii(const PolytopeGeometry& k, const PolytopeGeometry& l) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto* g : {&k, &l}) {
        for (const auto& u : g->source().normals()) {
            const double ratio = l.support_value(u) / k.support_value(u);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    }
    return {lo, hi};
}

namespace detail {
inline double planar_mixed_area(const PolytopeGeometry& k, const PolytopeGeometry& l) {
    double sum = 0.0;
    for (int i = 0; i < k.size(); ++i) {
        if (!k.facet_empty(i)) sum += l.support_value(k.source().normal(i)) * k.facet_measure(i);
    }
    return 0.5 * sum;
}
}  // namespace detail

/// vol(L) - 2t V(L,K) + t^2 vol(K); Blaschke's Bonnesen-type bound says this is
/// <= 0 for r(L,K) <= t <= R(L,K).
inline double bonnesen_2d(const PolytopeGeometry& k, const PolytopeGeometry& l, double t) {
    if (k.dim() != 2 || l.dim() != 2) throw Error(ErrorCode::BadParameter, "bonnesen_2d: bodies must be planar");
    const auto [r, big_r] = relative_radii(k, l);
    const double slack = 1e-12 * big_r;
    if (!(t >= r - slack && t <= big_r + slack)) {
        throw Error(ErrorCode::BadParameter, "bonnesen_2d: t outside [r(L,K), R(L,K)]");
    }
    return l.volume() - 2.0 * t * detail::planar_mixed_area(k, l) + t * t * k.volume();
}

/// Plane, p = 0: the Bonnesen values at t = h_L(u_i)/h_K(u_i) integrated against
/// h_K dS_K, i.e. 2 vol(K) vol(L) - 4 V(K,L)^2 + vol(K) ∫ h_L^2/h_K dS_K.
inline LocalVerdict local_2d_via_bonnesen(const PolytopeGeometry& k, const SupportVector& l,
                                          double tol = kDefaultLocalTolerance) {
    if (k.dim() != 2) throw Error(ErrorCode::BadParameter, "local_2d_via_bonnesen: bodies must be planar");
    require_same_normals(l, k.source(), "local_2d_via_bonnesen");
    const PolytopeGeometry lg = enumerate_geometry(l, k.tolerance());
    const double mixed = detail::planar_mixed_area(k, lg);
    double integral = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k.size(); ++i) {
        if (k.facet_empty(i)) continue;
        const double hk = k.source().height(i);
        const double t = lg.support_value(k.source().normal(i)) / hk;
        const double value = lg.volume() - 2.0 * t * mixed + t * t * k.volume();
        worst = std::max(worst, value);
        integral += value * hk * k.facet_measure(i);
    }
    LocalVerdict v;
    v.lhs = integral;
    v.scale = 4.0 * mixed * mixed;
    v.bonnesen_max = worst;
    v.passed = integral <= tol * v.scale && worst <= tol * lg.volume();
    v.p = 0.0;
    v.tol = tol;
    return v;
}

}  // namespace lpbm
