#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

/// Smallest accepted positive p; (0, kMinPositiveP) is rejected because
/// (.)^{1/p} is too poorly conditioned there. Use p = 0 instead.
inline constexpr double kMinPositiveP = 1e-8;

namespace detail {

inline void check_p(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadParameter, "p must lie in [0,1], got " + std::to_string(p));
    if (p > 0.0 && p < kMinPositiveP) {
        throw Error(ErrorCode::BadParameter, "p in (0, 1e-8) is not supported; use p = 0");
    }
}

inline void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorCode::BadParameter, "lambda must lie in [0,1], got " + std::to_string(lambda));
    }
}

/// ((1-λ) a^p + λ b^p)^{1/p}, or a^{1-λ} b^λ at p = 0, evaluated relative to a
/// so that small p and small log(b/a) keep full relative accuracy.
inline double p_mean(double a, double b, double p, double lambda) {
    const double log_ratio = std::log(b / a);
    if (p == 0.0) return a * std::exp(lambda * log_ratio);
    return a * std::exp(std::log1p(lambda * std::expm1(p * log_ratio)) / p);
}

}  // namespace detail

/// (1-λ)K +_p λL restricted to the shared normals. For strongly isomorphic
/// K, L the Wulff shape of the p-mean is cut out by these normals alone.
inline SupportVector lp_combine(const SupportVector& k, const SupportVector& l, double p, double lambda) {
    require_same_normals(k, l, "lp_combine");
    detail::check_p(p);
    detail::check_lambda(lambda);
    std::vector<double> h(static_cast<std::size_t>(k.size()));
    for (int i = 0; i < k.size(); ++i) {
        h[static_cast<std::size_t>(i)] = detail::p_mean(k.height(i), l.height(i), p, lambda);
    }
    return k.with_heights(std::move(h));
}

struct PathCoefficients {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

/// The L^p path λ -> K_λ written as h_i a_i(λ), with h_L(u_i) = h_i (1 + p s_i)^{1/p}
/// (p > 0) or h_i e^{s_i} (p = 0).
class LambdaPath {
public:
    LambdaPath(SupportVector base, SupportVector target, double p, Eigen::VectorXd s)
        : base_(std::move(base)), target_(std::move(target)), p_(p), s_(std::move(s)) {}

    [[nodiscard]] const SupportVector& base() const noexcept { return base_; }
    [[nodiscard]] const SupportVector& target() const noexcept { return target_; }
    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] const Eigen::VectorXd& s() const noexcept { return s_; }
    [[nodiscard]] int dim() const noexcept { return base_.dim(); }
    [[nodiscard]] int size() const noexcept { return base_.size(); }

    /// a_i = (1 + λ p s_i)^{1/p}, b_i = a_i^{1-p}, c_i = a_i^{1-2p}; all e^{λ s_i} at p = 0.
    [[nodiscard]] PathCoefficients coefficients(double lambda) const {
        const Eigen::Index n = s_.size();
        PathCoefficients out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p_ == 0.0) {
                const double e = std::exp(lambda * s_[i]);
                out.a[i] = out.b[i] = out.c[i] = e;
            } else {
                const double log_base = std::log1p(lambda * p_ * s_[i]);
                out.a[i] = std::exp(log_base / p_);
                out.b[i] = std::exp(log_base * (1.0 - p_) / p_);
                out.c[i] = std::exp(log_base * (1.0 - 2.0 * p_) / p_);
            }
        }
        return out;
    }

    [[nodiscard]] Eigen::VectorXd heights(double lambda) const {
        const Eigen::VectorXd a = coefficients(lambda).a;
        return base_.height_vector().cwiseProduct(a);
    }

    [[nodiscard]] SupportVector at(double lambda) const {
        detail::check_lambda(lambda);
        return base_.with_heights(heights(lambda));
    }

    /// Same path over a subset of normals (sorted, closed under antipode); used to
    /// drop facets that stay empty on a stable interval.
    [[nodiscard]] LambdaPath restricted(const std::vector<int>& indices) const {
        Eigen::VectorXd s(static_cast<Eigen::Index>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k) s[static_cast<Eigen::Index>(k)] = s_[indices[k]];
        return LambdaPath(base_.restricted(indices), target_.restricted(indices), p_, std::move(s));
    }

private:
    SupportVector base_;
    SupportVector target_;
    double p_ = 0.0;
    Eigen::VectorXd s_;
};

inline LambdaPath path_from_bodies(const SupportVector& k, const SupportVector& l, double p) {
    require_same_normals(k, l, "path_from_bodies");
    detail::check_p(p);
    Eigen::VectorXd s(k.size());
    for (int i = 0; i < k.size(); ++i) {
        const double log_ratio = std::log(l.height(i) / k.height(i));
        s[i] = p == 0.0 ? log_ratio : std::expm1(p * log_ratio) / p;
    }
    return LambdaPath(k, l, p, std::move(s));
}

inline PathCoefficients path_coeffs(const LambdaPath& path, double lambda) {
    detail::check_lambda(lambda);
    return path.coefficients(lambda);
}

/// A[h] = ∩ {<x,u_i> <= h_i}.
inline PolytopeGeometry wulff_shape(const SupportVector& h, double tol = kDefaultFacetTolerance) {
    return enumerate_geometry(h, tol);
}

}  // namespace lpbm
