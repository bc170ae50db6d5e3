#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpbm/error.hpp"

namespace lpbm {

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 4;
inline constexpr int kMaxFacets = 200;

/// Index of the antipodal normal. Normals are stored in +-paired order, so
/// normals 2k and 2k+1 are negatives of each other.
[[nodiscard]] constexpr int antipode(int i) noexcept { return i ^ 1; }

/// H-representation {x : <x, u_i> <= h_i} of a centrally symmetric body over a
/// fixed list of unit normals. The heights are the support vector of the body
/// when every facet is nonempty; otherwise some of them are redundant.
class SupportVector {
public:
    SupportVector() = default;

    /// Validates every invariant. Normals within kUnitTolerance of unit length
    /// are renormalized exactly.
    SupportVector(int dim, std::vector<Eigen::VectorXd> normals, std::vector<double> heights)
        : dim_(dim), normals_(std::move(normals)), heights_(std::move(heights)) {
        validate_normals();
        validate_heights();
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(normals_.size()); }
    [[nodiscard]] const Eigen::VectorXd& normal(int i) const { return normals_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] double height(int i) const { return heights_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<Eigen::VectorXd>& normals() const noexcept { return normals_; }
    [[nodiscard]] const std::vector<double>& heights() const noexcept { return heights_; }

    [[nodiscard]] Eigen::VectorXd height_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(heights_.data(), size());
    }

    /// Same normals, new heights. Only the heights are re-validated.
    [[nodiscard]] SupportVector with_heights(std::vector<double> heights) const {
        SupportVector out;
        out.dim_ = dim_;
        out.normals_ = normals_;
        out.heights_ = std::move(heights);
        out.validate_heights();
        return out;
    }

    [[nodiscard]] SupportVector with_heights(const Eigen::VectorXd& heights) const {
        return with_heights(std::vector<double>(heights.data(), heights.data() + heights.size()));
    }

    [[nodiscard]] SupportVector scaled(double factor) const {
        std::vector<double> h = heights_;
        for (double& x : h) x *= factor;
        return with_heights(std::move(h));
    }

    /// Sub-body over the given normal indices (sorted, closed under antipode).
    [[nodiscard]] SupportVector restricted(const std::vector<int>& indices) const {
        std::vector<Eigen::VectorXd> normals;
        std::vector<double> heights;
        normals.reserve(indices.size());
        heights.reserve(indices.size());
        for (int i : indices) {
            normals.push_back(normal(i));
            heights.push_back(height(i));
        }
        return SupportVector(dim_, std::move(normals), std::move(heights));
    }

    [[nodiscard]] bool same_normals(const SupportVector& other, double tol = kUnitTolerance) const {
        if (dim_ != other.dim_ || size() != other.size()) return false;
        for (int i = 0; i < size(); ++i) {
            if ((normal(i) - other.normal(i)).lpNorm<Eigen::Infinity>() > tol) return false;
        }
        return true;
    }

private:
    void validate_normals() {
        if (dim_ < kMinDim || dim_ > kMaxDim) {
            throw Error(ErrorCode::InvalidInput, "dim must be in [2,4], got " + std::to_string(dim_));
        }
        const int n_facets = size();
        if (n_facets % 2 != 0) {
            throw Error(ErrorCode::NotSymmetric, "normal count must be even (+-paired), got " + std::to_string(n_facets));
        }
        if (n_facets < 2 * dim_) {
            throw Error(ErrorCode::InvalidInput, "need at least 2*dim normals, got " + std::to_string(n_facets));
        }
        if (n_facets > kMaxFacets) {
            throw Error(ErrorCode::InvalidInput, "at most 200 normals supported, got " + std::to_string(n_facets));
        }
        for (int i = 0; i < n_facets; ++i) {
            auto& u = normals_[static_cast<std::size_t>(i)];
            if (u.size() != dim_) {
                throw Error(ErrorCode::InvalidInput, "normals[" + std::to_string(i) + "]: expected " +
                                                         std::to_string(dim_) + " components");
            }
            if (!u.allFinite()) {
                throw Error(ErrorCode::InvalidInput, "normals[" + std::to_string(i) + "]: non-finite component");
            }
            const double norm = u.norm();
            if (std::abs(norm - 1.0) > kUnitTolerance) {
                throw Error(ErrorCode::InvalidInput,
                            "normals[" + std::to_string(i) + "]: not a unit vector (norm " + std::to_string(norm) + ")");
            }
            u /= norm;
        }
        for (int i = 0; i < n_facets; i += 2) {
            if ((normal(i) + normal(i + 1)).lpNorm<Eigen::Infinity>() > kUnitTolerance) {
                throw Error(ErrorCode::NotSymmetric, "normals[" + std::to_string(i + 1) + "] is not -normals[" +
                                                         std::to_string(i) + "]");
            }
            normals_[static_cast<std::size_t>(i + 1)] = -normal(i);
        }
        for (int i = 0; i < n_facets; ++i) {
            for (int j = i + 1; j < n_facets; ++j) {
                if (j == antipode(i)) continue;
                if (std::abs(normal(i).dot(normal(j))) > 1.0 - kUnitTolerance) {
                    throw Error(ErrorCode::InvalidInput, "normals[" + std::to_string(i) + "] and normals[" +
                                                             std::to_string(j) + "] are (anti)parallel");
                }
            }
        }
    }

    void validate_heights() {
        if (static_cast<int>(heights_.size()) != size()) {
            throw Error(ErrorCode::InvalidInput, "heights: expected " + std::to_string(size()) + " entries, got " +
                                                     std::to_string(heights_.size()));
        }
        for (int i = 0; i < size(); ++i) {
            const double h = height(i);
            if (!std::isfinite(h) || h <= 0.0) {
                throw Error(ErrorCode::InvalidInput,
                            "heights[" + std::to_string(i) + "]: must be finite and > 0, got " + std::to_string(h));
            }
        }
        for (int i = 0; i < size(); i += 2) {
            const double a = height(i);
            const double b = height(i + 1);
            if (std::abs(a - b) > kUnitTolerance * std::max(a, b)) {
                throw Error(ErrorCode::NotSymmetric,
                            "heights[" + std::to_string(i) + "] != heights[" + std::to_string(i + 1) + "]");
            }
            heights_[static_cast<std::size_t>(i + 1)] = a;
        }
    }

    int dim_ = 0;
    std::vector<Eigen::VectorXd> normals_;
    std::vector<double> heights_;
};

inline void require_same_normals(const SupportVector& a, const SupportVector& b, const char* context) {
    if (!a.same_normals(b)) {
        throw Error(ErrorCode::NormalSetMismatch, std::string(context) + ": bodies use different normal lists");
    }
}

}  // namespace lpbm
