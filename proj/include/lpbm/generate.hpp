#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpbm/atype.hpp"
#include "lpbm/detail/rng.hpp"
#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

inline constexpr int kGenerationRetryCap = 64;
inline constexpr double kMinHeight = 0.5;
inline constexpr double kMaxHeight = 2.0;

namespace detail {

inline void check_facet_count(int dim, int facets) {
    if (dim < kMinDim || dim > kMaxDim) throw Error(ErrorCode::BadParameter, "dim must be in [2,4]");
    if (facets % 2 != 0) throw Error(ErrorCode::BadParameter, "facet count must be even");
    if (facets < 2 * dim) throw Error(ErrorCode::BadParameter, "facet count must be >= 2*dim");
    if (facets > kMaxFacets) throw Error(ErrorCode::BadParameter, "facet count must be <= 200");
}

inline std::vector<Eigen::VectorXd> mirrored(const std::vector<Eigen::VectorXd>& half) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(2 * half.size());
    for (const auto& u : half) {
        out.push_back(u);
        out.push_back(-u);
    }
    return out;
}

/// count directions, pairwise at least `min_angle` from each other and from
/// each other's antipodes; the angle is relaxed when sampling keeps failing.
inline std::vector<Eigen::VectorXd> separated_directions(int dim, int count, Rng& rng) {
    const double half_sphere = dim == 2 ? std::numbers::pi : dim == 3 ? 2.0 * std::numbers::pi : std::numbers::pi * std::numbers::pi;
    double min_angle = 0.3 * std::pow(half_sphere / count, 1.0 / (dim - 1));
    std::vector<Eigen::VectorXd> out;
    int failures = 0;
    while (static_cast<int>(out.size()) < count) {
        Eigen::VectorXd u = rng.unit_vector(dim);
        bool ok = true;
        for (const auto& v : out) {
            if (std::abs(u.dot(v)) > std::cos(min_angle)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(std::move(u));
        } else if (++failures > 1000) {
            min_angle *= 0.5;
            failures = 0;
        }
    }
    return out;
}

inline void set_pair(std::vector<double>& h, int i, double value) {
    h[static_cast<std::size_t>(i)] = value;
    h[static_cast<std::size_t>(antipode(i))] = value;
}

/// Lowers every empty facet just below the support value in its direction until
/// all facets are nonempty. Empty optional when the repair produces a
/// non-simple body or does not settle.
inline std::optional<SupportVector> repair_empty_facets(SupportVector sv, Rng& rng, double tol) {
    for (int round = 0; round < 4 * sv.size(); ++round) {
        const PolytopeGeometry geom = enumerate_geometry(sv, tol);
        if (geom.all_facets_nonempty()) return sv;
        std::vector<double> h = sv.heights();
        for (int i = 0; i < sv.size(); i += 2) {
            if (geom.facet_empty(i)) set_pair(h, i, geom.support_value(sv.normal(i)) * (1.0 - rng.uniform(0.02, 0.2)));
        }
        sv = sv.with_heights(std::move(h));
    }
    return std::nullopt;
}

}  // namespace detail

/// Random centrally symmetric simple polytope with `facets` nonempty facets:
/// facets/2 separated directions, mirrored, heights ~ U[0.5, 2].
inline SupportVector random_polytope(int dim, int facets, std::uint64_t seed, double tol = kDefaultFacetTolerance) {
    detail::check_facet_count(dim, facets);
    for (int attempt = 0; attempt < kGenerationRetryCap; ++attempt) {
        detail::Rng rng(detail::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        const auto normals = detail::mirrored(detail::separated_directions(dim, facets / 2, rng));
        std::vector<double> h(static_cast<std::size_t>(facets));
        for (int i = 0; i < facets; i += 2) detail::set_pair(h, i, rng.uniform(kMinHeight, kMaxHeight));
        try {
            if (auto sv = detail::repair_empty_facets(SupportVector(dim, normals, std::move(h)), rng, tol)) return *sv;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateVertex && e.code() != ErrorCode::Unbounded) throw;
        }
    }
    throw Error(ErrorCode::GenerationFailed,
                "no simple polytope found after " + std::to_string(kGenerationRetryCap) + " attempts");
}

/// Box [-w_k, w_k] over ±e_k; half_width 1 gives the unit cube.
inline SupportVector axis_box(int dim, double half_width = 1.0) {
    std::vector<Eigen::VectorXd> half;
    for (int k = 0; k < dim; ++k) half.push_back(Eigen::VectorXd::Unit(dim, k));
    return SupportVector(dim, detail::mirrored(half), std::vector<double>(static_cast<std::size_t>(2 * dim), half_width));
}

/// Regular polygon with normals at angles kπ/(N/2) and inradius `height`.
inline SupportVector regular_polygon(int facets, double height = 1.0) {
    detail::check_facet_count(2, facets);
    const int m = facets / 2;
    std::vector<Eigen::VectorXd> half;
    for (int k = 0; k < m; ++k) {
        const double angle = k * std::numbers::pi / m;
        Eigen::VectorXd u(2);
        u << std::cos(angle), std::sin(angle);
        half.push_back(u);
    }
    return SupportVector(2, detail::mirrored(half), std::vector<double>(static_cast<std::size_t>(facets), height));
}

enum class MergeMode {
    Raise,  // new normals sit above the body: redundant, empty facets
    Cut,    // new normals cut slightly into the body, then unmatched facets are dropped
};

struct MergedPair {
    SupportVector k;
    SupportVector l;
};

namespace detail {

inline int find_normal(const std::vector<Eigen::VectorXd>& normals, const Eigen::VectorXd& u) {
    for (std::size_t i = 0; i < normals.size(); ++i) {
        if ((normals[i] - u).lpNorm<Eigen::Infinity>() <= 1e-9) return static_cast<int>(i);
    }
    return -1;
}

/// Heights of `body` over `normals`: its own height where it has the normal,
/// otherwise the corner support value jittered by `magnitude`.
inline std::vector<double> merged_heights(const SupportVector& body, const PolytopeGeometry& geom,
                                          const std::vector<Eigen::VectorXd>& normals, MergeMode mode,
                                          double magnitude, Rng& rng) {
    std::vector<double> h(normals.size());
    for (std::size_t i = 0; i < normals.size(); i += 2) {
        const int own = find_normal(body.normals(), normals[i]);
        double value = 0.0;
        if (own >= 0) {
            value = body.height(own);
        } else {
            const double jitter = magnitude * rng.uniform(0.5, 1.0);
            value = geom.support_value(normals[i]) * (mode == MergeMode::Raise ? 1.0 + jitter : 1.0 - jitter);
        }
        h[i] = h[i + 1] = value;
    }
    return h;
}

}  // namespace detail

/// Puts K and L on the union of their normal fans. Missing heights start at the
/// corner support values (exactly critical facets) and are jittered by
/// magnitude * U(0.5, 1): up in Raise mode, down in Cut mode. In Cut mode every
/// normal whose facet is empty in either body is then removed, so in the plane
/// the result is strongly isomorphic.
inline MergedPair merge_pair(const SupportVector& k, const SupportVector& l, MergeMode mode, double magnitude,
                             std::uint64_t seed, double tol = kDefaultFacetTolerance) {
    if (k.dim() != l.dim()) throw Error(ErrorCode::NormalSetMismatch, "merge_pair: dimensions differ");
    if (!(magnitude > 0.0 && magnitude < 0.5)) throw Error(ErrorCode::BadParameter, "merge_pair: magnitude must lie in (0, 0.5)");
    std::vector<Eigen::VectorXd> normals = k.normals();
    for (int i = 0; i < l.size(); i += 2) {
        if (detail::find_normal(normals, l.normal(i)) < 0 && detail::find_normal(normals, l.normal(i + 1)) < 0) {
            normals.push_back(l.normal(i));
            normals.push_back(l.normal(i + 1));
        }
    }
    if (static_cast<int>(normals.size()) > kMaxFacets) {
        throw Error(ErrorCode::BadParameter, "merge_pair: merged fan exceeds 200 normals");
    }
    detail::Rng rng(seed);
    const PolytopeGeometry gk = enumerate_geometry(k, tol);
    const PolytopeGeometry gl = enumerate_geometry(l, tol);
    SupportVector mk(k.dim(), normals, detail::merged_heights(k, gk, normals, mode, magnitude, rng));
    SupportVector ml(l.dim(), normals, detail::merged_heights(l, gl, normals, mode, magnitude, rng));
    if (mode == MergeMode::Raise) return {std::move(mk), std::move(ml)};

    for (int round = 0; round < static_cast<int>(normals.size()); ++round) {
        const PolytopeGeometry ek = enumerate_geometry(mk, tol);
        const PolytopeGeometry el = enumerate_geometry(ml, tol);
        std::vector<int> keep;
        for (int i = 0; i < mk.size(); ++i) {
            if (!ek.facet_empty(i) && !el.facet_empty(i)) keep.push_back(i);
        }
        if (static_cast<int>(keep.size()) == mk.size()) return {std::move(mk), std::move(ml)};
        if (static_cast<int>(keep.size()) < 2 * mk.dim()) {
            throw Error(ErrorCode::GenerationFailed, "merge_pair: cut removed too many facets");
        }
        mk = mk.restricted(keep);
        ml = ml.restricted(keep);
    }
    throw Error(ErrorCode::GenerationFailed, "merge_pair: facet pattern did not settle");
}

inline MergedPair merge_pair(const SupportVector& k, const SupportVector& l, const std::string& mode,
                             double magnitude, std::uint64_t seed) {
    if (mode == "raise") return merge_pair(k, l, MergeMode::Raise, magnitude, seed);
    if (mode == "cut") return merge_pair(k, l, MergeMode::Cut, magnitude, seed);
    throw Error(ErrorCode::BadParameter, "merge mode must be 'raise' or 'cut', got '" + mode + "'");
}

/// Random polygon pair on a merged fan, retried with derived seeds until the
/// merge is simple. facets_k and facets_l are the counts before merging.
inline MergedPair random_merged_pair(int dim, int facets_k, int facets_l, MergeMode mode, double magnitude,
                                     std::uint64_t seed) {
    for (int attempt = 0; attempt < kGenerationRetryCap; ++attempt) {
        const std::uint64_t base = detail::derive_seed(seed, static_cast<std::uint64_t>(attempt));
        try {
            const SupportVector k = random_polytope(dim, facets_k, detail::derive_seed(base, 1));
            const SupportVector l = random_polytope(dim, facets_l, detail::derive_seed(base, 2));
            return merge_pair(k, l, mode, magnitude, detail::derive_seed(base, 3));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateVertex && e.code() != ErrorCode::GenerationFailed) throw;
        }
    }
    throw Error(ErrorCode::GenerationFailed, "random_merged_pair: retry cap reached");
}

/// K random, L a strongly isomorphic perturbation of K.
inline MergedPair random_isomorphic_pair(int dim, int facets, double magnitude, std::uint64_t seed) {
    SupportVector k = random_polytope(dim, facets, detail::derive_seed(seed, 1));
    SupportVector l = perturb_within_atype(k, magnitude, detail::derive_seed(seed, 2));
    return {std::move(k), std::move(l)};
}

}  // namespace lpbm
