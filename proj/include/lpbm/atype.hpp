#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lpbm/detail/rng.hpp"
#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

/// Combinatorial fingerprint of a simple polytope over a labeled normal list.
/// For simple polytopes the sorted list of vertex facet-sets determines the whole
/// labeled face lattice, so equality of signatures is strong isomorphism.
struct ATypeSignature {
    std::vector<int> normal_index_set;
    std::vector<std::vector<int>> incidence;  // canonical: vertex facet-sets, sorted
    std::uint64_t incidence_hash = 0;

    friend bool operator==(const ATypeSignature&, const ATypeSignature&) = default;

    [[nodiscard]] std::string hash_hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(incidence_hash));
        return buf;
    }
};

namespace detail {

// FNV-1a over 32-bit little-endian words, so the hash does not depend on the
// platform's integer layout.
class Fnv1a {
public:
    void add(std::uint32_t word) {
        for (int b = 0; b < 4; ++b) {
            state_ ^= (word >> (8 * b)) & 0xffu;
            state_ *= 0x100000001b3ULL;
        }
    }
    [[nodiscard]] std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace detail

inline ATypeSignature atype_signature(const PolytopeGeometry& geom) {
    ATypeSignature sig;
    sig.normal_index_set = geom.nonempty_facets();
    sig.incidence = geom.vertex_facets();
    for (const auto& facets : sig.incidence) {
        if (static_cast<int>(facets.size()) != geom.dim()) {
            throw Error(ErrorCode::NotSimple, "vertex lies on " + std::to_string(facets.size()) + " facets");
        }
    }
    std::sort(sig.incidence.begin(), sig.incidence.end());
    detail::Fnv1a hash;
    hash.add(static_cast<std::uint32_t>(geom.dim()));
    hash.add(static_cast<std::uint32_t>(geom.size()));
    for (int i : sig.normal_index_set) hash.add(static_cast<std::uint32_t>(i));
    hash.add(0xffffffffu);
    for (const auto& facets : sig.incidence) {
        for (int f : facets) hash.add(static_cast<std::uint32_t>(f));
    }
    sig.incidence_hash = hash.value();
    return sig;
}

inline bool strongly_isomorphic(const PolytopeGeometry& a, const PolytopeGeometry& b) {
    require_same_normals(a.source(), b.source(), "strongly_isomorphic");
    return atype_signature(a) == atype_signature(b);
}

inline constexpr int kPerturbRetryCap = 40;

/// Random symmetric perturbation h_i -> h_i (1 + magnitude * U(-1,1)), equal on
/// antipodal pairs, that stays in the a-type of `sv`. The magnitude is halved
/// until the perturbed body has the same signature.
inline SupportVector perturb_within_atype(const SupportVector& sv, double magnitude, std::uint64_t seed,
                                          double tol = kDefaultFacetTolerance) {
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw Error(ErrorCode::BadParameter, "perturbation magnitude must be finite and >= 0");
    }
    if (magnitude == 0.0) return sv;
    const ATypeSignature reference = atype_signature(enumerate_geometry(sv, tol));
    detail::Rng rng(seed);
    std::vector<double> unit(static_cast<std::size_t>(sv.size() / 2));
    for (double& x : unit) x = rng.uniform(-1.0, 1.0);

    double m = magnitude;
    for (int attempt = 0; attempt < kPerturbRetryCap; ++attempt, m *= 0.5) {
        std::vector<double> h = sv.heights();
        bool positive = true;
        for (int k = 0; k < sv.size() / 2; ++k) {
            const double factor = 1.0 + m * unit[static_cast<std::size_t>(k)];
            if (factor <= 0.0) positive = false;
            h[static_cast<std::size_t>(2 * k)] *= factor;
            h[static_cast<std::size_t>(2 * k + 1)] *= factor;
        }
        if (!positive) continue;
        try {
            SupportVector candidate = sv.with_heights(std::move(h));
            if (atype_signature(enumerate_geometry(candidate, tol)) == reference) return candidate;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateVertex) throw;
        }
    }
    throw Error(ErrorCode::NeighborhoodNotFound, "no strongly isomorphic perturbation found after " +
                                                     std::to_string(kPerturbRetryCap) + " halvings");
}

}  // namespace lpbm
