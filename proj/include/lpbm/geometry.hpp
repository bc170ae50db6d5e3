#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpbm/error.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

/// Slack (relative to h_i) below which a facet hyperplane counts as passing
/// through a vertex.
inline constexpr double kDefaultFacetTolerance = 1e-10;

/// Nonempty intersection F_ij = F_i ∩ F_j of two facets, i < j.
struct Ridge {
    int i = 0;
    int j = 0;
    double measure = 0.0;    // (n-2)-volume; 1 per vertex in the plane
    double cos_angle = 0.0;  // <u_i, u_j>
    double angle = 0.0;      // θ_ij in (0, π)
};

class PolytopeGeometry;
PolytopeGeometry enumerate_geometry(const SupportVector& sv, double tol);

/// Face data of a simple polytope given by a SupportVector. Every vertex lies on
/// exactly dim() facets; `vertex_facets()[v]` lists them in increasing order,
/// which is the whole vertex-facet incidence structure.
class PolytopeGeometry {
public:
    [[nodiscard]] const SupportVector& source() const noexcept { return source_; }
    [[nodiscard]] int dim() const noexcept { return source_.dim(); }
    [[nodiscard]] int size() const noexcept { return source_.size(); }
    [[nodiscard]] double tolerance() const noexcept { return tol_; }

    [[nodiscard]] const std::vector<Eigen::VectorXd>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<std::vector<int>>& vertex_facets() const noexcept { return vertex_facets_; }
    [[nodiscard]] bool incidence(int vertex, int facet) const {
        const auto& f = vertex_facets_[static_cast<std::size_t>(vertex)];
        return std::binary_search(f.begin(), f.end(), facet);
    }

    [[nodiscard]] const std::vector<double>& facet_measures() const noexcept { return facet_measures_; }
    [[nodiscard]] double facet_measure(int i) const { return facet_measures_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] bool facet_empty(int i) const { return facet_vertices_[static_cast<std::size_t>(i)].empty(); }
    [[nodiscard]] const std::vector<int>& facet_vertices(int i) const {
        return facet_vertices_[static_cast<std::size_t>(i)];
    }

    [[nodiscard]] std::vector<int> nonempty_facets() const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i) {
            if (!facet_empty(i)) out.push_back(i);
        }
        return out;
    }
    [[nodiscard]] bool all_facets_nonempty() const {
        return std::none_of(facet_vertices_.begin(), facet_vertices_.end(), [](const auto& v) { return v.empty(); });
    }

    [[nodiscard]] const std::vector<Ridge>& ridges() const noexcept { return ridges_; }
    /// Ridge indices of the nonempty F_ij bounding facet i.
    [[nodiscard]] const std::vector<int>& facet_ridges(int i) const {
        return facet_ridges_[static_cast<std::size_t>(i)];
    }
    [[nodiscard]] const Ridge* ridge(int i, int j) const {
        if (i > j) std::swap(i, j);
        const auto it = ridge_index_.find({i, j});
        return it == ridge_index_.end() ? nullptr : &ridges_[static_cast<std::size_t>(it->second)];
    }
    [[nodiscard]] double ridge_measure(int i, int j) const {
        const Ridge* r = ridge(i, j);
        return r ? r->measure : 0.0;
    }

    [[nodiscard]] double volume() const noexcept { return volume_; }

    /// h_P(u) = max over vertices of <v, u>.
    [[nodiscard]] double support_value(const Eigen::VectorXd& u) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : vertices_) best = std::max(best, v.dot(u));
        return best;
    }

    /// Support numbers h_P(u_i) of the polytope itself. They equal the source
    /// heights on nonempty facets and are smaller on empty ones.
    [[nodiscard]] std::vector<double> support_numbers() const {
        std::vector<double> out(static_cast<std::size_t>(size()));
        for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(i)] = support_value(source_.normal(i));
        return out;
    }

    /// Simplices (vertex index lists of length dim(face)+1) triangulating the
    /// face cut out by `facets`; the empty list gives the whole body.
    [[nodiscard]] std::vector<std::vector<int>> triangulate_face(const std::vector<int>& facets) const {
        std::vector<int> face_verts;
        for (int v = 0; v < static_cast<int>(vertices_.size()); ++v) {
            const auto& vf = vertex_facets_[static_cast<std::size_t>(v)];
            if (std::includes(vf.begin(), vf.end(), facets.begin(), facets.end())) face_verts.push_back(v);
        }
        std::vector<std::vector<int>> out;
        if (!face_verts.empty()) triangulate(facets, face_verts, out);
        return out;
    }

    /// k-dimensional measure of the face cut out by `facets` (k = dim - |facets|).
    /// Points have measure 1.
    [[nodiscard]] double face_measure(const std::vector<int>& facets) const {
        const int k = dim() - static_cast<int>(facets.size());
        double total = 0.0;
        for (const auto& simplex : triangulate_face(facets)) total += simplex_measure(simplex, k);
        return total;
    }

private:
    friend PolytopeGeometry enumerate_geometry(const SupportVector& sv, double tol);

    // Flag triangulation: cone from the lowest vertex of the face over every
    // subface not containing it. Valid because in a simple polytope the
    // subfaces of the face S are exactly the nonempty S ∪ {j}.
    void triangulate(const std::vector<int>& face, const std::vector<int>& face_verts,
                     std::vector<std::vector<int>>& out) const {
        const int k = dim() - static_cast<int>(face.size());
        if (k == 0) {
            out.push_back({face_verts.front()});
            return;
        }
        const int apex = face_verts.front();
        const auto& apex_facets = vertex_facets_[static_cast<std::size_t>(apex)];
        std::vector<int> candidates;
        for (int v : face_verts) {
            for (int j : vertex_facets_[static_cast<std::size_t>(v)]) candidates.push_back(j);
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (int j : candidates) {
            if (std::binary_search(face.begin(), face.end(), j)) continue;
            if (std::binary_search(apex_facets.begin(), apex_facets.end(), j)) continue;
            std::vector<int> sub_face = face;
            sub_face.insert(std::upper_bound(sub_face.begin(), sub_face.end(), j), j);
            std::vector<int> sub_verts;
            for (int v : face_verts) {
                const auto& vf = vertex_facets_[static_cast<std::size_t>(v)];
                if (std::binary_search(vf.begin(), vf.end(), j)) sub_verts.push_back(v);
            }
            const std::size_t first = out.size();
            triangulate(sub_face, sub_verts, out);
            for (std::size_t s = first; s < out.size(); ++s) out[s].push_back(apex);
        }
    }

    [[nodiscard]] double simplex_measure(const std::vector<int>& simplex, int k) const {
        if (k == 0) return 1.0;
        const Eigen::VectorXd& base = vertices_[static_cast<std::size_t>(simplex.front())];
        Eigen::MatrixXd edges(dim(), k);
        for (int c = 0; c < k; ++c) edges.col(c) = vertices_[static_cast<std::size_t>(simplex[static_cast<std::size_t>(c + 1)])] - base;
        double factorial = 1.0;
        for (int c = 2; c <= k; ++c) factorial *= c;
        if (k == dim()) return std::abs(edges.determinant()) / factorial;
        const double gram = (edges.transpose() * edges).determinant();
        return std::sqrt(std::max(gram, 0.0)) / factorial;
    }

    SupportVector source_;
    double tol_ = kDefaultFacetTolerance;
    std::vector<Eigen::VectorXd> vertices_;
    std::vector<std::vector<int>> vertex_facets_;
    std::vector<std::vector<int>> facet_vertices_;
    std::vector<double> facet_measures_;
    std::vector<Ridge> ridges_;
    std::vector<std::vector<int>> facet_ridges_;
    std::map<std::pair<int, int>, int> ridge_index_;
    double volume_ = 0.0;
};

namespace detail {

inline Eigen::MatrixXd normal_rows(const SupportVector& sv, const std::vector<int>& rows) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), sv.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = sv.normal(rows[r]).transpose();
    return a;
}

inline Eigen::VectorXd height_entries(const SupportVector& sv, const std::vector<int>& rows) {
    Eigen::VectorXd h(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) h[static_cast<Eigen::Index>(r)] = sv.height(rows[r]);
    return h;
}

inline std::string facet_list(const std::vector<int>& facets) {
    std::string s = "{";
    for (std::size_t k = 0; k < facets.size(); ++k) s += (k ? "," : "") + std::to_string(facets[k]);
    return s + "}";
}

/// Walks from the interior point 0 to a vertex: repeatedly move along a fixed
/// generic direction projected onto the current face until the next facet is hit.
inline std::vector<int> initial_vertex(const SupportVector& sv) {
    const int n = sv.dim();
    const int n_facets = sv.size();
    Eigen::VectorXd generic(n);
    const double seeds[] = {1.0, 0.6180339887498949, 0.4142135623730951, 0.2360679774997897};
    for (int k = 0; k < n; ++k) generic[k] = seeds[k];
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<int> tight;
    for (int step = 0; step < n; ++step) {
        Eigen::VectorXd d = generic;
        if (!tight.empty()) {
            const Eigen::MatrixXd a = normal_rows(sv, tight);
            d -= a.transpose() * (a * a.transpose()).ldlt().solve(a * generic);
        }
        int hit = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_facets; ++i) {
            if (std::find(tight.begin(), tight.end(), i) != tight.end()) continue;
            const double rate = sv.normal(i).dot(d);
            if (rate <= 1e-12 * d.norm()) continue;
            const double t = std::max(0.0, sv.height(i) - sv.normal(i).dot(x)) / rate;
            if (t < best) {
                best = t;
                hit = i;
            }
        }
        if (hit < 0) throw Error(ErrorCode::Unbounded, "normals do not positively span R^n");
        x += best * d;
        tight.push_back(hit);
    }
    std::sort(tight.begin(), tight.end());
    return tight;
}

}  // namespace detail

/// Full face geometry of {x : <x,u_i> <= h_i}. Vertices are found by pivoting
/// along edges of the (simple) polytope and each one is re-solved from its n
/// facet hyperplanes.
inline PolytopeGeometry enumerate_geometry(const SupportVector& sv, double tol = kDefaultFacetTolerance) {
    const int n = sv.dim();
    const int n_facets = sv.size();
    if (n_facets == 0) throw Error(ErrorCode::InvalidInput, "empty support vector");

    {
        Eigen::MatrixXd all(n_facets, n);
        for (int i = 0; i < n_facets; ++i) all.row(i) = sv.normal(i).transpose();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(all);
        lu.setThreshold(1e-12);
        if (lu.rank() < n) throw Error(ErrorCode::Unbounded, "normals do not span R^n");
    }

    PolytopeGeometry geom;
    geom.source_ = sv;
    geom.tol_ = tol;

    std::map<std::vector<int>, Eigen::VectorXd> found;
    std::deque<std::vector<int>> queue;
    const std::vector<int> start = detail::initial_vertex(sv);
    queue.push_back(start);
    found.emplace(start, Eigen::VectorXd());

    std::vector<double> slack(static_cast<std::size_t>(n_facets));
    while (!queue.empty()) {
        const std::vector<int> basis = queue.front();
        queue.pop_front();
        const Eigen::MatrixXd a = detail::normal_rows(sv, basis);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible()) {
            throw Error(ErrorCode::DegenerateVertex, "singular facet system at " + detail::facet_list(basis));
        }
        const Eigen::VectorXd x = lu.solve(detail::height_entries(sv, basis));
        found[basis] = x;

        int extra_tight = 0;
        for (int i = 0; i < n_facets; ++i) {
            const double s = sv.height(i) - sv.normal(i).dot(x);
            slack[static_cast<std::size_t>(i)] = s;
            if (std::binary_search(basis.begin(), basis.end(), i)) continue;
            if (s < -tol * sv.height(i)) {
                throw Error(ErrorCode::DegenerateVertex,
                            "pivot reached infeasible point at " + detail::facet_list(basis) + " (violates facet " +
                                std::to_string(i) + ")");
            }
            if (s <= tol * sv.height(i)) ++extra_tight;
        }
        if (extra_tight > 0) {
            throw Error(ErrorCode::DegenerateVertex, "more than n facets meet at the vertex " +
                                                         detail::facet_list(basis) + "; polytope is not simple");
        }

        const Eigen::MatrixXd inverse = lu.inverse();
        for (int k = 0; k < n; ++k) {
            const Eigen::VectorXd d = -inverse.col(k);
            const double eps = 1e-14 * d.norm();
            int hit = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_facets; ++i) {
                if (std::binary_search(basis.begin(), basis.end(), i)) continue;
                const double rate = sv.normal(i).dot(d);
                if (rate <= eps) continue;
                const double t = slack[static_cast<std::size_t>(i)] / rate;
                if (t < best) {
                    best = t;
                    hit = i;
                }
            }
            if (hit < 0) throw Error(ErrorCode::Unbounded, "unbounded edge at " + detail::facet_list(basis));
            std::vector<int> next = basis;
            next.erase(next.begin() + k);
            next.insert(std::upper_bound(next.begin(), next.end(), hit), hit);
            if (found.emplace(next, Eigen::VectorXd()).second) queue.push_back(std::move(next));
        }
    }

    // std::map iteration gives vertices sorted by facet set.
    for (auto& [facets, x] : found) {
        geom.vertex_facets_.push_back(facets);
        geom.vertices_.push_back(x);
    }

    double radius = 0.0;
    for (const auto& v : geom.vertices_) radius = std::max(radius, v.norm());
    for (std::size_t v = 0; v < geom.vertices_.size(); ++v) {
        std::vector<int> mirrored;
        for (int f : geom.vertex_facets_[v]) mirrored.push_back(antipode(f));
        std::sort(mirrored.begin(), mirrored.end());
        const auto it = found.find(mirrored);
        if (it == found.end() || (it->second + geom.vertices_[v]).norm() > 1e-9 * radius) {
            throw Error(ErrorCode::NotSymmetric, "vertex " + detail::facet_list(geom.vertex_facets_[v]) +
                                                     " has no antipodal vertex");
        }
    }

    geom.facet_vertices_.assign(static_cast<std::size_t>(n_facets), {});
    for (std::size_t v = 0; v < geom.vertex_facets_.size(); ++v) {
        for (int f : geom.vertex_facets_[v]) geom.facet_vertices_[static_cast<std::size_t>(f)].push_back(static_cast<int>(v));
    }

    geom.facet_measures_.assign(static_cast<std::size_t>(n_facets), 0.0);
    for (int i = 0; i < n_facets; ++i) {
        if (!geom.facet_empty(i)) geom.facet_measures_[static_cast<std::size_t>(i)] = geom.face_measure({i});
    }

    std::map<std::pair<int, int>, bool> pairs;
    for (const auto& facets : geom.vertex_facets_) {
        for (std::size_t a = 0; a < facets.size(); ++a) {
            for (std::size_t b = a + 1; b < facets.size(); ++b) pairs[{facets[a], facets[b]}] = true;
        }
    }
    geom.facet_ridges_.assign(static_cast<std::size_t>(n_facets), {});
    for (const auto& [key, unused] : pairs) {
        (void)unused;
        Ridge r;
        r.i = key.first;
        r.j = key.second;
        r.measure = geom.face_measure({r.i, r.j});
        r.cos_angle = std::clamp(sv.normal(r.i).dot(sv.normal(r.j)), -1.0, 1.0);
        r.angle = std::acos(r.cos_angle);
        const int index = static_cast<int>(geom.ridges_.size());
        geom.ridges_.push_back(r);
        geom.ridge_index_[key] = index;
        geom.facet_ridges_[static_cast<std::size_t>(r.i)].push_back(index);
        geom.facet_ridges_[static_cast<std::size_t>(r.j)].push_back(index);
    }

    double sum = 0.0;
    for (int i = 0; i < n_facets; ++i) sum += sv.height(i) * geom.facet_measure(i);
    geom.volume_ = sum / n;
    return geom;
}

/// |P| = (1/n) Σ h_i |F_i|.
inline double volume(const PolytopeGeometry& geom) { return geom.volume(); }

/// Volume from a triangulation of the whole body, independent of the facet sum.
inline double triangulated_volume(const PolytopeGeometry& geom) { return geom.face_measure({}); }

/// |F_i| recomputed from its ridges: (1/(n-1)) Σ_j h_ij |F_ij| with
/// h_ij = h_j csc θ_ij - h_i cot θ_ij.
inline double facet_measure_from_ridges(const PolytopeGeometry& geom, int i) {
    const SupportVector& sv = geom.source();
    double sum = 0.0;
    for (int r : geom.facet_ridges(i)) {
        const Ridge& ridge = geom.ridges()[static_cast<std::size_t>(r)];
        const int j = ridge.i == i ? ridge.j : ridge.i;
        const double sine = std::sqrt(1.0 - ridge.cos_angle * ridge.cos_angle);
        const double h_ij = (sv.height(j) - sv.height(i) * ridge.cos_angle) / sine;
        sum += h_ij * ridge.measure;
    }
    return sum / (geom.dim() - 1);
}

}  // namespace lpbm
