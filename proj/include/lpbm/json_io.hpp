#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lpbm/error.hpp"
#include "lpbm/local_form.hpp"
#include "lpbm/support_vector.hpp"

namespace lpbm {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require_field(const Json& obj, const char* name, const std::string& where) {
    if (!obj.contains(name)) throw Error(ErrorCode::InvalidInput, where + ": missing field '" + name + "'");
    return obj.at(name);
}

inline double json_number(const Json& v, const std::string& field, const std::string& where) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidInput, where + ": field '" + field + "' must be a number");
    return v.get<double>();
}

inline Json optional_number(const std::optional<double>& x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return *x;
}

}  // namespace detail

/// Parses {"dim": n, "normals": [[...], ...], "heights": [...]}. `where` names the
/// source in diagnostics.
inline SupportVector support_vector_from_json(const Json& doc, const std::string& where = "polytope") {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, where + ": top level must be an object");
    const Json& dim_field = detail::require_field(doc, "dim", where);
    if (!dim_field.is_number_integer()) throw Error(ErrorCode::InvalidInput, where + ": field 'dim' must be an integer");
    const int dim = dim_field.get<int>();
    const Json& normals_field = detail::require_field(doc, "normals", where);
    const Json& heights_field = detail::require_field(doc, "heights", where);
    if (!normals_field.is_array()) throw Error(ErrorCode::InvalidInput, where + ": field 'normals' must be an array");
    if (!heights_field.is_array()) throw Error(ErrorCode::InvalidInput, where + ": field 'heights' must be an array");

    std::vector<Eigen::VectorXd> normals;
    for (std::size_t i = 0; i < normals_field.size(); ++i) {
        const Json& row = normals_field[i];
        const std::string field = "normals[" + std::to_string(i) + "]";
        if (!row.is_array()) throw Error(ErrorCode::InvalidInput, where + ": field '" + field + "' must be an array");
        Eigen::VectorXd u(static_cast<Eigen::Index>(row.size()));
        for (std::size_t c = 0; c < row.size(); ++c) {
            u[static_cast<Eigen::Index>(c)] = detail::json_number(row[c], field + "[" + std::to_string(c) + "]", where);
        }
        normals.push_back(std::move(u));
    }
    std::vector<double> heights;
    for (std::size_t i = 0; i < heights_field.size(); ++i) {
        heights.push_back(detail::json_number(heights_field[i], "heights[" + std::to_string(i) + "]", where));
    }
    try {
        return SupportVector(dim, std::move(normals), std::move(heights));
    } catch (const Error& e) {
        throw Error(e.code(), where + ": " + e.message());
    }
}

inline SupportVector read_support_vector(std::istream& in, const std::string& where = "polytope") {
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, where + ": " + e.what());
    }
    return support_vector_from_json(doc, where);
}

inline SupportVector read_support_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidInput, path + ": cannot open file");
    return read_support_vector(in, path);
}

inline Json to_json(const SupportVector& sv) {
    Json normals = Json::array();
    for (const auto& u : sv.normals()) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < u.size(); ++c) row.push_back(u[c]);
        normals.push_back(std::move(row));
    }
    return Json{{"dim", sv.dim()}, {"normals", std::move(normals)}, {"heights", sv.heights()}};
}

/// {"lhs", "max_eig", "kernel_residual", "passed", "p", "lambda", "tol"} followed
/// by the supporting numbers; undefined values are null.
inline Json to_json(const LocalVerdict& v) {
    Json out;
    out["lhs"] = detail::optional_number(v.lhs);
    out["max_eig"] = detail::optional_number(v.max_eigenvalue);
    out["kernel_residual"] = v.kernel_residual;
    out["passed"] = v.passed;
    out["p"] = v.p;
    out["lambda"] = v.lambda;
    out["tol"] = v.tol;
    out["scale"] = v.scale;
    out["frobenius_norm"] = v.frobenius_norm;
    out["kernel_multiplicity"] = v.kernel_multiplicity;
    out["near_zero_eig"] = detail::optional_number(v.near_zero_eigenvalue);
    if (v.bonnesen_max) out["bonnesen_max"] = detail::optional_number(v.bonnesen_max);
    return out;
}

/// Shortest round-trip decimal form (nlohmann prints doubles with 17 significant
/// digits where needed), two-space indent, trailing newline.
inline void write_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

inline void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidInput, path + ": cannot open file for writing");
    write_json(out, doc);
    if (!out) throw Error(ErrorCode::InvalidInput, path + ": write failed");
}

}  // namespace lpbm
