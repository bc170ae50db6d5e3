#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpbm/atype.hpp"
#include "lpbm/error.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/lp_combine.hpp"
#include "lpbm/mixed_volumes.hpp"
#include "lpbm/parallel.hpp"

namespace lpbm {

/// vol(K_λ) and its first two λ-derivatives.
struct VolumeDerivatives {
    double volume = 0.0;
    double first = 0.0;
    double second = 0.0;
};

/// V_{K,L}(λ) (vol^{p/n}, or log vol at p = 0) and its derivatives.
struct ValueDerivatives {
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;
};

namespace detail {

inline PolytopeGeometry simple_geometry(const SupportVector& sv, double tol) {
    try {
        return enumerate_geometry(sv, tol);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateVertex) throw Error(ErrorCode::NotSimple, e.message());
        throw;
    }
}

}  // namespace detail

/// Z_i = h_i s_i b_i(λ), the λ-derivative of the support vector of K_λ.
inline Eigen::VectorXd path_tangent(const LambdaPath& path, double lambda) {
    const PathCoefficients c = path_coeffs(path, lambda);
    return path.base().height_vector().cwiseProduct(path.s()).cwiseProduct(c.b);
}

/// vol' = Σ h_i s_i b_i |F_i|, vol'' = (1-p) Σ s_i^2 h_i c_i |F_i| + Σ Z_i Z_j Γ_ij,
/// valid where the a-type of K_λ is locally constant and every facet is nonempty.
inline VolumeDerivatives volume_derivatives(const LambdaPath& path, double lambda,
                                            double tol = kDefaultFacetTolerance) {
    const PolytopeGeometry geom = detail::simple_geometry(path.at(lambda), tol);
    const GammaMatrix gamma = gamma_matrix(geom);
    const PathCoefficients c = path_coeffs(path, lambda);
    const Eigen::VectorXd& s = path.s();
    const Eigen::VectorXd h = path.base().height_vector();
    const Eigen::VectorXd z = h.cwiseProduct(s).cwiseProduct(c.b);
    VolumeDerivatives out;
    out.volume = geom.volume();
    double diagonal = 0.0;
    for (int i = 0; i < geom.size(); ++i) {
        out.first += z[i] * geom.facet_measure(i);
        diagonal += s[i] * s[i] * h[i] * c.c[i] * geom.facet_measure(i);
    }
    out.second = (1.0 - path.p()) * diagonal + gamma.quadratic(z);
    return out;
}

inline double first_derivative(const LambdaPath& path, double lambda) {
    return volume_derivatives(path, lambda).first;
}

inline double second_derivative(const LambdaPath& path, double lambda) {
    return volume_derivatives(path, lambda).second;
}

inline double path_value(double volume, double p, int dim) {
    return p == 0.0 ? std::log(volume) : std::pow(volume, p / dim);
}

/// n vol vol'' - (n-p) vol'^2; equals Ψ(Z) at the path tangent Z.
inline double concavity_numerator(const VolumeDerivatives& d, double p, int dim) {
    return dim * d.volume * d.second - (dim - p) * d.first * d.first;
}

/// Chain rule: V'' = (p/n^2) vol^{p/n-2} (n vol vol'' - (n-p) vol'^2) for p > 0 and
/// (vol vol'' - vol'^2) / vol^2 for p = 0.
inline ValueDerivatives value_derivatives(const VolumeDerivatives& d, double p, int dim) {
    ValueDerivatives out;
    out.value = path_value(d.volume, p, dim);
    if (p == 0.0) {
        out.first = d.first / d.volume;
        out.second = (d.volume * d.second - d.first * d.first) / (d.volume * d.volume);
    } else {
        const double q = p / dim;
        out.first = q * std::pow(d.volume, q - 1.0) * d.first;
        out.second = q / dim * std::pow(d.volume, q - 2.0) * concavity_numerator(d, p, dim);
    }
    return out;
}

inline ValueDerivatives value_derivatives(const LambdaPath& path, double lambda,
                                          double tol = kDefaultFacetTolerance) {
    return value_derivatives(volume_derivatives(path, lambda, tol), path.p(), path.dim());
}

inline double v_second(const LambdaPath& path, double lambda) { return value_derivatives(path, lambda).second; }

struct ScanOptions {
    int grid_size = 257;
    double event_tol = 1e-10;
    double concavity_tol = 1e-10;  // on second differences, relative to max(1, max|V|)
    double slope_tol = 1e-7;       // on V' across events, relative to max(1, |V'|)
    double facet_tol = kDefaultFacetTolerance;
    double degenerate_nudge = 1e-9;
};

struct ScanEvent {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScanPoint {
    double lambda = 0.0;
    double value = 0.0;
    std::optional<double> d1;
    std::optional<double> d2;
    std::optional<ATypeSignature> signature;  // empty where K_λ is not simple
    bool event_flag = false;                  // a-type changed since the previous point
};

struct ScanReport {
    double p = 0.0;
    int dim = 0;
    std::vector<ScanPoint> points;
    std::vector<ScanEvent> events;
    bool midpoint_concave = false;
    bool slopes_monotone = false;
    bool concave = false;
    bool d2_nonpositive = false;  // reported only
    double max_second_difference = 0.0;
    double max_slope_increase = 0.0;
};

namespace detail {

struct Sample {
    std::optional<ATypeSignature> signature;
    std::optional<PolytopeGeometry> geometry;
};

inline Sample sample_signature(const LambdaPath& path, double lambda, double tol) {
    Sample out;
    try {
        PolytopeGeometry g = enumerate_geometry(path.at(lambda), tol);
        out.signature = atype_signature(g);
        out.geometry = std::move(g);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateVertex) throw;
    }
    return out;
}

inline double nudged_value(const LambdaPath& path, double lambda, const ScanOptions& opt) {
    const double d = opt.degenerate_nudge;
    auto value_at = [&](double x) {
        return path_value(enumerate_geometry(path.at(std::clamp(x, 0.0, 1.0)), opt.facet_tol).volume(), path.p(),
                          path.dim());
    };
    if (lambda - d >= 0.0 && lambda + d <= 1.0) return 0.5 * (value_at(lambda - d) + value_at(lambda + d));
    const double dir = lambda - d < 0.0 ? 1.0 : -1.0;
    return 2.0 * value_at(lambda + dir * d) - value_at(lambda + 2.0 * dir * d);
}

}  // namespace detail

/// Samples V_{K,L} on a uniform λ grid, brackets a-type changes by bisection,
/// evaluates analytic derivatives away from the brackets and checks concavity.
inline ScanReport scan(const LambdaPath& path, const ScanOptions& opt = {}) {
    if (opt.grid_size < 3) throw Error(ErrorCode::BadParameter, "scan: grid_size must be >= 3");
    if (!(opt.event_tol > 0.0)) throw Error(ErrorCode::BadParameter, "scan: event_tol must be > 0");
    const int g = opt.grid_size;
    auto grid_lambda = [g](int k) { return k == g - 1 ? 1.0 : static_cast<double>(k) / (g - 1); };

    ScanReport report;
    report.p = path.p();
    report.dim = path.dim();

    struct GridSample {
        ScanPoint point;
        std::optional<ATypeSignature> probe;  // signature just right (or left) of a degenerate point
    };
    auto samples = parallel_map(static_cast<std::size_t>(g), [&](std::size_t k) {
        GridSample out;
        out.point.lambda = grid_lambda(static_cast<int>(k));
        detail::Sample s = detail::sample_signature(path, out.point.lambda, opt.facet_tol);
        if (s.signature) {
            out.point.value = path_value(s.geometry->volume(), path.p(), path.dim());
            out.point.signature = s.signature;
            out.probe = s.signature;
        } else {
            out.point.value = detail::nudged_value(path, out.point.lambda, opt);
            const double dir = out.point.lambda < 1.0 ? 1.0 : -1.0;
            out.probe = detail::sample_signature(path, out.point.lambda + 2.0 * dir * opt.degenerate_nudge,
                                                 opt.facet_tol)
                            .signature;
            if (!out.probe) throw Error(ErrorCode::NotSimple, "scan: a-type undefined around a grid point");
        }
        return out;
    });

    // Splits [a, b] until each signature change sits in a bracket of width
    // event_tol. A midpoint signature equal to neither end starts a second
    // branch, so nearby changes in one grid cell are all found. Degenerate
    // midpoints are resolved by a probe 2 * nudge to their right.
    std::vector<ScanEvent> events;
    std::function<void(double, const std::optional<ATypeSignature>&, double, const std::optional<ATypeSignature>&)>
        refine = [&](double a, const std::optional<ATypeSignature>& sa, double b,
                     const std::optional<ATypeSignature>& sb) {
            if (sa && sb && *sa == *sb) return;
            if (b - a <= opt.event_tol) {
                events.push_back({a, b});
                return;
            }
            const double mid = 0.5 * (a + b);
            const auto sm = detail::sample_signature(path, mid, opt.facet_tol).signature;
            if (sm) {
                refine(a, sa, mid, sm);
                refine(mid, sm, b, sb);
                return;
            }
            refine(a, sa, mid, std::nullopt);
            const double right = mid + 2.0 * opt.degenerate_nudge;
            if (right < b) refine(right, detail::sample_signature(path, right, opt.facet_tol).signature, b, sb);
        };
    for (int k = 0; k < g; ++k) {
        const auto& cur = samples[static_cast<std::size_t>(k)];
        if (!cur.point.signature) events.push_back({cur.point.lambda, cur.point.lambda});
        if (k == 0) continue;
        const auto& prev = samples[static_cast<std::size_t>(k - 1)];
        if (*prev.probe == *cur.probe) continue;
        const double lo = prev.point.signature ? prev.point.lambda : prev.point.lambda + 2.0 * opt.degenerate_nudge;
        refine(lo, prev.probe, cur.point.lambda, cur.point.signature);
    }
    std::sort(events.begin(), events.end(), [](const ScanEvent& a, const ScanEvent& b) { return a.lo < b.lo; });
    for (const ScanEvent& e : events) {
        if (!report.events.empty() && e.lo <= report.events.back().hi + opt.event_tol) {
            report.events.back().hi = std::max(report.events.back().hi, e.hi);
        } else {
            report.events.push_back(e);
        }
    }
    const std::size_t cap = static_cast<std::size_t>(path.size()) * static_cast<std::size_t>(path.size());
    if (report.events.size() > cap) {
        throw Error(ErrorCode::TooManyEvents, "scan: " + std::to_string(report.events.size()) + " a-type events");
    }

    for (auto& s : samples) report.points.push_back(std::move(s.point));
    for (std::size_t k = 0; k < report.points.size(); ++k) {
        ScanPoint& pt = report.points[k];
        const double prev_lambda = k == 0 ? -1.0 : report.points[k - 1].lambda;
        for (const ScanEvent& e : report.events) {
            if (e.hi > prev_lambda && e.lo <= pt.lambda) pt.event_flag = k > 0 || !pt.signature;
        }
    }

    auto stable = [&](const ScanPoint& pt) {
        if (!pt.signature) return false;
        for (const ScanEvent& e : report.events) {
            if (pt.lambda >= e.lo - opt.event_tol && pt.lambda <= e.hi + opt.event_tol) return false;
        }
        return true;
    };
    const auto derivs = parallel_map(report.points.size(), [&](std::size_t k) -> std::optional<ValueDerivatives> {
        const ScanPoint& pt = report.points[k];
        if (!stable(pt)) return std::nullopt;
        const LambdaPath active = path.restricted(pt.signature->normal_index_set);
        return value_derivatives(active, pt.lambda, opt.facet_tol);
    });
    for (std::size_t k = 0; k < report.points.size(); ++k) {
        if (derivs[k]) {
            report.points[k].d1 = derivs[k]->first;
            report.points[k].d2 = derivs[k]->second;
        }
    }

    double value_scale = 1.0;
    double slope_scale = 1.0;
    for (const ScanPoint& pt : report.points) {
        value_scale = std::max(value_scale, std::abs(pt.value));
        if (pt.d1) slope_scale = std::max(slope_scale, std::abs(*pt.d1));
    }
    report.max_second_difference = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < report.points.size(); ++k) {
        const double diff =
            report.points[k - 1].value - 2.0 * report.points[k].value + report.points[k + 1].value;
        report.max_second_difference = std::max(report.max_second_difference, diff / value_scale);
    }
    report.midpoint_concave = report.max_second_difference <= opt.concavity_tol;

    report.max_slope_increase = 0.0;
    report.slopes_monotone = true;
    for (const ScanEvent& e : report.events) {
        const ScanPoint* left = nullptr;
        const ScanPoint* right = nullptr;
        for (const ScanPoint& pt : report.points) {
            if (!pt.d1) continue;
            if (pt.lambda < e.lo) left = &pt;
            if (pt.lambda > e.hi && !right) right = &pt;
        }
        if (!left || !right) continue;
        const double increase = (*right->d1 - *left->d1) / std::max({1.0, std::abs(*left->d1), std::abs(*right->d1)});
        report.max_slope_increase = std::max(report.max_slope_increase, increase);
        if (increase > opt.slope_tol) report.slopes_monotone = false;
    }
    report.concave = report.midpoint_concave && report.slopes_monotone;

    report.d2_nonpositive = true;
    for (const ScanPoint& pt : report.points) {
        if (pt.d2 && *pt.d2 > 1e-9 * slope_scale * slope_scale) report.d2_nonpositive = false;
    }
    return report;
}

inline ScanReport scan(const LambdaPath& path, int grid_size, double event_tol) {
    ScanOptions opt;
    opt.grid_size = grid_size;
    opt.event_tol = event_tol;
    return scan(path, opt);
}

inline constexpr const char* kScanCsvHeader = "lambda,value,d1,d2,signature_hash,event_flag";

namespace detail {
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace detail

/// Header row, then one row per grid point; derivatives and the hash are left
/// empty where undefined.
inline void write_scan_csv(std::ostream& out, const ScanReport& report) {
    out << kScanCsvHeader << '\n';
    for (const ScanPoint& pt : report.points) {
        out << detail::format_double(pt.lambda) << ',' << detail::format_double(pt.value) << ',';
        if (pt.d1) out << detail::format_double(*pt.d1);
        out << ',';
        if (pt.d2) out << detail::format_double(*pt.d2);
        out << ',';
        if (pt.signature) out << pt.signature->hash_hex();
        out << ',' << (pt.event_flag ? 1 : 0) << '\n';
    }
}

struct ScanCsvRow {
    double lambda = 0.0;
    double value = 0.0;
    std::optional<double> d1;
    std::optional<double> d2;
    std::string signature_hash;
    bool event_flag = false;
};

inline std::vector<ScanCsvRow> read_scan_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kScanCsvHeader) {
        throw Error(ErrorCode::InvalidInput, "scan CSV: line 1: expected header '" + std::string(kScanCsvHeader) + "'");
    }
    std::vector<ScanCsvRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 6) {
            throw Error(ErrorCode::InvalidInput, "scan CSV: line " + std::to_string(line_no) + ": expected 6 fields");
        }
        auto number = [&](const std::string& s, const char* name) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidInput,
                            "scan CSV: line " + std::to_string(line_no) + ": bad " + name + " '" + s + "'");
            }
        };
        ScanCsvRow row;
        row.lambda = number(fields[0], "lambda");
        row.value = number(fields[1], "value");
        if (!fields[2].empty()) row.d1 = number(fields[2], "d1");
        if (!fields[3].empty()) row.d2 = number(fields[3], "d2");
        row.signature_hash = fields[4];
        if (fields[5] != "0" && fields[5] != "1") {
            throw Error(ErrorCode::InvalidInput, "scan CSV: line " + std::to_string(line_no) + ": bad event_flag");
        }
        row.event_flag = fields[5] == "1";
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lpbm
