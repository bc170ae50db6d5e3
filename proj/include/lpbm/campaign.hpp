#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lpbm/atype.hpp"
#include "lpbm/detail/rng.hpp"
#include "lpbm/error.hpp"
#include "lpbm/generate.hpp"
#include "lpbm/json_io.hpp"
#include "lpbm/lambda_scan.hpp"
#include "lpbm/local_form.hpp"
#include "lpbm/parallel.hpp"

namespace lpbm {

enum class PairMode { Perturb, Merge };

struct Campaign {
    int dim = 2;
    int facets = 8;
    int instances = 10;
    std::vector<double> p_list{0.0};
    std::uint64_t seed = 1;
    PairMode pair_mode = PairMode::Perturb;
    double magnitude = 0.1;
    double local_tol = kDefaultLocalTolerance;
    double nsd_tol = kDefaultNsdTolerance;
    int scan_grid = 0;  // 0 disables the λ-scan
    double event_tol = 1e-10;
    std::string csv_path;
    std::string summary_path;
};

inline Campaign campaign_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "campaign config: top level must be an object");
    Campaign c;
    auto get_int = [&](const char* key, int& out) {
        if (!doc.contains(key)) return;
        if (!doc.at(key).is_number_integer()) {
            throw Error(ErrorCode::InvalidInput, std::string("campaign config: field '") + key + "' must be an integer");
        }
        out = doc.at(key).get<int>();
    };
    auto get_double = [&](const char* key, double& out) {
        if (!doc.contains(key)) return;
        if (!doc.at(key).is_number()) {
            throw Error(ErrorCode::InvalidInput, std::string("campaign config: field '") + key + "' must be a number");
        }
        out = doc.at(key).get<double>();
    };
    auto get_string = [&](const char* key, std::string& out) {
        if (!doc.contains(key)) return;
        if (!doc.at(key).is_string()) {
            throw Error(ErrorCode::InvalidInput, std::string("campaign config: field '") + key + "' must be a string");
        }
        out = doc.at(key).get<std::string>();
    };
    get_int("dim", c.dim);
    get_int("facets", c.facets);
    if (!doc.contains("instances")) throw Error(ErrorCode::BadParameter, "campaign config: missing field 'instances'");
    get_int("instances", c.instances);
    if (doc.contains("p_list")) {
        const Json& list = doc.at("p_list");
        if (!list.is_array()) throw Error(ErrorCode::InvalidInput, "campaign config: field 'p_list' must be an array");
        c.p_list.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i].is_number()) {
                throw Error(ErrorCode::InvalidInput, "campaign config: field 'p_list[" + std::to_string(i) + "]' must be a number");
            }
            c.p_list.push_back(list[i].get<double>());
        }
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw Error(ErrorCode::InvalidInput, "campaign config: field 'seed' must be a non-negative integer");
        }
        c.seed = doc.at("seed").get<std::uint64_t>();
    }
    std::string mode = "perturb";
    get_string("pair", mode);
    if (mode == "perturb") {
        c.pair_mode = PairMode::Perturb;
    } else if (mode == "merge") {
        c.pair_mode = PairMode::Merge;
    } else {
        throw Error(ErrorCode::InvalidInput, "campaign config: field 'pair' must be 'perturb' or 'merge'");
    }
    get_double("magnitude", c.magnitude);
    get_double("local_tol", c.local_tol);
    get_double("nsd_tol", c.nsd_tol);
    get_int("scan_grid", c.scan_grid);
    get_double("event_tol", c.event_tol);
    get_string("csv", c.csv_path);
    get_string("summary", c.summary_path);
    return c;
}

inline void validate(const Campaign& c) {
    if (c.instances <= 0) throw Error(ErrorCode::BadParameter, "campaign: instance count must be >= 1");
    if (c.p_list.empty()) throw Error(ErrorCode::BadParameter, "campaign: p_list must not be empty");
    for (double p : c.p_list) detail::check_p(p);
    detail::check_facet_count(c.dim, c.facets);
    if (!(c.magnitude > 0.0 && c.magnitude < 0.5)) throw Error(ErrorCode::BadParameter, "campaign: magnitude must lie in (0, 0.5)");
    if (c.scan_grid != 0 && c.scan_grid < 3) throw Error(ErrorCode::BadParameter, "campaign: scan_grid must be 0 or >= 3");
}

inline Json to_json(const Campaign& c) {
    return Json{{"dim", c.dim},
                {"facets", c.facets},
                {"instances", c.instances},
                {"p_list", c.p_list},
                {"seed", c.seed},
                {"pair", c.pair_mode == PairMode::Perturb ? "perturb" : "merge"},
                {"magnitude", c.magnitude},
                {"local_tol", c.local_tol},
                {"nsd_tol", c.nsd_tol},
                {"scan_grid", c.scan_grid},
                {"event_tol", c.event_tol}};
}

struct CampaignRow {
    int instance = 0;
    double p = 0.0;
    int facets = 0;
    double lhs = 0.0;
    double scale = 0.0;
    double max_eig = 0.0;
    double frobenius_norm = 0.0;
    double kernel_residual = 0.0;
    bool local_passed = false;
    bool nsd_passed = false;
    std::optional<int> events;
    std::optional<bool> concave;
    std::string error;

    [[nodiscard]] double lhs_ratio() const { return scale > 0.0 ? lhs / scale : lhs; }
    [[nodiscard]] double eig_ratio() const { return frobenius_norm > 0.0 ? max_eig / frobenius_norm : max_eig; }
    [[nodiscard]] bool passed() const { return error.empty() && local_passed && nsd_passed; }
    [[nodiscard]] bool finite() const {
        return std::isfinite(lhs) && std::isfinite(scale) && std::isfinite(max_eig) && std::isfinite(frobenius_norm) &&
               std::isfinite(kernel_residual);
    }
};

struct CampaignResult {
    std::vector<CampaignRow> rows;
    Json summary;
    int error_count = 0;
};

/// The pair for instance `index`; merged pairs are redrawn until strongly
/// isomorphic.
inline MergedPair campaign_pair(const Campaign& c, int index) {
    const std::uint64_t seed = detail::derive_seed(c.seed, static_cast<std::uint64_t>(index));
    if (c.pair_mode == PairMode::Perturb) return random_isomorphic_pair(c.dim, c.facets, c.magnitude, seed);
    for (int attempt = 0; attempt < kGenerationRetryCap; ++attempt) {
        MergedPair pair = random_merged_pair(c.dim, c.facets, c.facets, MergeMode::Cut, c.magnitude,
                                             detail::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        if (strongly_isomorphic(enumerate_geometry(pair.k), enumerate_geometry(pair.l))) return pair;
    }
    throw Error(ErrorCode::GenerationFailed, "campaign: no strongly isomorphic merged pair found");
}

namespace detail {

inline std::vector<CampaignRow> run_instance(const Campaign& c, int index) {
    std::vector<CampaignRow> rows;
    std::optional<MergedPair> pair;
    std::string pair_error;
    try {
        pair = campaign_pair(c, index);
    } catch (const Error& e) {
        pair_error = e.what();
    }
    for (double p : c.p_list) {
        CampaignRow row;
        row.instance = index;
        row.p = p;
        if (!pair) {
            row.error = pair_error;
            rows.push_back(std::move(row));
            continue;
        }
        row.facets = pair->k.size();
        try {
            const PolytopeGeometry k = enumerate_geometry(pair->k);
            const LocalVerdict local = evaluate_local(k, pair->l, p, c.local_tol);
            const LocalVerdict nsd = check_nsd(psi_form(k, p), c.nsd_tol);
            row.lhs = *local.lhs;
            row.scale = local.scale;
            row.local_passed = local.passed;
            row.max_eig = *nsd.max_eigenvalue;
            row.frobenius_norm = nsd.frobenius_norm;
            row.kernel_residual = nsd.kernel_residual;
            row.nsd_passed = nsd.passed;
            if (c.scan_grid > 0) {
                const ScanReport report = scan(path_from_bodies(pair->k, pair->l, p), c.scan_grid, c.event_tol);
                row.events = static_cast<int>(report.events.size());
                row.concave = report.concave;
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// min, quartiles, max by nearest rank.
inline Json quantiles(std::vector<double> values) {
    if (values.empty()) return nullptr;
    std::sort(values.begin(), values.end());
    Json out = Json::array();
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto idx = static_cast<std::size_t>(std::llround(q * static_cast<double>(values.size() - 1)));
        out.push_back(values[idx]);
    }
    return out;
}

inline Json finite_or_null(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

}  // namespace detail

inline CampaignResult run_campaign(const Campaign& c) {
    validate(c);
    const auto per_instance = parallel_map(static_cast<std::size_t>(c.instances),
                                           [&](std::size_t i) { return detail::run_instance(c, static_cast<int>(i)); });
    CampaignResult result;
    for (const auto& rows : per_instance) {
        for (const auto& row : rows) result.rows.push_back(row);
    }

    Json per_p = Json::array();
    int nonfinite = 0;
    Json errors = Json::array();
    for (const CampaignRow& row : result.rows) {
        if (!row.error.empty()) {
            ++result.error_count;
            errors.push_back(Json{{"instance", row.instance}, {"p", row.p}, {"message", row.error}});
        } else if (!row.finite()) {
            ++nonfinite;
        }
    }
    for (double p : c.p_list) {
        int count = 0;
        int passed = 0;
        int local_passed = 0;
        int nsd_passed = 0;
        int concave = 0;
        int scanned = 0;
        int total_events = 0;
        int max_events = 0;
        double max_residual = 0.0;
        std::vector<double> lhs_ratios;
        std::vector<double> eig_ratios;
        for (const CampaignRow& row : result.rows) {
            if (row.p != p || !row.error.empty()) continue;
            ++count;
            passed += row.passed() ? 1 : 0;
            local_passed += row.local_passed ? 1 : 0;
            nsd_passed += row.nsd_passed ? 1 : 0;
            max_residual = std::max(max_residual, row.kernel_residual);
            lhs_ratios.push_back(row.lhs_ratio());
            eig_ratios.push_back(row.eig_ratio());
            if (row.events) {
                ++scanned;
                total_events += *row.events;
                max_events = std::max(max_events, *row.events);
                concave += *row.concave ? 1 : 0;
            }
        }
        auto rate = [](int k, int n) -> Json {
            if (n == 0) return nullptr;
            return static_cast<double>(k) / n;
        };
        Json entry{{"p", p},
                   {"evaluated", count},
                   {"pass_rate", rate(passed, count)},
                   {"local_pass_rate", rate(local_passed, count)},
                   {"nsd_pass_rate", rate(nsd_passed, count)},
                   {"max_lhs_ratio", lhs_ratios.empty() ? Json(nullptr) : detail::finite_or_null(*std::max_element(lhs_ratios.begin(), lhs_ratios.end()))},
                   {"max_eig_ratio", eig_ratios.empty() ? Json(nullptr) : detail::finite_or_null(*std::max_element(eig_ratios.begin(), eig_ratios.end()))},
                   {"max_kernel_residual", max_residual},
                   {"lhs_ratio_quantiles", detail::quantiles(lhs_ratios)},
                   {"eig_ratio_quantiles", detail::quantiles(eig_ratios)}};
        if (c.scan_grid > 0) {
            entry["concave_rate"] = rate(concave, scanned);
            entry["total_events"] = total_events;
            entry["max_events"] = max_events;
        }
        per_p.push_back(std::move(entry));
    }
    result.summary = Json{{"config", to_json(c)},
                          {"rows", result.rows.size()},
                          {"error_count", result.error_count},
                          {"nonfinite_count", nonfinite},
                          {"per_p", std::move(per_p)},
                          {"errors", std::move(errors)}};
    return result;
}

inline constexpr const char* kCampaignCsvHeader =
    "instance,p,facets,lhs,scale,lhs_ratio,max_eig,frobenius_norm,eig_ratio,kernel_residual,local_passed,nsd_passed,"
    "passed,events,concave,error";

inline void write_campaign_csv(std::ostream& out, const std::vector<CampaignRow>& rows) {
    out << kCampaignCsvHeader << '\n';
    for (const CampaignRow& r : rows) {
        const bool ok = r.error.empty();
        auto num = [&](double x) { return ok ? detail::format_double(x) : std::string(); };
        auto flag = [&](bool b) { return ok ? std::string(b ? "1" : "0") : std::string(); };
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << r.instance << ',' << detail::format_double(r.p) << ',' << (ok ? std::to_string(r.facets) : "") << ','
            << num(r.lhs) << ',' << num(r.scale) << ',' << num(r.lhs_ratio()) << ',' << num(r.max_eig) << ','
            << num(r.frobenius_norm) << ',' << num(r.eig_ratio()) << ',' << num(r.kernel_residual) << ','
            << flag(r.local_passed) << ',' << flag(r.nsd_passed) << ',' << flag(r.passed()) << ','
            << (r.events ? std::to_string(*r.events) : "") << ',' << (r.concave ? (*r.concave ? "1" : "0") : "")
            << ',' << error << '\n';
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
inline void write_file_atomically(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::InvalidInput, path + ": cannot open file for writing");
        out << contents;
        if (!out) throw Error(ErrorCode::InvalidInput, path + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::InvalidInput, path + ": rename failed: " + ec.message());
}

inline void write_campaign_outputs(const Campaign& c, const CampaignResult& result) {
    if (!c.csv_path.empty()) {
        std::ostringstream csv;
        write_campaign_csv(csv, result.rows);
        write_file_atomically(c.csv_path, csv.str());
    }
    if (!c.summary_path.empty()) {
        std::ostringstream summary;
        write_json(summary, result.summary);
        write_file_atomically(c.summary_path, summary.str());
    }
}

}  // namespace lpbm
