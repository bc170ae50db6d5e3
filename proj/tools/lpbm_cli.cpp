// lpbm: generate symmetric polytopes, check the local L^p-Brunn-Minkowski
// inequality, scan λ-paths and run seeded campaigns.
//
// Exit codes: 0 success/passed, 1 failed verdict (or campaign instance errors),
// 2 usage, I/O or validation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lpbm/lpbm.hpp"

namespace {

constexpr int kExitPassed = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInvalid = 2;

void emit_json(const std::string& path, const lpbm::Json& doc) {
    if (path.empty() || path == "-") {
        lpbm::write_json(std::cout, doc);
    } else {
        lpbm::write_json_file(path, doc);
    }
}

void emit_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        lpbm::write_file_atomically(path, text);
    }
}

struct GenArgs {
    int dim = 2;
    int facets = 8;
    std::uint64_t seed = 1;
    std::string preset;
    std::string out;
};

int run_gen(const GenArgs& a) {
    lpbm::SupportVector sv = [&] {
        if (a.preset == "axis") {
            if (a.facets != 2 * a.dim) throw lpbm::Error(lpbm::ErrorCode::BadParameter, "axis preset needs facets = 2*dim");
            return lpbm::axis_box(a.dim);
        }
        if (a.preset == "regular") {
            if (a.dim != 2) throw lpbm::Error(lpbm::ErrorCode::BadParameter, "regular preset is planar (dim 2)");
            return lpbm::regular_polygon(a.facets);
        }
        if (!a.preset.empty()) throw lpbm::Error(lpbm::ErrorCode::BadParameter, "unknown preset '" + a.preset + "'");
        return lpbm::random_polytope(a.dim, a.facets, a.seed);
    }();
    emit_json(a.out, lpbm::to_json(sv));
    return kExitPassed;
}

struct PairArgs {
    std::string k_path;
    std::string mode = "perturb";
    double magnitude = 0.1;
    std::uint64_t seed = 1;
    std::string other;
    int facets = 0;
    std::string merge_jitter = "raise";
    std::string out;
    std::string out_base;
};

int run_pair(const PairArgs& a) {
    const lpbm::SupportVector k = lpbm::read_support_vector_file(a.k_path);
    if (a.mode == "perturb") {
        emit_json(a.out, lpbm::to_json(lpbm::perturb_within_atype(k, a.magnitude, a.seed)));
        return kExitPassed;
    }
    if (a.mode != "independent-merge" && a.mode != "merge") {
        throw lpbm::Error(lpbm::ErrorCode::BadParameter, "mode must be 'perturb' or 'independent-merge'");
    }
    const lpbm::SupportVector l = a.other.empty()
                                      ? lpbm::random_polytope(k.dim(), a.facets > 0 ? a.facets : k.size(), a.seed)
                                      : lpbm::read_support_vector_file(a.other);
    const lpbm::MergedPair pair =
        lpbm::merge_pair(k, l, a.merge_jitter, a.magnitude, lpbm::detail::derive_seed(a.seed, 0x6d65726765ULL));
    if (a.out_base.empty()) {
        emit_json(a.out, lpbm::Json{{"k", lpbm::to_json(pair.k)}, {"l", lpbm::to_json(pair.l)}});
    } else {
        lpbm::write_json_file(a.out_base, lpbm::to_json(pair.k));
        emit_json(a.out, lpbm::to_json(pair.l));
    }
    return kExitPassed;
}

struct CheckArgs {
    std::string k_path;
    std::string l_path;
    double p = 0.0;
    double lambda = 0.0;
    double tol = lpbm::kDefaultLocalTolerance;
    double nsd_tol = lpbm::kDefaultNsdTolerance;
    std::string out;
};

int run_check_local(const CheckArgs& a) {
    const lpbm::SupportVector k = lpbm::read_support_vector_file(a.k_path);
    const lpbm::SupportVector l = lpbm::read_support_vector_file(a.l_path);
    lpbm::require_same_normals(k, l, "check-local");
    const lpbm::LambdaPath path = lpbm::path_from_bodies(k, l, a.p);
    const lpbm::PolytopeGeometry k_lambda = lpbm::enumerate_geometry(path.at(a.lambda));
    lpbm::LocalVerdict local = lpbm::evaluate_local(k_lambda, l, a.p, a.tol);
    const lpbm::LocalVerdict nsd = lpbm::check_nsd(lpbm::psi_form(k_lambda, a.p, a.lambda), a.nsd_tol);
    lpbm::LocalVerdict v = nsd;
    v.lhs = local.lhs;
    v.scale = local.scale;
    v.tol = a.tol;
    v.passed = local.passed && nsd.passed;
    lpbm::Json doc = lpbm::to_json(v);
    doc["lhs_passed"] = local.passed;
    doc["nsd_passed"] = nsd.passed;
    doc["nsd_tol"] = a.nsd_tol;
    if (k.dim() == 2 && a.p == 0.0) {
        const lpbm::LocalVerdict b = lpbm::local_2d_via_bonnesen(k_lambda, l, a.tol);
        doc["bonnesen_lhs"] = *b.lhs;
        doc["bonnesen_max"] = *b.bonnesen_max;
    }
    emit_json(a.out, doc);
    return v.passed ? kExitPassed : kExitFailed;
}

struct ScanArgs {
    std::string k_path;
    std::string l_path;
    double p = 0.0;
    int grid = 257;
    double event_tol = 1e-10;
    double tol = 1e-10;
    std::string out;
};

int run_scan(const ScanArgs& a) {
    const lpbm::SupportVector k = lpbm::read_support_vector_file(a.k_path);
    const lpbm::SupportVector l = lpbm::read_support_vector_file(a.l_path);
    lpbm::ScanOptions opt;
    opt.grid_size = a.grid;
    opt.event_tol = a.event_tol;
    opt.concavity_tol = a.tol;
    const lpbm::ScanReport report = lpbm::scan(lpbm::path_from_bodies(k, l, a.p), opt);
    std::ostringstream csv;
    lpbm::write_scan_csv(csv, report);
    emit_text(a.out, csv.str());
    std::cerr << "events " << report.events.size() << ", concave " << (report.concave ? "yes" : "no")
              << ", max second difference " << report.max_second_difference << '\n';
    return report.concave ? kExitPassed : kExitFailed;
}

struct CampaignArgs {
    std::string config;
    std::string csv;
    std::string out;
};

int run_campaign(const CampaignArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw lpbm::Error(lpbm::ErrorCode::InvalidInput, a.config + ": cannot open file");
    lpbm::Json doc;
    try {
        doc = lpbm::Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw lpbm::Error(lpbm::ErrorCode::InvalidInput, a.config + ": " + e.what());
    }
    lpbm::Campaign c = lpbm::campaign_from_json(doc);
    if (!a.csv.empty()) c.csv_path = a.csv;
    if (!a.out.empty()) c.summary_path = a.out;
    const lpbm::CampaignResult result = lpbm::run_campaign(c);
    lpbm::write_campaign_outputs(c, result);
    if (c.summary_path.empty()) lpbm::write_json(std::cout, result.summary);
    if (result.error_count > 0) {
        std::cerr << result.error_count << " of " << result.rows.size() << " rows failed with errors\n";
        return kExitFailed;
    }
    return kExitPassed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local L^p-Brunn-Minkowski checks for centrally symmetric polytopes"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random symmetric simple polytope (JSON)");
    gen_cmd->add_option("--dim", gen.dim, "Ambient dimension (2..4)")->capture_default_str();
    gen_cmd->add_option("--facets", gen.facets, "Number of facets (even, >= 2*dim)")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--preset", gen.preset, "axis (box) or regular (polygon) instead of random");
    gen_cmd->add_option("--out", gen.out, "Output file (default stdout)");

    PairArgs pair;
    auto* pair_cmd = app.add_subcommand("pair", "Derive a second body L from K (JSON)");
    pair_cmd->add_option("K", pair.k_path, "Base polytope JSON")->required();
    pair_cmd->add_option("--mode", pair.mode, "perturb or independent-merge")->capture_default_str();
    pair_cmd->add_option("--magnitude", pair.magnitude, "Relative perturbation / merge jitter")->capture_default_str();
    pair_cmd->add_option("--seed", pair.seed, "Random seed")->capture_default_str();
    pair_cmd->add_option("--other", pair.other, "Second body for merge mode (default: random)");
    pair_cmd->add_option("--facets", pair.facets, "Facets of the random second body (default: as K)");
    pair_cmd->add_option("--merge-jitter", pair.merge_jitter, "raise (empty new facets) or cut")->capture_default_str();
    pair_cmd->add_option("--out", pair.out, "Output for L (default stdout)");
    pair_cmd->add_option("--out-base", pair.out_base, "Output for K on the merged normals");

    CheckArgs check;
    auto* check_cmd = app.add_subcommand("check-local", "Evaluate the local inequality and the NSD check (JSON)");
    check_cmd->add_option("K", check.k_path, "Polytope K")->required();
    check_cmd->add_option("L", check.l_path, "Polytope L on the same normals")->required();
    check_cmd->add_option("--p", check.p, "p in [0,1]")->capture_default_str();
    check_cmd->add_option("--lambda", check.lambda, "Evaluate at K_lambda")->capture_default_str();
    check_cmd->add_option("--tol", check.tol, "Relative tolerance on lhs")->capture_default_str();
    check_cmd->add_option("--nsd-tol", check.nsd_tol, "Tolerance on max eigenvalue / ||M||_F")->capture_default_str();
    check_cmd->add_option("--out", check.out, "Output file (default stdout)");

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Scan V_{K,L} along the L^p path (CSV)");
    scan_cmd->add_option("K", scan.k_path, "Polytope K")->required();
    scan_cmd->add_option("L", scan.l_path, "Polytope L on the same normals")->required();
    scan_cmd->add_option("--p", scan.p, "p in [0,1]")->capture_default_str();
    scan_cmd->add_option("--lambda-grid", scan.grid, "Number of grid points")->capture_default_str();
    scan_cmd->add_option("--event-tol", scan.event_tol, "Width of event brackets in lambda")->capture_default_str();
    scan_cmd->add_option("--tol", scan.tol, "Tolerance on second differences")->capture_default_str();
    scan_cmd->add_option("--out", scan.out, "Output CSV (default stdout)");

    CampaignArgs campaign;
    auto* campaign_cmd = app.add_subcommand("campaign", "Run a seeded batch of checks (summary JSON + CSV)");
    campaign_cmd->add_option("--config", campaign.config, "Campaign JSON")->required();
    campaign_cmd->add_option("--csv", campaign.csv, "Per-instance CSV (overrides config)");
    campaign_cmd->add_option("--out", campaign.out, "Summary JSON (overrides config; default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*gen_cmd) return run_gen(gen);
        if (*pair_cmd) return run_pair(pair);
        if (*check_cmd) return run_check_local(check);
        if (*scan_cmd) return run_scan(scan);
        if (*campaign_cmd) return run_campaign(campaign);
    } catch (const lpbm::Error& e) {
        std::cerr << "lpbm: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "lpbm: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
