#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "lpbm/lpbm.hpp"
#include "oracles.hpp"

namespace {

lpbm::MergedPair square_octagon() {
    return lpbm::merge_pair(lpbm::axis_box(2), lpbm::regular_polygon(8), lpbm::MergeMode::Raise, 0.01, 7);
}

double kappa(double p, int n, double vol) {
    return p == 0.0 ? 1.0 / (n * vol * vol) : p / (n * n) * std::pow(vol, p / n - 2.0);
}

}  // namespace

TEST(Derivatives, TrivialPaths) {
    const auto k = lpbm::random_polytope(2, 10, 4);
    const auto same = lpbm::path_from_bodies(k, k, 0.5);
    EXPECT_EQ(lpbm::first_derivative(same, 0.3), 0.0);
    EXPECT_EQ(lpbm::second_derivative(same, 0.3), 0.0);
    EXPECT_EQ(lpbm::v_second(same, 0.3), 0.0);

    const auto sq = lpbm::axis_box(2);
    const auto homothety = lpbm::path_from_bodies(sq, sq.scaled(std::exp(1.0)), 0.0);
    for (double lambda : {0.0, 0.4, 1.0}) {
        const double vol = 4.0 * std::exp(2.0 * lambda);
        EXPECT_LT(oracle::rel_err(lpbm::first_derivative(homothety, lambda), 2.0 * vol), 1e-13);
        EXPECT_LT(oracle::rel_err(lpbm::second_derivative(homothety, lambda), 4.0 * vol), 1e-13);
        EXPECT_NEAR(lpbm::v_second(homothety, lambda), 0.0, 1e-13);
    }
    const auto scaled = lpbm::path_from_bodies(k, k.scaled(1.7), 0.0);
    EXPECT_NEAR(lpbm::v_second(scaled, 0.6), 0.0, 1e-12);
}

TEST(Derivatives, EmptyFacetIsAnError) {
    const auto pair = square_octagon();
    const auto path = lpbm::path_from_bodies(pair.k, pair.l, 0.0);
    try {
        lpbm::first_derivative(path, 0.0);
        ADD_FAILURE();
    } catch (const lpbm::Error& e) {
        EXPECT_EQ(e.code(), lpbm::ErrorCode::EmptyFacet);
    }
}

TEST(Derivatives, MatchFiniteDifferences) {
    lpbm::detail::Rng rng(2024);
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const int dim = 2 + static_cast<int>(seed % 2);
        const auto pair = lpbm::random_isomorphic_pair(dim, 2 * dim + 6, 0.3, seed);
        for (double p : {0.0, 0.5, 1.0}) {
            const auto path = lpbm::path_from_bodies(pair.k, pair.l, p);
            auto vol = [&](oracle::Quad lambda) { return oracle::precise_path_volume(path, lambda); };
            for (int t = 0; t < 5; ++t) {
                const double lambda = 0.05 + 0.9 * rng.uniform();
                const auto d = lpbm::volume_derivatives(path, lambda);
                EXPECT_LT(oracle::rel_err(d.first, oracle::precise_central_first(vol, lambda, 1e-5)), 1e-6);
                EXPECT_LT(oracle::rel_err(d.second, oracle::precise_central_second(vol, lambda, 1e-4)), 1e-4);
            }
        }
    }
}

TEST(Derivatives, VSecondAgreesWithPsiTangent) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int dim = 2 + static_cast<int>(seed % 2);
        const auto pair = lpbm::random_isomorphic_pair(dim, 2 * dim + 6, 0.3, seed);
        for (double p : {0.0, 0.3, 1.0}) {
            const auto path = lpbm::path_from_bodies(pair.k, pair.l, p);
            for (double lambda : {0.0, 0.25, 0.8}) {
                const auto d = lpbm::volume_derivatives(path, lambda);
                const auto form = lpbm::psi_form(path, lambda);
                const double psi = form(lpbm::path_tangent(path, lambda));
                const double numerator = lpbm::concavity_numerator(d, p, dim);
                const double scale = dim * d.volume * std::abs(d.second) + dim * d.first * d.first;
                EXPECT_LE(std::abs(psi - numerator), 1e-8 * scale);
                const double v2 = lpbm::v_second(path, lambda);
                EXPECT_LE(std::abs(v2 - kappa(p, dim, d.volume) * psi), 1e-8 * kappa(p, dim, d.volume) * scale);
                auto value = [&](oracle::Quad x) {
                    const oracle::Quad v = oracle::precise_path_volume(path, x);
                    return p == 0.0 ? logq(v) : powq(v, static_cast<oracle::Quad>(p) / dim);
                };
                if (lambda > 0.0) {
                    EXPECT_LT(oracle::rel_err(v2, oracle::precise_central_second(value, lambda, 1e-4)), 1e-4);
                }
            }
        }
    }
}

TEST(Derivatives, LogPathAtZeroGivesLocalLhs) {
    auto hex = lpbm::regular_polygon(6);
    std::vector<double> qh = hex.heights();
    qh[2] = qh[3] = 1.5;
    const auto q = hex.with_heights(qh);
    const double eps = 0.2;
    std::vector<double> h(6);
    for (int i = 0; i < 6; ++i) h[static_cast<std::size_t>(i)] = hex.height(i) * std::exp(eps * q.height(i) / hex.height(i));
    const auto path = lpbm::path_from_bodies(hex, hex.with_heights(h), 0.0);
    const auto k = lpbm::enumerate_geometry(hex);
    const double expected = eps * eps * lpbm::local_lhs(k, q, 0.0) / (k.volume() * k.volume());
    EXPECT_LT(oracle::rel_err(lpbm::v_second(path, 0.0), expected), 1e-10);
    EXPECT_LT(expected, 0.0);
}

TEST(Scan, PerturbedPairHasNoEventsAndIsConcave) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pair = lpbm::random_isomorphic_pair(2, 10, 0.3, seed);
        const auto report = lpbm::scan(lpbm::path_from_bodies(pair.k, pair.l, 0.0), 65, 1e-10);
        EXPECT_TRUE(report.events.empty());
        EXPECT_TRUE(report.concave);
        EXPECT_TRUE(report.d2_nonpositive);
        for (const auto& pt : report.points) {
            ASSERT_TRUE(pt.d1 && pt.d2 && pt.signature);
            EXPECT_FALSE(pt.event_flag);
            EXPECT_LE(*pt.d2, 1e-12);
            EXPECT_LT(oracle::rel_err(*pt.d2, lpbm::v_second(lpbm::path_from_bodies(pair.k, pair.l, 0.0), pt.lambda)), 1e-12);
        }
    }
}

TEST(Scan, HomotheticPathIsAffine) {
    const auto k = lpbm::random_polytope(3, 12, 6);
    const double c = 1.8;
    const auto report = lpbm::scan(lpbm::path_from_bodies(k, k.scaled(c), 0.0), 33, 1e-10);
    EXPECT_TRUE(report.events.empty());
    const double v0 = std::log(lpbm::enumerate_geometry(k).volume());
    for (const auto& pt : report.points) {
        EXPECT_NEAR(pt.value, v0 + 3.0 * std::log(c) * pt.lambda, 1e-12);
        EXPECT_NEAR(*pt.d2, 0.0, 1e-12);
    }
    EXPECT_TRUE(report.concave);
}

TEST(Scan, EndpointValues) {
    const auto pair = lpbm::random_isomorphic_pair(3, 12, 0.3, 9);
    const double vk = lpbm::enumerate_geometry(pair.k).volume();
    const double vl = lpbm::enumerate_geometry(pair.l).volume();
    for (double p : {0.0, 0.5, 1.0}) {
        const auto report = lpbm::scan(lpbm::path_from_bodies(pair.k, pair.l, p), 9, 1e-10);
        EXPECT_LT(oracle::rel_err(report.points.front().value, lpbm::path_value(vk, p, 3)), 1e-10);
        EXPECT_LT(oracle::rel_err(report.points.back().value, lpbm::path_value(vl, p, 3)), 1e-10);
        EXPECT_EQ(report.points.back().lambda, 1.0);
        for (const auto& pt : report.points) {
            EXPECT_TRUE(std::isfinite(pt.value));
            if (p > 0.0) {
                EXPECT_GT(pt.value, 0.0);
            }
        }
    }
}

TEST(Scan, SquareToOctagonEventsMatchBisectionOracle) {
    const auto pair = square_octagon();
    const auto path = lpbm::path_from_bodies(pair.k, pair.l, 0.0);
    const auto report = lpbm::scan(path, 257, 1e-10);
    // Both diagonal pairs activate, 4/5 first, inside the same grid cell.
    ASSERT_EQ(report.events.size(), 2u);

    // Oracle: diagonal facet f becomes nonempty where its height drops below the
    // support value of the body cut out by the other normals. The a-type already
    // changes once the gap is within the facet tolerance.
    auto gap = [&](int f, double lambda) {
        const auto sv = path.at(lambda);
        std::vector<int> others;
        for (int i = 0; i < sv.size(); ++i) {
            if (i != f && i != lpbm::antipode(f)) others.push_back(i);
        }
        const auto rest = lpbm::enumerate_geometry(sv.restricted(others));
        return sv.height(f) - rest.support_value(sv.normal(f));
    };
    auto root = [&](int f, double offset) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gap(f, mid) > offset * path.at(mid).height(f) ? lo : hi) = mid;
        }
        return lo;
    };
    const int diagonals[2] = {4, 6};
    for (int k = 0; k < 2; ++k) {
        const int f = diagonals[k];
        const auto& e = report.events[static_cast<std::size_t>(k)];
        ASSERT_GT(gap(f, 0.0), 0.0);
        ASSERT_LT(gap(f, 1.0), 0.0);
        EXPECT_LE(e.hi - e.lo, 1e-10);
        const double onset = root(f, lpbm::kDefaultFacetTolerance);
        EXPECT_NEAR(e.lo, onset, 2e-10);
        EXPECT_NEAR(e.hi, onset, 2e-10);
        EXPECT_NEAR(e.lo, root(f, 0.0), 1e-9);
    }

    int flagged = 0;
    for (std::size_t k = 0; k < report.points.size(); ++k) {
        const auto& pt = report.points[k];
        if (pt.event_flag) {
            ++flagged;
            EXPECT_GT(pt.lambda, report.events.back().hi);
            EXPECT_LT(report.points[k - 1].lambda, report.events.front().lo);
        }
    }
    EXPECT_EQ(flagged, 1);
    EXPECT_TRUE(report.concave);
    EXPECT_TRUE(report.slopes_monotone);
}

TEST(Scan, DoubleResolutionFindsSameEvents) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto pair = lpbm::random_merged_pair(2, 8, 8, lpbm::MergeMode::Raise, 0.05, seed);
        const auto path = lpbm::path_from_bodies(pair.k, pair.l, 0.0);
        const auto coarse = lpbm::scan(path, 129, 1e-10);
        const auto fine = lpbm::scan(path, 257, 1e-10);
        ASSERT_EQ(coarse.events.size(), fine.events.size()) << "seed " << seed;
        EXPECT_GE(fine.events.size(), 1u);
        for (std::size_t k = 0; k < fine.events.size(); ++k) {
            EXPECT_NEAR(coarse.events[k].lo, fine.events[k].lo, 2e-10);
        }
        EXPECT_TRUE(fine.concave);
        double last = -1.0;
        for (const auto& e : fine.events) {
            EXPECT_GT(e.lo, last);
            EXPECT_LE(e.lo, e.hi);
            last = e.hi;
        }
    }
}

TEST(Scan, DerivativesOmittedNearEvents) {
    const auto pair = square_octagon();
    const auto path = lpbm::path_from_bodies(pair.k, pair.l, 0.0);
    lpbm::ScanOptions opt;
    opt.grid_size = 65;
    opt.event_tol = 0.2;  // wide brackets so some grid points fall inside
    const auto report = lpbm::scan(path, opt);
    ASSERT_FALSE(report.events.empty());
    int missing = 0;
    for (const auto& pt : report.points) {
        const bool near = pt.lambda >= report.events.front().lo - opt.event_tol &&
                          pt.lambda <= report.events.front().hi + opt.event_tol;
        EXPECT_EQ(pt.d1.has_value(), !near);
        missing += near ? 1 : 0;
    }
    EXPECT_GT(missing, 0);
}

TEST(Scan, RejectsBadGrid) {
    const auto k = lpbm::axis_box(2);
    EXPECT_THROW(lpbm::scan(lpbm::path_from_bodies(k, k, 0.0), 2, 1e-10), lpbm::Error);
}

TEST(ScanCsv, RoundTrip) {
    const auto pair = square_octagon();
    lpbm::ScanOptions opt;
    opt.grid_size = 33;
    opt.event_tol = 0.05;
    const auto report = lpbm::scan(lpbm::path_from_bodies(pair.k, pair.l, 0.5), opt);
    std::stringstream csv;
    lpbm::write_scan_csv(csv, report);
    const std::string text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "lambda,value,d1,d2,signature_hash,event_flag");
    const auto rows = lpbm::read_scan_csv(csv);
    ASSERT_EQ(rows.size(), report.points.size());
    bool saw_empty = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& pt = report.points[k];
        EXPECT_EQ(rows[k].lambda, pt.lambda);
        EXPECT_EQ(rows[k].value, pt.value);
        EXPECT_EQ(rows[k].d1, pt.d1);
        EXPECT_EQ(rows[k].d2, pt.d2);
        EXPECT_EQ(rows[k].event_flag, pt.event_flag);
        EXPECT_EQ(rows[k].signature_hash, pt.signature->hash_hex());
        saw_empty = saw_empty || !pt.d1;
    }
    EXPECT_TRUE(saw_empty);
    std::stringstream again;
    lpbm::write_scan_csv(again, report);
    EXPECT_EQ(again.str(), text);
}

TEST(ScanCsv, RejectsMalformedInput) {
    std::stringstream no_header("0,1,,,abc,0\n");
    EXPECT_THROW(lpbm::read_scan_csv(no_header), lpbm::Error);
    std::stringstream bad("lambda,value,d1,d2,signature_hash,event_flag\n0,x,,,abc,0\n");
    try {
        lpbm::read_scan_csv(bad);
        ADD_FAILURE();
    } catch (const lpbm::Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}
