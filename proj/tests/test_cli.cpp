#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "lpbm/lpbm.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lpbm_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::string& args, const std::string& out = "", const std::string& err = "") const {
        std::string cmd = std::string(LPBM_CLI_PATH) + " " + args;
        cmd += " > " + (out.empty() ? std::string("/dev/null") : path(out));
        cmd += " 2> " + (err.empty() ? std::string("/dev/null") : path(err));
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

private:
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenAxisPresetIsUnitSquare) {
    ASSERT_EQ(run("gen --dim 2 --facets 4 --preset axis --out " + path("sq.json")), 0);
    const auto sv = lpbm::read_support_vector_file(path("sq.json"));
    EXPECT_EQ(sv.heights(), std::vector<double>(4, 1.0));
    EXPECT_NEAR(lpbm::enumerate_geometry(sv).volume(), 4.0, 1e-15);
}

TEST_F(Cli, GenIsDeterministicAndValid) {
    ASSERT_EQ(run("gen --dim 2 --facets 12 --seed 7", "a.json"), 0);
    ASSERT_EQ(run("gen --dim 2 --facets 12 --seed 7", "b.json"), 0);
    EXPECT_EQ(read("a.json"), read("b.json"));
    const auto g = lpbm::enumerate_geometry(lpbm::read_support_vector_file(path("a.json")));
    EXPECT_TRUE(g.all_facets_nonempty());
    EXPECT_EQ(g.size(), 12);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("gen --dim 2 --facets 7", "", "err.txt"), 2);
    EXPECT_NE(read("err.txt").find("even"), std::string::npos);
    EXPECT_EQ(run("gen --bogus"), 2);
    EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, PairPerturbZeroIsIdentity) {
    ASSERT_EQ(run("gen --dim 3 --facets 10 --seed 2 --out " + path("k.json")), 0);
    ASSERT_EQ(run("pair " + path("k.json") + " --mode perturb --magnitude 0 --out " + path("l.json")), 0);
    EXPECT_EQ(lpbm::read_support_vector_file(path("k.json")).heights(),
              lpbm::read_support_vector_file(path("l.json")).heights());
}

TEST_F(Cli, PairMergeWritesBothBodies) {
    ASSERT_EQ(run("gen --dim 2 --facets 4 --preset axis --out " + path("sq.json")), 0);
    ASSERT_EQ(run("gen --dim 2 --facets 8 --preset regular --out " + path("oct.json")), 0);
    ASSERT_EQ(run("pair " + path("sq.json") + " --mode independent-merge --other " + path("oct.json") +
                  " --magnitude 0.01 --out " + path("l.json") + " --out-base " + path("k.json")),
              0);
    const auto k = lpbm::read_support_vector_file(path("k.json"));
    const auto l = lpbm::read_support_vector_file(path("l.json"));
    EXPECT_EQ(k.size(), 8);
    EXPECT_TRUE(k.same_normals(l));
    EXPECT_NEAR(k.height(4), std::sqrt(2.0), 0.02 * std::sqrt(2.0));
}

TEST_F(Cli, CheckLocalExitCodes) {
    ASSERT_EQ(run("gen --dim 2 --facets 10 --seed 3 --out " + path("k.json")), 0);
    ASSERT_EQ(run("check-local " + path("k.json") + " " + path("k.json") + " --p 0", "v.json"), 0);
    const auto v = lpbm::Json::parse(read("v.json"));
    EXPECT_TRUE(v["passed"].get<bool>());
    EXPECT_NEAR(v["lhs"].get<double>(), 0.0, 1e-12);
    for (const char* key : {"lhs", "max_eig", "kernel_residual", "passed", "p", "lambda", "tol"}) EXPECT_TRUE(v.contains(key));

    ASSERT_EQ(run("pair " + path("k.json") + " --mode perturb --magnitude 0.2 --seed 4 --out " + path("l.json")), 0);
    EXPECT_EQ(run("check-local " + path("k.json") + " " + path("l.json") + " --p 0"), 0);
    EXPECT_EQ(run("check-local " + path("k.json") + " " + path("k.json") + " --p 0 --tol -1"), 1);

    write("bad.json", "{\"dim\": 2,\n  \"normals\": [[1, 0]\n");
    EXPECT_EQ(run("check-local " + path("bad.json") + " " + path("k.json"), "", "err.txt"), 2);
    EXPECT_NE(read("err.txt").find("bad.json"), std::string::npos);
    EXPECT_EQ(run("check-local " + path("missing.json") + " " + path("k.json")), 2);
}

TEST_F(Cli, ScanWritesCsv) {
    ASSERT_EQ(run("gen --dim 2 --facets 4 --preset axis --out " + path("sq.json")), 0);
    ASSERT_EQ(run("gen --dim 2 --facets 8 --preset regular --out " + path("oct.json")), 0);
    ASSERT_EQ(run("pair " + path("sq.json") + " --mode independent-merge --other " + path("oct.json") +
                  " --magnitude 0.01 --out " + path("l.json") + " --out-base " + path("k.json")),
              0);
    ASSERT_EQ(run("scan " + path("k.json") + " " + path("l.json") + " --p 0 --lambda-grid 33 --out " + path("s.csv")), 0);
    std::ifstream in(path("s.csv"));
    const auto rows = lpbm::read_scan_csv(in);
    EXPECT_EQ(rows.size(), 33u);
    int flags = 0;
    for (const auto& r : rows) flags += r.event_flag ? 1 : 0;
    EXPECT_EQ(flags, 1);
    ASSERT_EQ(run("scan " + path("k.json") + " " + path("l.json") + " --p 0 --lambda-grid 33", "s2.csv"), 0);
    EXPECT_EQ(read("s.csv"), read("s2.csv"));
}

TEST_F(Cli, CampaignIsDeterministic) {
    write("cfg.json", R"({"dim": 2, "facets": 8, "instances": 6, "p_list": [0, 1], "seed": 11, "scan_grid": 9})");
    ASSERT_EQ(run("campaign --config " + path("cfg.json") + " --csv " + path("a.csv") + " --out " + path("a.json")), 0);
    ASSERT_EQ(run("campaign --config " + path("cfg.json") + " --csv " + path("b.csv") + " --out " + path("b.json")), 0);
    EXPECT_EQ(read("a.csv"), read("b.csv"));
    EXPECT_EQ(read("a.json"), read("b.json"));
    const auto summary = lpbm::Json::parse(read("a.json"));
    EXPECT_EQ(summary["per_p"][0]["pass_rate"].get<double>(), 1.0);

    write("empty.json", R"({"dim": 2, "instances": 0})");
    EXPECT_EQ(run("campaign --config " + path("empty.json")), 2);
}
