#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

using namespace ksent;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "ksent");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string sample(const std::string& rel) { return std::string(KSENT_SAMPLES_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("ksent_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name) << text;
        return (path_ / name).string();
    }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, EntropyCsv) {
    const auto r = run({"entropy", "--measure", sample("measures/markov_two_state.json"), "--n-max", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "measure_id,n,H_n,H_n_over_n,H_next_minus_H_n");
    EXPECT_EQ(ls[1].rfind("markov_two_state,1,", 0), 0u);
    const double cond = std::stod(ls[2].substr(ls[2].rfind(',') + 1));
    const double expect = (2.0 / 3.0) * -(0.9 * std::log(0.9) + 0.1 * std::log(0.1)) +
                          (1.0 / 3.0) * -(0.2 * std::log(0.2) + 0.8 * std::log(0.8));
    EXPECT_NEAR(cond, expect, 1e-12);
}

TEST(Cli, EntropyToFile) {
    TempDir dir;
    const auto out = (dir / "h.csv").string();
    const auto r = run({"entropy", "--measure", sample("measures/bernoulli_dyadic.json"), "--n-max", "2", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(lines(slurp(out)).size(), 3u);
}

TEST(Cli, HullSections) {
    TempDir dir;
    const auto saved = (dir / "hull.json").string();
    const auto r = run({"hull", "--measure", sample("measures/markov_order2.json"), "--order", "1", "--save-hull", saved});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("memory_word,symbol,probability"), std::string::npos);
    EXPECT_NE(r.out.find("# flagged_rows"), std::string::npos);
    EXPECT_NE(r.out.find("n,hull_rate,source_conditional_entropy,difference"), std::string::npos);
    const auto hull = load_measure(saved);
    EXPECT_EQ(hull.kind(), MeasureKind::Markov);
    EXPECT_EQ(hull.order(), 1u);
}

TEST(Cli, LemmaFuzz) {
    const auto r = run({"lemma-fuzz", "--trials", "10000", "--seed", "42", "--max-atoms", "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "trials,attempts,violations,min_slack,worst_c");
    EXPECT_EQ(ls[1].rfind("10000,", 0), 0u);
    EXPECT_NE(ls[1].find(",0,"), std::string::npos);
}

TEST(Cli, Theorem1Holds) {
    TempDir dir;
    const auto csv = (dir / "trace.csv").string();
    const auto r = run({"theorem1", "--config", sample("configs/theorem1_markov2.json"), "--csv-out", csv});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = Json::parse(r.out);
    EXPECT_EQ(doc.at("verdict"), "holds");
    EXPECT_EQ(doc.at("approximants").size(), 6u);
    EXPECT_TRUE(doc.at("approximants")[0].at("hypothesis").contains("max_ratio"));
    EXPECT_EQ(lines(slurp(csv)).size(), 7u);
}

TEST(Cli, Theorem1RandomChainConfig) {
    const auto r = run({"theorem1", "--config", sample("configs/theorem1_random.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out).at("verdict"), "holds");
}

TEST(Cli, Theorem1Violated) {
    TempDir dir;
    const auto cfg = dir.write("violated.json", R"({
        "target": {"kind": "bernoulli", "alphabet_size": 2, "weights": ["0.9", "0.1"]},
        "approximants": [
            {"kind": "bernoulli", "alphabet_size": 2, "weights": ["0.5", "0.5"]},
            {"kind": "bernoulli", "alphabet_size": 2, "weights": ["0.5", "0.5"]}
        ],
        "eps": [0.5, 0.5]
    })");
    const auto r = run({"theorem1", "--config", cfg});
    EXPECT_EQ(r.code, 2) << r.err;
    EXPECT_EQ(Json::parse(r.out).at("verdict"), "violated");
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, Theorem1Inconclusive) {
    // factor target with a shallow bracket; approximant rate placed inside the bracket
    const auto lumped = load_measure(sample("measures/lumped_three_state.json"));
    const auto b = rate_bracket(lumped, 1);
    ASSERT_GT(b.width(), 1e-4);
    double lo = 0.01, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double p = 0.5 * (lo + hi);
        const double h = -(p * std::log(p) + (1 - p) * std::log(1 - p));
        (h < b.midpoint() ? lo : hi) = p;
    }
    TempDir dir;
    Json cfg = {{"target", "lumped.json"},
                {"approximants", {{{"kind", "bernoulli"}, {"alphabet_size", 2}, {"weights", {lo, 1 - lo}}}}},
                {"eps", {0.5}},
                {"bracket_depth", 1}};
    fs::copy_file(sample("measures/lumped_three_state.json"), dir / "lumped.json");
    const auto path = dir.write("inconclusive.json", cfg.dump());
    const auto r = run({"theorem1", "--config", path});
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_EQ(Json::parse(r.out).at("verdict"), "inconclusive");
}

TEST(Cli, Theorem2Suspension) {
    TempDir dir;
    const auto json = (dir / "t2.json").string();
    const auto csv = (dir / "t2.csv").string();
    const auto r = run({"theorem2", "--config", sample("configs/theorem2_suspension.json"), "--json-out", json,
                        "--csv-out", csv});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = Json::parse(slurp(json));
    EXPECT_EQ(doc.at("verdict"), "holds");
    EXPECT_EQ(doc.at("rows").size(), 5u);
    EXPECT_EQ(lines(slurp(csv)).size(), 1u + 5 * 6);
}

TEST(Cli, RefinedPartitionSweep) {
    const auto r = run({"pitskel", "--W", "8", "--n", "2", "--sweep", "6..9"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    EXPECT_EQ(ls[0], "K,n,h_mu,h_hull_n,gap");
    EXPECT_EQ(ls.size(), 1u + 4 * 2 + 2);
    EXPECT_EQ(ls.back().rfind("# divergence trend: confirmed", 0), 0u);
}

TEST(Cli, RefinedPartitionSingleK) {
    const auto r = run({"pitskel", "--K", "3", "--W", "2", "--n", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[1].rfind("3,1,", 0), 0u);
    EXPECT_EQ(run({"pitskel", "--sweep", "9..3"}).code, 1);
    EXPECT_EQ(run({"pitskel", "--policy", "drop"}).code, 1);
}

TEST(Cli, Suspension) {
    const auto r = run({"suspension", "--config", sample("configs/suspension_geometric.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    EXPECT_EQ(ls[0], "m,q,n,lower,upper,hull_rate");
    EXPECT_EQ(ls.size(), 1u + 5 * 6 + 2);
    EXPECT_NE(r.out.find("# abramov rate"), std::string::npos);
}

TEST(Cli, InputErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"entropy", "--measure", "/nonexistent/m.json", "--n-max", "2"}).code, 1);
    EXPECT_EQ(run({"entropy", "--measure", sample("measures/markov_two_state.json")}).code, 1);
    EXPECT_EQ(run({"theorem1", "--config", "/nonexistent/c.json"}).code, 1);

    TempDir dir;
    const auto cfg = dir.write("missing.json", R"({"target": "no_such_measure.json", "orders": [1, 2]})");
    const auto r = run({"theorem1", "--config", cfg});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("no_such_measure.json"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("entropy"), std::string::npos);
}

TEST(Cli, BudgetOverride) {
    ::setenv(cli::kBudgetEnv, "100", 1);
    const auto r = run({"entropy", "--measure", sample("measures/lumped_three_state.json"), "--n-max", "10"});
    ::unsetenv(cli::kBudgetEnv);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find(cli::kBudgetEnv), std::string::npos);

    ::setenv(cli::kBudgetEnv, "zero", 1);
    EXPECT_EQ(run({"lemma-fuzz", "--trials", "10", "--seed", "1"}).code, 1);
    ::unsetenv(cli::kBudgetEnv);
}

TEST(Cli, ByteIdenticalReruns) {
    const std::vector<std::vector<std::string>> commands = {
        {"entropy", "--measure", sample("measures/lumped_three_state.json"), "--n-max", "6"},
        {"hull", "--measure", sample("measures/lumped_three_state.json"), "--order", "3"},
        {"lemma-fuzz", "--trials", "2000", "--seed", "9"},
        {"theorem1", "--config", sample("configs/theorem1_random.json")},
        {"pitskel", "--W", "4", "--n", "2", "--sweep", "2..5"},
        {"suspension", "--config", sample("configs/suspension_geometric.json")},
    };
    for (const auto& c : commands) {
        const auto a = run(c), b = run(c);
        EXPECT_EQ(a.code, b.code);
        EXPECT_EQ(a.out, b.out) << c[0];
    }
}
