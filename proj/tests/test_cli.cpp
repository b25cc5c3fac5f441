#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "helpers.hpp"

namespace {

struct Out {
    int rc;
    std::string text;
};

Out cli(const std::string& args) {
    std::string cmd = std::string(PRALINE_CLI) + " " + args + " 2>&1";
    FILE* f = popen(cmd.c_str(), "r");
    std::string s;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) s.append(buf.data(), n);
    int st = pclose(f);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, s};
}

std::string tmp(const std::string& name) { return "/tmp/praline_test_" + name; }

}  // namespace

TEST(Cli, ExactEdgeExample) {
    auto o = cli("solve " + data_path("edges.pl") + " --mode exact --query \"path(1,7)\"");
    EXPECT_EQ(o.rc, 0);
    EXPECT_EQ(o.text, "path(1,7): [0.344448, 0.412992]\n");
}

TEST(Cli, ApproxEdgeExample) {
    auto o = cli("solve " + data_path("edges.pl") + " --mode approx");
    EXPECT_EQ(o.rc, 0);
    EXPECT_EQ(o.text, "path(1,7): [0.288, 0.467424]\n");
}

TEST(Cli, ConflictExitsOne) {
    auto o = cli("solve " + data_path("conflict.pl"));
    EXPECT_EQ(o.rc, 1);
    EXPECT_NE(o.text.find("No solution"), std::string::npos);
}

TEST(Cli, UsageAndParseErrorsExitTwo) {
    EXPECT_EQ(cli("").rc, 2);
    EXPECT_EQ(cli("solve /nonexistent.pl").rc, 2);
    EXPECT_EQ(cli("solve " + data_path("edges.pl") + " --mode fast").rc, 2);
    {
        std::ofstream f(tmp("bad.pl"));
        f << "0.5::a.\n1.5::b :- a.\n";
    }
    auto o = cli("solve " + tmp("bad.pl"));
    EXPECT_EQ(o.rc, 2);
    EXPECT_NE(o.text.find("2:"), std::string::npos) << o.text;   // line number in the message
    EXPECT_EQ(cli("--help").rc, 0);
}

TEST(Cli, JsonSchemaAndReproducibility) {
    std::string a = tmp("a.json"), b = tmp("b.json");
    ASSERT_EQ(cli("solve " + data_path("chain.pl") + " --seed 7 --json " + a).rc, 0);
    ASSERT_EQ(cli("solve " + data_path("chain.pl") + " --seed 7 --json " + b).rc, 0);
    auto ja = nlohmann::json::parse(std::ifstream(a)), jb = nlohmann::json::parse(std::ifstream(b));
    ASSERT_TRUE(ja.contains("facts"));
    ASSERT_TRUE(ja.contains("meta"));
    for (auto k : {"delta", "seed", "elapsed_ms"}) EXPECT_TRUE(ja["meta"].contains(k)) << k;
    EXPECT_EQ(ja["meta"]["seed"], 7);
    for (auto& f : ja["facts"])
        for (auto k : {"atom", "lower", "upper", "mode", "flags"}) EXPECT_TRUE(f.contains(k)) << k;
    ja["meta"].erase("elapsed_ms");
    jb["meta"].erase("elapsed_ms");
    EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Cli, Dumps) {
    std::string f = data_path("edges.pl");
    auto c = cli("solve " + f + " --dump-correlations --mode approx");
    EXPECT_NE(c.text.find("edge(2,5) ~ edge(2,6): pos"), std::string::npos) << c.text;
    auto k = cli("solve " + f + " --dump-constraints --mode approx");
    EXPECT_NE(k.text.find("V1[1] = 0.7"), std::string::npos) << k.text;
    auto g = cli("solve " + f + " --dump-graph --mode approx");
    EXPECT_NE(g.text.find("hyperedges"), std::string::npos);
    auto e = cli("solve " + data_path("chain.pl") + " --dump-exprs --mode approx --query e");
    EXPECT_NE(e.text.find("e = "), std::string::npos) << e.text;
}

TEST(Cli, OracleSubcommand) {
    auto o = cli("oracle " + data_path("edges.pl") + " --samples 50");
    EXPECT_EQ(o.rc, 0);
    EXPECT_NE(o.text.find("path(1,7): exact [0.344448, 0.412992]"), std::string::npos) << o.text;
}
