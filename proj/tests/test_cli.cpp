/*
 * Copyright (C) 2026 The redkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "redkit/onnx_bridge.hpp"
#include "support/fixtures.hpp"

using namespace redkit;
using namespace redkit::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        const char* bin = std::getenv("REDKIT_CLI");
        if (!bin) GTEST_SKIP() << "REDKIT_CLI not set";
        bin_ = bin;
        dir_ = fs::temp_directory_path() / ("redkit_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        write_file(path("example.onnx"), example_onnx());
        std::ofstream(path("center.txt")) << "0\n0\n";
    }
    void TearDown() override {
        if (!dir_.empty()) fs::remove_all(dir_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    CliRun run(const std::string& args) const {
        std::string cmd = bin_ + " " + args + " 2>" + path("stderr.txt");
        CliRun r;
        FILE* p = ::popen(cmd.c_str(), "r");
        if (!p) return r;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
        int status = ::pclose(p);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return r;
    }

    std::string example_args() const { return "--model " + path("example.onnx") + " --center " + path("center.txt") + " --eps 1"; }

    std::string bin_;
    fs::path dir_;
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_F(Cli, ReduceExample) {
    CliRun r = run("reduce " + example_args() + " --out " + path("red.onnx"));
    ASSERT_EQ(r.code, 0) << r.out;
    auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "relu_before,relu_after,ratio,seconds");
    EXPECT_EQ(ls[1].rfind("5,3,", 0), 0u) << ls[1];
    ASSERT_TRUE(fs::exists(path("red.onnx.report.csv")));

    AffineChain red = to_chain(load_onnx(path("red.onnx")).net);
    EXPECT_EQ(red.relu_neurons(), 3u);
    CliRun eq = run("equiv --model " + path("example.onnx") + " --other " + path("red.onnx") + " --center " +
                 path("center.txt") + " --eps 1 --samples 2000");
    EXPECT_EQ(eq.code, 0) << eq.out;
    EXPECT_NE(eq.out.find(",yes"), std::string::npos);
}

TEST_F(Cli, BoundsOfExample) {
    CliRun r = run("bounds " + example_args() + " --method interval");
    ASSERT_EQ(r.code, 0);
    auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 1u + 5u + 2u);
    EXPECT_EQ(ls[1], "0,0,-4,0");
    EXPECT_EQ(ls[2], "0,1,1,5");
    EXPECT_EQ(ls[5], "0,4,-2,2");
    EXPECT_EQ(ls[6].rfind("output,0,", 0), 0u);
}

TEST_F(Cli, VerifyAndBench) {
    CliRun v = run("verify " + example_args());
    EXPECT_EQ(v.code, 0) << v.out;
    auto ls = lines(v.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[1].rfind("center.txt,verified,", 0), 0u) << ls[1];

    // Label 0 is not robust on this box.
    CliRun u = run("verify " + example_args() + " --label 0 --max-splits 4");
    EXPECT_EQ(u.code, 1);
    EXPECT_NE(u.out.find(",unknown,"), std::string::npos);

    CliRun b = run("bench " + example_args() + " --repeats 2");
    EXPECT_EQ(b.code, 0);
    ls = lines(b.out);
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "property,net_variant,verdict,time_s,splits");
    EXPECT_NE(ls[1].find(",original,verified,"), std::string::npos);
    EXPECT_NE(ls[2].find(",reduced,verified,"), std::string::npos);
}

TEST_F(Cli, GenIsDeterministic) {
    std::string args = " --layers 2 --width 24 --input-dim 3 --stable-fraction 0.5 --seed 7";
    ASSERT_EQ(run("gen" + args + " --out " + path("a")).code, 0);
    ASSERT_EQ(run("gen" + args + " --out " + path("b")).code, 0);
    for (const char* ext : {".onnx", ".stability.csv", ".vnnlib"}) {
        ASSERT_TRUE(fs::exists(path(std::string("a") + ext))) << ext;
        EXPECT_EQ(read_file(path(std::string("a") + ext)), read_file(path(std::string("b") + ext))) << ext;
    }
    CliRun s = run("stats --model " + path("a.onnx"));
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("relu_neurons,48"), std::string::npos) << s.out;
    EXPECT_NE(s.out.find("sequential,yes"), std::string::npos);

    CliRun r = run("reduce --model " + path("a.onnx") + " --vnnlib " + path("a.vnnlib") + " --out " + path("a.red.onnx"));
    EXPECT_EQ(r.code, 0) << r.out;
    CliRun eq = run("equiv --model " + path("a.onnx") + " --other " + path("a.red.onnx") + " --vnnlib " + path("a.vnnlib"));
    EXPECT_EQ(eq.code, 0) << eq.out;
}

TEST_F(Cli, ErrorExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("reduce --model " + path("example.onnx")).code, 2);  // --out missing
    EXPECT_EQ(run("--help").code, 0);
    // Two property sources.
    EXPECT_EQ(run("bounds " + example_args() + " --vnnlib " + path("center.txt")).code, 4);

    OnnxGraph g;
    g.input("x", {1, 2});
    g.node("Sigmoid", {"x"}, {"y"}, "act");
    g.output("y");
    write_file(path("sig.onnx"), g.bytes());
    CliRun u = run("stats --model " + path("sig.onnx"));
    EXPECT_EQ(u.code, 3);
    EXPECT_NE(read_file(path("stderr.txt")).find("Sigmoid (act)"), std::string::npos);

    write_file(path("junk.onnx"), "not a model");
    EXPECT_EQ(run("stats --model " + path("junk.onnx")).code, 5);
    std::ofstream(path("bad.vnnlib")) << "(declare-const X_0 Real)\n(assert (<= X_0 )\n";
    EXPECT_EQ(run("bounds --model " + path("example.onnx") + " --vnnlib " + path("bad.vnnlib")).code, 5);
    EXPECT_EQ(run("gen --out " + path("g") + " --width 4 --stable-fraction 1 --layers 1 --input-dim 0").code, 2);
    EXPECT_EQ(run("gen --out " + path("g") + " --margin 100").code, 6);
}
