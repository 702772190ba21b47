// Copyright 2026 The HardyWeave Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace {

struct Invocation {
    int exit_code;
    std::string out;
};

/// Runs the CLI with `args`; stderr is folded into the output when asked.
Invocation cli(const std::string &args, bool with_stderr = false) {
    std::string cmd = std::string("\"") + HARDYWEAVE_CLI + "\" " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string hardy_circ() { return std::string("\"") + HARDYWEAVE_CIRCUITS_DIR + "/hardy.circ\""; }

}  // namespace

TEST(CliHardy, DefaultsGiveOneTwelfth) {
    Invocation r = cli("hardy --format json");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema_version"], "1");
    EXPECT_EQ(j["command"], "hardy");
    EXPECT_NEAR(j["results"]["detection_probabilities"]["d_S,d_I"].get<double>(), 1.0 / 12, 1e-9);
    EXPECT_TRUE(j["results"]["paradox"]["verdict"].get<bool>());
    EXPECT_EQ(j["inputs"]["alpha"]["re"].get<double>(), 0.01);
    EXPECT_EQ(j["inputs"]["alpha"]["im"].get<double>(), 0.0);
}

TEST(CliHardy, TextAndCsv) {
    Invocation text = cli("hardy");
    EXPECT_EQ(text.exit_code, 0);
    EXPECT_NE(text.out.find("0.083333333333"), std::string::npos);
    EXPECT_NE(text.out.find("verdict: reproduced"), std::string::npos);
    Invocation csv = cli("hardy --format csv");
    EXPECT_EQ(csv.exit_code, 0);
    EXPECT_EQ(csv.out.rfind("outcome,probability\n", 0), 0u);
}

TEST(CliHardy, PhysicsGatesExitTwo) {
    EXPECT_EQ(cli("hardy --gamma 0").exit_code, 2);
    EXPECT_EQ(cli("hardy --q 0").exit_code, 2);
    Invocation r = cli("hardy --gamma 0.055 --format json");
    EXPECT_EQ(r.exit_code, 2);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["results"]["error"]["code"], "CancellationFailed");
}

TEST(CliHardy, UsageErrorsExitOne) {
    EXPECT_EQ(cli("hardy --alpha nope").exit_code, 1);
    EXPECT_EQ(cli("hardy --format xml").exit_code, 1);
    EXPECT_EQ(cli("hardy --alpha 0.01 --beta 0.02").exit_code, 1);
    EXPECT_EQ(cli("frobnicate").exit_code, 1);
    EXPECT_EQ(cli("").exit_code, 1);
    EXPECT_EQ(cli("--help").exit_code, 0);
}

TEST(CliHardy, ComplexFlags) {
    Invocation r = cli("hardy --alpha 0.01i --gamma 0.05i --format json");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["results"]["paradox"]["p_dd"].get<double>(), 1.0 / 12, 1e-9);
}

TEST(CliJson, ByteIdenticalAcrossRuns) {
    Invocation a = cli("hardy --format json"), b = cli("hardy --format json");
    EXPECT_EQ(a.out, b.out);
    Invocation c = cli("run " + hardy_circ() + " --format json"), d = cli("run " + hardy_circ() + " --format json");
    EXPECT_EQ(c.out, d.out);
    EXPECT_FALSE(c.out.empty());
}

TEST(CliRun, MatchesHardyCommand) {
    auto h = nlohmann::json::parse(cli("hardy --format json").out);
    Invocation r = cli("run " + hardy_circ() + " --format json");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema_version"], "1");
    const auto &want = h["results"]["detection_probabilities"];
    const auto &got = j["results"]["detection_probabilities"];
    ASSERT_EQ(want.size(), got.size());
    for (auto it = want.begin(); it != want.end(); ++it) {
        EXPECT_NEAR(got[it.key()].get<double>(), it.value().get<double>(), 1e-12) << it.key();
    }
}

TEST(CliRun, EmitStages) {
    Invocation r = cli("run " + hardy_circ() + " --format json --emit-stages");
    ASSERT_EQ(r.exit_code, 0);
    auto j = nlohmann::json::parse(r.out);
    ASSERT_TRUE(j["results"].contains("stages"));
    EXPECT_EQ(j["results"]["stages"].size(), 9u);
    EXPECT_EQ(j["results"]["stages"][0]["name"], "prepare");
    Invocation text = cli("run " + hardy_circ() + " --emit-stages");
    EXPECT_NE(text.out.find("[post_select]"), std::string::npos);
}

TEST(CliRun, SyntaxErrorDiagnostic) {
    std::string path = std::string(HARDYWEAVE_TEST_TMP) + "/broken.circ";
    FILE *f = std::fopen(path.c_str(), "w");
    ASSERT_NE(f, nullptr);
    std::fputs("mode a\nmode b\n  bs a -> b\n", f);
    std::fclose(f);
    Invocation r = cli("run \"" + path + "\"", true);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.out.find("broken.circ:3:3: error:"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("[ArityMismatch]"), std::string::npos);
    EXPECT_EQ(cli("run /nonexistent/file.circ").exit_code, 1);
}

TEST(CliScan, SlopesAndCsv) {
    Invocation csv = cli("scan --values 0.2,0.1,0.05,0.02");
    ASSERT_EQ(csv.exit_code, 0);
    EXPECT_EQ(csv.out.rfind("index,alpha,beta,gamma,q,ratio_triple,ratio_two_pair,p_dd\n", 0), 0u);
    auto j = nlohmann::json::parse(cli("scan --values 0.2,0.1,0.05,0.02 --format json").out);
    EXPECT_NEAR(j["results"]["fit"]["slope_triple"].get<double>(), 1.0, 0.01);
    EXPECT_NEAR(j["results"]["fit"]["slope_two_pair"].get<double>(), 2.0, 0.02);
    ASSERT_EQ(j["results"]["points"].size(), 4u);
    EXPECT_EQ(j["results"]["points"][3]["alpha"]["re"].get<double>(), 0.02);
}

TEST(CliScan, UsageErrors) {
    EXPECT_EQ(cli("scan --steps 1").exit_code, 1);
    EXPECT_EQ(cli("scan --param gamma").exit_code, 1);
    EXPECT_EQ(cli("scan --values 0.1").exit_code, 1);
    EXPECT_EQ(cli("scan --min 0.2 --max 0.1").exit_code, 1);
    EXPECT_EQ(cli("scan --steps 3 --spacing linear").exit_code, 0);
}

TEST(CliScan, WithoutConditionReportsNan) {
    Invocation r = cli("scan --values 0.2,0.02 --no-satisfy-condition5");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find(",nan\n"), std::string::npos) << r.out;
}
