// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "sptad/error.hpp"
#include "test_util.hpp"

namespace sptad {
namespace {

using cli::load_run_config;
using cli::parse_nms_mode;
using cli::parse_thresholds;
using cli::RunConfig;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, SynthThenEvalOracleScoresPerfect) {
  testing::TempDir dir("cli");
  const std::string d = dir.path().string();
  const Result synth = run({"synth", "--seed", "7", "--videos", "20", "--out", d});
  ASSERT_EQ(synth.code, cli::kExitOk) << synth.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "annotations.json"));
  const Result eval = run({"eval", "--detections", d + "/oracle_detections.json", "--annotations",
                           d + "/annotations.json", "--out", d + "/report.json"});
  ASSERT_EQ(eval.code, cli::kExitOk) << eval.err;
  EXPECT_NE(eval.out.find("map_avg 1.0000"), std::string::npos) << eval.out;
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["map_avg"].get<double>(), 1.0);
}

TEST(Cli, IdenticalCommandLinesGiveIdenticalBytes) {
  testing::TempDir a("cli");
  testing::TempDir b("cli");
  ASSERT_EQ(run({"synth", "--seed", "3", "--out", a.path().string()}).code, 0);
  ASSERT_EQ(run({"synth", "--seed", "3", "--out", b.path().string()}).code, 0);
  EXPECT_EQ(slurp(a / "annotations.json"), slurp(b / "annotations.json"));
  EXPECT_EQ(slurp(a / "oracle_detections.json"), slurp(b / "oracle_detections.json"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"eval", "--bogus"}).code, cli::kExitValidation);
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"nonsense"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"eval", "--detections", "/nonexistent/d.json", "--annotations",
                 "/nonexistent/a.json"})
                .code,
            cli::kExitIo);
  EXPECT_EQ(run({"synth", "--config", "/nonexistent/c.json"}).code, cli::kExitIo);
  EXPECT_EQ(run({"synth", "--videos", "-3"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"eval", "--detections", "a", "--annotations", "b", "--thresholds", "0.5,1.5"}).code,
            cli::kExitValidation);
}

TEST(Cli, HelpDocumentsFlags) {
  const Result top = run({"--help"});
  EXPECT_EQ(top.code, cli::kExitOk);
  for (const char* sub : {"synth", "forward", "match", "grad-check", "nms", "eval", "e2e"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    const Result h = run({sub, "--help"});
    EXPECT_EQ(h.code, cli::kExitOk) << sub;
    EXPECT_NE(h.out.find("--seed"), std::string::npos) << sub;
    EXPECT_NE(h.out.find("--config"), std::string::npos) << sub;
  }
  const Result e2e = run({"e2e", "--help"});
  for (const char* flag : {"--out", "--stride", "--clip-len", "--stages", "--proposals",
                           "--nms-sigma", "--thresholds"}) {
    EXPECT_NE(e2e.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, ForwardRejectsIndivisibleHeads) {
  testing::TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"model": {"d_model": 250}})";
  const Result r = run({"forward", "--config", (dir / "c.json").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("divisible"), std::string::npos) << r.err;
}

TEST(Cli, ForwardSmallModel) {
  testing::TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"model": {"d_model": 32, "d_hidden": 8, "attn_heads": 4}})";
  const Result r = run({"forward", "--config", (dir / "c.json").string(), "--stages", "2",
                        "--proposals", "7", "--out", (dir / "f.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("stage 1: 7 proposals"), std::string::npos) << r.out;
  const auto doc = nlohmann::json::parse(slurp(dir / "f.json"));
  EXPECT_EQ(doc["stages"].size(), 2u);
  EXPECT_EQ(doc["stages"][1]["segments"].size(), 7u);
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  testing::TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"model": {"d_modle": 64}})";
  EXPECT_EQ(run({"synth", "--config", (dir / "c.json").string()}).code, cli::kExitIo);
  std::ofstream(dir / "t.json") << R"({"seed": "seven"})";
  EXPECT_EQ(run({"synth", "--config", (dir / "t.json").string()}).code, cli::kExitIo);
}

TEST(Cli, FlagsOverrideConfig) {
  testing::TempDir dir("cli");
  std::ofstream(dir / "c.json") << R"({"seed": 5, "synthetic": {"n_videos": 4}, "nms": {"sigma": 0.3}})";
  const RunConfig cfg = load_run_config(dir / "c.json");
  EXPECT_EQ(cfg.synthetic.seed, 5u);
  EXPECT_EQ(cfg.model.seed, 5u);
  EXPECT_EQ(cfg.synthetic.n_videos, 4);
  EXPECT_EQ(cfg.nms.sigma, 0.3);

  const std::string c = (dir / "c.json").string();
  ASSERT_EQ(run({"synth", "--config", c, "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run({"synth", "--config", c, "--videos", "2", "--out", (dir / "b").string()}).code, 0);
  const auto a = nlohmann::json::parse(slurp(dir / "a" / "annotations.json"));
  const auto b = nlohmann::json::parse(slurp(dir / "b" / "annotations.json"));
  EXPECT_EQ(a["database"].size(), 4u);
  EXPECT_EQ(b["database"].size(), 2u);
}

TEST(Cli, MatchAndGradCheck) {
  const Result m = run({"match", "--seed", "2"});
  ASSERT_EQ(m.code, cli::kExitOk) << m.err;
  EXPECT_NE(m.out.find("assignment cost"), std::string::npos);
  testing::TempDir dir("cli");
  std::ofstream(dir / "fx.json") << R"({"class_probs": [[0.1, 0.9], [0.8, 0.2]],
      "segments": [[0.1, 0.3], [0.5, 0.9]],
      "ground_truths": [{"segment": [0.5, 0.9], "label": 0}]})";
  const Result fx = run({"match", "--fixture", (dir / "fx.json").string()});
  ASSERT_EQ(fx.code, cli::kExitOk) << fx.err;
  EXPECT_NE(fx.out.find("gt 0 -> prediction 1"), std::string::npos) << fx.out;

  const Result g = run({"grad-check", "--trials", "5", "--out", (dir / "g.json").string()});
  ASSERT_EQ(g.code, cli::kExitOk) << g.err;
  const auto doc = nlohmann::json::parse(slurp(dir / "g.json"));
  EXPECT_LT(doc["max_rel_error"].get<double>(), 1e-4);
}

TEST(Cli, NmsRewritesDetections) {
  testing::TempDir dir("cli");
  std::ofstream(dir / "a.json") << R"({"labels": ["run"], "database": {"v": {"duration_sec": 10, "fps": 10, "annotations": []}}})";
  std::ofstream(dir / "d.json") << R"({"results": {"v": [
      {"label": "run", "score": 0.9, "segment": [1, 3]},
      {"label": "run", "score": 0.8, "segment": [1, 3]}]}})";
  const Result r = run({"nms", "--detections", (dir / "d.json").string(), "--annotations",
                        (dir / "a.json").string(), "--nms-mode", "hard", "--out",
                        (dir / "o.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "o.json"))["results"]["v"].size(), 1u);
  EXPECT_EQ(run({"nms", "--detections", (dir / "d.json").string(), "--annotations",
                 (dir / "a.json").string(), "--nms-mode", "fuzzy", "--out",
                 (dir / "o.json").string()})
                .code,
            cli::kExitValidation);
}

TEST(Cli, EndToEndOracle) {
  testing::TempDir dir("cli");
  const Result r = run({"e2e", "--videos", "5", "--seed", "4", "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("map_avg 1.0000"), std::string::npos) << r.out;
  for (const char* f : {"annotations.json", "detections.json", "report.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
}

TEST(RunConfigHelpers, ParseThresholdsAndModes) {
  EXPECT_EQ(parse_thresholds("0.3,0.5"), (std::vector<double>{0.3, 0.5}));
  EXPECT_THROW(parse_thresholds("0.3,x"), ValidationError);
  EXPECT_THROW(parse_thresholds("0"), ValidationError);
  EXPECT_EQ(parse_nms_mode("linear"), NmsMode::kLinear);
  EXPECT_THROW(parse_nms_mode("soft"), ValidationError);
}

}  // namespace
}  // namespace sptad
