#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stickel/cli.hpp"

using namespace stickel;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "--no-cache");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Json first_line(const std::string& text) { return Json::parse(text.substr(0, text.find('\n'))); }

std::filesystem::path scratch(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("stickel-cli-" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, ThetaGolden) {
  auto r = run_cli({"theta", "--n", "0", "--b", "3", "--conductor", "5", "--field", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = first_line(r.out);
  EXPECT_EQ(j.at("tool"), "stickel");
  EXPECT_EQ(j.at("schema"), "stickel-report/1");
  EXPECT_EQ(j.at("status"), "ok");
  Json coeffs = j.at("result").at("theta").at("coeffs");
  EXPECT_EQ(coeffs, Json::parse(R"({"2":"-1","3":"1"})"));
}

TEST(Cli, AssertIntegralFailsOnNonIntegralElement) {
  auto r = run_cli({"theta", "--n", "0", "--b", "2", "--conductor", "5", "--field", "5", "--assert-integral", "--l", "2"});
  EXPECT_EQ(r.code, 1);
  auto j = first_line(r.out);
  EXPECT_EQ(j.at("status"), "failed");
  EXPECT_FALSE(j.at("result").at("integrality").at("integral").get<bool>());
}

TEST(Cli, InvalidInputExitsTwoWithPayload) {
  auto r = run_cli({"theta", "--n", "0", "--b", "5", "--conductor", "5", "--field", "5"});
  EXPECT_EQ(r.code, 2);
  auto j = first_line(r.out);
  EXPECT_EQ(j.at("status"), "invalid");
  EXPECT_EQ(j.at("error").at("kind"), "invalid_input");
  EXPECT_EQ(run_cli({"theta", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({"jacobi", "--m", "5", "--p", "13"}).code, 2);
  EXPECT_EQ(run_cli({"--format", "csv", "theta", "--n", "0", "--b", "3", "--conductor", "5", "--field", "5"}).code, 2);
}

TEST(Cli, BrumerStarkVerify) {
  auto r = run_cli({"bs-verify", "--m", "5", "--p", "11", "--b", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(first_line(r.out).at("result").at("ok").get<bool>());
  auto t = run_cli({"--format", "text", "bs-verify", "--m", "5", "--p", "11", "--b", "3"});
  EXPECT_NE(t.out.find("verified"), std::string::npos);
}

TEST(Cli, ProbeExitCodes) {
  auto ok = run_cli({"probe", "--l", "37", "--n", "31"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(first_line(ok.out).at("result").at("verdict"), "certified-cyclic");
  auto ex = run_cli({"probe", "--l", "37", "--n", "31", "--max-p", "1", "--max-q", "1"});
  EXPECT_EQ(ex.code, 3);
  auto j = first_line(ex.out);
  EXPECT_EQ(j.at("status"), "exhausted");
  EXPECT_EQ(j.at("result").at("verdict"), "unknown");
  EXPECT_FALSE(j.at("result").at("evidence").empty());
}

TEST(Cli, RecheckAcceptsGenuineAndRejectsTampered) {
  auto dir = scratch("recheck");
  std::string all;
  for (auto args : std::vector<std::vector<std::string>>{
           {"theta", "--n", "1", "--b", "2", "--conductor", "5", "--field", "5", "--l", "5"},
           {"congruence", "--field", "5", "--conductor", "5", "--b", "2", "--n", "4", "--l", "5"},
           {"jacobi", "--m", "3", "--p", "13"},
           {"bs-verify", "--m", "5", "--p", "11", "--b", "3", "--normalize"},
           {"norm-check", "--b", "3", "--m", "5", "--q", "7", "--p", "71"},
           {"kshadow", "--n", "31", "--l", "37", "--q", "149", "--b", "2"},
           {"eigenspace", "--l", "37"},
           {"probe", "--l", "37", "--n", "31"}}) {
    auto r = run_cli(args);
    ASSERT_EQ(r.code, 0) << args.front() << " " << r.err;
    all += r.out;
  }
  std::ofstream(dir / "good.jsonl") << all;
  auto good = run_cli({"--recheck", (dir / "good.jsonl").string()});
  EXPECT_EQ(good.code, 0) << good.out;
  EXPECT_EQ(first_line(good.out).at("result").at("passed"), "8");

  // Flip the claimed Jacobi sum.
  auto pos = all.find("\"coeffs\":[\"-4\",\"-3\"]");
  ASSERT_NE(pos, std::string::npos);
  std::string bad = all;
  bad.replace(pos, 21, "\"coeffs\":[\"-4\",\"-2\"]");
  std::ofstream(dir / "bad.jsonl") << bad;
  auto r = run_cli({"--recheck", (dir / "bad.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(first_line(r.out).at("result").at("failed").size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ScanIsDeterministicAcrossJobs) {
  auto a = run_cli({"--jobs", "1", "scan", "--l-min", "3", "--l-max", "70"});
  auto b = run_cli({"--jobs", "4", "scan", "--l-min", "3", "--l-max", "70"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto c = run_cli({"--format", "csv", "--jobs", "3", "scan", "--l-min", "3", "--l-max", "70"});
  EXPECT_EQ(c.out.rfind("l,i,eigenspace,order\n", 0), 0u);
  EXPECT_NE(c.out.find("37,31,5,37"), std::string::npos);
}

TEST(Cli, ScanResumesToIdenticalOutput) {
  auto dir = scratch("scan");
  auto ck = (dir / "ck.json").string(), out = (dir / "out.jsonl").string();
  auto full = run_cli({"scan", "--l-min", "3", "--l-max", "80"});
  auto part = run_cli({"scan", "--l-min", "3", "--l-max", "80", "--checkpoint", ck, "--output", out, "--max-items", "7"});
  ASSERT_EQ(part.code, 0) << part.err;
  auto rest = run_cli({"--jobs", "2", "scan", "--l-min", "3", "--l-max", "80", "--checkpoint", ck, "--output", out,
                       "--resume"});
  ASSERT_EQ(rest.code, 0) << rest.err;
  EXPECT_EQ(slurp(out), full.out);

  // Different range against the same checkpoint.
  EXPECT_EQ(run_cli({"scan", "--l-min", "3", "--l-max", "90", "--checkpoint", ck, "--resume"}).code, 2);
  // Corrupted checkpoint.
  auto text = slurp(ck);
  text[text.find("next_index") + 13] = '9';
  std::ofstream(ck, std::ios::trunc) << text;
  auto bad = run_cli({"scan", "--l-min", "3", "--l-max", "80", "--checkpoint", ck, "--output", out, "--resume"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("corrupted"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ScanDetectsTruncatedOutput) {
  auto dir = scratch("trunc");
  auto ck = (dir / "ck.json").string(), out = (dir / "out.jsonl").string();
  ASSERT_EQ(run_cli({"scan", "--l-min", "3", "--l-max", "40", "--checkpoint", ck, "--output", out, "--max-items", "4"}).code, 0);
  std::string text = slurp(out);
  std::ofstream(out, std::ios::trunc) << text.substr(0, text.size() / 2);
  EXPECT_EQ(run_cli({"scan", "--l-min", "3", "--l-max", "40", "--checkpoint", ck, "--output", out, "--resume"}).code, 2);
  std::filesystem::remove_all(dir);
}

TEST(Cli, BinaryRunsAndIsolatesCache) {
  auto dir = scratch("binary");
  std::string cmd = std::string("STICKEL_CACHE_DIR=") + dir.string() + " " + STICKEL_CLI_PATH +
                    " jacobi --m 5 --p 181 > " + (dir / "o.txt").string();
  int status = std::system(cmd.c_str());
  EXPECT_EQ(status, 0);
  EXPECT_EQ(first_line(slurp(dir / "o.txt")).at("command"), "jacobi");
  EXPECT_TRUE(std::filesystem::exists(dir / "jacobi.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, Sha256KnownAnswer) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ScanEdgeCases) {
  auto empty = run_cli({"scan", "--l-min", "24", "--l-max", "28"});
  EXPECT_EQ(empty.code, 0);
  EXPECT_TRUE(empty.out.empty());
  auto r = run_cli({"scan", "--l-min", "3", "--l-max", "37"});
  std::istringstream in(r.out);
  std::string line;
  int nontrivial = 0, lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    auto j = Json::parse(line);
    if (!j.at("result").at("nontrivial").empty()) {
      ++nontrivial;
      EXPECT_EQ(j.at("input").at("l"), "37");
    }
  }
  EXPECT_EQ(lines, 11);  // odd primes 3..37
  EXPECT_EQ(nontrivial, 1);
}
