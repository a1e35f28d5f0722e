#include <array>
#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "netrel/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = "\"" NETREL_CLI_PATH "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(NETREL_DATA_DIR) + "/" + name; }

fs::path fresh(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("netrel_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_kind(const std::string& out) {
  const auto pos = out.find("{\"error\"");
  if (pos == std::string::npos) return "";
  return nlohmann::json::parse(out.substr(pos, out.find('\n', pos) - pos))["error"];
}

}  // namespace

TEST_CASE("validate") {
  const auto r = run("validate " + data("net18.json"));
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["valid"] == true);
  CHECK(j["components"] == 16);
}

TEST_CASE("exact writes the bridge signature") {
  const auto dir = fresh("exact");
  REQUIRE(run("exact " + data("bridge.json") + " -o " + dir.string()).code == 0);
  const auto sig = netrel::read_text_file(dir / "exact_signature.csv");
  CHECK(sig.find("\n2,2,8,0.2,exact\n") != std::string::npos);
  const auto rel = netrel::read_text_file(dir / "exact_reliability.csv");
  CHECK(rel.find("\nt,R\n0,1.0\n") != std::string::npos);
}

TEST_CASE("mc-kst is reproducible and reports RE against exact") {
  const auto a = fresh("mc_a"), b = fresh("mc_b");
  const std::string args = "mc-kst " + data("bridge.json") + " --samples 50000 --seed 7 -o ";
  const auto ra = run(args + a.string());
  const auto rb = run(args + b.string() + " --threads 3");
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  for (const char* f : {"mc-kst_signature.csv", "mc-kst_reliability.csv"})
    CHECK(netrel::read_text_file(a / f) == netrel::read_text_file(b / f));
  const auto rel = netrel::read_text_file(a / "mc-kst_reliability.csv");
  CHECK(rel.find("# seed: 7") != std::string::npos);
  CHECK(rel.find("\nt,R,RE\n") != std::string::npos);
  CHECK(nlohmann::json::parse(ra.out)["re_max"].get<double>() < 0.05);
}

TEST_CASE("al-kst on the 18-node fixture and variant reuse") {
  const auto dir = fresh("al");
  const auto r = run("al-kst " + data("net18.json") + " --pool 10000 --seed 3 -o " + dir.string());
  REQUIRE(r.code == 0);
  const auto audit = nlohmann::json::parse(netrel::read_text_file(dir / "al-kst_audit.json"));
  CHECK(audit["n_ini"] == 36);
  CHECK(audit["n_add"] == 148);
  CHECK(fs::exists(dir / "al-kst_model.json"));

  const auto v = run("variant " + data("net18.json") + " --remove v3,v15 --model " +
                     (dir / "al-kst_model.json").string() + " --pool 2000 --seed 4 -o " + dir.string());
  CHECK(v.code == 0);
  CHECK(fs::exists(dir / "variant_reliability.csv"));

  const auto mismatch = run("variant " + data("grid3x3.json") + " --remove e5 --model " +
                            (dir / "al-kst_model.json").string() + " -o " + dir.string());
  CHECK(mismatch.code == 2);
  CHECK(error_kind(mismatch.out) == "ModelMismatch");
}

TEST_CASE("rf-kst") {
  const auto dir = fresh("rf");
  const auto r = run("rf-kst " + data("grid3x3.json") + " --pool 2000 --train 200 --seed 1 -o " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["kst_runs"] == 200);
}

TEST_CASE("exit codes and error JSON") {
  const auto dir = fresh("errors");
  const auto bad = dir / "bad.json";
  auto doc = nlohmann::json::parse(netrel::read_text_file(data("bridge.json")));
  doc["terminals"] = {"s"};
  netrel::write_text_file(bad, doc.dump());
  auto r = run("exact " + bad.string() + " -o " + dir.string());
  CHECK(r.code == 2);
  CHECK(error_kind(r.out) == "InvalidNetwork");
  CHECK(run("validate " + bad.string()).code == 2);

  r = run("exact " + data("grid3x3.json") + " --exact-limit 10 -o " + dir.string());
  CHECK(r.code == 3);
  CHECK(error_kind(r.out) == "ExactIntractable");

  r = run("exact /nonexistent.json");
  CHECK(r.code == 4);
  CHECK(error_kind(r.out) == "Io");

  r = run("exact " + data("bridge.json") + " -o " + (bad / "sub").string());
  CHECK(r.code == 4);

  CHECK(run("frobnicate").code == 1);
}
