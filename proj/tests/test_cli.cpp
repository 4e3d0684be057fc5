// End-to-end checks of the sograb executable: flags, JSON output and exit
// codes. The binary path comes in through SOGRAB_CLI_PATH.
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string stdout_text;
};

CommandResult run_command(const std::string& args) {
  const std::string command = std::string(SOGRAB_CLI_PATH) + " " + args +
                              " 2>/dev/null";
  std::array<char, 512> buffer;
  CommandResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buffer.data(), buffer.size(), pipe) != nullptr) {
    result.stdout_text += buffer.data();
  }
  const int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli scores an identical pair as a perfect grasp") {
  const fs::path dir = fresh_dir("sograb_cli_score");
  auto synth = run_command("synth --shape box --n-points 400 --seed 3 --out-dir " +
                           dir.string());
  REQUIRE(synth.exit_code == 0);

  const auto result = run_command("score --pre " + (dir / "pre.ply").string() +
                                  " --grasp " + (dir / "pre.ply").string() +
                                  " --outcome successful");
  CHECK(result.exit_code == 0);
  const json out = json::parse(result.stdout_text);
  CHECK(out.at("dcd").get<double>() <= 1e-9);
  CHECK(out.at("score").get<double>() == 1.0);
  CHECK(out.at("alpha").get<double>() == 100.0);
  CHECK(out.at("mode").get<std::string>() == "icp");
}

TEST_CASE("cli unsuccessful outcome needs no grasp cloud") {
  const fs::path dir = fresh_dir("sograb_cli_unsuccessful");
  run_command("synth --n-points 200 --seed 4 --out-dir " + dir.string());
  const auto result = run_command("score --pre " + (dir / "pre.ply").string() +
                                  " --outcome unsuccessful");
  CHECK(result.exit_code == 0);
  const json out = json::parse(result.stdout_text);
  CHECK(out.at("score").get<double>() == 0.0);
  CHECK_FALSE(out.contains("dcd"));
}

TEST_CASE("cli validation failures exit with code 1") {
  const fs::path dir = fresh_dir("sograb_cli_invalid");
  run_command("synth --n-points 200 --seed 5 --out-dir " + dir.string());
  // partial outcome without the timing flags
  const auto missing_times =
      run_command("score --pre " + (dir / "pre.ply").string() + " --grasp " +
                  (dir / "grasp.ply").string() + " --outcome partial");
  CHECK(missing_times.exit_code == 1);
  // unknown flag
  CHECK(run_command("score --nope").exit_code == 1);
  // missing required flag
  CHECK(run_command("score --outcome successful").exit_code == 1);
}

TEST_CASE("cli pca score is self-consistent across invocations") {
  const fs::path dir = fresh_dir("sograb_cli_pca");
  run_command(
      "synth --shape extruded-spline --dims 0.02,0.05,0 --n-points 800 "
      "--seed 6 --squash 0.5 --out-dir " +
      dir.string());
  const std::string base = "score --pre " + (dir / "pre.ply").string() +
                           " --grasp " + (dir / "grasp.ply").string() +
                           " --mode pca --outcome successful";
  const auto first = run_command(base);
  const auto second = run_command(base);
  REQUIRE(first.exit_code == 0);
  CHECK(first.stdout_text == second.stdout_text);  // deterministic
  const json out = json::parse(first.stdout_text);
  const double d = out.at("dcd").get<double>();
  const double score = out.at("score").get<double>();
  CHECK(score == doctest::Approx(1.0 - d / 2.0).epsilon(1e-8));
  CHECK(out.at("mode").get<std::string>() == "pca");
}

TEST_CASE("cli align writes the aligned cloud and transform") {
  const fs::path dir = fresh_dir("sograb_cli_align");
  run_command(
      "synth --n-points 600 --seed 7 --rotate-deg 10 --translate "
      "0.01,0,0.005 --out-dir " +
      dir.string());
  const auto result = run_command(
      "align --source " + (dir / "pre.ply").string() + " --target " +
      (dir / "grasp.ply").string() + " --icp-max-dist 0.05 --out-cloud " +
      (dir / "aligned.ply").string() + " --out-transform " +
      (dir / "t.json").string());
  REQUIRE(result.exit_code == 0);
  const json out = json::parse(result.stdout_text);
  CHECK(out.at("rmse").get<double>() <= 1e-4);
  CHECK(out.at("converged").get<bool>());
  CHECK(fs::exists(dir / "aligned.ply"));
  CHECK(fs::exists(dir / "t.json"));
}

TEST_CASE("cli batch reports partial failures with exit code 2") {
  const fs::path dir = fresh_dir("sograb_cli_batch");
  run_command("synth --n-points 300 --seed 8 --squash 0.8 --out-dir " +
              dir.string());
  json trials = json::array();
  for (int i = 0; i < 3; ++i) {
    trials.push_back(json{{"trial_id", "t" + std::to_string(i)},
                          {"object_id", "B1"},
                          {"material", "40A"},
                          {"gripper_id", "rigid"},
                          {"repeat", i},
                          {"pre_cloud", "pre.ply"},
                          {"grasp_cloud", "grasp.ply"},
                          {"outcome", json{{"type", "successful"}}}});
  }
  trials.push_back(json{{"trial_id", "broken"},
                        {"object_id", "B1"},
                        {"material", "40A"},
                        {"gripper_id", "rigid"},
                        {"repeat", 3},
                        {"pre_cloud", "missing.ply"},
                        {"grasp_cloud", "grasp.ply"},
                        {"outcome", json{{"type", "successful"}}}});
  std::ofstream(dir / "manifest.json")
      << json{{"alpha", 100.0}, {"trials", trials}}.dump(2);

  const auto result =
      run_command("batch --manifest " + (dir / "manifest.json").string() +
                  " --out-dir " + (dir / "out").string());
  CHECK(result.exit_code == 2);
  const json out = json::parse(result.stdout_text);
  CHECK(out.at("trials").get<int>() == 4);
  CHECK(out.at("scored").get<int>() == 3);
  CHECK(out.at("errors").get<int>() == 1);
  CHECK(fs::exists(dir / "out" / "scores.csv"));
  CHECK(fs::exists(dir / "out" / "aggregate.csv"));
  CHECK(fs::exists(dir / "out" / "heatmap.svg"));
}
