#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kTmp = fs::temp_directory_path() / "qpbound_cli_test";

int run(const std::string& args) {
  fs::create_directories(kTmp);
  const std::string cmd = std::string(QPBOUND_CLI) + " " + args + " > " + (kTmp / "stdout").string() +
                          " 2> " + (kTmp / "stderr").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, CurvesPrintsMarkedPoints) {
  ASSERT_EQ(run("curves --mu-star 0.18 --out " + (kTmp / "curves").string()), 0);
  const std::string out = slurp(kTmp / "stdout");
  EXPECT_NE(out.find("Q_cap_H,0.5887"), std::string::npos) << out;
  EXPECT_NE(out.find("product_form,0.4574"), std::string::npos) << out;
  EXPECT_TRUE(fs::exists(kTmp / "curves" / "allcurves_data_int.csv"));
}

TEST(Cli, BoundWithAnalyticConstant) {
  ASSERT_EQ(run("bound --eta 0.3 --out " + (kTmp / "bound.csv").string()), 0);
  const std::string csv = slurp(kTmp / "bound.csv");
  EXPECT_EQ(csv.rfind("h_bar_10,", 0), 0u);
  EXPECT_NE(csv.find("sufficient-condition"), std::string::npos);
}

TEST(Cli, OracleFromModelFile) {
  const std::string model = std::string(QPBOUND_SOURCE_DIR) + "/models/joint_departures.model";
  ASSERT_EQ(run("oracle --model " + model + " --reward n1 --trunc 60 --horizon 600 "
                "--constraint-window 25 --out " + (kTmp / "oracle.csv").string()),
            0)
      << slurp(kTmp / "stderr");
  EXPECT_NE(slurp(kTmp / "oracle.csv").find(",pass,"), std::string::npos);
  EXPECT_NE(slurp(kTmp / "stderr").find("complementary slackness"), std::string::npos);
}

TEST(Cli, PerturbListsAxisRates) {
  ASSERT_EQ(run("perturb --eta 0.8 --constraint-window 5"), 0);
  EXPECT_NE(slurp(kTmp / "stderr").find("threshold_raised"), std::string::npos);
  EXPECT_EQ(slurp(kTmp / "stdout").rfind("n,h_bar_minus,v_bar_minus\n1,", 0), 0u);
}

TEST(Cli, ExitCodes) {
  // A zero bias bound cannot cover the perturbation error.
  EXPECT_EQ(run("oracle --eta 0.3 --trunc 40 --horizon 200 --bias-constant 0"), 2);
  // mu* >= mu violates the model precondition.
  EXPECT_EQ(run("bound --mu-star 0.7"), 3);
  EXPECT_EQ(run("bound --model /nonexistent.model"), 1);
  EXPECT_NE(run("bound --mu-star 0.2 --eta 0.3"), 0);
  EXPECT_NE(run("frobnicate"), 0);
}
