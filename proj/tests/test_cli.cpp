#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "lesioneval/volume_io.hpp"
#include "support/helpers.hpp"

using nlohmann::json;
using testutil::CmdResult;
using testutil::run_cmd;
using testutil::TempDir;

namespace {

const std::string kCli = LESIONEVAL_CLI_PATH;

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::size_t data_row_count(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (!line.empty()) ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("eval on identical files reports perfect scores as JSON") {
  TempDir tmp("cli");
  const auto gt = tmp.path() / "gt.nii.gz";
  REQUIRE(run_cmd(kCli + " phantom --out-gt " + q(gt) + " --out-pred " +
                  q(tmp.path() / "ignored.nii.gz") + " --dims 24,24,24 --seed 3 --lesions 1" +
                  " --radius 3,4")
              .exit_code == 0);
  const CmdResult r = run_cmd(kCli + " eval " + q(gt) + " " + q(gt));
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  for (const char* region : {"ET", "TC", "WT"}) {
    CHECK(j.at(region).at("lesionwise_dice").get<double>() == 1.0);
    CHECK(j.at(region).at("lesionwise_hd95_mm").get<double>() == 0.0);
    CHECK(j.at(region).at("sensitivity").get<double>() == 1.0);
  }
}

TEST_CASE("eval exits 2 with a geometry diagnostic on mismatched dims") {
  TempDir tmp("cli");
  const auto small = tmp.path() / "small.rawvol";
  const auto big = tmp.path() / "big.rawvol";
  std::ofstream(small) << "RAWVOL 1 1 1 1 1 1\n0\n";
  std::ofstream(big) << "RAWVOL 2 1 1 1 1 1\n0 0\n";
  const CmdResult r = run_cmd(kCli + " eval " + q(small) + " " + q(big));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("geometry") != std::string::npos);
  CHECK(r.out.empty());  // no partial JSON
}

TEST_CASE("eval exits 2 on a missing input file") {
  const CmdResult r = run_cmd(kCli + " eval /no/such/file.nii /no/such/other.nii");
  CHECK(r.exit_code == 2);
}

TEST_CASE("phantom drop:ET pair scores 0 / 374 for ET through the CLI") {
  TempDir tmp("cli");
  const auto gt = tmp.path() / "gt.nii.gz";
  const auto pred = tmp.path() / "pred.nii.gz";
  REQUIRE(run_cmd(kCli + " phantom --out-gt " + q(gt) + " --out-pred " + q(pred) +
                  " --dims 28,28,28 --seed 5 --lesions 1 --radius 3,5 --perturb drop:ET")
              .exit_code == 0);
  const CmdResult r = run_cmd(kCli + " eval " + q(gt) + " " + q(pred));
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("ET").at("lesionwise_dice").get<double>() == 0.0);
  CHECK(j.at("ET").at("lesionwise_hd95_mm").get<double>() == 374.0);
}

TEST_CASE("phantom output is byte-identical for identical flags") {
  TempDir tmp("cli");
  const std::string flags =
      " --dims 20,20,20 --seed 77 --lesions 1 --radius 2,4 --perturb erode";
  REQUIRE(run_cmd(kCli + " phantom --out-gt " + q(tmp.path() / "a_gt.nii.gz") + " --out-pred " +
                  q(tmp.path() / "a_pred.nii.gz") + flags)
              .exit_code == 0);
  REQUIRE(run_cmd(kCli + " phantom --out-gt " + q(tmp.path() / "b_gt.nii.gz") + " --out-pred " +
                  q(tmp.path() / "b_pred.nii.gz") + flags)
              .exit_code == 0);
  CHECK(testutil::slurp(tmp.path() / "a_gt.nii.gz") ==
        testutil::slurp(tmp.path() / "b_gt.nii.gz"));
  CHECK(testutil::slurp(tmp.path() / "a_pred.nii.gz") ==
        testutil::slurp(tmp.path() / "b_pred.nii.gz"));

  const CmdResult digest = run_cmd(kCli + " phantom --out-gt " + q(tmp.path() / "c.nii.gz") +
                                   " --out-pred " + q(tmp.path() / "c2.nii.gz") + flags);
  CHECK(digest.out.find("phantom ") == 0);
}

TEST_CASE("batch over 2 teams x 3 subjects emits 36 rows; missing files are scored empty") {
  TempDir tmp("cli");
  const auto gt_dir = tmp.path() / "gt";
  const auto teams_dir = tmp.path() / "teams";
  std::filesystem::create_directories(gt_dir);
  std::filesystem::create_directories(teams_dir / "alpha");
  std::filesystem::create_directories(teams_dir / "beta");

  for (int s = 0; s < 3; ++s) {
    const std::string name = "case" + std::to_string(s) + ".nii.gz";
    REQUIRE(run_cmd(kCli + " phantom --out-gt " + q(gt_dir / name) + " --out-pred " +
                    q(teams_dir / "alpha" / name) + " --dims 24,24,24 --seed " +
                    std::to_string(100 + s) + " --lesions 1 --radius 3,4 --perturb shift:1,0,0")
                .exit_code == 0);
    if (s != 2)  // beta misses case2 on purpose
      std::filesystem::copy_file(teams_dir / "alpha" / name, teams_dir / "beta" / name);
  }

  const auto out_csv = tmp.path() / "metrics.csv";
  const CmdResult r =
      run_cmd(kCli + " batch " + q(gt_dir) + " " + q(teams_dir) + " " + q(out_csv) + " --jobs 2");
  REQUIRE(r.exit_code == 0);
  CHECK(data_row_count(out_csv) == 36);  // 2 teams * 3 subjects * 3 regions * 2 metrics

  const std::string log = testutil::slurp(out_csv.string() + ".log");
  CHECK(log.find("missing prediction team=beta subject=case2") != std::string::npos);
  CHECK(r.err.find("missing prediction") != std::string::npos);

  // the missing case scored against an empty prediction: dice 0, hd95 374
  bool penalty_seen = false;
  std::ifstream in(out_csv);
  for (std::string line; std::getline(in, line);)
    if (line.find("beta,case2,WT,hd95,374") != std::string::npos) penalty_seen = true;
  CHECK(penalty_seen);

  SUBCASE("--sensitivity adds one row per region") {
    const auto with_sens = tmp.path() / "metrics_sens.csv";
    REQUIRE(run_cmd(kCli + " batch " + q(gt_dir) + " " + q(teams_dir) + " " + q(with_sens) +
                    " --sensitivity")
                .exit_code == 0);
    CHECK(data_row_count(with_sens) == 54);
  }
  SUBCASE("rank consumes the batch output end to end") {
    const auto out_dir = tmp.path() / "ranked";
    const CmdResult rank = run_cmd(kCli + " rank " + q(out_csv) + " " + q(out_dir) +
                                   " --permutations 500 --seed 9");
    REQUIRE(rank.exit_code == 0);
    CHECK(rank.out.find("alpha") != std::string::npos);
    CHECK(std::filesystem::exists(out_dir / "frs.csv"));
    CHECK(std::filesystem::exists(out_dir / "ranks.csv"));
    CHECK(std::filesystem::exists(out_dir / "pvalues.csv"));
  }
}

TEST_CASE("batch rejects an empty gt directory") {
  TempDir tmp("cli");
  std::filesystem::create_directories(tmp.path() / "gt");
  std::filesystem::create_directories(tmp.path() / "teams" / "a");
  const CmdResult r = run_cmd(kCli + " batch " + q(tmp.path() / "gt") + " " +
                              q(tmp.path() / "teams") + " " + q(tmp.path() / "out.csv"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("rank of a single team prints FRS 3.00 and an empty p-matrix") {
  TempDir tmp("cli");
  const auto csv = tmp.path() / "solo.csv";
  {
    std::ofstream f(csv);
    f << "team,subject,region,metric,value\n";
    for (const char* subject : {"s1", "s2"})
      for (const char* region : {"ET", "TC", "WT"})
        for (const char* metric : {"dice", "hd95"})
          f << "solo," << subject << ',' << region << ',' << metric << ",0.5\n";
  }
  const CmdResult r = run_cmd(kCli + " rank " + q(csv) + " " + q(tmp.path() / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("3.00") != std::string::npos);  // single team: every rank is 1
  const std::string pvalues = testutil::slurp(tmp.path() / "out" / "pvalues.csv");
  CHECK(pvalues == "team,solo\nsolo,\n");
}

TEST_CASE("rank exits 2 on duplicate tuples") {
  TempDir tmp("cli");
  const auto csv = tmp.path() / "dup.csv";
  std::ofstream(csv) << "team,subject,region,metric,value\n"
                        "a,s1,ET,dice,0.5\na,s1,ET,dice,0.5\n";
  const CmdResult r = run_cmd(kCli + " rank " + q(csv) + " " + q(tmp.path() / "out"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("duplicate") != std::string::npos);
}

TEST_CASE("permtest prints a JSON permutation result") {
  TempDir tmp("cli");
  {
    std::ofstream f(tmp.path() / "two.csv");
    f << "team,subject,region,metric,value\n";
    for (const char* team : {"a", "b"})
      for (const char* subject : {"s1", "s2", "s3"})
        for (const char* region : {"ET", "TC", "WT"})
          for (const char* metric : {"dice", "hd95"})
            f << team << ',' << subject << ',' << region << ',' << metric << ','
              << (std::string(team) == "a" ? "0.9" : "0.5") << '\n';
  }
  const CmdResult r = run_cmd(kCli + " permtest " + q(tmp.path() / "two.csv") +
                              " a b --permutations 1000 --seed 4");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("team_a") == "a");
  CHECK(j.at("p_value").get<double>() > 0.0);
  CHECK(j.at("n_permutations").get<long long>() == 1000);
  CHECK(j.at("seed").get<std::uint64_t>() == 4);

  // deterministic across runs
  const CmdResult again = run_cmd(kCli + " permtest " + q(tmp.path() / "two.csv") +
                                  " a b --permutations 1000 --seed 4");
  CHECK(again.out == r.out);
}

TEST_CASE("summary writes markdown plus csv and rejects empty input") {
  TempDir tmp("cli");
  const auto csv = tmp.path() / "m.csv";
  std::ofstream(csv) << "team,subject,region,metric,value\n"
                        "a,s1,ET,dice,1\na,s2,ET,dice,1\na,s3,ET,dice,1\n";
  const CmdResult r =
      run_cmd(kCli + " summary " + q(csv) + " --out " + q(tmp.path() / "sum"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("1.00 \xC2\xB1 0.00 (1.00)") != std::string::npos);
  CHECK(testutil::slurp(tmp.path() / "sum.md").find("## ET") != std::string::npos);
  CHECK(testutil::slurp(tmp.path() / "sum.csv").find("team,region,metric") == 0);

  const auto empty_csv = tmp.path() / "empty.csv";
  std::ofstream(empty_csv) << "team,subject,region,metric,value\n";
  CHECK(run_cmd(kCli + " summary " + q(empty_csv)).exit_code == 2);
}

TEST_CASE("boxplot writes an SVG and rejects unknown region or metric") {
  TempDir tmp("cli");
  const auto csv = tmp.path() / "m.csv";
  std::ofstream(csv) << "team,subject,region,metric,value\n"
                        "a,s1,ET,dice,0.2\na,s2,ET,dice,0.4\na,s3,ET,dice,0.9\n";
  const auto svg = tmp.path() / "plot.svg";
  REQUIRE(run_cmd(kCli + " boxplot " + q(csv) + " ET dice " + q(svg)).exit_code == 0);
  const std::string content = testutil::slurp(svg);
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("class=\"box\"") != std::string::npos);

  CHECK(run_cmd(kCli + " boxplot " + q(csv) + " QQ dice " + q(svg)).exit_code == 2);
  CHECK(run_cmd(kCli + " boxplot " + q(csv) + " ET jaccard " + q(svg)).exit_code == 2);
}

TEST_CASE("eval honors --config and rejects malformed config files") {
  TempDir tmp("cli");
  const auto gt = tmp.path() / "gt.rawvol";
  const auto pred = tmp.path() / "pred.rawvol";
  // single 1-voxel lesion, prediction empty
  std::ofstream(gt) << "RAWVOL 3 3 3 1 1 1\n0 0 0 0 0 0 0 0 0 0 0 0 0 3 0 0 0 0 0 0 0 0 0 0 0 0 "
                       "0\n";
  std::ofstream(pred) << "RAWVOL 3 3 3 1 1 1\n0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 "
                         "0 0\n";
  const auto cfg = tmp.path() / "cfg.txt";
  std::ofstream(cfg) << "missing_region_hd95_mm = 111\n";
  const CmdResult r = run_cmd(kCli + " eval " + q(gt) + " " + q(pred) + " --config " + q(cfg));
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out).at("ET").at("lesionwise_hd95_mm").get<double>() == 111.0);

  const auto bad = tmp.path() / "bad.txt";
  std::ofstream(bad) << "what = 1\n";
  CHECK(run_cmd(kCli + " eval " + q(gt) + " " + q(pred) + " --config " + q(bad)).exit_code == 2);
}

TEST_CASE("usage errors exit 2: unknown subcommand and missing arguments") {
  CHECK(run_cmd(kCli + " frobnicate").exit_code == 2);
  CHECK(run_cmd(kCli + " eval onlyone.nii").exit_code == 2);
  CHECK(run_cmd(kCli).exit_code == 2);
  CHECK(run_cmd(kCli + " --help").exit_code == 0);
}
