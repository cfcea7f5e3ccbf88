// Command-line front end: case evaluation, batch scoring over a directory
// tree, ranking with permutation tests, summary tables, box plots and
// synthetic phantom generation.

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "lesioneval/boxplot.hpp"
#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"
#include "lesioneval/metrics.hpp"
#include "lesioneval/phantom.hpp"
#include "lesioneval/ranking.hpp"
#include "lesioneval/summary.hpp"
#include "lesioneval/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace lesioneval;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ContractError*>(&e) != nullptr) return kExitInternal;
  if (dynamic_cast<const Error*>(&e) != nullptr) return kExitUsage;
  return kExitInternal;
}

std::array<int, 3> parse_triple_int(const std::string& text, const char* what) {
  std::array<int, 3> out{};
  if (std::sscanf(text.c_str(), "%d,%d,%d", &out[0], &out[1], &out[2]) != 3)
    throw UsageError(std::string(what) + " needs three comma-separated integers, got '" + text +
                     "'");
  return out;
}

std::array<double, 3> parse_triple_double(const std::string& text, const char* what) {
  std::array<double, 3> out{};
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &out[0], &out[1], &out[2]) != 3)
    throw UsageError(std::string(what) + " needs three comma-separated numbers, got '" + text +
                     "'");
  return out;
}

EvalConfig config_from(const std::string& path) {
  return path.empty() ? EvalConfig{} : load_eval_config(path);
}

ordered_json region_json(const RegionMetrics& m) {
  return ordered_json{{"lesionwise_dice", m.lesionwise_dice},
                      {"lesionwise_hd95_mm", m.lesionwise_hd95_mm},
                      {"volumewise_dice", m.volumewise_dice},
                      {"sensitivity", m.sensitivity},
                      {"tp", m.tp},
                      {"fn", m.fn},
                      {"fp", m.fp}};
}

ordered_json case_json(const CaseMetrics& metrics) {
  ordered_json j;
  for (RegionKind region : kAllRegions) j[region_name(region)] = region_json(metrics[region]);
  return j;
}

// ---------------------------------------------------------------- eval --

struct EvalArgs {
  std::string gt, pred, config;
};

int run_eval(const EvalArgs& args) {
  const LabelVolume gt = read_label_volume(args.gt);
  const LabelVolume pred = read_label_volume(args.pred);
  validate_pair(gt, pred);
  const CaseMetrics metrics = evaluate_case(gt, pred, config_from(args.config));
  std::cout << case_json(metrics).dump(2) << '\n';
  return 0;
}

// --------------------------------------------------------------- batch --

struct BatchArgs {
  std::string gt_dir, teams_dir, out_csv, config;
  int jobs = 4;
  bool sensitivity = false;
};

bool is_volume_file(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.ends_with(".nii") || name.ends_with(".nii.gz") || name.ends_with(".rawvol");
}

std::string subject_id_of(const fs::path& p) {
  std::string name = p.filename().string();
  for (const char* ext : {".nii.gz", ".nii", ".rawvol"}) {
    if (name.ends_with(ext)) return name.substr(0, name.size() - std::strlen(ext));
  }
  return name;
}

int run_batch(const BatchArgs& args) {
  const EvalConfig cfg = config_from(args.config);
  if (args.jobs < 1) throw UsageError("--jobs must be >= 1");

  std::vector<fs::path> gt_files;
  if (!fs::is_directory(args.gt_dir)) throw UsageError("gt_dir is not a directory: " + args.gt_dir);
  for (const auto& entry : fs::directory_iterator(args.gt_dir))
    if (entry.is_regular_file() && is_volume_file(entry.path())) gt_files.push_back(entry.path());
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) throw UsageError("gt_dir contains no volumes: " + args.gt_dir);

  std::vector<std::string> teams;
  if (!fs::is_directory(args.teams_dir))
    throw UsageError("teams_dir is not a directory: " + args.teams_dir);
  for (const auto& entry : fs::directory_iterator(args.teams_dir))
    if (entry.is_directory()) teams.push_back(entry.path().filename().string());
  std::sort(teams.begin(), teams.end());
  if (teams.empty()) throw UsageError("teams_dir contains no team directories: " + args.teams_dir);

  struct Task {
    std::size_t team, subject;
  };
  std::vector<Task> tasks;
  for (std::size_t t = 0; t < teams.size(); ++t)
    for (std::size_t s = 0; s < gt_files.size(); ++s) tasks.push_back({t, s});

  std::vector<CaseMetrics> results(tasks.size());
  std::vector<std::string> warnings(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& task = tasks[i];
        const fs::path& gt_path = gt_files[task.subject];
        const LabelVolume gt = read_label_volume(gt_path);

        fs::path pred_path = fs::path(args.teams_dir) / teams[task.team] / gt_path.filename();
        if (!fs::exists(pred_path)) {
          const std::string subject = subject_id_of(gt_path);
          pred_path.clear();
          for (const char* ext : {".nii.gz", ".nii", ".rawvol"}) {
            const fs::path candidate =
                fs::path(args.teams_dir) / teams[task.team] / (subject + ext);
            if (fs::exists(candidate)) {
              pred_path = candidate;
              break;
            }
          }
        }
        CaseMetrics metrics;
        if (pred_path.empty()) {
          // Missing submission: scored against an empty prediction.
          const LabelVolume empty(gt.geometry(),
                                  std::vector<std::uint8_t>(gt.geometry().voxel_count(), 0));
          metrics = evaluate_case(gt, empty, cfg);
          warnings[i] = "missing prediction team=" + teams[task.team] +
                        " subject=" + subject_id_of(gt_path) + " (scored as empty)";
        } else {
          metrics = evaluate_case(gt, read_label_volume(pred_path), cfg);
        }
        results[i] = metrics;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(tasks.size());
        return;
      }
    }
  };

  {
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(args.jobs, static_cast<int>(tasks.size()));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Tasks are already (team, subject)-ordered, so emission order is fixed
  // regardless of which worker finished first.
  std::ostringstream csv;
  csv << "team,subject,region,metric,value\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string& team = teams[tasks[i].team];
    const std::string subject = subject_id_of(gt_files[tasks[i].subject]);
    for (RegionKind region : kAllRegions) {
      const RegionMetrics& m = results[i][region];
      csv << team << ',' << subject << ',' << region_name(region) << ",dice,"
          << format_g17(m.lesionwise_dice) << '\n';
      csv << team << ',' << subject << ',' << region_name(region) << ",hd95,"
          << format_g17(m.lesionwise_hd95_mm) << '\n';
      if (args.sensitivity)
        csv << team << ',' << subject << ',' << region_name(region) << ",sensitivity,"
            << format_g17(m.sensitivity) << '\n';
    }
  }
  write_text_file(args.out_csv, csv.str());

  std::ostringstream log;
  for (const std::string& w : warnings)
    if (!w.empty()) {
      log << "WARN " << w << '\n';
      std::cerr << "warning: " << w << '\n';
    }
  write_text_file(args.out_csv + ".log", log.str());
  return 0;
}

// ---------------------------------------------------------------- rank --

struct RankArgs {
  std::string metrics_csv, out_dir;
  long long permutations = 100000;
  std::uint64_t seed = 1;
  std::string mode = "region-sum-metric-mean";
  std::string exceed = "ge";
  std::string sided = "two";
};

GapComparison parse_exceed(const std::string& s) {
  if (s == "ge") return GapComparison::greater_equal;
  if (s == "gt") return GapComparison::greater;
  throw UsageError("--exceed must be ge or gt");
}

GapSidedness parse_sided(const std::string& s) {
  if (s == "two") return GapSidedness::two_sided;
  if (s == "one") return GapSidedness::one_sided;
  throw UsageError("--sided must be two or one");
}

int run_rank(const RankArgs& args) {
  const MetricTable table = load_metric_table_csv(args.metrics_csv);
  const RankTable ranks = build_rank_table(table, parse_scaling_mode(args.mode));
  fs::create_directories(args.out_dir);
  write_ranks_csv(ranks, fs::path(args.out_dir) / "ranks.csv");
  write_frs_csv(ranks, fs::path(args.out_dir) / "frs.csv");

  PairwiseMatrix matrix;
  if (ranks.teams.size() >= 2) {
    matrix = pairwise_matrix(ranks, args.permutations, args.seed, parse_exceed(args.exceed),
                             parse_sided(args.sided));
  } else {
    matrix.teams.push_back(ranks.teams.front());  // single team: empty triangle
  }
  write_pvalue_matrix_csv(matrix, fs::path(args.out_dir) / "pvalues.csv");

  std::cout << render_leaderboard(ranks);
  return 0;
}

// ------------------------------------------------------------- permtest --

struct PermtestArgs {
  std::string metrics_csv, team_a, team_b;
  long long permutations = 100000;
  std::uint64_t seed = 1;
  std::string mode = "region-sum-metric-mean";
  std::string exceed = "ge";
  std::string sided = "two";
};

int run_permtest(const PermtestArgs& args) {
  const MetricTable table = load_metric_table_csv(args.metrics_csv);
  const RankTable ranks = build_rank_table(table, parse_scaling_mode(args.mode));
  const PermutationResult r =
      permutation_test(ranks, args.team_a, args.team_b, args.permutations, args.seed,
                       parse_exceed(args.exceed), parse_sided(args.sided));
  ordered_json j{{"team_a", r.team_a},        {"team_b", r.team_b},
                 {"observed_gap", r.observed_gap}, {"p_value", r.p_value},
                 {"n_permutations", r.n_permutations}, {"seed", r.seed}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

// -------------------------------------------------------------- summary --

struct SummaryArgs {
  std::string metrics_csv, out_base;
  bool sample_std = false;
};

int run_summary(const SummaryArgs& args) {
  const auto rows = load_metric_rows_csv(args.metrics_csv);
  const auto summary =
      summarize_metrics(rows, args.sample_std ? StdMode::sample : StdMode::population);
  const std::string markdown = render_summary_markdown(summary);
  if (!args.out_base.empty()) {
    write_text_file(args.out_base + ".md", markdown);
    write_text_file(args.out_base + ".csv", render_summary_csv(summary));
  }
  std::cout << markdown;
  return 0;
}

// -------------------------------------------------------------- boxplot --

struct BoxplotArgs {
  std::string metrics_csv, region, metric, out_svg;
};

int run_boxplot(const BoxplotArgs& args) {
  if (args.metric != "dice" && args.metric != "hd95" && args.metric != "sensitivity")
    throw UsageError("metric must be dice, hd95 or sensitivity");
  const RegionKind region = parse_region(args.region);
  const auto rows = load_metric_rows_csv(args.metrics_csv);
  write_text_file(args.out_svg, render_boxplot_svg(rows, region, args.metric));
  std::cout << "wrote " << args.out_svg << '\n';
  return 0;
}

// -------------------------------------------------------------- phantom --

struct PhantomArgs {
  std::string out_gt, out_pred;
  std::uint64_t seed = 0;
  std::string dims = "32,32,32";
  std::string spacing = "1,1,1";
  int lesions = 1;
  std::string radius = "2,4";
  std::string perturb = "none";
};

int run_phantom(const PhantomArgs& args) {
  PhantomSpec spec;
  spec.seed = args.seed;
  spec.dims = parse_triple_int(args.dims, "--dims");
  spec.spacing = parse_triple_double(args.spacing, "--spacing");
  spec.n_lesions = args.lesions;
  if (std::sscanf(args.radius.c_str(), "%d,%d", &spec.radius_min, &spec.radius_max) != 2)
    throw UsageError("--radius needs 'min,max', got '" + args.radius + "'");
  spec.perturbation = parse_perturbation(args.perturb);

  const PhantomPair pair = generate_phantom(spec);
  write_label_volume(pair.gt, args.out_gt);
  write_label_volume(pair.pred, args.out_pred);
  std::cout << "phantom " << phantom_digest(spec) << ' ' << spec.canonical_string() << '\n'
            << "gt   " << args.out_gt << '\n'
            << "pred " << args.out_pred << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lesion-wise volumetric segmentation scoring and challenge ranking"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score one gt/pred pair, JSON to stdout");
  eval_cmd->add_option("gt", eval_args.gt, "ground-truth label volume")->required();
  eval_cmd->add_option("pred", eval_args.pred, "predicted label volume")->required();
  eval_cmd->add_option("--config", eval_args.config, "evaluation config file");

  BatchArgs batch_args;
  CLI::App* batch_cmd = app.add_subcommand("batch", "Score one dir of gt against per-team dirs");
  batch_cmd->add_option("gt_dir", batch_args.gt_dir, "directory of gt volumes")->required();
  batch_cmd->add_option("teams_dir", batch_args.teams_dir, "directory of per-team subdirectories")
      ->required();
  batch_cmd->add_option("out_csv", batch_args.out_csv, "output metrics CSV")->required();
  batch_cmd->add_option("--config", batch_args.config, "evaluation config file");
  batch_cmd->add_option("--jobs", batch_args.jobs, "worker threads (default 4)");
  batch_cmd->add_flag("--sensitivity", batch_args.sensitivity, "also emit sensitivity rows");

  RankArgs rank_args;
  CLI::App* rank_cmd = app.add_subcommand("rank", "Rank a metrics CSV and run permutation tests");
  rank_cmd->add_option("metrics_csv", rank_args.metrics_csv, "input metrics CSV")->required();
  rank_cmd->add_option("out_dir", rank_args.out_dir, "output directory")->required();
  rank_cmd->add_option("--permutations", rank_args.permutations, "permutations per pair");
  rank_cmd->add_option("--seed", rank_args.seed, "RNG seed");
  rank_cmd->add_option("--mode", rank_args.mode, "cumulative-rank scaling mode");
  rank_cmd->add_option("--exceed", rank_args.exceed, "exceedance comparison: ge|gt");
  rank_cmd->add_option("--sided", rank_args.sided, "statistic sidedness: two|one");

  PermtestArgs permtest_args;
  CLI::App* permtest_cmd = app.add_subcommand("permtest", "Permutation test for one team pair");
  permtest_cmd->add_option("metrics_csv", permtest_args.metrics_csv, "input metrics CSV")
      ->required();
  permtest_cmd->add_option("team_a", permtest_args.team_a, "first team")->required();
  permtest_cmd->add_option("team_b", permtest_args.team_b, "second team")->required();
  permtest_cmd->add_option("--permutations", permtest_args.permutations, "permutation count");
  permtest_cmd->add_option("--seed", permtest_args.seed, "RNG seed");
  permtest_cmd->add_option("--mode", permtest_args.mode, "cumulative-rank scaling mode");
  permtest_cmd->add_option("--exceed", permtest_args.exceed, "exceedance comparison: ge|gt");
  permtest_cmd->add_option("--sided", permtest_args.sided, "statistic sidedness: two|one");

  SummaryArgs summary_args;
  CLI::App* summary_cmd = app.add_subcommand("summary", "Mean ± std (median) tables");
  summary_cmd->add_option("metrics_csv", summary_args.metrics_csv, "input metrics CSV")
      ->required();
  summary_cmd->add_option("--out", summary_args.out_base,
                          "write <out>.md and <out>.csv besides stdout");
  summary_cmd->add_flag("--sample-std", summary_args.sample_std,
                        "use the sample (N-1) standard deviation");

  BoxplotArgs boxplot_args;
  CLI::App* boxplot_cmd = app.add_subcommand("boxplot", "Per-team box plot as SVG");
  boxplot_cmd->add_option("metrics_csv", boxplot_args.metrics_csv, "input metrics CSV")
      ->required();
  boxplot_cmd->add_option("region", boxplot_args.region, "ET, TC or WT")->required();
  boxplot_cmd->add_option("metric", boxplot_args.metric, "dice, hd95 or sensitivity")->required();
  boxplot_cmd->add_option("out_svg", boxplot_args.out_svg, "output SVG path")->required();

  PhantomArgs phantom_args;
  CLI::App* phantom_cmd = app.add_subcommand("phantom", "Deterministic synthetic gt/pred pair");
  phantom_cmd->add_option("--out-gt", phantom_args.out_gt, "output gt volume")->required();
  phantom_cmd->add_option("--out-pred", phantom_args.out_pred, "output pred volume")->required();
  phantom_cmd->add_option("--seed", phantom_args.seed, "RNG seed");
  phantom_cmd->add_option("--dims", phantom_args.dims, "grid size nx,ny,nz");
  phantom_cmd->add_option("--spacing", phantom_args.spacing, "voxel size sx,sy,sz in mm");
  phantom_cmd->add_option("--lesions", phantom_args.lesions, "lesions per label");
  phantom_cmd->add_option("--radius", phantom_args.radius, "lesion radius bounds min,max");
  phantom_cmd->add_option("--perturb", phantom_args.perturb,
                          "none|erode|dilate|shift:dx,dy,dz|drop:REGION|falseblob:count,radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (batch_cmd->parsed()) return run_batch(batch_args);
    if (rank_cmd->parsed()) return run_rank(rank_args);
    if (permtest_cmd->parsed()) return run_permtest(permtest_args);
    if (summary_cmd->parsed()) return run_summary(summary_args);
    if (boxplot_cmd->parsed()) return run_boxplot(boxplot_args);
    if (phantom_cmd->parsed()) return run_phantom(phantom_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitInternal;
}
