#include "hsi/bundles.hpp"
#include "hsi/core.hpp"
#include "hsi/keyval.hpp"
#include "hsi/matrix_io.hpp"
#include "hsi/metrics.hpp"
#include "hsi/pgm.hpp"
#include "hsi/simgen.hpp"
#include "hsi/solvers.hpp"
#include "hsi/types.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using hsi::keyval::format_double;

namespace {

/// Key=value config with consume-on-read semantics; leftover keys are errors.
class ConfigMap {
 public:
  ConfigMap() = default;
  explicit ConfigMap(const std::string& path) : origin_(path) {
    for (auto& [key, value] : hsi::keyval::parse_file(path)) {
      entries_.emplace(key, value);
    }
  }

  void apply_string(const std::string& key, std::string& target) {
    if (auto v = take(key)) target = *v;
  }
  void apply_double(const std::string& key, double& target) {
    if (auto v = take(key)) target = hsi::keyval::to_double(key, *v);
  }
  void apply_int(const std::string& key, int& target) {
    if (auto v = take(key)) {
      const std::int64_t n = hsi::keyval::to_int(key, *v);
      if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
        throw hsi::ConfigError(key + " is out of range: " + *v);
      }
      target = static_cast<int>(n);
    }
  }
  void apply_uint64(const std::string& key, std::uint64_t& target) {
    if (auto v = take(key)) target = hsi::keyval::to_uint64(key, *v);
  }
  void apply_bool(const std::string& key, bool& target) {
    if (auto v = take(key)) target = hsi::keyval::to_bool(key, *v);
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string value = it->second;
    entries_.erase(it);
    return value;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  void finish(const std::string& command) const {
    if (!entries_.empty()) {
      throw hsi::ConfigError("unknown key '" + entries_.begin()->first + "' in " +
                             origin_ + " for command " + command);
    }
  }

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_ = "config";
};

void ensure_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw hsi::DataError("cannot create output directory " + out + ": " + ec.message());
  }
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    std::string token = comma == std::string::npos ? text.substr(pos)
                                                   : text.substr(pos, comma - pos);
    const auto first = token.find_first_not_of(" \t");
    if (first != std::string::npos) {
      const auto last = token.find_last_not_of(" \t");
      values.push_back(hsi::keyval::to_double(key, token.substr(first, last - first + 1)));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.empty()) {
    throw hsi::ConfigError(key + " lists no values");
  }
  return values;
}

/// Nine equally spaced values per range, endpoints included, so interior
/// boundaries appear twice.
std::vector<double> three_range_grid(const double (&bounds)[4]) {
  std::vector<double> grid;
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < 9; ++i) {
      grid.push_back(i == 8 ? bounds[d + 1]
                            : bounds[d] + (bounds[d + 1] - bounds[d]) * i / 8.0);
    }
  }
  return grid;
}

std::vector<double> default_lambda_grid() {
  return three_range_grid({1e-3, 1e-2, 1e-1, 1.0});
}

std::vector<double> default_fraction_grid() {
  return three_range_grid({1e-3, 1e-2, 1e-1, 0.9});
}

/// Everything the CLI can set; each subcommand registers its own subset.
struct Cli {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string image, dict, groups, abundances, atoms;
  std::string truth_atom, truth_dict, truth_groups;
  std::string penalty;
  std::string lambdas, fractions;
  double lambda = 0.0, fraction = 0.0, rho = 10.0, tol = 1e-6;
  int max_iter = 1000, threads = 1, endmembers = 0, subsets = 10;
  int width = 0, height = 0;
  bool emit_endmembers = false, group_rmse_per_atom = false;
};

void add_common(CLI::App* cmd, Cli& a) {
  cmd->add_option("--config", a.config, "Key=value config file");
  cmd->add_option("--seed", a.seed, "Random seed (overrides the config)");
  cmd->add_option("--out", a.out, "Output directory");
}

struct SolverSetup {
  hsi::SolverConfig config;
  bool lambda_given = false;
  bool fraction_given = false;
};

/// Shared by unmix and sweep: penalty/lambda/rho/fraction/max_iter/rel_tol/seed
/// from the config file, then flag overrides.
SolverSetup resolve_solver(ConfigMap& cfg, CLI::App* cmd, Cli& a) {
  SolverSetup s;
  std::string penalty = "none";
  cfg.apply_string("penalty", penalty);
  s.lambda_given = cfg.has("lambda");
  cfg.apply_double("lambda", s.config.lambda);
  cfg.apply_double("rho", s.config.rho);
  s.fraction_given = cfg.has("fraction");
  cfg.apply_double("fraction", s.config.fraction);
  cfg.apply_int("max_iter", s.config.max_iter);
  cfg.apply_double("rel_tol", s.config.rel_tol);
  cfg.apply_uint64("seed", s.config.seed);

  if (cmd->count("--penalty")) penalty = a.penalty;
  if (cmd->count("--lambda")) {
    s.config.lambda = a.lambda;
    s.lambda_given = true;
  }
  if (cmd->count("--rho")) s.config.rho = a.rho;
  if (cmd->count("--fraction")) {
    s.config.fraction = a.fraction;
    s.fraction_given = true;
  }
  if (cmd->count("--max-iter")) s.config.max_iter = a.max_iter;
  if (cmd->count("--tol")) s.config.rel_tol = a.tol;
  if (cmd->count("--seed")) s.config.seed = a.seed;

  s.config.penalty = hsi::penalty_from_name(penalty);
  return s;
}

void require_solver_inputs(const SolverSetup& s, const std::string& image,
                           const std::string& dict, const std::string& groups,
                           bool need_lambda = true) {
  if (image.empty()) throw hsi::ConfigError("no input image; pass --image or set image=");
  if (dict.empty()) throw hsi::ConfigError("no dictionary; pass --dict or set dict=");
  if (need_lambda && s.config.penalty != hsi::Penalty::none && !s.lambda_given) {
    throw hsi::ConfigError(std::string("penalty '") + hsi::penalty_name(s.config.penalty) +
                           "' needs a regularization weight; pass --lambda or set lambda=");
  }
  if (hsi::penalty_needs_groups(s.config.penalty) && groups.empty()) {
    throw hsi::ConfigError(std::string("penalty '") + hsi::penalty_name(s.config.penalty) +
                           "' needs a group file; pass --groups or set groups=");
  }
  s.config.validate();
}

struct TruthData {
  hsi::EndmemberDictionary dict;
  hsi::GroupStructure groups;
  hsi::Matrix atom;
};

/// Metrics for one estimate. Truth-side metrics are computed when shapes line
/// up (collapsed rows for abundance RMSE, atom counts for per-atom RMSE, group
/// counts for the endmember metrics) and skipped otherwise, so evaluating an
/// extracted dictionary against a differently sized truth dictionary still
/// yields a report.
hsi::MetricReport evaluate_estimate(const hsi::Matrix& image,
                                    const hsi::EndmemberDictionary& dict,
                                    const hsi::GroupStructure* groups,
                                    const hsi::Matrix& est_atom,
                                    const TruthData* truth,
                                    bool group_rmse_per_atom) {
  hsi::MetricReport report;
  const auto [rec_rmse, rec_sam] = hsi::reconstruction_metrics(image, dict, est_atom);
  report.reconstruction_rmse = rec_rmse;
  report.reconstruction_sam_degrees = rec_sam;
  if (!groups || !truth) return report;

  const hsi::Matrix est_collapsed = hsi::collapse_abundances(est_atom, *groups);
  const hsi::Matrix truth_collapsed = hsi::collapse_abundances(truth->atom, truth->groups);
  if (est_collapsed.rows() == truth_collapsed.rows()) {
    report.rmse_abundance = hsi::rmse_abundance(est_collapsed, truth_collapsed);
  }
  if (est_atom.rows() == truth->atom.rows()) {
    report.rmse_group = hsi::rmse_group(est_atom, truth->atom, *groups, group_rmse_per_atom);
  }
  if (groups->group_count() == truth->groups.group_count() &&
      dict.bands() == truth->dict.bands()) {
    const auto est_end = hsi::equivalent_endmembers(dict, est_atom, *groups);
    const auto truth_end = hsi::equivalent_endmembers(truth->dict, truth->atom, truth->groups);
    const auto [rmse, pairs] = hsi::rmse_endmembers(est_end, truth_end);
    const auto [sam, sam_pairs] = hsi::sam_endmembers(est_end, truth_end);
    (void)sam_pairs;
    report.rmse_endmembers = rmse;
    report.sam_endmembers_degrees = sam;
    report.evaluated_pairs = pairs;
  }
  return report;
}

int cmd_simulate(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  hsi::SceneSpec spec;
  cfg.apply_int("materials", spec.materials);
  cfg.apply_int("variants", spec.variants_per_material);
  cfg.apply_int("width", spec.width);
  cfg.apply_int("height", spec.height);
  cfg.apply_int("bands", spec.bands);
  cfg.apply_int("k_min", spec.min_active);
  cfg.apply_int("k_max", spec.max_active);
  cfg.apply_double("psi_min", spec.psi_min);
  cfg.apply_double("psi_max", spec.psi_max);
  cfg.apply_double("beta_min", spec.beta_min);
  cfg.apply_double("beta_max", spec.beta_max);
  cfg.apply_double("sigma_v", spec.variant_noise);
  cfg.apply_double("snr_db", spec.snr_db);
  cfg.apply_uint64("seed", spec.seed);
  cfg.finish("simulate");
  if (cmd->count("--seed")) spec.seed = a.seed;
  spec.validate();

  auto [image, truth] = hsi::generate_scene(spec);
  ensure_dir(a.out);
  hsi::save_scene(a.out, image, truth, spec);
  std::cout << "wrote scene.bin, dictionary.bin, groups.txt, truth_atom.bin, "
               "truth_group.bin, spec.txt to "
            << a.out << "\n";
  return 0;
}

int cmd_extract(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  std::string image_path;
  hsi::BundleExtractionConfig bcfg;
  cfg.apply_string("image", image_path);
  cfg.apply_int("endmembers", bcfg.endmembers_per_run);
  cfg.apply_int("subsets", bcfg.subset_count);
  cfg.apply_double("fraction", bcfg.subset_fraction);
  cfg.apply_uint64("seed", bcfg.seed);
  cfg.finish("extract");
  if (cmd->count("--image")) image_path = a.image;
  if (cmd->count("--endmembers")) bcfg.endmembers_per_run = a.endmembers;
  if (cmd->count("--subsets")) bcfg.subset_count = a.subsets;
  if (cmd->count("--fraction")) bcfg.subset_fraction = a.fraction;
  if (cmd->count("--seed")) bcfg.seed = a.seed;
  if (image_path.empty()) {
    throw hsi::ConfigError("no input image; pass --image or set image=");
  }
  if (bcfg.endmembers_per_run <= 0) {
    throw hsi::ConfigError("endmember count not set; pass --endmembers or set endmembers=");
  }

  hsi::SpectralImage image(hsi::read_matrix(image_path));
  auto [dict, groups] = hsi::extract_bundles(image, bcfg);
  ensure_dir(a.out);
  hsi::write_matrix(join(a.out, "bundles.bin"), dict.signatures());
  hsi::write_groups(join(a.out, "bundle_groups.txt"), groups);
  hsi::keyval::write_file(join(a.out, "extract.txt"),
                          {{"image", image_path},
                           {"endmembers", std::to_string(bcfg.endmembers_per_run)},
                           {"subsets", std::to_string(bcfg.subset_count)},
                           {"fraction", format_double(bcfg.subset_fraction)},
                           {"seed", std::to_string(bcfg.seed)}});
  std::cout << "extracted " << dict.atoms() << " signatures in " << groups.group_count()
            << " bundles; wrote bundles.bin, bundle_groups.txt, extract.txt to " << a.out
            << "\n";
  return 0;
}

int cmd_unmix(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  std::string image_path, dict_path, groups_path;
  bool emit_endmembers = false;
  cfg.apply_string("image", image_path);
  cfg.apply_string("dict", dict_path);
  cfg.apply_string("groups", groups_path);
  cfg.apply_bool("emit_endmembers", emit_endmembers);
  SolverSetup setup = resolve_solver(cfg, cmd, a);
  cfg.finish("unmix");
  if (cmd->count("--image")) image_path = a.image;
  if (cmd->count("--dict")) dict_path = a.dict;
  if (cmd->count("--groups")) groups_path = a.groups;
  if (cmd->count("--emit-endmembers")) emit_endmembers = true;
  require_solver_inputs(setup, image_path, dict_path, groups_path);

  hsi::SpectralImage image(hsi::read_matrix(image_path));
  hsi::EndmemberDictionary dict(hsi::read_matrix(dict_path));
  std::optional<hsi::GroupStructure> groups;
  if (!groups_path.empty()) groups.emplace(hsi::read_groups(groups_path));
  if (emit_endmembers && !groups) {
    throw hsi::ConfigError("emit_endmembers needs a group file; pass --groups");
  }

  const hsi::SolverReport result =
      hsi::solve(image, dict, groups ? &*groups : nullptr, setup.config);
  const hsi::Matrix atom = result.abundances.cwiseMax(0.0);

  ensure_dir(a.out);
  hsi::write_matrix(join(a.out, "abundance_atom.bin"), atom);
  if (groups) {
    hsi::write_matrix(join(a.out, "abundance_group.bin"),
                      hsi::collapse_abundances(atom, *groups));
  }
  if (emit_endmembers) {
    const auto ends = hsi::equivalent_endmembers(dict, atom, *groups);
    hsi::write_matrix(join(a.out, "endmembers.bin"), ends.signatures);
    hsi::write_matrix(join(a.out, "endmember_defined.bin"),
                      ends.defined.cast<double>().matrix());
  }
  hsi::keyval::write_file(
      join(a.out, "report.txt"),
      {{"penalty", hsi::penalty_name(setup.config.penalty)},
       {"lambda", format_double(setup.config.lambda)},
       {"rho", format_double(setup.config.rho)},
       {"fraction", format_double(setup.config.fraction)},
       {"max_iter", std::to_string(setup.config.max_iter)},
       {"rel_tol", format_double(setup.config.rel_tol)},
       {"iterations", std::to_string(result.iterations)},
       {"converged", result.converged ? "true" : "false"},
       {"final_rel_change", format_double(result.final_rel_change)},
       {"data_fit", format_double(result.data_fit)},
       {"penalty_value", format_double(result.penalty_value)},
       {"objective", format_double(result.objective)},
       {"wall_time_seconds", format_double(result.wall_time_seconds)}});
  std::cout << "solved " << hsi::penalty_name(setup.config.penalty) << " in "
            << result.iterations << " iterations ("
            << (result.converged ? "converged" : "iteration limit")
            << "); wrote abundances to " << a.out << "\n";
  return 0;
}

struct EvalInputs {
  std::string image_path, dict_path, groups_path, abundances_path;
  std::string truth_atom_path, truth_dict_path, truth_groups_path;
  bool group_rmse_per_atom = false;
};

void resolve_eval_paths(ConfigMap& cfg, CLI::App* cmd, Cli& a, EvalInputs& in) {
  cfg.apply_string("image", in.image_path);
  cfg.apply_string("dict", in.dict_path);
  cfg.apply_string("groups", in.groups_path);
  cfg.apply_string("truth_atom", in.truth_atom_path);
  cfg.apply_string("truth_dict", in.truth_dict_path);
  cfg.apply_string("truth_groups", in.truth_groups_path);
  cfg.apply_bool("group_rmse_per_atom", in.group_rmse_per_atom);
  if (cmd->count("--image")) in.image_path = a.image;
  if (cmd->count("--dict")) in.dict_path = a.dict;
  if (cmd->count("--groups")) in.groups_path = a.groups;
  if (cmd->count("--truth-atom")) in.truth_atom_path = a.truth_atom;
  if (cmd->count("--truth-dict")) in.truth_dict_path = a.truth_dict;
  if (cmd->count("--truth-groups")) in.truth_groups_path = a.truth_groups;
  if (cmd->count("--group-rmse-per-atom")) in.group_rmse_per_atom = true;
}

/// Loads the optional truth triple; dictionary and groups default to the
/// estimate's own when unset.
std::optional<TruthData> load_truth(const EvalInputs& in,
                                    const hsi::EndmemberDictionary& dict,
                                    const std::optional<hsi::GroupStructure>& groups) {
  if (in.truth_atom_path.empty()) return std::nullopt;
  if (in.truth_groups_path.empty() && !groups) {
    std::cerr << "note: truth_atom given without groups; skipping truth metrics\n";
    return std::nullopt;
  }
  hsi::EndmemberDictionary truth_dict =
      in.truth_dict_path.empty() ? dict
                                 : hsi::EndmemberDictionary(hsi::read_matrix(in.truth_dict_path));
  hsi::GroupStructure truth_groups =
      in.truth_groups_path.empty() ? *groups : hsi::read_groups(in.truth_groups_path);
  hsi::Matrix truth_atom = hsi::read_matrix(in.truth_atom_path);
  if (truth_atom.rows() != truth_dict.atoms()) {
    throw hsi::DataError("truth abundances have " + std::to_string(truth_atom.rows()) +
                         " rows but the truth dictionary has " +
                         std::to_string(truth_dict.atoms()) + " atoms");
  }
  return TruthData{std::move(truth_dict), std::move(truth_groups), std::move(truth_atom)};
}

int cmd_eval(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  EvalInputs in;
  cfg.apply_string("abundances", in.abundances_path);
  resolve_eval_paths(cfg, cmd, a, in);
  cfg.finish("eval");
  if (cmd->count("--abundances")) in.abundances_path = a.abundances;
  if (in.image_path.empty()) throw hsi::ConfigError("no input image; pass --image or set image=");
  if (in.dict_path.empty()) throw hsi::ConfigError("no dictionary; pass --dict or set dict=");
  if (in.abundances_path.empty()) {
    throw hsi::ConfigError("no abundance file; pass --abundances or set abundances=");
  }

  const hsi::Matrix image = hsi::read_matrix(in.image_path);
  const hsi::EndmemberDictionary dict(hsi::read_matrix(in.dict_path));
  std::optional<hsi::GroupStructure> groups;
  if (!in.groups_path.empty()) groups.emplace(hsi::read_groups(in.groups_path));
  const hsi::Matrix est_atom = hsi::read_matrix(in.abundances_path);
  const std::optional<TruthData> truth = load_truth(in, dict, groups);

  const hsi::MetricReport report =
      evaluate_estimate(image, dict, groups ? &*groups : nullptr, est_atom,
                        truth ? &*truth : nullptr, in.group_rmse_per_atom);

  ensure_dir(a.out);
  {
    std::ofstream csv(join(a.out, "metrics.csv"));
    csv << hsi::metric_csv_header() << "\n" << hsi::metric_csv_row(report) << "\n";
  }
  const std::string kv = hsi::metric_keyvalues(report);
  {
    std::ofstream txt(join(a.out, "metrics.txt"));
    txt << kv;
  }
  std::cout << kv;
  return 0;
}

struct SweepRow {
  double lambda = 0.0;
  std::optional<double> fraction;
  bool ok = false;
  hsi::MetricReport report;
  std::string error;
};

int cmd_sweep(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  EvalInputs in;
  resolve_eval_paths(cfg, cmd, a, in);
  std::string lambda_list, fraction_list;
  int threads = 1;
  cfg.apply_string("lambda_grid", lambda_list);
  cfg.apply_string("fraction_grid", fraction_list);
  cfg.apply_int("threads", threads);
  SolverSetup setup = resolve_solver(cfg, cmd, a);
  cfg.finish("sweep");
  if (cmd->count("--lambdas")) lambda_list = a.lambdas;
  if (cmd->count("--fractions")) fraction_list = a.fractions;
  if (cmd->count("--threads")) threads = a.threads;
  require_solver_inputs(setup, in.image_path, in.dict_path, in.groups_path,
                        /*need_lambda=*/false);
  if (threads < 1) throw hsi::ConfigError("threads must be at least 1");

  std::vector<double> lambdas;
  if (!lambda_list.empty()) {
    lambdas = parse_double_list("lambda_grid", lambda_list);
  } else if (setup.lambda_given) {
    lambdas = {setup.config.lambda};
  } else {
    lambdas = default_lambda_grid();
  }
  for (double v : lambdas) {
    if (!std::isfinite(v) || v < 0.0) {
      throw hsi::ConfigError("lambda_grid entries must be finite and nonnegative");
    }
  }
  std::vector<double> fractions;
  if (!fraction_list.empty()) {
    if (setup.config.penalty != hsi::Penalty::fractional) {
      throw hsi::ConfigError("fraction_grid only applies to the fractional penalty");
    }
    fractions = parse_double_list("fraction_grid", fraction_list);
    for (double q : fractions) {
      if (!(q > 0.0) || !(q < 1.0)) {
        throw hsi::ConfigError("fraction_grid entries must lie strictly between 0 and 1");
      }
    }
  } else if (setup.config.penalty == hsi::Penalty::fractional &&
             !setup.fraction_given) {
    fractions = default_fraction_grid();
  }

  const hsi::SpectralImage image(hsi::read_matrix(in.image_path));
  const hsi::EndmemberDictionary dict(hsi::read_matrix(in.dict_path));
  std::optional<hsi::GroupStructure> groups;
  if (!in.groups_path.empty()) groups.emplace(hsi::read_groups(in.groups_path));
  const std::optional<TruthData> truth = load_truth(in, dict, groups);

  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    if (fractions.empty()) {
      rows.push_back({lambda, std::nullopt, false, {}, {}});
    } else {
      for (double q : fractions) rows.push_back({lambda, q, false, {}, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      SweepRow& row = rows[i];
      hsi::SolverConfig point = setup.config;
      point.lambda = row.lambda;
      if (row.fraction) point.fraction = *row.fraction;
      try {
        const hsi::SolverReport result =
            hsi::solve(image, dict, groups ? &*groups : nullptr, point);
        const hsi::Matrix atom = result.abundances.cwiseMax(0.0);
        row.report = evaluate_estimate(image.data(), dict, groups ? &*groups : nullptr,
                                       atom, truth ? &*truth : nullptr,
                                       in.group_rmse_per_atom);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
        std::replace(row.error.begin(), row.error.end(), ',', ';');
        std::replace(row.error.begin(), row.error.end(), '\n', ' ');
      }
    }
  };
  {
    std::vector<std::thread> pool;
    const int extra = std::min<int>(threads, static_cast<int>(rows.size())) - 1;
    for (int t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  std::optional<double> hsi::MetricReport::* const metric_fields[] = {
      &hsi::MetricReport::rmse_abundance,
      &hsi::MetricReport::rmse_group,
      &hsi::MetricReport::rmse_endmembers,
      &hsi::MetricReport::sam_endmembers_degrees,
      &hsi::MetricReport::reconstruction_rmse,
      &hsi::MetricReport::reconstruction_sam_degrees,
  };
  const char* const metric_labels[] = {
      "rmse_abundance",      "rmse_group",
      "rmse_endmembers",     "sam_endmembers_degrees",
      "reconstruction_rmse", "reconstruction_sam_degrees",
  };
  std::vector<std::string> best_of(rows.size());
  for (std::size_t m = 0; m < std::size(metric_fields); ++m) {
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].ok) continue;
      const auto& value = rows[i].report.*metric_fields[m];
      if (!value) continue;
      if (best == rows.size() || *value < *(rows[best].report.*metric_fields[m])) {
        best = i;
      }
    }
    if (best < rows.size()) {
      if (!best_of[best].empty()) best_of[best] += ';';
      best_of[best] += metric_labels[m];
    }
  }

  ensure_dir(a.out);
  const std::string csv_path = join(a.out, "sweep.csv");
  std::ofstream csv(csv_path);
  csv << "penalty,lambda,fraction,status," << hsi::metric_csv_header() << ",best,error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& row = rows[i];
    std::string fraction_cell;
    if (row.fraction) {
      fraction_cell = format_double(*row.fraction);
    } else if (setup.config.penalty == hsi::Penalty::fractional) {
      fraction_cell = format_double(setup.config.fraction);
    }
    csv << hsi::penalty_name(setup.config.penalty) << ',' << format_double(row.lambda)
        << ',' << fraction_cell << ',' << (row.ok ? "ok" : "error") << ','
        << hsi::metric_csv_row(row.report) << ',' << best_of[i] << ',' << row.error
        << "\n";
  }
  csv.close();
  std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
  return 0;
}

int cmd_report(CLI::App* cmd, Cli& a) {
  ConfigMap cfg = a.config.empty() ? ConfigMap() : ConfigMap(a.config);
  std::string abundances_path, atoms_path;
  int width = 0, height = 0;
  cfg.apply_string("abundances", abundances_path);
  cfg.apply_string("atoms", atoms_path);
  cfg.apply_int("width", width);
  cfg.apply_int("height", height);
  cfg.finish("report");
  if (cmd->count("--abundances")) abundances_path = a.abundances;
  if (cmd->count("--atoms")) atoms_path = a.atoms;
  if (cmd->count("--width")) width = a.width;
  if (cmd->count("--height")) height = a.height;
  if (abundances_path.empty()) {
    throw hsi::ConfigError("no abundance file; pass --abundances or set abundances=");
  }
  if (width <= 0 || height <= 0) {
    throw hsi::ConfigError(
        "no spatial layout recorded for the abundances; supply the pixel grid "
        "with --width and --height (or width=/height= in the config)");
  }

  ensure_dir(a.out);
  std::vector<std::pair<std::string, hsi::Vector>> maps;
  const hsi::Matrix collapsed = hsi::read_matrix(abundances_path);
  char name[32];
  for (Eigen::Index p = 0; p < collapsed.rows(); ++p) {
    std::snprintf(name, sizeof(name), "material_%02d.pgm", static_cast<int>(p + 1));
    maps.emplace_back(name, collapsed.row(p).transpose());
  }
  if (!atoms_path.empty()) {
    const hsi::Matrix atom = hsi::read_matrix(atoms_path);
    for (Eigen::Index q = 0; q < atom.rows(); ++q) {
      std::snprintf(name, sizeof(name), "atom_%03d.pgm", static_cast<int>(q + 1));
      maps.emplace_back(name, atom.row(q).transpose());
    }
  }

  std::ofstream summary(join(a.out, "summary.txt"));
  summary << "map,min,mean,max\n";
  for (const auto& [map_name, values] : maps) {
    hsi::write_pgm(join(a.out, map_name), values, width, height);
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.6g,%.6g,%.6g\n", map_name.c_str(),
                  values.minCoeff(), values.mean(), values.maxCoeff());
    summary << line;
  }
  summary.close();
  std::cout << "wrote " << maps.size() << " abundance maps and summary.txt to " << a.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral unmixing with endmember bundles and group sparsity"};
  app.require_subcommand(1);
  Cli a;

  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic scene with ground truth");
  add_common(sim, a);

  CLI::App* ext = app.add_subcommand("extract", "Extract an endmember bundle dictionary");
  add_common(ext, a);
  ext->add_option("--image", a.image, "Input image matrix (L x N)");
  ext->add_option("--endmembers", a.endmembers, "Endmembers per extraction run");
  ext->add_option("--subsets", a.subsets, "Number of random pixel subsets");
  ext->add_option("--fraction", a.fraction, "Fraction of pixels per subset");

  CLI::App* unm = app.add_subcommand("unmix", "Estimate abundances for one penalty");
  add_common(unm, a);
  unm->add_option("--image", a.image, "Input image matrix (L x N)");
  unm->add_option("--dict", a.dict, "Dictionary matrix (L x Q)");
  unm->add_option("--groups", a.groups, "Group file (one 1-based id per atom)");
  unm->add_option("--penalty", a.penalty,
                  "none, l1, collaborative, group, elitist or fractional");
  unm->add_option("--lambda", a.lambda, "Regularization weight");
  unm->add_option("--fraction", a.fraction, "Fractional exponent q in (0,1)");
  unm->add_option("--rho", a.rho, "Augmented Lagrangian weight");
  unm->add_option("--max-iter", a.max_iter, "Iteration cap");
  unm->add_option("--tol", a.tol, "Relative change stopping tolerance");
  unm->add_flag("--emit-endmembers", a.emit_endmembers,
                "Also write per-pixel equivalent endmembers");

  CLI::App* evl = app.add_subcommand("eval", "Score abundances against truth or reconstruction");
  add_common(evl, a);
  evl->add_option("--image", a.image, "Input image matrix (L x N)");
  evl->add_option("--dict", a.dict, "Dictionary matrix (L x Q)");
  evl->add_option("--groups", a.groups, "Group file for the estimate");
  evl->add_option("--abundances", a.abundances, "Estimated per-atom abundances (Q x N)");
  evl->add_option("--truth-atom", a.truth_atom, "True per-atom abundances");
  evl->add_option("--truth-dict", a.truth_dict, "True dictionary (defaults to --dict)");
  evl->add_option("--truth-groups", a.truth_groups, "True group file (defaults to --groups)");
  evl->add_flag("--group-rmse-per-atom", a.group_rmse_per_atom,
                "Normalize the per-atom RMSE by the atom count instead of the group count");

  CLI::App* swp = app.add_subcommand("sweep", "Grid-search lambda (and q) with metrics per point");
  add_common(swp, a);
  swp->add_option("--image", a.image, "Input image matrix (L x N)");
  swp->add_option("--dict", a.dict, "Dictionary matrix (L x Q)");
  swp->add_option("--groups", a.groups, "Group file (one 1-based id per atom)");
  swp->add_option("--penalty", a.penalty,
                  "none, l1, collaborative, group, elitist or fractional");
  swp->add_option("--lambda", a.lambda, "Single-point grid shorthand");
  swp->add_option("--lambdas", a.lambdas, "Comma-separated lambda grid");
  swp->add_option("--fraction", a.fraction, "Fixed fractional exponent q");
  swp->add_option("--fractions", a.fractions, "Comma-separated q grid (fractional only)");
  swp->add_option("--rho", a.rho, "Augmented Lagrangian weight");
  swp->add_option("--max-iter", a.max_iter, "Iteration cap");
  swp->add_option("--tol", a.tol, "Relative change stopping tolerance");
  swp->add_option("--threads", a.threads, "Worker threads over grid points");
  swp->add_option("--truth-atom", a.truth_atom, "True per-atom abundances");
  swp->add_option("--truth-dict", a.truth_dict, "True dictionary (defaults to --dict)");
  swp->add_option("--truth-groups", a.truth_groups, "True group file (defaults to --groups)");
  swp->add_flag("--group-rmse-per-atom", a.group_rmse_per_atom,
                "Normalize the per-atom RMSE by the atom count instead of the group count");

  CLI::App* rep = app.add_subcommand("report", "Render abundance maps as 16-bit graymaps");
  add_common(rep, a);
  rep->add_option("--abundances", a.abundances, "Collapsed abundances (P x N)");
  rep->add_option("--atoms", a.atoms, "Optional per-atom abundances (Q x N)");
  rep->add_option("--width", a.width, "Pixel grid width");
  rep->add_option("--height", a.height, "Pixel grid height");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim, a);
    if (ext->parsed()) return cmd_extract(ext, a);
    if (unm->parsed()) return cmd_unmix(unm, a);
    if (evl->parsed()) return cmd_eval(evl, a);
    if (swp->parsed()) return cmd_sweep(swp, a);
    if (rep->parsed()) return cmd_report(rep, a);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const hsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hsi::SolverDivergence& e) {
    std::cerr << "solver divergence at iteration " << e.iteration() << ": " << e.what()
              << "\n";
    return 4;
  } catch (const hsi::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const hsi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
