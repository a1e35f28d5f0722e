// netrel command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netrel/errors.hpp"
#include "netrel/hash.hpp"
#include "netrel/io.hpp"
#include "netrel/learner.hpp"
#include "netrel/signature.hpp"

namespace fs = std::filesystem;
using namespace netrel;

namespace {

constexpr std::size_t kAutoReLimit = 20;

struct Common {
  std::string network;
  std::string out_dir = ".";
  std::string format = "csv";
  std::size_t grid_points = kDefaultGridPoints;
  std::size_t exact_limit = kDefaultExactLimit;
  unsigned threads = 0;
};

struct Options {
  Common common;
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  std::size_t pool = 10000;
  std::size_t train = 0;
  double delta = 0.005;
  std::size_t n_ini = 0;
  std::size_t n_add = 0;
  std::size_t ntree = 100;
  std::size_t mtry = 0;
  std::size_t max_iterations = 0;
  std::vector<std::string> remove;
  std::string model;
};

// Hash of everything that can change an artifact; the worker count and the
// output location are deliberately left out.
std::uint64_t config_hash(const std::string& command, const Options& o, const std::string& net_text) {
  std::ostringstream s;
  s << command << ';' << fnv1a(net_text) << ';' << o.common.format << ';' << o.common.grid_points << ';'
    << o.common.exact_limit << ';' << o.seed << ';';
  if (command == "mc-kst") s << o.samples;
  if (command == "al-kst" || command == "rf-kst" || command == "variant") s << o.pool << ';';
  if (command == "al-kst")
    s << o.delta << ';' << o.n_ini << ';' << o.n_add << ';' << o.ntree << ';' << o.mtry << ';'
      << o.max_iterations;
  if (command == "rf-kst") s << o.train << ';' << o.ntree << ';' << o.mtry;
  if (command == "variant") {
    for (const auto& r : o.remove) s << r << ',';
    s << ';' << fnv1a(read_text_file(o.model));
  }
  return fnv1a(s.str());
}

class Runner {
 public:
  Runner(std::string command, const Options& o)
      : command_(std::move(command)), o_(o), text_(read_text_file(o.common.network)),
        file_(parse_network(text_)) {
    info_.command = command_;
    info_.config_hash = config_hash(command_, o_, text_);
    fs::create_directories(o_.common.out_dir);
  }

  const Network& net() const { return file_.network; }
  const std::vector<LifetimeDistribution>& dists() const { return file_.distributions; }
  RunInfo& info() { return info_; }
  unsigned threads() const { return o_.common.threads; }

  void require_distributions(const Network& n) const {
    if (dists().size() != n.class_count())
      throw Error(ErrorKind::MissingDistribution, "every class needs a distribution");
  }

  std::vector<double> grid(const Network& n) const {
    return default_grid(n, dists(), o_.common.grid_points);
  }

  void emit(const std::string& stem, const SignatureTable& table, const ReliabilityCurve& curve,
            const std::vector<double>* re) {
    const bool csv = o_.common.format == "csv";
    const fs::path dir = o_.common.out_dir;
    const std::string ext = csv ? ".csv" : ".json";
    write_text_file(dir / (stem + "_signature" + ext),
                    csv ? signature_csv(table, info_) : signature_json(table, info_));
    write_text_file(dir / (stem + "_reliability" + ext),
                    csv ? reliability_csv(curve, info_, re) : reliability_json(curve, info_, re));
  }

  void write(const std::string& name, const std::string& content) {
    write_text_file(fs::path(o_.common.out_dir) / name, content);
  }

  // Exact comparison when the network is small enough to enumerate quickly.
  std::optional<RelativeError> compare_exact(const Network& n, const ReliabilityCurve& curve) {
    if (n.component_count() > std::min(kAutoReLimit, o_.common.exact_limit)) return std::nullopt;
    const auto exact = exact_signature(n, o_.common.exact_limit, threads());
    return relative_error(reliability(exact, dists(), curve.grid), curve);
  }

  nlohmann::ordered_json summary() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["network"] = net().name();
    j["components"] = net().component_count();
    j["config_hash"] = hex64(info_.config_hash);
    return j;
  }

 private:
  std::string command_;
  Options o_;
  std::string text_;
  NetworkFile file_;
  RunInfo info_;
};

void add_re(nlohmann::ordered_json& j, const std::optional<RelativeError>& re) {
  if (!re) return;
  j["re_max"] = re->max;
  j["re_points"] = re->counted;
}

int cmd_validate(const Options& o) {
  const auto file = parse_network(read_text_file(o.common.network));
  const auto report = validate(file.network);
  nlohmann::ordered_json j;
  j["network"] = file.network.name();
  j["valid"] = report.ok();
  j["failure_mode"] = std::string(to_string(file.network.failure_mode()));
  j["components"] = file.network.component_count();
  j["classes"] = file.network.class_count();
  j["violations"] = report.violations;
  std::cout << j.dump(2) << "\n";
  return report.ok() ? 0 : exit_code(ErrorKind::InvalidNetwork);
}

int cmd_exact(const Options& o) {
  Runner r("exact", o);
  require_valid(r.net());
  r.require_distributions(r.net());
  const auto table = exact_signature(r.net(), o.common.exact_limit, r.threads());
  const auto curve = reliability(table, r.dists(), r.grid(r.net()));
  r.emit("exact", table, curve, nullptr);
  std::cout << r.summary().dump(2) << "\n";
  return 0;
}

int cmd_mc(const Options& o) {
  Runner r("mc-kst", o);
  require_valid(r.net());
  r.require_distributions(r.net());
  r.info().seed = o.seed;
  r.info().has_seed = true;
  r.info().extra = {{"samples", std::to_string(o.samples)}};
  const auto pool = sample_pool(r.net(), r.dists(), o.samples, o.seed, r.threads());
  const auto table = mc_kst(r.net(), pool, r.threads());
  const auto curve = reliability(table, r.dists(), r.grid(r.net()));
  const auto re = r.compare_exact(r.net(), curve);
  r.emit("mc-kst", table, curve, re ? &re->pointwise : nullptr);
  auto j = r.summary();
  j["samples"] = o.samples;
  add_re(j, re);
  std::cout << j.dump(2) << "\n";
  return 0;
}

LearnerConfig learner_config(const Options& o) {
  LearnerConfig cfg;
  cfg.n_ini = o.n_ini;
  cfg.n_add = o.n_add;
  cfg.delta = o.delta;
  cfg.ntree = o.ntree;
  cfg.mtry = o.mtry;
  cfg.max_iterations = o.max_iterations;
  cfg.seed = o.seed;
  cfg.threads = o.common.threads;
  return cfg;
}

int cmd_learn(const Options& o, bool active) {
  Runner r(active ? "al-kst" : "rf-kst", o);
  require_valid(r.net());
  r.require_distributions(r.net());
  r.info().seed = o.seed;
  r.info().has_seed = true;
  r.info().extra = {{"pool", std::to_string(o.pool)}};
  const auto pool = sample_pool(r.net(), r.dists(), o.pool, o.seed, r.threads());
  const auto cfg = learner_config(o);
  auto result = active ? run_al_kst(r.net(), pool, cfg) : run_rf_kst(r.net(), pool, cfg, o.train);
  const auto curve = reliability(result.table, r.dists(), r.grid(r.net()));
  const auto re = r.compare_exact(r.net(), curve);
  const std::string stem = active ? "al-kst" : "rf-kst";
  r.emit(stem, result.table, curve, re ? &re->pointwise : nullptr);
  r.write(stem + "_model.json", forest_json(result.forest, r.net()));
  r.write(stem + "_audit.json", audit_json(result.audit));
  auto j = r.summary();
  j["pool"] = o.pool;
  j["n_ini"] = result.audit.n_ini;
  j["n_add"] = result.audit.n_add;
  j["iterations"] = result.audit.iterations.size();
  j["kst_runs"] = result.audit.kst_runs;
  j["stop_reason"] = result.audit.stop_reason;
  add_re(j, re);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_variant(const Options& o) {
  Runner r("variant", o);
  require_valid(r.net());
  r.require_distributions(r.net());
  r.info().seed = o.seed;
  r.info().has_seed = true;
  std::string removed;
  for (const auto& id : o.remove) removed += (removed.empty() ? "" : " ") + id;
  r.info().extra = {{"pool", std::to_string(o.pool)}, {"removed", removed}};
  const auto forest = parse_forest_json(read_text_file(o.model), r.net());
  const auto variant = derive_variant(r.net(), std::span<const std::string>(o.remove));
  const auto pool = sample_pool(variant.network, r.dists(), o.pool, o.seed, r.threads());
  const auto table = variant_signature(r.net(), forest, variant, pool, r.threads());
  const auto curve = reliability(table, r.dists(), r.grid(variant.network));
  const auto re = r.compare_exact(variant.network, curve);
  r.emit("variant", table, curve, re ? &re->pointwise : nullptr);
  auto j = r.summary();
  j["variant_components"] = variant.network.component_count();
  j["removed"] = o.remove;
  j["pool"] = o.pool;
  add_re(j, re);
  std::cout << j.dump(2) << "\n";
  return 0;
}

void error_json(std::string_view kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("network", c.network, "Network JSON file")->required();
  sub->add_option("-o,--out-dir", c.out_dir, "Directory for output artifacts");
  sub->add_option("--format", c.format, "Artifact format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--grid-points", c.grid_points, "Number of time grid points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  sub->add_option("--exact-limit", c.exact_limit, "Largest M enumerated exactly");
  sub->add_option("--threads", c.threads, "Worker threads (0: NETREL_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-terminal network reliability via survival signatures"};
  app.require_subcommand(1);
  Options o;

  auto* validate_cmd = app.add_subcommand("validate", "Check a network file");
  add_common(validate_cmd, o.common);

  auto* exact_cmd = app.add_subcommand("exact", "Exact survival signature by enumeration");
  add_common(exact_cmd, o.common);

  auto* mc_cmd = app.add_subcommand("mc-kst", "Monte Carlo estimate with spanning-tree chains");
  add_common(mc_cmd, o.common);
  mc_cmd->add_option("--samples", o.samples, "Lifetime samples")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--seed", o.seed, "Random seed");

  auto* al_cmd = app.add_subcommand("al-kst", "Active-learning estimate");
  add_common(al_cmd, o.common);
  al_cmd->add_option("--pool", o.pool, "Lifetime sample pool size")->check(CLI::PositiveNumber);
  al_cmd->add_option("--seed", o.seed, "Random seed");
  al_cmd->add_option("--delta", o.delta, "Stopping tolerance");
  al_cmd->add_option("--n-ini", o.n_ini, "Initial labelled samples (default 2 n_v)");
  al_cmd->add_option("--n-add", o.n_add, "Samples added per iteration (default 2(n_v-2)+4 n_e)");
  al_cmd->add_option("--ntree", o.ntree, "Trees per forest")->check(CLI::PositiveNumber);
  al_cmd->add_option("--mtry", o.mtry, "Features examined per split (default M)");
  al_cmd->add_option("--max-iterations", o.max_iterations, "Iteration cap (0: none)");

  auto* rf_cmd = app.add_subcommand("rf-kst", "Random-training forest baseline");
  add_common(rf_cmd, o.common);
  rf_cmd->add_option("--pool", o.pool, "Lifetime sample pool size")->check(CLI::PositiveNumber);
  rf_cmd->add_option("--train", o.train, "Randomly chosen labelled samples")->required();
  rf_cmd->add_option("--seed", o.seed, "Random seed");
  rf_cmd->add_option("--ntree", o.ntree, "Trees per forest")->check(CLI::PositiveNumber);
  rf_cmd->add_option("--mtry", o.mtry, "Features examined per split (default M)");

  auto* var_cmd = app.add_subcommand("variant", "Reuse a trained forest on a reduced network");
  add_common(var_cmd, o.common);
  var_cmd->add_option("--remove", o.remove, "Component ids to delete")->required()->delimiter(',');
  var_cmd->add_option("--model", o.model, "Model file written by al-kst or rf-kst")->required();
  var_cmd->add_option("--pool", o.pool, "Lifetime samples for the variant")->check(CLI::PositiveNumber);
  var_cmd->add_option("--seed", o.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_json("Usage", e.what());
    return 1;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(o);
    if (exact_cmd->parsed()) return cmd_exact(o);
    if (mc_cmd->parsed()) return cmd_mc(o);
    if (al_cmd->parsed()) return cmd_learn(o, true);
    if (rf_cmd->parsed()) return cmd_learn(o, false);
    if (var_cmd->parsed()) return cmd_variant(o);
  } catch (const Error& e) {
    error_json(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    error_json(to_string(ErrorKind::Io), e.what());
    return exit_code(ErrorKind::Io);
  } catch (const std::exception& e) {
    error_json("Internal", e.what());
    return 1;
  }
  return 1;
}
