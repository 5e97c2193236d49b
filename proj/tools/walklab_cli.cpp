#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "walklab/acceptance.hpp"
#include "walklab/errors.hpp"
#include "walklab/experiment.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 1;
  std::size_t partitions = 8;
  std::string out_dir;
  std::string cache_dir;
  bool seed_set = false, partitions_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config (JSON)");
  auto* s = cmd->add_option("--seed", f.seed, "root seed");
  auto* p = cmd->add_option("--partitions", f.partitions, "substream count");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--cache", f.cache_dir, "table cache directory");
  s->each([&](const std::string&) { f.seed_set = true; });
  p->each([&](const std::string&) { f.partitions_set = true; });
}

int run_and_report(const std::string& kind, const std::string& sub,
                   const CommonFlags& flags) {
  walklab::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = walklab::parse_config(walklab::read_text(flags.config_path));
  } else {
    cfg.seed = flags.seed;
    cfg.partitions = flags.partitions;
  }
  cfg.kind = kind;
  cfg.sub = sub;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.partitions_set) cfg.partitions = flags.partitions;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.cache_dir.empty()) cfg.cache_dir = flags.cache_dir;
  if (cfg.out_dir.empty())
    cfg.out_dir = "out/" + kind + (sub.empty() ? "" : "-" + sub);

  walklab::ExperimentReport rep = walklab::run_experiment(cfg);
  const auto manifest = walklab::write_report(rep, cfg.out_dir);
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
              << "  statistic=" << c.statistic
              << " threshold=" << c.threshold << "\n";
  }
  std::cout << (rep.all_pass ? "all checks passed" : "CHECKS FAILED")
            << "; report at " << manifest.parent_path().string() << "\n";
  return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditioned random walk and BPRE simulation laboratory"};
  app.require_subcommand(1);

  struct Leaf {
    std::string kind, sub;
    CommonFlags flags;
  };
  std::vector<std::shared_ptr<Leaf>> leaves;
  auto add_leaf = [&](CLI::App* parent, const std::string& name,
                      const std::string& kind, const std::string& sub) {
    auto leaf = std::make_shared<Leaf>();
    leaf->kind = kind;
    leaf->sub = sub;
    CLI::App* cmd = parent->add_subcommand(name);
    add_common(cmd, leaf->flags);
    cmd->callback([leaf]() {
      std::exit(run_and_report(leaf->kind, leaf->sub, leaf->flags));
    });
    leaves.push_back(leaf);
  };

  CLI::App* stable = app.add_subcommand("stable", "stable-law checks");
  stable->require_subcommand(1);
  add_leaf(stable, "check", "stable-check", "");

  CLI::App* walk = app.add_subcommand("walk", "random-walk machinery");
  walk->require_subcommand(1);
  add_leaf(walk, "renewal", "walk-check", "renewal");
  add_leaf(walk, "kernel", "walk-check", "kernel");
  add_leaf(walk, "conditioned", "walk-check", "conditioned");

  CLI::App* limits = app.add_subcommand("limits", "limit-law tables");
  limits->require_subcommand(1);
  add_leaf(limits, "meander", "limit-law", "meander");
  add_leaf(limits, "bridge", "limit-law", "bridge");
  add_leaf(limits, "constants", "limit-law", "constants");
  add_leaf(limits, "laws", "limit-law", "laws");

  CLI::App* bpre = app.add_subcommand("bpre", "branching in random environment");
  bpre->require_subcommand(1);
  add_leaf(bpre, "regime", "bpre-regime", "");
  add_leaf(bpre, "smalldev", "small-deviation", "");
  add_leaf(bpre, "tcond", "tcond", "");
  add_leaf(bpre, "b2check", "b2-check", "");

  CLI::App* verify = app.add_subcommand("verify", "verification suite");
  verify->require_subcommand(1);
  CLI::App* verify_all = verify->add_subcommand("all", "run every criterion");
  std::uint64_t vseed = 20240810;
  double vscale = 1.0;
  std::size_t vthreads = 8;
  verify_all->add_option("--seed", vseed, "root seed");
  verify_all->add_option("--scale", vscale, "Monte Carlo budget scale");
  verify_all->add_option("--threads", vthreads, "worker threads");
  verify_all->callback([&]() {
    walklab::AcceptanceOptions opt;
    opt.seed = vseed;
    opt.budget_scale = vscale;
    opt.threads = vthreads;
    const auto results = walklab::run_acceptance(opt, std::cout);
    std::exit(walklab::all_passed(results) ? 0 : 1);
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const walklab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
