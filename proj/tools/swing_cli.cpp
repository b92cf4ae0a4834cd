#include "swing/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerification = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> engine;
  std::optional<std::string> scenario;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file")->required();
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--engine", opts.engine, "grid or lsmc")
      ->check(CLI::IsMember({"grid", "lsmc"}));
  cmd->add_option("--scenario", opts.scenario, "run a single named scenario");
}

swing::ExperimentConfig load(const CommonOpts& opts) {
  swing::ExperimentConfig cfg = swing::load_config(opts.config_path);
  if (opts.seed) cfg.solver.seed = *opts.seed;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.engine)
    cfg.engine = *opts.engine == "grid" ? swing::EngineKind::Grid : swing::EngineKind::Lsmc;
  if (opts.scenario) {
    std::vector<swing::Scenario> picked;
    for (const swing::Scenario& s : cfg.scenarios)
      if (s.name == *opts.scenario) picked.push_back(s);
    if (picked.empty())
      throw swing::ConfigError("scenario '" + *opts.scenario + "' not found in the config");
    cfg.scenarios = picked;
  }
  return cfg;
}

int run_price(const CommonOpts& opts) {
  swing::ExperimentConfig cfg = load(opts);
  // single valuation at the configured f0
  cfg.sweep.f0_min = cfg.model.f0;
  cfg.sweep.f0_max = cfg.model.f0;
  cfg.sweep.f0_step = 1.0;
  for (const swing::Scenario& s : cfg.scenarios) {
    const auto rows = swing::run_sweep_scenario(cfg, s);
    for (const auto& r : rows) {
      if (r.std_error > 0.0)
        std::printf("%-12s f0=%-8.4g price=%.6f (se %.4g) delta=%.6f\n", s.name.c_str(), r.f0,
                    r.price, r.std_error, r.delta);
      else
        std::printf("%-12s f0=%-8.4g price=%.6f delta=%.6f\n", s.name.c_str(), r.f0, r.price,
                    r.delta);
    }
  }
  return kExitOk;
}

int run_sweep_cmd(const CommonOpts& opts) {
  const swing::ExperimentConfig cfg = load(opts);
  for (const std::string& path : swing::run_sweep(cfg)) std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int run_verify(const CommonOpts& opts) {
  const swing::ExperimentConfig cfg = load(opts);
  const swing::VerificationReport rep = swing::run_verification_suite(cfg);
  std::fputs(rep.to_text().c_str(), stdout);
  if (!rep.all_pass()) {
    std::fputs("verification FAILED\n", stdout);
    return kExitVerification;
  }
  std::fputs("verification passed\n", stdout);
  return kExitOk;
}

int run_euler_gap(const CommonOpts& opts) {
  const swing::ExperimentConfig cfg = load(opts);
  swing::SchemeConfig base;
  base.path_count = std::min(cfg.solver.path_count, 20000);
  base.seed = cfg.solver.seed;
  base.truncation_lambda = cfg.solver.truncation_lambda.value_or(0.25);

  swing::Diffusion1D dyn;
  dyn.sigma = [](double t, double x) { return 0.8 * x * std::exp(-0.4 * (1.0 - t)); };
  dyn.sigma_lip = 0.8;
  dyn.a_sigma = 0.0;

  const std::vector<int> ms{2, 4, 8, 16};
  const auto res = swing::truncated_plain_gap(dyn, 1.0, 15, ms, -3.0, 3.0, 7, 2.0, base);
  std::printf("m,s_h,sup_gap\n");
  for (std::size_t i = 0; i < res.ms.size(); ++i)
    std::printf("%d,%.6g,%.6g\n", res.ms[i], res.threshold[i], res.sup_gap[i]);
  std::printf("max gap/(1+|x|) = %.6g\n", res.max_ratio);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swing option pricing and convex-order verification"};
  app.require_subcommand(1);

  CommonOpts price_opts, sweep_opts, verify_opts, gap_opts;
  CLI::App* price_cmd = app.add_subcommand("price", "single valuation at the configured f0");
  add_common(price_cmd, price_opts);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "price/delta CSV across the f0 sweep");
  add_common(sweep_cmd, sweep_opts);
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  add_common(verify_cmd, verify_opts);
  CLI::App* gap_cmd = app.add_subcommand("euler-gap", "truncated-vs-plain Euler gap study");
  add_common(gap_cmd, gap_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (price_cmd->parsed()) return run_price(price_opts);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep_opts);
    if (verify_cmd->parsed()) return run_verify(verify_opts);
    if (gap_cmd->parsed()) return run_euler_gap(gap_opts);
  } catch (const swing::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const swing::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
