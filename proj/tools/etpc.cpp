// Command-line front end: simulate, sweep, compare, validate.

#include "etpc/config.hpp"
#include "etpc/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kCertificate = 3,
  kDivergence = 4,
  kZeno = 5,
  kNumerical = 6,
};

struct Options {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  unsigned threads = 0;
  bool dump_fits = false;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw etpc::Error("cannot write " + path.string());
  return out;
}

etpc::RunConfig resolve(const Options& opt, const std::string& mode_key) {
  std::vector<std::string> overrides = opt.overrides;
  if (opt.seed) overrides.push_back("experiment.seed=" + std::to_string(*opt.seed));
  if (opt.mode) overrides.push_back(mode_key + "=" + *opt.mode);
  if (opt.config.empty()) return etpc::load_config("", overrides);
  return etpc::load_config_file(opt.config, overrides);
}

etpc::CertificateReport report_certificate(const etpc::PlantModel& plant, double radius,
                                           std::ostream& log) {
  etpc::CertificateCheckOptions check;
  check.state_radius = 10.0 * radius;
  const auto report = etpc::check_certificate(plant, check);
  log << "certificate " << plant.name << ": " << (report.passed ? "ok" : "FAILED")
      << " (dissipation slack " << report.worst_dissipation_slack << ", sandwich slack "
      << report.worst_sandwich_slack << ", gradient error " << report.worst_gradient_error
      << ")\n";
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < std::min(kShown, report.failures.size()); ++i)
    log << "  " << report.failures[i] << '\n';
  if (report.failures.size() > kShown)
    log << "  ... " << report.failures.size() - kShown << " more\n";
  return report;
}

void require_certificate(const etpc::PlantModel& plant, double radius) {
  const auto report = report_certificate(plant, radius, std::cerr);
  if (!report.passed) throw etpc::CertificateError("certificate check failed: " + report.failures.front());
}

void write_manifest(const fs::path& dir, const etpc::RunConfig& cfg, const std::string& extra) {
  auto out = open_output(dir / "manifest");
  out << cfg.manifest();
  if (!extra.empty()) out << extra;
}

int run_simulate(const Options& opt) {
  const auto cfg = resolve(opt, "sim.mode");
  const auto plant = cfg.build_plant();
  const auto basis = cfg.build_basis();
  const auto trigger = cfg.build_trigger(plant);
  require_certificate(plant, cfg.x0.norm());
  {
    const double eps = trigger.epsilon;
    const double r_max =
        etpc::r_admissible_bound(plant, eps, std::max(eps, plant.lyapunov(cfg.x0)));
    if (cfg.trigger.r > r_max)
      std::cerr << "note: r = " << cfg.trigger.r << " is above the inter-event bound window (r <= "
                << r_max << ")\n";
  }

  const fs::path root(opt.out);
  fs::create_directories(root);
  write_manifest(root, cfg, "");
  for (const auto mode : cfg.sim_modes) {
    etpc::SimConfig sim = cfg.sim;
    sim.mode = mode;
    const fs::path dir = cfg.sim_modes.size() > 1 ? root / std::string(etpc::to_string(mode)) : root;
    fs::create_directories(dir);
    const auto log = etpc::run_closed_loop(plant, basis, sim, trigger, cfg.trigger.dynamic, cfg.x0);
    {
      auto out = open_output(dir / "samples.csv");
      etpc::write_samples_csv(out, log);
    }
    {
      auto out = open_output(dir / "events.csv");
      etpc::write_events_csv(out, log);
    }
    if (opt.dump_fits && etpc::is_parameterized(mode)) {
      // Replays every event from its logged state; the update is deterministic.
      auto out = open_output(dir / "fits.ini");
      for (std::size_t k = 0; k < log.events.size(); ++k) {
        const auto& ev = log.events[k];
        const auto update = etpc::event_update(plant, basis, trigger, sim, ev.state, ev.time);
        for (std::size_t i = 0; i < update.fits.size(); ++i) {
          out << "# event " << k << " t=" << ev.time << " channel " << i << '\n';
          etpc::dump(out, update.fits[i].problem, update.fits[i].solution);
        }
      }
    }
    std::cout << etpc::to_string(mode) << ": " << log.events.size() << " events, epsilon "
              << log.epsilon << ", final V " << log.lyapunov.back() << ", level excess "
              << log.level_excess << " (tol " << log.tol_event << ")\n";
  }
  return kOk;
}

int run_batch(const Options& opt, bool compare) {
  const auto cfg = resolve(opt, "experiment.modes");
  const auto plant = cfg.build_plant();
  require_certificate(plant, cfg.experiment.radius);
  auto spec = cfg.build_experiment(plant);
  spec.threads = opt.threads;
  const auto result = compare ? etpc::compare_methods(spec) : etpc::sweep(spec);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_manifest(dir, cfg, "# spec hash " + result.spec_hash + "\n");
  {
    auto out = open_output(dir / "table.csv");
    etpc::write_table_csv(out, result);
  }
  {
    auto out = open_output(dir / "table_layout.csv");
    if (compare)
      etpc::write_compare_layout_csv(out, result);
    else
      etpc::write_sweep_layout_csv(out, result);
  }
  {
    auto out = open_output(dir / "runs.jsonl");
    etpc::write_runs_jsonl(out, result);
  }
  {
    auto out = open_output(dir / "timing.csv");
    etpc::write_timing_csv(out, result);
  }
  etpc::write_table_csv(std::cout, result);
  return kOk;
}

int run_validate(const Options& opt) {
  const auto cfg = resolve(opt, "sim.mode");
  const auto plant = cfg.build_plant();
  const double radius = std::max(cfg.x0.norm(), cfg.experiment.radius);
  const auto report = report_certificate(plant, radius, std::cout);
  return report.passed ? kOk : kCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered parameterized control simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--set", opt.overrides, "Override section.key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "Experiment seed");
    sub->add_option("--mode", opt.mode,
                    "Controller mode(s): etpc_static, etpc_dynamic, zoh_static, zoh_dynamic");
  };
  auto* simulate = app.add_subcommand("simulate", "Run one closed loop and log the trajectory");
  auto* sweep = app.add_subcommand("sweep", "AIET/MIET over horizons and degrees");
  auto* compare = app.add_subcommand("compare", "Disturbance-free comparison of triggering rules");
  auto* validate = app.add_subcommand("validate", "Check the plant's ISS certificate by sampling");
  for (auto* sub : {simulate, sweep, compare, validate}) add_common(sub);
  simulate->add_flag("--dump-fits", opt.dump_fits, "Write every fit problem and solution to fits.ini");
  for (auto* sub : {sweep, compare})
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(opt);
    if (*sweep) return run_batch(opt, false);
    if (*compare) return run_batch(opt, true);
    return run_validate(opt);
  } catch (const etpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const etpc::CertificateError& e) {
    std::cerr << e.what() << '\n';
    return kCertificate;
  } catch (const etpc::DivergenceError& e) {
    std::cerr << "divergence at t=" << e.time() << ": " << e.what() << '\n';
    return kDivergence;
  } catch (const etpc::ZenoError& e) {
    std::cerr << "Zeno suspicion at t=" << e.time() << " (event " << e.event_index()
              << "): " << e.what() << '\n';
    return kZeno;
  } catch (const etpc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
