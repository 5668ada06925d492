// dslc: batch runner for the coverage simulator.
//
//   dslc run --config cfg.json [--policy dslc|cortes|todescato] [--seeds 1,2,3] [--out dir]
//            [--simd auto|scalar|avx2] [--snapshots]
//   dslc validate --config cfg.json
//   dslc field --gmm | --kde points.csv --out field.csv [--config cfg.json]
//
// Exit codes: 0 success, 2 validation error, 1 runtime error.
// DSLC_OUT_DIR overrides the configured output directory; --out wins over both.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dslc/error.hpp"
#include "dslc/experiment.hpp"
#include "dslc/simd/kernels.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      if (item.empty() || item.front() == '-') throw std::invalid_argument(item);
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw dslc::ValidationError("--seeds: '" + item + "' is not a non-negative integer");
    seeds.push_back(value);
    pos = comma + 1;
  }
  return seeds;
}

int cmd_run(const std::string& config_path, const std::string& policy, const std::string& seeds,
            const std::string& out, const std::string& simd, bool snapshots) {
  if (simd == "scalar") {
    dslc::simd::set_backend(dslc::simd::Backend::scalar);
  } else if (simd == "avx2") {
    if (!dslc::simd::set_backend(dslc::simd::Backend::avx2))
      throw dslc::ValidationError("--simd avx2: not supported on this CPU or build");
  } else if (simd != "auto") {
    throw dslc::ValidationError("--simd must be auto, scalar or avx2 (got '" + simd + "')");
  }
  dslc::RunConfig cfg = dslc::load_config(config_path);
  if (!policy.empty()) cfg.policy = dslc::parse_policy(policy);
  if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
  if (const char* env = std::getenv("DSLC_OUT_DIR"); env && *env) cfg.output_dir = env;
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();

  const dslc::ExperimentResult result = dslc::run_experiment(cfg);
  const auto paths = dslc::write_results(cfg, result, cfg.output_dir, snapshots);
  const auto& last = result.aggregate.back();
  std::cout << "policy " << dslc::policy_name(cfg.policy) << ", " << cfg.seeds.size()
            << " seed(s), T=" << cfg.horizon << ", simd "
            << dslc::simd::backend_name(dslc::simd::active_backend()) << '\n'
            << "final mean cost " << last.cost << ", cumulative regret " << last.cum_regret
            << '\n';
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const dslc::RunConfig cfg = dslc::load_config(config_path);
  std::cout << dslc::config_to_json(cfg).dump(2) << '\n';
  return kExitOk;
}

int cmd_field(bool gmm, const std::string& kde, const std::string& out,
              const std::string& config_path) {
  dslc::RunConfig cfg = config_path.empty() ? dslc::default_config()
                                            : dslc::load_config(config_path);
  if (gmm == !kde.empty()) throw dslc::ValidationError("field: give exactly one of --gmm or --kde");
  if (gmm) {
    cfg.field.source = dslc::FieldSource::gmm;
    if (cfg.field.components.empty()) cfg.field.components = dslc::two_hotspot_components();
  } else {
    cfg.field.source = dslc::FieldSource::kde;
    cfg.field.path = kde;
  }
  cfg.validate();
  const dslc::WeightedGraph g = dslc::build_grid(cfg.grid.rows, cfg.grid.cols, cfg.grid.spacing);
  const dslc::SensoryField phi = dslc::build_field(cfg, g);
  dslc::write_field_csv(g, phi, out);
  std::cout << "wrote " << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multi-agent coverage simulator"};
  app.require_subcommand(1);

  std::string config_path, policy, seeds, out, kde, simd = "auto";
  bool snapshots = false, gmm = false;

  auto* run = app.add_subcommand("run", "Run seeded experiments and write CSV results");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--policy", policy, "dslc, cortes or todescato");
  run->add_option("--seeds", seeds, "Comma separated seed list");
  run->add_option("--out", out, "Output directory");
  run->add_option("--simd", simd, "Kernel backend: auto, scalar or avx2");
  run->add_flag("--snapshots", snapshots, "Also write final partition and belief CSVs");

  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults");
  validate->add_option("--config", config_path, "JSON config file")->required();

  auto* field = app.add_subcommand("field", "Write a sensory field preview CSV");
  field->add_flag("--gmm", gmm, "Gaussian mixture from the config (two hotspots by default)");
  field->add_option("--kde", kde, "Point CSV with x,y columns");
  field->add_option("--out", out, "Output CSV")->required();
  field->add_option("--config", config_path, "Optional config for grid and field parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, policy, seeds, out, simd, snapshots);
    if (*validate) return cmd_validate(config_path);
    if (*field) return cmd_field(gmm, kde, out, config_path);
  } catch (const dslc::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
