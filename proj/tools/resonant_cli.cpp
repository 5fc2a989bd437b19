#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "resonant/config.hpp"
#include "resonant/engine.hpp"
#include "resonant/live.hpp"

namespace {

resonant::EngineConfig base_config(const std::string& path, resonant::EngineConfig defaults) {
  return path.empty() ? defaults : resonant::load_config(path, std::move(defaults));
}

int run_serve(const std::string& config_path, std::optional<int> udp_port, std::optional<int> bridge_port) {
  auto config = resonant::load_config(config_path);
  if (udp_port) config.udp_port = static_cast<std::uint16_t>(*udp_port);
  if (bridge_port) config.bridge_port = static_cast<std::uint16_t>(*bridge_port);

  // Worker threads inherit the mask, so only sigwait below sees these.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  resonant::LiveServer server(config);
  server.start();
  std::cout << "serving: udp " << server.udp_port() << ", bridge " << server.bridge_port() << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {} received, shutting down", sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance-model instrument processor"};
  app.require_subcommand(1);

  resonant::RenderJob job;
  std::string render_config;
  std::optional<std::uint32_t> seed;
  std::optional<double> noise_mix;
  std::optional<std::size_t> block_size;
  auto* render = app.add_subcommand("render", "Render a WAV file through a trajectory-steered resonance model");
  render->add_option("--in", job.input_path, "Mono input WAV")->required()->check(CLI::ExistingFile);
  render->add_option("--traj", job.trajectory_path, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  render->add_option("--model", job.model_path, "Resonance model file")->required()->check(CLI::ExistingFile);
  render->add_option("--map", job.map_path, "Simplicial map file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", job.output_path, "Output WAV (32-bit float)")->required();
  render->add_option("--log", job.log_path, "Feature/parameter CSV log (default <out>.csv)");
  render->add_option("--config", render_config, "Engine key = value file")->check(CLI::ExistingFile);
  render->add_option("--seed", seed, "Noise seed");
  render->add_option("--noise-mix", noise_mix, "White-noise mix (default 0 offline)");
  render->add_option("--block-size", block_size, "Samples per block");

  std::string serve_config;
  std::optional<int> udp_port;
  std::optional<int> bridge_port;
  auto* serve = app.add_subcommand("serve", "Run the live control server");
  serve->add_option("--config", serve_config, "Engine key = value file")->required()->check(CLI::ExistingFile);
  serve->add_option("--udp-port", udp_port, "Override the OSC port");
  serve->add_option("--bridge-port", bridge_port, "Override the JSON bridge port");

  std::string model_path;
  std::string map_path;
  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a model and map pair");
  validate->add_option("--model", model_path, "Resonance model file")->required();
  validate->add_option("--map", map_path, "Simplicial map file")->required();
  validate->add_option("--config", validate_config, "Engine key = value file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) {
      resonant::EngineConfig defaults;
      defaults.noise_mix = 0.0;
      auto config = base_config(render_config, defaults);
      if (seed) config.seed = *seed;
      if (noise_mix) config.noise_mix = *noise_mix;
      if (block_size) config.block_size = *block_size;
      const auto summary = resonant::render_offline(job, config);
      std::cout << "rendered " << summary.samples << " samples in " << summary.blocks << " blocks at "
                << summary.sample_rate << " Hz; log " << summary.log_path << "\n";
      if (summary.retarget_clamps > 0) std::cout << "bandwidth clamps applied: " << summary.retarget_clamps << "\n";
      return 0;
    }
    if (*serve) return run_serve(serve_config, udp_port, bridge_port);
    if (*validate) {
      const auto config = base_config(validate_config, {});
      const auto report = resonant::validate(model_path, map_path, config);
      resonant::print_report(std::cout, report);
      return report.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
