#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ptdrl::cli {

namespace fs = std::filesystem;

struct CollectSection {
  std::size_t ticks = 100000;
  fs::path parameter_sets;  // round-robined while collecting
};

struct VaeSection {
  int epochs = 5;
  std::size_t batch = 64;
  double lr = 1e-3;
  double beta = 1.0;
  std::vector<std::size_t> hidden{1024, 256};
  bool conv_encoder = false;
  double holdout = 0.1;  // fraction of episodes held out
};

struct RnnSection {
  int epochs = 10;
  std::size_t streams = 32;
  std::size_t seq_len = 32;
  double lr = 1e-3;
  double grad_clip = 1.0;
  std::size_t components = 5;
  double holdout = 0.1;
};

struct DqnSection {
  std::size_t steps = 200000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 0.3;
  double beta_start = 0.4;
  double beta_end = 1.0;
  std::size_t learn_start = 1000;
  std::size_t train_every = 1;
  double gamma = 0.99;
  std::size_t batch = 64;
  double lr = 3e-4;
  std::size_t target_sync = 2000;
  double grad_clip = 10.0;
  std::size_t capacity = 200000;
  double alpha = 0.6;
  double priority_eps = 1e-2;
};

struct RewardSection {
  double w = 1.0;
  double d = 0.75;
  double maxvelrob = 1.59;
};

struct EpisodeSection {
  double timeout = 120.0;
  double goal_tolerance = 0.4;
};

struct ScheduleSection {
  fs::path parameter_sets;
  std::array<std::size_t, 4> schedule{0, 1, 2, 3};  // open, corridor, curve, obstacles
};

struct EvalSection {
  std::size_t episodes = 50;
  std::vector<std::string> policies{"default", "appld-schedule"};
  std::size_t workers = 1;
};

struct SurfaceSection {
  std::size_t vel_bins = 16;
  double vel_max = 1.6;
  std::size_t dist_bins = 20;
  double dist_max = 5.0;
  double gamma = 0.99;
};

struct ReplaySection {
  fs::path log;             // empty: every eval log in the output directory
  std::size_t episode = 0;
  std::size_t every = 1;    // render one frame per this many ticks
  int scale = 4;            // pixels per map cell
};

/// Optional artifact locations; empty entries resolve inside the output directory.
struct PathsSection {
  fs::path dataset;
  fs::path vae;
  fs::path rnn;
  fs::path qnet;
};

struct RunConfig {
  std::uint64_t seed = 0;
  fs::path output = "runs/default";
  std::vector<fs::path> worlds;
  fs::path parameter_sets;  // tuner action set
  ScheduleSection appld;
  CollectSection collect;
  VaeSection vae;
  RnnSection rnn;
  DqnSection dqn;
  RewardSection reward;
  EpisodeSection episode;
  EvalSection eval;
  SurfaceSection surface;
  ReplaySection replay;
  PathsSection paths;

  fs::path dataset_path() const;
  fs::path vae_path() const;
  fs::path rnn_path() const;
  fs::path qnet_path() const;
};

/// Built-in defaults pointing at the bundled worlds and parameter files.
RunConfig default_config();

/// Overlays `j` on `base`. Unknown keys throw ConfigError; relative paths are taken from `base_dir`.
RunConfig merge_config(RunConfig base, const nlohmann::json& j, const fs::path& base_dir);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Checks value ranges and that every referenced input file exists.
void validate_config(const RunConfig& cfg);

/// Runs one subcommand. Returns 0 on success, 2 on configuration errors and bad
/// flags, 3 on runtime failures.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes an RGB image, rows top to bottom.
void write_png(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

}  // namespace ptdrl::cli
