#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ptdrl/harness/episode.hpp"

namespace ptdrl::harness {

/// Builds a fresh policy instance for one episode.
struct PolicyFactory {
  std::string name;
  std::function<std::unique_ptr<Policy>(const EpisodeSpec&)> make;
};

/// Episode i: world i mod W, route (i div W) mod R, seed derived from (seed, i).
/// Identical for every policy, which pairs the comparison.
std::vector<EpisodeSpec> paired_specs(std::span<const World> worlds, std::size_t n_episodes, std::uint64_t seed);

/// logs[p][i] is episode i under policy p. Episodes run on `workers` threads.
std::vector<std::vector<EpisodeLog>> run_evaluation(std::span<const PolicyFactory> policies,
                                                    std::span<const World> worlds, const WorldModel* model,
                                                    std::span<const EpisodeSpec> specs, const EpisodeConfig& cfg,
                                                    std::size_t workers = 1);

struct Stat {
  double mean = 0.0;
  double ci = 0.0;  // 1.96 * sample standard error; 0 for fewer than two values
  std::size_t n = 0;
};

Stat mean_ci(std::span<const double> values);

struct PolicySummary {
  std::string name;
  Stat time;
  std::array<Stat, sim::kNumContexts> context;
  Stat total;
  Stat velocity;  // per-episode mean velrob
  Stat mindist;   // per-episode mean mindist
  double goal_rate = 0.0;
  double collision_ticks = 0.0;  // mean per episode

  // Per-episode raw values.
  std::vector<double> times;
  std::vector<std::array<double, sim::kNumContexts>> context_rewards;
  std::vector<double> totals;
  std::vector<double> velocities;
  std::vector<double> mindists;
};

struct Report {
  std::vector<PolicySummary> policies;
};

PolicySummary summarize(const std::string& name, std::span<const EpisodeLog> logs);
Report make_report(std::span<const std::string> names, std::span<const std::vector<EpisodeLog>> logs);

/// Rows Time, Open, Corridor, Curve, Obstacles, Total; one "mean ± ci" column per policy.
std::string report_csv(const Report& report);
nlohmann::json report_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

struct SurfaceConfig {
  std::size_t vel_bins = 16;
  double vel_max = 1.6;    // m/s
  std::size_t dist_bins = 20;
  double dist_max = 5.0;   // m
  double gamma = 0.99;

  void validate() const;
};

/// Sum of discounted returns-to-go and visit counts over (velocity, mindist) bins.
struct Surface {
  std::size_t vel_bins = 0;
  std::size_t dist_bins = 0;
  double vel_max = 0.0;
  double dist_max = 0.0;
  std::vector<double> sum;          // [vel_bin * dist_bins + dist_bin]
  std::vector<std::size_t> visits;

  std::size_t index(std::size_t vi, std::size_t di) const { return vi * dist_bins + di; }
  /// Mean return in the bin; NaN when unvisited.
  double value(std::size_t vi, std::size_t di) const;
  /// Visit-weighted mean over the whole surface; NaN when empty.
  double mean() const;
  std::size_t total_visits() const;
};

/// One surface per context; each tick's return-to-go lands in the bin of its own context.
std::array<Surface, sim::kNumContexts> value_surface(std::span<const EpisodeLog> logs, const SurfaceConfig& cfg = {});

/// gnuplot-ready grid: "velocity mindist value visits" lines, blank line between velocity rows.
void write_surface(const std::filesystem::path& path, const Surface& surface);

}  // namespace ptdrl::harness
