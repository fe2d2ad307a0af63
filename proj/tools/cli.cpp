#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>

#include "ptdrl/harness/collect.hpp"
#include "ptdrl/harness/evaluate.hpp"
#include "ptdrl/harness/training.hpp"
#include "ptdrl/json_util.hpp"
#include "ptdrl/wm/train.hpp"

namespace ptdrl::cli {

using json_util::Json;

namespace {

using Applier = std::function<void(RunConfig&)>;

template <typename T, typename Field>
CLI::Option* bind_flag(CLI::App* cmd, std::vector<Applier>& appliers, const std::string& flag, Field field,
          const std::string& help) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = cmd->add_option(flag, *value, help);
  appliers.push_back([value, opt, field](RunConfig& c) {
    if (opt->count() > 0) field(c) = *value;
  });
  return opt;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write " + path.string());
  os << text;
  if (!os) throw RuntimeError("write failed: " + path.string());
}

const fs::path& with_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("PTDRL_SEED");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const auto v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("PTDRL_SEED is not an unsigned integer: ") + s);
  return v;
}

harness::EpisodeConfig episode_config(const RunConfig& c) {
  harness::EpisodeConfig e;
  e.timeout = c.episode.timeout;
  e.goal_tolerance = c.episode.goal_tolerance;
  e.reward = {c.reward.w, c.reward.d, c.reward.maxvelrob};
  e.reward.validate();
  return e;
}

harness::WorldModel load_world_model(const RunConfig& c) {
  harness::WorldModel m{wm::load_vae(c.vae_path()), wm::load_rnn(c.rnn_path())};
  m.validate();
  return m;
}

std::string file_label(const std::string& name) {
  std::string s = name;
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  return s;
}

std::string context_name(std::size_t c) { return std::string(sim::to_string(static_cast<sim::Context>(c))); }

void write_outputs(const RunConfig& c, const std::vector<std::string>& names,
                   const std::vector<std::vector<harness::EpisodeLog>>& logs, std::ostream& out) {
  const auto report = harness::make_report(names, logs);
  write_text(c.output / "report.csv", harness::report_csv(report));
  write_text(c.output / "report.json", harness::report_json(report).dump(2) + "\n");
  const harness::SurfaceConfig scfg{c.surface.vel_bins, c.surface.vel_max, c.surface.dist_bins, c.surface.dist_max,
                                    c.surface.gamma};
  fs::create_directories(c.output / "surfaces");
  Json summary = Json::object();
  for (std::size_t p = 0; p < names.size(); ++p) {
    const auto surfaces = harness::value_surface(logs[p], scfg);
    Json means = Json::object();
    for (std::size_t k = 0; k < sim::kNumContexts; ++k) {
      harness::write_surface(c.output / "surfaces" / (file_label(names[p]) + "_" + context_name(k) + ".dat"),
                             surfaces[k]);
      const double m = surfaces[k].mean();
      means[context_name(k)] = Json{{"mean", std::isnan(m) ? Json(nullptr) : Json(m)},
                                    {"visits", surfaces[k].total_visits()}};
    }
    summary[names[p]] = means;
  }
  write_text(c.output / "surfaces" / "summary.json", summary.dump(2) + "\n");
  out << harness::report_csv(report);
}

// ---- subcommands ----

void run_collect(const RunConfig& c, std::ostream& out) {
  const auto worlds = harness::load_worlds(c.worlds);
  const auto sets = planner::load_parameter_sets(c.collect.parameter_sets);
  std::size_t episodes = 0;
  const auto data =
      harness::collect_world_model_data(worlds, sets, c.collect.ticks, c.seed, episode_config(c), &episodes);
  wm::save_dataset(with_parent(c.dataset_path()), data);
  out << "collected " << data.size() << " ticks over " << episodes << " episodes -> " << c.dataset_path().string()
      << "\n";
}

void run_train_vae(const RunConfig& c, std::ostream& out) {
  const auto data = wm::load_dataset(c.dataset_path());
  const auto [train, held] = wm::split_episodes(data, c.vae.holdout);
  wm::VaeConfig vc;
  vc.input_side = static_cast<std::size_t>(data.side);
  vc.hidden = c.vae.hidden;
  vc.beta = c.vae.beta;
  vc.conv_encoder = c.vae.conv_encoder;
  wm::Vae vae(vc);
  Rng rng(mix_seed(c.seed, 0x564145));
  vae.init(rng);
  const wm::VaeTrainConfig tc{c.vae.epochs, c.vae.batch, c.vae.lr, 0.0, c.seed};
  std::string csv = "epoch,batch,loss,bce,kl\n";
  const std::size_t per_epoch = (train.size() + tc.batch - 1) / tc.batch;
  const auto losses = wm::train_vae(vae, train, tc, [&](int epoch, std::size_t b, const wm::VaeLoss& l) {
    csv += std::to_string(epoch) + "," + std::to_string(b) + "," + std::to_string(l.total) + "," +
           std::to_string(l.bce) + "," + std::to_string(l.kl) + "\n";
    if (b + 1 == per_epoch) out << "vae epoch " << epoch << " last batch loss " << l.total << "\n";
  });
  wm::save_vae(with_parent(c.vae_path()), vae);
  write_text(c.output / "logs" / "vae_loss.csv", csv);
  const auto ev = wm::evaluate_vae(vae, held);
  Json metrics{{"train_records", train.size()},
               {"heldout_records", held.size()},
               {"heldout_mse", ev.mse},
               {"heldout_centroid_error", ev.centroid_error},
               {"first_batch_loss", losses.empty() ? Json(nullptr) : Json(losses.front())},
               {"last_batch_loss", losses.empty() ? Json(nullptr) : Json(losses.back())}};
  write_text(c.output / "logs" / "vae_metrics.json", metrics.dump(2) + "\n");
  out << "vae held-out per-pixel mse " << ev.mse << " -> " << c.vae_path().string() << "\n";
}

void run_train_rnn(const RunConfig& c, std::ostream& out) {
  const auto data = wm::load_dataset(c.dataset_path());
  const auto [train, held] = wm::split_episodes(data, c.rnn.holdout);
  const auto vae = wm::load_vae(c.vae_path());
  const auto z_train = wm::encode_dataset(vae, train);
  const auto z_held = wm::encode_dataset(vae, held);
  wm::MdnRnn rnn({vae.config().latent, 3, 256, c.rnn.components});
  Rng rng(mix_seed(c.seed, 0x524e4e));
  rnn.init(rng);
  const wm::RnnTrainConfig tc{c.rnn.epochs, c.rnn.streams, c.rnn.seq_len, c.rnn.lr, c.rnn.grad_clip, c.seed};
  std::string csv = "epoch,chunk,nll\n";
  int last_epoch = -1;
  wm::train_rnn(rnn, z_train, train, tc, [&](int epoch, std::size_t chunk, double nll) {
    csv += std::to_string(epoch) + "," + std::to_string(chunk) + "," + std::to_string(nll) + "\n";
    if (epoch != last_epoch) {
      out << "rnn epoch " << epoch << " first chunk nll " << nll << "\n";
      last_epoch = epoch;
    }
  });
  wm::save_rnn(with_parent(c.rnn_path()), rnn);
  write_text(c.output / "logs" / "rnn_loss.csv", csv);
  const auto ev = wm::evaluate_rnn(rnn, z_held, held);
  Json metrics{{"heldout_transitions", ev.transitions},
               {"heldout_model_nll", ev.model_nll},
               {"heldout_persistence_nll", ev.persistence_nll}};
  write_text(c.output / "logs" / "rnn_metrics.json", metrics.dump(2) + "\n");
  out << "rnn held-out nll " << ev.model_nll << " (persistence " << ev.persistence_nll << ") -> "
      << c.rnn_path().string() << "\n";
}

void run_train_dqn(const RunConfig& c, std::ostream& out) {
  const auto worlds = harness::load_worlds(c.worlds);
  const auto sets = planner::load_parameter_sets(c.parameter_sets);
  const auto model = load_world_model(c);
  tuner::DqnHyper h;
  h.gamma = c.dqn.gamma;
  h.batch = c.dqn.batch;
  h.lr = c.dqn.lr;
  h.target_sync = c.dqn.target_sync;
  h.grad_clip = c.dqn.grad_clip;
  h.replay = {c.dqn.capacity, c.dqn.alpha, c.dqn.priority_eps};
  Rng init(mix_seed(c.seed, 0x44514e));
  tuner::DqnLearner learner(sets.size(), h, init);
  tuner::save_qnetwork(with_parent(c.output / "checkpoints" / "qnet_init.ptnn"), learner.online());

  harness::DqnTrainConfig tc;
  tc.steps = c.dqn.steps;
  tc.eps_start = c.dqn.eps_start;
  tc.eps_end = c.dqn.eps_end;
  tc.eps_fraction = c.dqn.eps_fraction;
  tc.beta_start = c.dqn.beta_start;
  tc.beta_end = c.dqn.beta_end;
  tc.learn_start = c.dqn.learn_start;
  tc.train_every = c.dqn.train_every;
  tc.seed = c.seed;
  std::string csv = "episode,steps,return,epsilon,mean_q,loss,ticks,duration,goal_reached,updates\n";
  harness::train_dqn(learner, worlds, sets, model, episode_config(c), tc,
                     [&](const harness::TrainEpisodeStats& s, const harness::EpisodeLog&) {
                       csv += std::to_string(s.episode) + "," + std::to_string(s.total_steps) + "," +
                              std::to_string(s.reward) + "," + std::to_string(s.epsilon) + "," +
                              std::to_string(s.mean_q) + "," + std::to_string(s.mean_loss) + "," +
                              std::to_string(s.ticks) + "," + std::to_string(s.duration) + "," +
                              (s.goal_reached ? "1" : "0") + "," + std::to_string(s.updates) + "\n";
                       if (s.episode % 20 == 0)
                         out << "dqn episode " << s.episode << " steps " << s.total_steps << " reward " << s.reward
                             << " eps " << s.epsilon << " loss " << s.mean_loss << "\n";
                     });
  tuner::save_qnetwork(with_parent(c.qnet_path()), learner.online());
  write_text(c.output / "logs" / "train_dqn.csv", csv);
  out << "dqn trained for " << c.dqn.steps << " steps -> " << c.qnet_path().string() << "\n";
}

struct ParsedPolicy {
  std::string name;
  harness::PolicyFactory factory;
  bool needs_model = false;
};

std::vector<ParsedPolicy> parse_policies(const RunConfig& c, std::vector<std::shared_ptr<tuner::QNetwork>>& nets) {
  std::vector<ParsedPolicy> out;
  const auto tuner_sets = planner::load_parameter_sets(c.parameter_sets);
  for (const auto& entry : c.eval.policies) {
    std::string name = entry, spec = entry;
    if (const auto eq = entry.find('='); eq != std::string::npos) {
      name = entry.substr(0, eq);
      spec = entry.substr(eq + 1);
    }
    if (name.empty()) throw ConfigError("policy '" + entry + "' has an empty name");
    for (const auto& p : out)
      if (p.name == name) throw ConfigError("duplicate policy name '" + name + "'");
    ParsedPolicy p{name, {name, {}}, false};
    if (spec == "default") {
      p.factory.make = [](const harness::EpisodeSpec&) {
        return std::make_unique<harness::FixedPolicy>(std::vector{planner::default_parameter_set()}, 0);
      };
    } else if (spec == "appld-schedule") {
      auto sets = planner::load_parameter_sets(c.appld.parameter_sets);
      for (auto i : c.appld.schedule)
        if (i >= sets.size()) throw ConfigError("appld.schedule index out of range");
      const auto schedule = c.appld.schedule;
      p.factory.make = [sets, schedule](const harness::EpisodeSpec&) {
        return std::make_unique<harness::SchedulePolicy>(sets, schedule);
      };
    } else if (spec.rfind("fixed:", 0) == 0) {
      std::size_t index = 0;
      try {
        std::size_t used = 0;
        index = std::stoul(spec.substr(6), &used);
        if (used != spec.size() - 6) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("bad policy '" + spec + "': expected fixed:<index>");
      }
      if (index >= tuner_sets.size()) throw ConfigError("policy '" + spec + "': index out of range");
      p.factory.make = [tuner_sets, index](const harness::EpisodeSpec&) {
        return std::make_unique<harness::FixedPolicy>(tuner_sets, index);
      };
    } else if (spec.rfind("ptdrl:", 0) == 0) {
      const fs::path ckpt = spec.substr(6);
      if (!fs::is_regular_file(ckpt)) throw ConfigError("policy checkpoint not found: " + ckpt.string());
      auto net = std::make_shared<tuner::QNetwork>(tuner::load_qnetwork(ckpt));
      if (net->n_actions() != tuner_sets.size())
        throw ConfigError("policy '" + spec + "' has " + std::to_string(net->n_actions()) +
                          " actions but parameter_sets lists " + std::to_string(tuner_sets.size()));
      nets.push_back(net);
      p.needs_model = true;
      p.factory.make = [tuner_sets, net](const harness::EpisodeSpec& s) {
        return std::make_unique<harness::TunerPolicy>(tuner_sets, *net, harness::policy_seed(s));
      };
    } else {
      throw ConfigError("unknown policy '" + spec + "' (default | appld-schedule | ptdrl:<ckpt> | fixed:<index>)");
    }
    out.push_back(std::move(p));
  }
  return out;
}

void run_eval(const RunConfig& c, std::ostream& out) {
  const auto worlds = harness::load_worlds(c.worlds);
  std::vector<std::shared_ptr<tuner::QNetwork>> nets;
  const auto parsed = parse_policies(c, nets);
  std::optional<harness::WorldModel> model;
  if (std::any_of(parsed.begin(), parsed.end(), [](const auto& p) { return p.needs_model; }))
    model = load_world_model(c);

  std::vector<harness::PolicyFactory> factories;
  std::vector<std::string> names;
  for (const auto& p : parsed) {
    factories.push_back(p.factory);
    names.push_back(p.name);
  }
  const auto specs = harness::paired_specs(worlds, c.eval.episodes, c.seed);
  const auto logs =
      harness::run_evaluation(factories, worlds, model ? &*model : nullptr, specs, episode_config(c), c.eval.workers);

  Json manifest = Json::array();
  for (std::size_t p = 0; p < names.size(); ++p) {
    const auto file = "eval_" + file_label(names[p]) + ".jsonl";
    fs::create_directories(c.output / "logs");
    harness::write_episode_logs(c.output / "logs" / file, logs[p]);
    manifest.push_back({{"policy", names[p]}, {"file", file}});
  }
  write_text(c.output / "logs" / "eval_manifest.json", manifest.dump(2) + "\n");
  write_outputs(c, names, logs, out);
}

void run_report(const RunConfig& c, const std::vector<std::string>& log_files, std::ostream& out) {
  std::vector<std::string> names;
  std::vector<std::vector<harness::EpisodeLog>> logs;
  auto add = [&](const std::string& name, const fs::path& file) {
    auto l = harness::read_episode_logs(file);
    if (l.empty()) throw ConfigError("no episodes in " + file.string());
    names.push_back(name.empty() ? l.front().policy : name);
    logs.push_back(std::move(l));
  };
  if (!log_files.empty()) {
    for (const auto& f : log_files) add("", f);
  } else {
    const auto manifest_path = c.output / "logs" / "eval_manifest.json";
    if (!fs::is_regular_file(manifest_path))
      throw ConfigError("no evaluation logs: " + manifest_path.string() + " is missing (run eval or pass --logs)");
    for (const auto& e : json_util::load(manifest_path))
      add(e.at("policy").get<std::string>(), c.output / "logs" / e.at("file").get<std::string>());
  }
  write_outputs(c, names, logs, out);
}

struct Rgb {
  std::uint8_t r, g, b;
};

void run_replay(const RunConfig& c, std::ostream& out) {
  if (c.replay.log.empty()) throw ConfigError("replay: no log given (--log)");
  const auto logs = harness::read_episode_logs(c.replay.log);
  if (c.replay.episode >= logs.size())
    throw ConfigError("replay: episode " + std::to_string(c.replay.episode) + " not in log (" +
                      std::to_string(logs.size()) + " episodes)");
  const auto& log = logs[c.replay.episode];
  const auto worlds = harness::load_worlds(c.worlds);
  const auto it = std::find_if(worlds.begin(), worlds.end(), [&](const auto& w) { return w.name() == log.world; });
  if (it == worlds.end()) throw ConfigError("replay: world '" + log.world + "' is not among the configured worlds");
  const auto& map = it->map;
  const int s = c.replay.scale;
  const int W = map.width() * s, H = map.height() * s;
  const double px = map.resolution() / s;  // metres per pixel

  static constexpr Rgb kTint[sim::kNumContexts] = {{236, 246, 236}, {236, 240, 250}, {250, 244, 230}, {248, 234, 234}};
  std::vector<std::uint8_t> base(static_cast<std::size_t>(W * H * 3));
  auto put = [&](std::vector<std::uint8_t>& img, int x, int y, Rgb col) {
    if (x < 0 || y < 0 || x >= W || y >= H) return;
    const auto i = static_cast<std::size_t>(((H - 1 - y) * W + x) * 3);
    img[i] = col.r;
    img[i + 1] = col.g;
    img[i + 2] = col.b;
  };
  for (int cy = 0; cy < map.height(); ++cy) {
    for (int cx = 0; cx < map.width(); ++cx) {
      Rgb col{255, 255, 255};
      if (map.occupied({cx, cy})) {
        col = {40, 40, 40};
      } else if (const auto l = map.label({cx, cy})) {
        col = kTint[static_cast<std::size_t>(*l)];
      }
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) put(base, cx * s + dx, cy * s + dy, col);
    }
  }
  auto disc = [&](std::vector<std::uint8_t>& img, Vec2 p, double r, Rgb col) {
    const int x0 = static_cast<int>((p.x - r) / px), x1 = static_cast<int>((p.x + r) / px);
    const int y0 = static_cast<int>((p.y - r) / px), y1 = static_cast<int>((p.y + r) / px);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if ((Vec2{(x + 0.5) * px, (y + 0.5) * px} - p).norm() <= r) put(img, x, y, col);
  };

  const fs::path dir =
      c.output / "frames" / (file_label(log.policy) + "_" + log.world + "_ep" + std::to_string(c.replay.episode));
  fs::create_directories(dir);
  std::size_t frames = 0;
  for (std::size_t t = 0; t < log.ticks.size(); t += c.replay.every) {
    auto img = base;
    disc(img, log.goal, 0.2, {40, 170, 60});
    for (std::size_t k = 0; k <= t; ++k) {
      const auto& p = log.ticks[k].pose;
      put(img, static_cast<int>(p.x / px), static_cast<int>(p.y / px), {90, 120, 220});
    }
    const auto& tick = log.ticks[t];
    for (std::size_t a = 0; a < tick.agents.size(); ++a) {
      const double r = a < it->scenario.agents.size() ? it->scenario.agents[a].radius : 0.3;
      disc(img, tick.agents[a], r, {210, 60, 50});
    }
    disc(img, tick.pose.position(), 0.25, tick.collision ? Rgb{230, 150, 0} : Rgb{30, 80, 200});
    for (double d = 0.0; d <= 0.25; d += px * 0.5) {
      const Vec2 q = tick.pose.position() + Vec2{std::cos(tick.pose.heading), std::sin(tick.pose.heading)} * d;
      put(img, static_cast<int>(q.x / px), static_cast<int>(q.y / px), {255, 255, 255});
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.png", t);
    write_png(dir / name, W, H, img);
    ++frames;
  }
  out << "rendered " << frames << " frames -> " << dir.string() << "\n";
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parameter tuning for a DWA local planner with a world-model DDQN agent"};
  app.name("ptdrl");
  app.require_subcommand(1, 1);

  std::map<std::string, std::vector<Applier>> appliers;
  std::map<std::string, std::string> config_files;
  auto cmd = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    auto& ap = appliers[name];
    s->add_option("--config", config_files[name], "JSON run config (keys as written to config.json)");
    bind_flag<std::uint64_t>(s, ap, "--seed", [](RunConfig& c) -> auto& { return c.seed; },
                        "seed (falls back to the config, then PTDRL_SEED)");
    bind_flag<std::string>(s, ap, "--output", [](RunConfig& c) -> auto& { return c.output; }, "output directory");
    auto worlds = std::make_shared<std::vector<std::string>>();
    CLI::Option* wo = s->add_option("--worlds", *worlds, "scenario files");
    ap.push_back([worlds, wo](RunConfig& c) {
      if (wo->count() > 0) c.worlds.assign(worlds->begin(), worlds->end());
    });
    return s;
  };
  CLI::App* collect = cmd("collect", "record costmaps, velocities and inflation radii for the world model");
  auto& ap_collect = appliers["collect"];
  bind_flag<std::size_t>(collect, ap_collect, "--ticks", [](RunConfig& c) -> auto& { return c.collect.ticks; },
                    "records to collect");
  bind_flag<std::string>(collect, ap_collect, "--collect-params",
                    [](RunConfig& c) -> auto& { return c.collect.parameter_sets; }, "parameter sets to cycle");
  bind_flag<std::string>(collect, ap_collect, "--dataset", [](RunConfig& c) -> auto& { return c.paths.dataset; },
                    "dataset file");

  CLI::App* tvae = cmd("train-vae", "train the costmap VAE");
  auto& ap_vae = appliers["train-vae"];
  bind_flag<int>(tvae, ap_vae, "--epochs", [](RunConfig& c) -> auto& { return c.vae.epochs; }, "epochs");
  bind_flag<std::size_t>(tvae, ap_vae, "--batch", [](RunConfig& c) -> auto& { return c.vae.batch; }, "batch size");
  bind_flag<double>(tvae, ap_vae, "--lr", [](RunConfig& c) -> auto& { return c.vae.lr; }, "learning rate");
  bind_flag<std::string>(tvae, ap_vae, "--dataset", [](RunConfig& c) -> auto& { return c.paths.dataset; },
                    "dataset file");
  bind_flag<std::string>(tvae, ap_vae, "--vae", [](RunConfig& c) -> auto& { return c.paths.vae; }, "VAE checkpoint");

  CLI::App* trnn = cmd("train-rnn", "train the MDN-RNN on VAE latents");
  auto& ap_rnn = appliers["train-rnn"];
  bind_flag<int>(trnn, ap_rnn, "--epochs", [](RunConfig& c) -> auto& { return c.rnn.epochs; }, "epochs");
  bind_flag<double>(trnn, ap_rnn, "--lr", [](RunConfig& c) -> auto& { return c.rnn.lr; }, "learning rate");
  bind_flag<std::string>(trnn, ap_rnn, "--dataset", [](RunConfig& c) -> auto& { return c.paths.dataset; },
                    "dataset file");
  bind_flag<std::string>(trnn, ap_rnn, "--vae", [](RunConfig& c) -> auto& { return c.paths.vae; }, "VAE checkpoint");
  bind_flag<std::string>(trnn, ap_rnn, "--rnn", [](RunConfig& c) -> auto& { return c.paths.rnn; }, "MDN-RNN checkpoint");

  CLI::App* tdqn = cmd("train-dqn", "train the parameter-tuning DDQN agent");
  auto& ap_dqn = appliers["train-dqn"];
  bind_flag<std::size_t>(tdqn, ap_dqn, "--steps", [](RunConfig& c) -> auto& { return c.dqn.steps; },
                    "environment steps");
  bind_flag<double>(tdqn, ap_dqn, "--w", [](RunConfig& c) -> auto& { return c.reward.w; }, "reward penalty weight");
  bind_flag<double>(tdqn, ap_dqn, "--d", [](RunConfig& c) -> auto& { return c.reward.d; }, "reward safety distance");
  bind_flag<std::string>(tdqn, ap_dqn, "--params", [](RunConfig& c) -> auto& { return c.parameter_sets; },
                    "parameter sets forming the action space");
  bind_flag<std::string>(tdqn, ap_dqn, "--vae", [](RunConfig& c) -> auto& { return c.paths.vae; }, "VAE checkpoint");
  bind_flag<std::string>(tdqn, ap_dqn, "--rnn", [](RunConfig& c) -> auto& { return c.paths.rnn; }, "MDN-RNN checkpoint");
  bind_flag<std::string>(tdqn, ap_dqn, "--qnet", [](RunConfig& c) -> auto& { return c.paths.qnet; },
                    "output Q-network checkpoint");

  CLI::App* eval = cmd("eval", "run paired-seed evaluation episodes and write the report");
  auto& ap_eval = appliers["eval"];
  bind_flag<std::size_t>(eval, ap_eval, "--episodes", [](RunConfig& c) -> auto& { return c.eval.episodes; },
                    "episodes per policy");
  bind_flag<std::vector<std::string>>(
      eval, ap_eval, "--policies", [](RunConfig& c) -> auto& { return c.eval.policies; },
      "[name=]default | appld-schedule | ptdrl:<ckpt> | fixed:<index>")
      ->delimiter(',');
  bind_flag<std::size_t>(eval, ap_eval, "--workers", [](RunConfig& c) -> auto& { return c.eval.workers; },
                    "parallel episodes");
  bind_flag<double>(eval, ap_eval, "--w", [](RunConfig& c) -> auto& { return c.reward.w; }, "reward penalty weight");
  bind_flag<double>(eval, ap_eval, "--d", [](RunConfig& c) -> auto& { return c.reward.d; }, "reward safety distance");
  bind_flag<std::string>(eval, ap_eval, "--params", [](RunConfig& c) -> auto& { return c.parameter_sets; },
                    "parameter sets of ptdrl: and fixed: policies");
  bind_flag<std::string>(eval, ap_eval, "--vae", [](RunConfig& c) -> auto& { return c.paths.vae; }, "VAE checkpoint");
  bind_flag<std::string>(eval, ap_eval, "--rnn", [](RunConfig& c) -> auto& { return c.paths.rnn; }, "MDN-RNN checkpoint");

  CLI::App* report = cmd("report", "rebuild report tables and value surfaces from evaluation logs");
  auto& ap_report = appliers["report"];
  std::vector<std::string> report_logs;
  report->add_option("--logs", report_logs, "episode log files, one policy each (default: the last eval)");
  bind_flag<double>(report, ap_report, "--gamma", [](RunConfig& c) -> auto& { return c.surface.gamma; },
               "value-surface discount");

  CLI::App* replay = cmd("replay", "render an episode log to PNG frames");
  auto& ap_replay = appliers["replay"];
  bind_flag<std::string>(replay, ap_replay, "--log", [](RunConfig& c) -> auto& { return c.replay.log; }, "episode log");
  bind_flag<std::size_t>(replay, ap_replay, "--episode", [](RunConfig& c) -> auto& { return c.replay.episode; },
                    "episode index within the log");
  bind_flag<std::size_t>(replay, ap_replay, "--every", [](RunConfig& c) -> auto& { return c.replay.every; },
                    "ticks per frame");
  bind_flag<int>(replay, ap_replay, "--scale", [](RunConfig& c) -> auto& { return c.replay.scale; },
            "pixels per map cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    CLI::App* failing = &app;
    for (auto* s : app.get_subcommands()) failing = s;
    err << failing->help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  RunConfig cfg;
  try {
    cfg = default_config();
    cfg.seed = env_seed();
    if (const auto& file = config_files[name]; !file.empty())
      cfg = merge_config(cfg, json_util::load(file), fs::path(file).parent_path());
    for (auto& apply : appliers[name]) apply(cfg);
    validate_config(cfg);
    fs::create_directories(cfg.output);
    const auto echo = config_to_json(cfg).dump(2) + "\n";
    write_text(cfg.output / "config.json", echo);
    write_text(cfg.output / ("config." + name + ".json"), echo);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    if (name == "collect") run_collect(cfg, out);
    else if (name == "train-vae") run_train_vae(cfg, out);
    else if (name == "train-rnn") run_train_rnn(cfg, out);
    else if (name == "train-dqn") run_train_dqn(cfg, out);
    else if (name == "eval") run_eval(cfg, out);
    else if (name == "report") run_report(cfg, report_logs, out);
    else if (name == "replay") run_replay(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace ptdrl::cli
