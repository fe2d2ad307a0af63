// Prints one PASS/FAIL line per acceptance criterion. Criteria 6-10 read the
// artifacts of tests/acceptance/pipeline.sh from the run directory.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "ptdrl/harness/episode.hpp"
#include "ptdrl/harness/evaluate.hpp"
#include "ptdrl/json_util.hpp"
#include "ptdrl/tuner/dqn.hpp"
#include "ptdrl/tuner/reward.hpp"
#include "ptdrl/wm/train.hpp"

using namespace ptdrl;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kRewardTol = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr double kDwaTol = 1e-9;
constexpr double kMdnTol = 1e-9;
constexpr double kVaeMse = 0.02;
constexpr double kRnnMargin = 0.05;
constexpr std::size_t kMinCostmaps = 100000;
constexpr std::size_t kEvalEpisodes = 50;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ----

void criterion_reward() {
  const tuner::RewardConfig base{1.0, 0.75, 1.59};
  double err = 0.0;
  err = std::max(err, std::abs(tuner::compute_reward(0.0, base, 0.3) - (-1.59)));
  err = std::max(err, std::abs(tuner::compute_reward(0.0, base, 4.0) - (-1.59)));
  err = std::max(err, std::abs(tuner::compute_reward(1.0, base, 2.0) - (-0.59)));
  err = std::max(err, std::abs(tuner::compute_reward(1.0, {2.0, 0.75, 1.59}, 0.5) - (-3.59)));
  Rng rng(20240601);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000000; ++i) {
    const double maxv = uniform(rng, 0.05, 3.0);
    const tuner::RewardConfig cfg{uniform(rng, 0.0, 5.0), uniform(rng, 0.0, 3.0), maxv};
    // Speeds up to the configured maximum, plus exact boundary cases.
    const double v = i % 10 == 0 ? maxv : uniform(rng, 0.0, maxv);
    const double md = i % 7 == 0 ? cfg.d : uniform(rng, 0.0, 6.0);
    worst = std::max(worst, tuner::compute_reward(v, cfg, md));
  }
  report(1, err <= kRewardTol && worst <= 0.0, "reward formula",
         fmt("max example error %.1e (tol %.0e), max fuzzed reward %.3g over 1e6 draws", err, kRewardTol, worst));
}

// ---- 2 ----

// Central differences over every parameter element against the accumulated analytic gradient.
double fd_max_rel_error(const std::vector<nn::Param*>& params, const std::function<double(bool)>& loss) {
  for (auto* p : params) p->zero_grad();
  loss(true);
  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.emplace_back(p->grad.data().begin(), p->grad.data().end());
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < analytic[k].size(); ++i) {
      const double orig = params[k]->value.data()[i];
      params[k]->mutate().data()[i] = orig + h;
      const double fp = loss(false);
      params[k]->mutate().data()[i] = orig - h;
      const double fm = loss(false);
      params[k]->mutate().data()[i] = orig;
      const double num = (fp - fm) / (2 * h);
      const double a = analytic[k][i];
      worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
    }
  }
  return worst;
}

nn::Tensor random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  nn::Tensor t(shape);
  for (auto& v : t.data()) v = scale * gaussian(rng);
  return t;
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(77);

  wm::VaeConfig vc;
  vc.input_side = 3;
  vc.hidden = {6, 5};
  vc.latent = 3;
  wm::Vae vae(vc);
  vae.init(rng);
  nn::Tensor x({4, 9});
  for (auto& v : x.data()) v = uniform(rng, 0.02, 0.98);
  const auto eps = random_tensor({4, 3}, rng);
  const double e_vae = fd_max_rel_error(vae.params(), [&](bool bw) { return vae.loss(x, eps, bw).total; });

  // MDN NLL with respect to the raw head output.
  const std::size_t K = 3, D = 2, B = 3;
  auto head = random_tensor({B, K + 2 * K * D}, rng, 0.5);
  const auto target = random_tensor({B, D}, rng);
  const std::vector<double> weight{1.0, 0.5, 2.0};
  auto nll_sum = [&](const nn::Tensor& raw) {
    const auto nll = wm::mdn_nll(wm::Mixture::from_head(raw, K, D), target);
    double s = 0.0;
    for (std::size_t b = 0; b < B; ++b) s += weight[b] * nll[b];
    return s;
  };
  const auto g = wm::mdn_nll_head_grad(wm::Mixture::from_head(head, K, D), target, weight);
  double e_mdn = 0.0;
  for (std::size_t i = 0; i < head.data().size(); ++i) {
    const double orig = head.data()[i];
    head.data()[i] = orig + 1e-5;
    const double fp = nll_sum(head);
    head.data()[i] = orig - 1e-5;
    const double fm = nll_sum(head);
    head.data()[i] = orig;
    const double num = (fp - fm) / 2e-5, a = g.data()[i];
    e_mdn = std::max(e_mdn, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
  }
  // And through a small MDN-RNN.
  wm::MdnRnn rnn({2, 2, 4, 2});
  rnn.init(rng);
  wm::SequenceChunk chunk;
  for (int t = 0; t < 3; ++t) {
    chunk.inputs.push_back(random_tensor({2, 4}, rng));
    chunk.targets.push_back(random_tensor({2, 2}, rng));
    chunk.reset.push_back({0, static_cast<std::uint8_t>(t == 1)});
    chunk.weight.push_back({1.0, 1.0});
  }
  const double e_rnn = fd_max_rel_error(rnn.params(), [&](bool bw) {
    auto s = rnn.initial_state(2);
    return rnn.chunk_loss(chunk, s, bw);
  });

  // DDQN Huber TD loss, targets placed on both sides of the Huber kink.
  tuner::QNetwork net(3, 5, 6);
  net.init(rng);
  const auto states = random_tensor({6, 5}, rng);
  const std::vector<std::size_t> actions{0, 1, 2, 2, 1, 0};
  const auto q = net.forward(states);
  const double offsets[] = {0.4, -3.0, 0.2, 2.5, -0.6, 1.7};
  std::vector<double> targets;
  for (std::size_t i = 0; i < 6; ++i) targets.push_back(q.at(i, actions[i]) + offsets[i]);
  const std::vector<double> w{1.0, 0.3, 0.7, 1.0, 0.5, 0.9};
  const double e_td =
      fd_max_rel_error(net.params(), [&](bool bw) { return tuner::td_loss(net, states, actions, targets, w, bw); });

  const double worst = std::max({e_vae, e_mdn, e_rnn, e_td});
  const double secs = seconds_since(t0);
  report(2, worst < kGradTol && secs < 60.0, "gradient suite",
         fmt("max rel error vae %.1e, mdn head %.1e, mdn-rnn %.1e, huber td %.1e (tol %.0e), %.1f s", e_vae, e_mdn,
             e_rnn, e_td, kGradTol, secs));
}

// ---- 3 ----

struct Choice {
  double v = 0.0, w = 0.0;
  bool recovery = true;
};

// Exhaustive search over the sampled window, written from the planner's contract.
Choice exhaustive_dwa(const sim::Costmap& cm, const sim::RobotState& s, std::span<const Vec2> path,
                      const planner::ParameterSet& p) {
  const double dt = 0.1, acc_v = 1.5, acc_w = 3.0, horizon_steps = 15, lookahead = 2.0, footprint = 0.35;
  auto window = [&](double cur, double acc, double lo, double hi) {
    double a = std::max(lo, cur - acc * dt), b = std::min(hi, cur + acc * dt);
    if (a > b) a = b = cur > hi ? hi : lo;
    return std::pair{a, b};
  };
  const auto [v0, v1] = window(s.velocity.linear, acc_v, 0.0, p.max_vel_x);
  const auto [w0, w1] = window(s.velocity.angular, acc_w, -p.max_vel_theta, p.max_vel_theta);
  Vec2 goal = path.back();
  for (const auto& wp : path) {
    if (std::hypot(wp.x - s.pose.x, wp.y - s.pose.y) >= lookahead) {
      goal = wp;
      break;
    }
  }
  const double floor = std::min(footprint, cm.clearance_at(s.pose.position()));
  Choice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.vx_samples; ++i) {
    const double v = p.vx_samples == 1 ? v1 : v0 + (v1 - v0) * i / (p.vx_samples - 1);
    for (int k = 0; k < p.vtheta_samples; ++k) {
      const double w = p.vtheta_samples == 1 ? std::clamp(0.0, w0, w1) : w0 + (w1 - w0) * k / (p.vtheta_samples - 1);
      double x = s.pose.x, y = s.pose.y, th = s.pose.heading, max_cost = 0.0;
      bool lethal = false;
      for (int t = 0; t < horizon_steps; ++t) {
        x += v * std::cos(th) * dt;
        y += v * std::sin(th) * dt;
        th = std::remainder(th + w * dt, 2 * std::numbers::pi);
        const double c = cm.cost_at({x, y});
        lethal = lethal || c == 254 || cm.clearance_at({x, y}) < floor;
        max_cost = std::max(max_cost, c);
      }
      if (lethal) continue;
      double pd = std::hypot(x - path[0].x, y - path[0].y);
      for (std::size_t j = 1; j < path.size(); ++j) {
        const double ax = path[j - 1].x, ay = path[j - 1].y, bx = path[j].x - ax, by = path[j].y - ay;
        const double l2 = bx * bx + by * by;
        const double u = l2 > 0 ? std::clamp(((x - ax) * bx + (y - ay) * by) / l2, 0.0, 1.0) : 0.0;
        pd = std::min(pd, std::hypot(x - ax - u * bx, y - ay - u * by));
      }
      const double score = -(p.path_distance_bias * pd + p.goal_distance_bias * std::hypot(x - goal.x, y - goal.y) +
                             p.occdist_scale * max_cost);
      if (score > best_score) {
        best_score = score;
        best = {v, w, false};
      }
    }
  }
  return best;
}

void criterion_dwa() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto world = harness::load_world(fs::path(PTDRL_DATA_DIR) / "scenarios" / "hospital.json");
  const auto sets = planner::load_parameter_sets(fs::path(PTDRL_DATA_DIR) / "params" / "ptdrl4.json");
  harness::SchedulePolicy policy(sets, {0, 1, 2, 3});
  harness::EpisodeConfig cfg;
  cfg.max_ticks = 1000;
  std::size_t ticks = 0, mismatches = 0, recoveries = 0;
  harness::EpisodeHooks hooks;
  hooks.on_plan = [&](const harness::PlanObservation& o) {
    const auto ref = exhaustive_dwa(o.costmap, o.state, o.path, o.params);
    ++ticks;
    recoveries += o.choice.recovery;
    const bool same = ref.recovery == o.choice.recovery &&
                      (ref.recovery || (std::abs(ref.v - o.choice.command.linear) <= kDwaTol &&
                                        std::abs(ref.w - o.choice.command.angular) <= kDwaTol));
    mismatches += !same;
  };
  std::size_t episodes = 0;
  for (std::size_t i = 0; ticks < 1000; ++i, ++episodes) {
    cfg.max_ticks = 1000 - ticks;
    harness::run_episode(world, {0, i % world.scenario.robot_routes.size(), mix_seed(5, i)}, policy, nullptr, cfg,
                         hooks);
  }
  const double secs = seconds_since(t0);
  report(3, mismatches == 0 && ticks == 1000 && secs < 60.0, "DWA oracle equivalence",
         fmt("%zu/%zu ticks differ from exhaustive argmax (%zu recoveries, %zu episode(s)), %.1f s", mismatches, ticks,
             recoveries, episodes, secs));
}

// ---- 4 ----

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void criterion_determinism(const fs::path& scratch) {
  std::vector<std::string> files;
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string out = (scratch / run).string();
    const char* argv[] = {"ptdrl", "eval", "--episodes", "3", "--seed", "2024", "--policies",
                          "default,appld-schedule", "--output", out.c_str()};
    std::ostringstream o, e;
    if (cli::dispatch(10, argv, o, e) != 0) {
      ok = false;
      std::cerr << e.str();
    }
  }
  std::size_t bytes = 0, compared = 0;
  for (const char* f : {"logs/eval_default.jsonl", "logs/eval_appld-schedule.jsonl"}) {
    const auto a = slurp(scratch / "a" / f), b = slurp(scratch / "b" / f);
    ok = ok && !a.empty() && a == b;
    bytes += a.size();
    ++compared;
  }
  report(4, ok, "determinism", fmt("eval --episodes 3 twice: %zu log files, %zu bytes, identical=%s", compared, bytes,
                                   ok ? "yes" : "no"));
}

// ---- 5 ----

void criterion_mdn_closed_form() {
  Rng rng(5);
  const std::size_t D = 64;
  nn::Tensor z({1, D});
  for (auto& v : z.data()) v = gaussian(rng);
  nn::Tensor raw({1, 1 + 2 * D});
  raw.data()[0] = 0.3;  // any logit: a single component has weight one
  for (std::size_t d = 0; d < D; ++d) raw.data()[1 + d] = z.data()[d];
  const double nll = wm::mdn_nll(wm::Mixture::from_head(raw, 1, D), z)[0];
  const double expect = 32.0 * std::log(2.0 * std::numbers::pi);
  report(5, std::abs(nll - expect) <= kMdnTol, "MDN closed form",
         fmt("NLL %.12f vs 32 log 2pi %.12f (|diff| %.1e, tol %.0e)", nll, expect, std::abs(nll - expect), kMdnTol));
}

// ---- 6, 7 ----

struct RunDirs {
  fs::path wm, eval;
};

void criteria_world_model(const RunDirs& run) {
  const auto cfg_path = run.wm / "config.json";
  const auto data_path = run.wm / "data" / "dataset.ptwm";
  if (!fs::exists(cfg_path) || !fs::exists(data_path) || !fs::exists(run.wm / "checkpoints" / "vae.ptnn")) {
    report(6, false, "VAE reconstruction", "pipeline artifacts missing under " + run.wm.string());
    report(7, false, "MDN-RNN vs persistence", "pipeline artifacts missing under " + run.wm.string());
    return;
  }
  const auto cfg = json_util::load(cfg_path);
  const auto data = wm::load_dataset(data_path);
  const auto vae = wm::load_vae(run.wm / "checkpoints" / "vae.ptnn");
  {
    const auto [train, held] = wm::split_episodes(data, cfg.at("vae").at("holdout").get<double>());
    const auto batch = [&] {
      std::vector<std::size_t> idx(held.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      return idx;
    }();
    // Per-pixel MSE of the posterior-mean reconstruction, accumulated here in chunks.
    double sse = 0.0;
    std::size_t pixels = 0;
    for (std::size_t lo = 0; lo < held.size(); lo += 256) {
      const std::size_t hi = std::min(held.size(), lo + 256);
      const auto xb = wm::costmap_batch(held, std::span(batch).subspan(lo, hi - lo));
      const auto recon = vae.decode(vae.latent(xb));
      for (std::size_t i = 0; i < xb.data().size(); ++i) {
        const double d = recon.data()[i] - xb.data()[i];
        sse += d * d;
      }
      pixels += xb.data().size();
    }
    const double mse = sse / static_cast<double>(pixels);
    report(6, mse < kVaeMse && train.size() >= kMinCostmaps, "VAE reconstruction",
           fmt("held-out per-pixel MSE %.4f (threshold %.2f) on %zu maps, trained on %zu maps", mse, kVaeMse,
               held.size(), train.size()));
  }
  if (!fs::exists(run.wm / "checkpoints" / "rnn.ptnn")) {
    report(7, false, "MDN-RNN vs persistence", "rnn checkpoint missing");
    return;
  }
  const auto rnn = wm::load_rnn(run.wm / "checkpoints" / "rnn.ptnn");
  const auto [train, held] = wm::split_episodes(data, cfg.at("rnn").at("holdout").get<double>());
  const auto ev = wm::evaluate_rnn(rnn, wm::encode_dataset(vae, held), held);
  const double bar = ev.persistence_nll - kRnnMargin * std::abs(ev.persistence_nll);
  report(7, ev.model_nll < bar, "MDN-RNN vs persistence",
         fmt("held-out NLL %.3f vs persistence %.3f (needs < %.3f, margin %.0f%%), %zu transitions", ev.model_nll,
             ev.persistence_nll, bar, 100 * kRnnMargin, ev.transitions));
}

// ---- 8, 9, 10 ----

struct Stats {
  double mean = 0.0, ci = 0.0;
  double lo() const { return mean - ci; }
  double hi() const { return mean + ci; }
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.ci = v.size() > 1 ? 1.96 * std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(v.size()) : 0.0;
  return s;
}

struct PolicyRun {
  std::vector<harness::EpisodeLog> logs;
  Stats total, time, velocity, mindist;
};

PolicyRun load_policy(const fs::path& file) {
  PolicyRun r;
  r.logs = harness::read_episode_logs(file);
  std::vector<double> total, time, vel, md;
  for (const auto& log : r.logs) {
    double t = 0.0, v = 0.0, m = 0.0;
    for (const auto& k : log.ticks) {
      t += k.reward;
      v += k.velrob;
      m += k.mindist;
    }
    const double n = std::max<double>(1.0, static_cast<double>(log.ticks.size()));
    total.push_back(t);
    time.push_back(static_cast<double>(log.ticks.size()) * log.dt);
    vel.push_back(v / n);
    md.push_back(m / n);
  }
  r.total = stats(total);
  r.time = stats(time);
  r.velocity = stats(vel);
  r.mindist = stats(md);
  return r;
}

bool same_specs(const PolicyRun& a, const PolicyRun& b) {
  if (a.logs.size() != b.logs.size()) return false;
  for (std::size_t i = 0; i < a.logs.size(); ++i)
    if (!(a.logs[i].spec == b.logs[i].spec)) return false;
  return true;
}

void criteria_policies(const RunDirs& run) {
  const char* names[] = {"default", "appld-schedule", "ptdrl-w1", "ptdrl-w2"};
  std::vector<PolicyRun> p;
  for (const char* n : names) {
    const auto file = run.eval / "logs" / (std::string("eval_") + n + ".jsonl");
    if (!fs::exists(file)) {
      const std::string why = "evaluation log missing: " + file.string();
      report(8, false, "PTDRL-4 (w=1) vs Default and APPLD", why);
      report(9, false, "w=2 more cautious than w=1", why);
      report(10, false, "value surfaces", why);
      return;
    }
    p.push_back(load_policy(file));
  }
  bool paired = true;
  for (std::size_t i = 1; i < p.size(); ++i) paired = paired && same_specs(p[0], p[i]);
  const bool enough = p[0].logs.size() >= kEvalEpisodes;
  const auto& def = p[0];
  const auto& appld = p[1];
  const auto& w1 = p[2];
  const auto& w2 = p[3];

  const bool beats_default = w1.total.lo() > def.total.hi();
  const bool beats_appld = w1.total.lo() > appld.total.hi();
  const bool faster = w1.time.hi() < def.time.lo();
  report(8, paired && enough && beats_default && beats_appld && faster, "PTDRL-4 (w=1) vs Default and APPLD",
         fmt("%zu paired episodes; total reward ptdrl %.1f±%.1f, default %.1f±%.1f, appld %.1f±%.1f; "
             "time ptdrl %.1f±%.1f s, default %.1f±%.1f s",
             w1.logs.size(), w1.total.mean, w1.total.ci, def.total.mean, def.total.ci, appld.total.mean,
             appld.total.ci, w1.time.mean, w1.time.ci, def.time.mean, def.time.ci));

  report(9, paired && enough && w2.mindist.mean > w1.mindist.mean && w2.velocity.mean < w1.velocity.mean,
         "w=2 more cautious than w=1",
         fmt("mean mindist w2 %.4f vs w1 %.4f m; mean velocity w2 %.4f vs w1 %.4f m/s", w2.mindist.mean,
             w1.mindist.mean, w2.velocity.mean, w1.velocity.mean));

  // Value surfaces: discounted return-to-go binned by (velocity, mindist) per context.
  const double gamma = 0.99;
  bool all_negative = true, ordered = true;
  std::string detail;
  std::size_t populated = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto surfaces = harness::value_surface(p[k].logs, {16, 1.6, 20, 5.0, gamma});
    for (const auto& s : surfaces) {
      for (std::size_t vi = 0; vi < s.vel_bins; ++vi) {
        for (std::size_t di = 0; di < s.dist_bins; ++di) {
          if (s.visits[s.index(vi, di)] == 0) continue;
          ++populated;
          all_negative = all_negative && s.value(vi, di) < 0.0;
        }
      }
    }
    // Independent visit-weighted mean of every tick's return-to-go per context.
    double sum[4] = {0, 0, 0, 0};
    std::size_t cnt[4] = {0, 0, 0, 0};
    for (const auto& log : p[k].logs) {
      double g = 0.0;
      for (std::size_t t = log.ticks.size(); t-- > 0;) {
        g = log.ticks[t].reward + gamma * g;
        const auto c = static_cast<std::size_t>(log.ticks[t].context);
        sum[c] += g;
        ++cnt[c];
      }
    }
    const double open = cnt[0] ? sum[0] / cnt[0] : std::nan("");
    const double obst = cnt[3] ? sum[3] / cnt[3] : std::nan("");
    const double lib_open = surfaces[0].mean(), lib_obst = surfaces[3].mean();
    const bool agree = std::abs(open - lib_open) < 1e-6 * std::max(1.0, std::abs(open)) &&
                       std::abs(obst - lib_obst) < 1e-6 * std::max(1.0, std::abs(obst));
    ordered = ordered && agree && obst < open;
    detail += fmt("%s obstacles %.1f < open %.1f; ", names[k], obst, open);
  }
  report(10, all_negative && ordered, "value surfaces",
         fmt("%zu populated bins, all negative=%s; ", populated, all_negative ? "yes" : "no") + detail);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path run_root = "acceptance_run";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--run") run_root = argv[i + 1];
  const auto scratch = fs::temp_directory_path() / ("ptdrl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  try {
    criterion_reward();
    criterion_gradients();
    criterion_dwa();
    criterion_determinism(scratch);
    criterion_mdn_closed_form();
    const RunDirs run{run_root / "wm", run_root / "eval"};
    criteria_world_model(run);
    criteria_policies(run);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(scratch);
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
