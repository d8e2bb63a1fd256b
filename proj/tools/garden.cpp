// garden: command-line front end.
//
//   garden generate --n 200 --alpha 30 --beta 5 --seed 1
//   garden train    --graph runs/x/graph --model gat --episodes 20000
//   garden evaluate --graph runs/x/graph --checkpoint runs/y/best.ckpt
//
// Every subcommand accepts --config <file.json>, --out <dir>, --seed and
// --jobs. Values resolve as flag > config file > default and are echoed into
// <out>/manifest.json.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "garden/error.hpp"
#include "garden/eval.hpp"
#include "garden/experiments.hpp"
#include "garden/graph.hpp"
#include "garden/policies.hpp"
#include "garden/snap.hpp"
#include "garden/synth.hpp"
#include "garden/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace garden;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceExit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// 64-bit FNV-1a over the file bytes; enough to tell inputs apart.
std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Option table for one subcommand. Each entry knows how to read itself from
// the config file and how to echo its resolved value.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with option values");
    add("out", out_, "run directory (default runs/<timestamp>-seed<seed>)");
    add("seed", seed_, "master seed");
    add("jobs", jobs_, "evaluation worker threads")->check(CLI::PositiveNumber);
  }

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app_->add_flag("--" + name, var, help);
    } else {
      opt = app_->add_option("--" + name, var, help);
    }
    std::string key = name;
    for (auto& c : key) c = c == '-' ? '_' : c;
    entries_.push_back({key, opt, [&var](const json& j) { var = j.get<T>(); },
                        [&var] { return json(var); }});
    return opt;
  }

  CLI::App* app() const { return app_; }

  // Fill options not given on the command line from the config file.
  void resolve() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw UsageError("cannot open config file " + config_path_);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + config_path_ + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
    config_digest_ = file_digest(config_path_);
    for (auto& [k, v] : cfg.items()) {
      auto it = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Entry& e) { return e.key == k; });
      if (it == entries_.end()) throw UsageError("unknown key '" + k + "' in " + config_path_);
      if (it->option->count() > 0) continue;
      try {
        it->set(v);
      } catch (const json::exception& e) {
        throw UsageError("config key '" + k + "': " + e.what());
      }
    }
  }

  json resolved() const {
    json j = json::object();
    for (const auto& e : entries_) {
      if (e.key != "out") j[e.key] = e.get();
    }
    return j;
  }

  std::uint64_t seed() const { return seed_; }
  std::size_t jobs() const { return jobs_; }
  const std::string& config_path() const { return config_path_; }
  const std::string& config_digest() const { return config_digest_; }

  fs::path run_dir() const {
    if (!out_.empty()) return out_;
    auto stamp = utc_now();
    std::erase(stamp, ':');
    std::erase(stamp, '-');
    return fs::path("runs") / (stamp + "-seed" + std::to_string(seed_));
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };

  CLI::App* app_;
  std::vector<Entry> entries_;
  std::string config_path_;
  std::string config_digest_;
  std::string out_;
  std::uint64_t seed_ = 1;
  std::size_t jobs_ = 1;
};

// One manifest per run.
class Manifest {
 public:
  Manifest(std::string command, const Settings& s, fs::path dir)
      : dir_(std::move(dir)), started_(utc_now()) {
    j_["command"] = std::move(command);
    j_["config"] = s.resolved();
    j_["seed"] = s.seed();
    j_["inputs"] = json::object();
    j_["artifacts"] = json::array();
    if (!s.config_path().empty()) j_["inputs"][s.config_path()] = s.config_digest();
  }

  void input(const fs::path& p) { j_["inputs"][p.string()] = file_digest(p); }
  fs::path artifact(const std::string& name) {
    j_["artifacts"].push_back(name);
    fs::create_directories(dir_);
    return dir_ / name;
  }
  json& operator[](const std::string& k) { return j_[k]; }
  const fs::path& dir() const { return dir_; }

  void write() {
    j_["started_at"] = started_;
    j_["finished_at"] = utc_now();
    fs::create_directories(dir_);
    std::ofstream os(dir_ / "manifest.json");
    os << j_.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::string started_;
  json j_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

struct GraphInput {
  std::string prefix;
  std::string digest;  // of the .edges and .attrs bytes
  AttributedGraph graph;
};

GraphInput read_graph(const std::string& prefix, Manifest& m) {
  if (prefix.empty()) throw UsageError("--graph is required");
  const fs::path edges = prefix + ".edges", attrs = prefix + ".attrs";
  auto g = load_graph(edges.string(), attrs.string());
  m.input(edges);
  m.input(attrs);
  if (!is_connected(g)) throw InputError(prefix + ": graph is not connected");
  return {prefix, file_digest(edges) + "," + file_digest(attrs), std::move(g)};
}

FeatureMode mode_from(const std::string& s) {
  auto m = parse_feature_mode(s);
  if (!m) throw UsageError("unknown model '" + s + "' (raw, with_degree, gat)");
  return *m;
}

void report(const Evaluation& ev) {
  for (const auto& r : ev.reports) {
    std::fprintf(stderr, "%-17s oracle %.3f +- %.3f  trunc %5.1f%%  win %5.1f%%\n",
                 r.policy.c_str(), r.oracle_ratio.mean, r.oracle_ratio.half_width, r.trunc_rate,
                 r.win_rate);
  }
}

// ---------------------------------------------------------------------------

struct TrainFlags {
  std::size_t episodes = 200'000;
  std::size_t eval_every = 100;
  std::size_t patience = 50;
  double gamma = 0.99;
  double entropy_coef = 1e-3;
  double lr = 1e-3;
  std::size_t max_steps = kDefaultMaxSteps;
  std::size_t val_pairs = 100;
  std::size_t test_pairs = 1000;

  void attach(Settings& s) {
    s.add("episodes", episodes, "training episodes");
    s.add("eval-every", eval_every, "episodes between validations");
    s.add("patience", patience, "validations without improvement before stopping");
    s.add("gamma", gamma, "discount factor");
    s.add("entropy-coef", entropy_coef, "entropy bonus weight lambda");
    s.add("lr", lr, "Adam learning rate");
    s.add("max-steps", max_steps, "truncation length T_max");
    s.add("val-pairs", val_pairs, "validation pairs");
    s.add("test-pairs", test_pairs, "test pairs");
  }

  train::TrainConfig config(std::uint64_t seed, std::size_t jobs, FeatureMode mode) const {
    train::TrainConfig c;
    c.episodes = episodes;
    c.eval_every = eval_every;
    c.patience = patience;
    c.gamma = gamma;
    c.entropy_coef = entropy_coef;
    c.learning_rate = lr;
    c.max_steps = max_steps;
    c.seed = seed;
    c.jobs = jobs;
    c.model.mode = mode;
    return c;
  }
};

void cmd_generate(Settings& s, std::size_t n, std::size_t dim, double alpha, double beta,
                  bool connected) {
  if (std::isnan(beta)) throw UsageError("--beta is required");
  synth::SynthConfig cfg{n, dim, alpha, beta, s.seed()};
  try {
    cfg.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  Manifest m("generate", s, s.run_dir());
  json provenance = {{"generator", "homophily"},
                     {"edge_probability", "min(1, beta * exp(-alpha * ||x_u - x_v||))"},
                     {"attributes", "uniform [0,1]^d"},
                     {"n", n}, {"dim", dim}, {"alpha", alpha}, {"beta", beta},
                     {"seed", s.seed()}};
  AttributedGraph g = synth::generate(cfg);
  if (connected) {
    auto draw = synth::generate_connected(cfg);
    provenance["largest_component"] = true;
    provenance["draw_seed"] = draw.seed;
    provenance["attempts"] = draw.attempts;
    provenance["reached_threshold"] = draw.reached_threshold;
    g = std::move(draw.graph);
  }
  provenance["nodes"] = g.node_count();
  provenance["edges"] = g.edge_count();
  save_graph(g, m.artifact("graph.edges").string(), m.artifact("graph.attrs").string());
  open_out(m.artifact("graph.json")) << provenance.dump(2) << '\n';
  m["graph"] = provenance;
  m.write();
  std::fprintf(stderr, "graph: n=%zu m=%zu -> %s\n", g.node_count(), g.edge_count(),
               m.dir().c_str());
}

void cmd_ingest(Settings& s, const std::string& data_dir) {
  if (data_dir.empty()) throw UsageError("--data-dir is required");
  Manifest m("ingest", s, s.run_dir());
  auto graphs = snap::select_experiment_graphs(data_dir);
  std::vector<snap::GraphStats> stats;
  json selected = json::array();
  for (const auto& ig : graphs) {
    const auto files = snap::EgoNetFiles::in(data_dir, ig.name);
    for (const auto& p : {files.edges_path, files.feat_path, files.egofeat_path,
                          files.featnames_path}) {
      m.input(p);
    }
    const std::string prefix = "ego" + ig.name;
    save_graph(ig.graph, m.artifact(prefix + ".edges").string(),
               m.artifact(prefix + ".attrs").string());
    {
      auto os = open_out(m.artifact(prefix + ".ids.csv"));
      snap::write_id_map(ig, os);
    }
    stats.push_back(snap::stats_of(ig));
    selected.push_back({{"ego_id", ig.ego_id}, {"raw_nodes", ig.raw_nodes},
                        {"lcc_nodes", ig.graph.node_count()}});
  }
  {
    auto os = open_out(m.artifact("stats.csv"));
    snap::write_stats_csv(stats, os);
  }
  m["selected"] = selected;
  m["assumptions"] = {"ego node retained and linked to every alter",
                      "ego-network ids chosen by the 100..600 LCC-size rule only",
                      "all-zero feature columns retained"};
  m.write();
  for (const auto& st : stats) {
    std::fprintf(stderr, "ego %s: n=%zu l_G=%.4f rho=%.4f d=%zu\n", st.name.c_str(), st.n,
                 st.mean_shortest_path, st.density, st.dim);
  }
}

void cmd_train(Settings& s, const std::string& graph, const std::string& model,
               const TrainFlags& tf) {
  const FeatureMode mode = mode_from(model);
  Manifest m("train", s, s.run_dir());
  auto in = read_graph(graph, m);
  const auto& g = in.graph;
  auto cfg = tf.config(s.seed(), s.jobs(), mode);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const auto prep = prepare_pairs(g, s.seed(), tf.val_pairs, tf.test_pairs);
  save_pair_set(prep.val, m.artifact("val_pairs.csv").string());
  save_pair_set(prep.test, m.artifact("test_pairs.csv").string());

  auto res = train::train(g, prep.split.train, prep.val, cfg, [](const train::CurveRow& r) {
    std::fprintf(stderr, "episode %7zu  return %.3f  val %.3f  trunc %5.1f%%  H %.3f\n",
                 r.episode, r.train_return, r.val_oracle_ratio, r.val_trunc_rate, r.entropy_mean);
  });
  {
    auto os = open_out(m.artifact("curve.csv"));
    write_curve_csv(os, res.curve);
  }
  const json extra = {{"training", cfg.to_json()}, {"graph_digest", in.digest},
                      {"best_episode", res.best_episode}, {"best_val_oracle_ratio", res.best_val}};
  res.best.save(m.artifact("best.ckpt").string(), extra);
  res.last.save(m.artifact("last.ckpt").string(), extra);
  m["training"] = cfg.to_json();
  m["result"] = {{"best_val_oracle_ratio", res.best_val}, {"best_episode", res.best_episode},
                 {"episodes_run", res.episodes_run}, {"stopped_early", res.stopped_early},
                 {"diverged", res.diverged}, {"divergence", res.divergence}};
  m.write();
  std::fprintf(stderr, "%s: best val oracle ratio %.4f at episode %zu\n", model_name(mode),
               res.best_val, res.best_episode);
  if (res.diverged) throw DivergenceExit(res.divergence);
}

void cmd_evaluate(Settings& s, const std::string& graph, const std::vector<std::string>& ckpts,
                  const std::vector<std::string>& walkers, double tau_distance,
                  double tau_connection, const std::string& pairs_path, const TrainFlags& tf) {
  Manifest m("evaluate", s, s.run_dir());
  auto in = read_graph(graph, m);
  const auto& g = in.graph;
  const auto prep = prepare_pairs(g, s.seed(), tf.val_pairs, tf.test_pairs);
  PairSet test = prep.test;
  if (!pairs_path.empty()) {
    test = load_pair_set(pairs_path);
    m.input(pairs_path);
  }
  EvalOptions opt;
  opt.max_steps = tf.max_steps;
  opt.seed = derive_seed(s.seed(), stream::kEval);
  opt.jobs = s.jobs();

  std::vector<std::unique_ptr<Policy>> owned;
  for (const auto& path : ckpts) {
    auto model = std::make_shared<const ActorCritic>(ActorCritic::load(path));
    m.input(path);
    if (model->attribute_dim() != g.attribute_dim()) {
      throw SchemaError(path + ": checkpoint attribute width differs from the graph");
    }
    owned.push_back(std::make_unique<LearnedPolicy>(model, g));
  }
  json taus = json::object();
  for (const auto& w : walkers) {
    auto kind = parse_walker(w);
    if (!kind) throw UsageError("unknown walker '" + w + "'");
    double tau = 1.0;
    if (*kind == WalkerKind::kDistance || *kind == WalkerKind::kConnection) {
      tau = *kind == WalkerKind::kDistance ? tau_distance : tau_connection;
      if (std::isnan(tau)) {
        tau = train::tune_temperature(g, *kind, train::default_tau_grid(), prep.val, opt).best_tau;
      }
      taus[walker_name(*kind)] = tau;
    }
    owned.push_back(std::make_unique<WalkerPolicy>(g, *kind, tau));
  }
  if (owned.empty()) throw UsageError("nothing to evaluate");
  std::vector<const Policy*> policies;
  for (auto& p : owned) policies.push_back(p.get());
  const auto ev = evaluate(g, policies, test, opt);
  {
    auto os = open_out(m.artifact("episodes.csv"));
    write_episodes_csv(os, ev);
  }
  {
    auto os = open_out(m.artifact("metrics.csv"));
    write_metrics_csv(os, ev);
  }
  m["temperatures"] = taus;
  m["ci"] = "1.96 * sd / sqrt(pairs), normal approximation over pairs";
  m["truncated_length"] = "episodes cut at max_steps enter the oracle ratio with length max_steps";
  m.write();
  report(ev);
}

void cmd_tune(Settings& s, const std::string& graph, const std::string& walker,
              const std::vector<double>& grid, const TrainFlags& tf) {
  auto kind = parse_walker(walker);
  if (!kind || (*kind != WalkerKind::kDistance && *kind != WalkerKind::kConnection)) {
    throw UsageError("--walker must be distance or connection");
  }
  if (grid.empty()) throw UsageError("--grid is empty");
  Manifest m("tune", s, s.run_dir());
  auto in = read_graph(graph, m);
  const auto prep = prepare_pairs(in.graph, s.seed(), tf.val_pairs, tf.test_pairs);
  EvalOptions opt;
  opt.max_steps = tf.max_steps;
  opt.seed = derive_seed(s.seed(), stream::kEval);
  opt.jobs = s.jobs();
  const auto res = train::tune_temperature(in.graph, *kind, grid, prep.val, opt);
  {
    auto os = open_out(m.artifact("tune.csv"));
    write_tune_csv(os, walker_name(*kind), res);
  }
  m["best_tau"] = res.best_tau;
  m.write();
  std::printf("%s best tau %g\n", walker_name(*kind), res.best_tau);
}

void cmd_sweep(Settings& s, const std::vector<double>& betas, std::size_t n, std::size_t dim,
               double alpha, std::size_t topologies, const std::vector<std::string>& models,
               const TrainFlags& tf) {
  if (betas.empty()) throw UsageError("--betas is empty");
  SweepConfig cfg;
  cfg.betas = betas;
  cfg.n = n;
  cfg.dim = dim;
  cfg.alpha = alpha;
  cfg.topologies = topologies;
  cfg.bench.models.clear();
  for (const auto& name : models) cfg.bench.models.push_back(mode_from(name));
  cfg.bench.train = tf.config(s.seed(), s.jobs(), FeatureMode::kGat);
  cfg.bench.val_pairs = tf.val_pairs;
  cfg.bench.test_pairs = tf.test_pairs;
  cfg.bench.jobs = s.jobs();
  cfg.bench.seed = s.seed();
  Manifest m("sweep", s, s.run_dir());
  const auto res = sensitivity_sweep(cfg);
  {
    auto os = open_out(m.artifact("sweep.csv"));
    write_sweep_csv(os, res);
  }
  m["skipped_topologies"] = res.skipped;
  m["ci"] = "1.96 * sd / sqrt(topologies) over per-topology test means";
  m.write();
}

void cmd_bench(Settings& s, const std::vector<std::string>& graphs, const std::string& data_dir,
               std::size_t targets, double tau, const TrainFlags& tf) {
  Manifest m("bench", s, s.run_dir());
  std::vector<std::pair<std::string, AttributedGraph>> inputs;
  for (const auto& prefix : graphs) {
    auto in = read_graph(prefix, m);
    inputs.emplace_back(fs::path(prefix).filename().string(), std::move(in.graph));
  }
  if (!data_dir.empty()) {
    for (auto& ig : snap::select_experiment_graphs(data_dir)) {
      inputs.emplace_back("ego" + ig.name, std::move(ig.graph));
    }
  }
  if (inputs.empty()) throw UsageError("give --graph or --data-dir");
  std::vector<ActionTiming> rows;
  for (const auto& [name, g] : inputs) {
    for (auto mode : {FeatureMode::kRaw, FeatureMode::kWithDegree, FeatureMode::kGat}) {
      ModelConfig mc;
      mc.mode = mode;
      mc.init_seed = derive_seed(s.seed(), 1);
      auto model = std::make_shared<const ActorCritic>(mc, g.attribute_dim());
      rows.push_back(measure_learned_action_time(g, model, targets, tf.max_steps, s.seed()));
      rows.back().graph = name;
    }
    for (auto kind : {WalkerKind::kGreedy, WalkerKind::kDistance, WalkerKind::kConnection,
                      WalkerKind::kRandom}) {
      WalkerPolicy p(g, kind, tau);
      rows.push_back(measure_action_time(g, p, targets, tf.max_steps, s.seed()));
      rows.back().graph = name;
    }
  }
  {
    auto os = open_out(m.artifact("timing.csv"));
    write_timing_csv(os, rows);
  }
  m["note"] = "learned models use initial weights; per-action cost does not depend on their values";
  m.write();
  for (const auto& r : rows) {
    std::fprintf(stderr, "%-10s %-17s %.5f ms/action\n", r.graph.c_str(), r.policy.c_str(),
                 r.action_ms);
  }
}

void cmd_heatmap(Settings& s, const std::string& graph, const std::string& ckpt, long target,
                 double tau) {
  if (ckpt.empty()) throw UsageError("--checkpoint is required");
  if (target < 0) throw UsageError("--target is required");
  Manifest m("heatmap", s, s.run_dir());
  auto in = read_graph(graph, m);
  const auto model = ActorCritic::load(ckpt);
  m.input(ckpt);
  const auto rows = export_value_heatmap(in.graph, model, static_cast<NodeId>(target), tau);
  {
    auto os = open_out(m.artifact("heatmap.csv"));
    write_heatmap_csv(os, rows);
  }
  m.write();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized graph path search with learned message-passing agents"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "draw a synthetic homophily graph");
  Settings gen_s(gen);
  std::size_t n = 200, dim = 2;
  double alpha = 30, beta = std::numeric_limits<double>::quiet_NaN();
  bool connected = false;
  gen_s.add("n", n, "nodes");
  gen_s.add("dim", dim, "attribute dimension");
  gen_s.add("alpha", alpha, "distance decay");
  gen_s.add("beta", beta, "density factor (required)");
  gen_s.add("connected", connected, "keep the largest component, redrawing until >= 90% of n");

  // ingest
  auto* ing = app.add_subcommand("ingest", "read SNAP Facebook ego networks");
  Settings ing_s(ing);
  std::string data_dir;
  ing_s.add("data-dir", data_dir, "directory holding <id>.edges, .feat, .egofeat, .featnames");

  // train
  auto* trn = app.add_subcommand("train", "train an actor-critic model");
  Settings trn_s(trn);
  std::string graph, model = "gat";
  TrainFlags trn_f;
  trn_s.add("graph", graph, "graph prefix (<prefix>.edges, <prefix>.attrs)");
  trn_s.add("model", model, "raw | with_degree | gat");
  trn_f.attach(trn_s);

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "compare policies on a serialized pair set");
  Settings evl_s(evl);
  std::string evl_graph, pairs_path;
  std::vector<std::string> ckpts;
  std::vector<std::string> walkers{"greedy", "distance", "connection", "random"};
  double tau_distance = std::numeric_limits<double>::quiet_NaN();
  double tau_connection = std::numeric_limits<double>::quiet_NaN();
  TrainFlags evl_f;
  evl_s.add("graph", evl_graph, "graph prefix");
  evl_s.add("checkpoint", ckpts, "trained model checkpoint (repeatable)");
  evl_s.add("walkers", walkers, "baseline walkers");
  evl_s.add("tau-distance", tau_distance, "DistanceWalker temperature (tuned when absent)");
  evl_s.add("tau-connection", tau_connection, "ConnectionWalker temperature (tuned when absent)");
  evl_s.add("pairs", pairs_path, "pair set file (default: test pairs derived from --seed)");
  evl_s.add("max-steps", evl_f.max_steps, "truncation length T_max");
  evl_s.add("val-pairs", evl_f.val_pairs, "validation pairs used for tuning");
  evl_s.add("test-pairs", evl_f.test_pairs, "test pairs");

  // tune
  auto* tun = app.add_subcommand("tune", "temperature search for a stochastic walker");
  Settings tun_s(tun);
  std::string tun_graph, tun_walker = "distance";
  std::vector<double> grid = train::default_tau_grid();
  TrainFlags tun_f;
  tun_s.add("graph", tun_graph, "graph prefix");
  tun_s.add("walker", tun_walker, "distance | connection");
  tun_s.add("grid", grid, "temperature grid");
  tun_s.add("max-steps", tun_f.max_steps, "truncation length T_max");
  tun_s.add("val-pairs", tun_f.val_pairs, "validation pairs");

  // sweep
  auto* swp = app.add_subcommand("sweep", "density sensitivity sweep over beta");
  Settings swp_s(swp);
  std::vector<double> betas{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0};
  std::size_t swp_n = 200, swp_dim = 2, topologies = 10;
  double swp_alpha = 30;
  std::vector<std::string> models{"gat"};
  TrainFlags swp_f;
  swp_s.add("betas", betas, "density factors");
  swp_s.add("n", swp_n, "nodes per topology");
  swp_s.add("dim", swp_dim, "attribute dimension");
  swp_s.add("alpha", swp_alpha, "distance decay");
  swp_s.add("topologies", topologies, "graphs per beta");
  swp_s.add("models", models, "learned models to train per topology");
  swp_f.attach(swp_s);

  // bench
  auto* bch = app.add_subcommand("bench", "mean wall time per action");
  Settings bch_s(bch);
  std::vector<std::string> bch_graphs;
  std::string bch_dir;
  std::size_t targets = 100;
  double bch_tau = 1.0;
  TrainFlags bch_f;
  bch_s.add("graph", bch_graphs, "graph prefix (repeatable)");
  bch_s.add("data-dir", bch_dir, "SNAP directory; benchmarks the selected ego networks");
  bch_s.add("targets", targets, "episodes (one per random target)");
  bch_s.add("tau", bch_tau, "walker temperature");
  bch_s.add("max-steps", bch_f.max_steps, "truncation length T_max");

  // heatmap
  auto* hmp = app.add_subcommand("heatmap", "export v(u, target) for every node");
  Settings hmp_s(hmp);
  std::string hmp_graph, hmp_ckpt;
  long target = -1;
  double hmp_tau = 1.0;
  hmp_s.add("graph", hmp_graph, "graph prefix");
  hmp_s.add("checkpoint", hmp_ckpt, "trained model checkpoint");
  hmp_s.add("target", target, "target node");
  hmp_s.add("tau", hmp_tau, "temperature for the baseline score column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (gen->parsed()) {
      gen_s.resolve();
      cmd_generate(gen_s, n, dim, alpha, beta, connected);
    } else if (ing->parsed()) {
      ing_s.resolve();
      cmd_ingest(ing_s, data_dir);
    } else if (trn->parsed()) {
      trn_s.resolve();
      cmd_train(trn_s, graph, model, trn_f);
    } else if (evl->parsed()) {
      evl_s.resolve();
      cmd_evaluate(evl_s, evl_graph, ckpts, walkers, tau_distance, tau_connection, pairs_path,
                   evl_f);
    } else if (tun->parsed()) {
      tun_s.resolve();
      cmd_tune(tun_s, tun_graph, tun_walker, grid, tun_f);
    } else if (swp->parsed()) {
      swp_s.resolve();
      cmd_sweep(swp_s, betas, swp_n, swp_dim, swp_alpha, topologies, models, swp_f);
    } else if (bch->parsed()) {
      bch_s.resolve();
      cmd_bench(bch_s, bch_graphs, bch_dir, targets, bch_tau, bch_f);
    } else if (hmp->parsed()) {
      hmp_s.resolve();
      cmd_heatmap(hmp_s, hmp_graph, hmp_ckpt, target, hmp_tau);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const DivergenceExit& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDivergence);
  } catch (const TrainingError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kDivergence);
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return static_cast<int>(ExitCode::kOk);
}
