// greedyvote: experiment runner for greedy weighted sampling, voting power and split gains.
//
// Exit codes: 0 ok, 1 runtime error, 2 invalid config or parameters, 3 resource limit.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "greedyvote/density.hpp"
#include "greedyvote/exact.hpp"
#include "greedyvote/fairness.hpp"
#include "greedyvote/fpc.hpp"
#include "greedyvote/sampler.hpp"
#include "greedyvote/weights.hpp"

namespace gv = greedyvote;
using gvcli::Config;
using gvcli::ConfigError;
using gvcli::json;
using gvcli::ordered_json;

namespace {

const std::vector<std::string> kSubcommands{"exact", "sample", "power", "gain", "sweep", "kde", "qq", "fpc", "tau"};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  template <class T>
  static std::string cell(const T& x) {
    if constexpr (std::is_floating_point_v<T>)
      return fmt(static_cast<double>(x));
    else if constexpr (std::is_integral_v<T>)
      return std::to_string(x);
    else
      return std::string(x);
  }

  std::ostringstream out_;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing '" + path + "'");
}

/// Writes the main output (or prints it) plus the resolved-config sidecar.
void emit(const Config& cfg, const std::string& text) {
  if (!cfg.has("output_path")) {
    std::cout << text;
    return;
  }
  const std::string path = cfg.text("output_path");
  write_file(path, text);
  write_file(path + ".config.json", cfg.document().dump(2) + "\n");
}

gv::WeightFunction weight_function(const Config& cfg, const std::string& key) {
  try {
    return gv::WeightFunction::parse(cfg.text(key));
  } catch (const gv::InvalidParameter& e) {
    throw ConfigError(key, e.what());
  }
}

gv::WeightDistribution build_weights(const Config& cfg) {
  const std::string gen = cfg.text("generator");
  if (gen == "zipf") {
    if (cfg.uint("n") == 0) throw ConfigError("n", "must be >= 1");
    if (cfg.real("s") < 0.0) throw ConfigError("s", "must be >= 0");
    return gv::zipf_weights({cfg.real("s"), static_cast<std::size_t>(cfg.uint("n"))});
  }
  if (gen == "uniform") {
    if (cfg.uint("n") == 0) throw ConfigError("n", "must be >= 1");
    return gv::WeightDistribution::from_raw(std::vector<double>(cfg.uint("n"), 1.0));
  }
  if (gen == "list") return gv::WeightDistribution::from_raw(cfg.real_list("weights"));
  return gv::load_weights_csv(cfg.text("weights_file"));
}

std::size_t checked_k(const Config& cfg) {
  const auto k = cfg.uint("k");
  if (k == 0) throw ConfigError("k", "must be >= 1");
  return static_cast<std::size_t>(k);
}

std::uint64_t checked_runs(const Config& cfg) {
  const auto n = cfg.uint("n_runs");
  if (n == 0) throw ConfigError("n_runs", "must be >= 1");
  return n;
}

/// 0-based node from the 1-based `node` key; defaults to the heaviest node and records it.
std::size_t resolve_node(Config& cfg, const gv::WeightDistribution& w) {
  if (!cfg.has("node")) {
    const std::size_t heaviest = w.heaviest();
    cfg.set("node", heaviest + 1);
    return heaviest;
  }
  const auto node = cfg.uint("node");
  if (node < 1 || node > w.size()) throw ConfigError("node", "must lie in [1, " + std::to_string(w.size()) + "]");
  return static_cast<std::size_t>(node - 1);
}

std::vector<double> resolve_fractions(const Config& cfg) {
  if (cfg.has("r")) {
    if (cfg.uint("r") == 0) throw ConfigError("r", "must be >= 1");
    return gv::SplitSpec::equal(0, cfg.uint("r")).fractions;
  }
  auto fr = cfg.real_list("fractions");
  try {
    gv::SplitSpec{0, fr}.validate();
  } catch (const gv::InvalidParameter& e) {
    throw ConfigError("fractions", e.what());
  }
  return fr;
}

std::string gains_csv(const std::vector<std::pair<double, gv::GainEstimate>>& rows) {
  Csv csv("axis_value,mean,std_error,ci_low,ci_high,n_runs");
  for (const auto& [x, e] : rows) csv.row(x, e.mean, e.std_error, e.ci_low, e.ci_high, e.n_runs);
  return csv.str();
}

void run_exact(Config& cfg, std::size_t) {
  const auto w = build_weights(cfg);
  const auto p = gv::sampling_distribution(w, weight_function(cfg, "f"));
  const std::size_t k = checked_k(cfg);
  const std::size_t v_max = cfg.uint("v_max");
  const std::string table = cfg.text("table");
  if (table == "v") {
    const auto d = gv::exact_v_distribution(p, k, v_max);
    Csv csv("v,prob");
    for (std::size_t v = k; v <= v_max; ++v) csv.row(v, d.probs[v]);
    emit(cfg, csv.str());
    std::cerr << "residual P(v > v_max) = " << fmt(d.residual) << '\n';
  } else if (table == "joint") {
    const std::size_t node = resolve_node(cfg, w);
    const auto d = gv::exact_joint_distribution(p, k, node, v_max);
    Csv csv("ell,v,prob");
    for (std::size_t v = k; v <= v_max; ++v)
      for (std::size_t ell = 0; ell <= v; ++ell) csv.row(ell, v, d.probs[v][ell]);
    emit(cfg, csv.str());
    std::cerr << "residual P(v > v_max) = " << fmt(d.residual) << '\n';
  } else if (table == "u") {
    const auto d = gv::exact_u_distribution(p, k);
    Csv csv("u,prob");
    for (std::size_t u = 1; u <= k; ++u) csv.row(u, d.prob(u));
    emit(cfg, csv.str());
  } else {
    throw ConfigError("table", "expected v, joint or u, got '" + table + "'");
  }
}

void run_sample(Config& cfg, std::size_t) {
  const auto w = build_weights(cfg);
  const auto p = gv::sampling_distribution(w, weight_function(cfg, "f"));
  const std::size_t k = checked_k(cfg);
  const auto runs = checked_runs(cfg);
  if (runs > 1000000) throw gv::ResourceLimit("sample: n_runs = " + std::to_string(runs) + " exceeds 1000000 rows of raw samples");
  const gv::GreedySampler sampler(p);
  sampler.check_k(k);
  gv::RngStream rng(cfg.uint("seed"), 0);
  gv::GreedySample s;
  Csv csv("run,v,node,count");
  for (std::uint64_t run = 0; run < runs; ++run) {
    sampler.sample_into(s, k, rng);
    for (const auto& e : s.entries()) csv.row(run + 1, s.total_draws(), e.node + 1, e.count);
  }
  emit(cfg, csv.str());
}

void run_power(Config& cfg, std::size_t threads) {
  const auto w = build_weights(cfg);
  const auto p = gv::sampling_distribution(w, weight_function(cfg, "f"));
  const std::size_t k = checked_k(cfg);
  const std::size_t node = resolve_node(cfg, w);
  const std::string method = cfg.text("method");
  if (method == "mc") {
    gv::MonteCarloOptions opts;
    opts.threads = threads;
    const auto e = gv::estimate_voting_power(p, k, node, checked_runs(cfg), cfg.uint("seed"), opts);
    Csv csv("node,mean,std_error,ci_low,ci_high,n_runs");
    csv.row(node + 1, e.mean, e.std_error, e.ci_low, e.ci_high, e.n_runs);
    emit(cfg, csv.str());
  } else if (method == "exact") {
    const double eps = cfg.real("epsilon");
    if (!(eps > 0.0)) throw ConfigError("epsilon", "must be > 0");
    const auto r = gv::voting_power_truncated(p, k, node, eps);
    Csv csv("node,value,error_bound,v_max");
    csv.row(node + 1, r.value, r.error_bound, r.v_max);
    emit(cfg, csv.str());
  } else if (method == "k2") {
    if (k != 2) throw ConfigError("k", "method k2 needs k = 2");
    Csv csv("node,value");
    csv.row(node + 1, gv::voting_power_k2(p, node));
    emit(cfg, csv.str());
  } else {
    throw ConfigError("method", "expected mc, exact or k2, got '" + method + "'");
  }
}

gv::GainEstimate simulate_gain(Config& cfg, std::size_t threads, bool retain) {
  const auto w = build_weights(cfg);
  const auto f = weight_function(cfg, "f");
  const std::size_t k = checked_k(cfg);
  const gv::SplitSpec split{resolve_node(cfg, w), resolve_fractions(cfg)};
  gv::MonteCarloOptions opts;
  opts.threads = threads;
  opts.retain_samples = retain;
  return gv::estimate_split_gain(w, f, k, split, checked_runs(cfg), cfg.uint("seed"), cfg.boolean("coupled"), opts);
}

void run_gain(Config& cfg, std::size_t threads) {
  const auto e = simulate_gain(cfg, threads, false);
  const double n = static_cast<double>(build_weights(cfg).size());
  emit(cfg, gains_csv({{n, e}}));
}

void run_sweep(Config& cfg, std::size_t threads) {
  if (!cfg.has("axis_values")) throw ConfigError("axis_values", "required for sweep");
  gv::SweepAxis axis;
  try {
    axis = gv::parse_sweep_axis(cfg.text("axis"));
  } catch (const gv::InvalidParameter& e) {
    throw ConfigError("axis", e.what());
  }
  cfg.set("axis", gv::to_string(axis));
  gv::GainExperiment base;
  base.s = cfg.real("s");
  base.n = cfg.uint("n");
  base.k = checked_k(cfg);
  base.f = weight_function(cfg, "f");
  if (cfg.has("node")) {
    if (cfg.uint("node") == 0) throw ConfigError("node", "must be >= 1");
    base.node = cfg.uint("node") - 1;
  } else {
    cfg.set("node", 1);  // Zipf weights are non-increasing, so rank 1 is the heaviest
  }
  if (axis != gv::SweepAxis::split_r) base.fractions = resolve_fractions(cfg);
  base.coupled = cfg.boolean("coupled");
  gv::MonteCarloOptions opts;
  opts.threads = threads;
  gv::SweepResult result;
  try {
    result = gv::sweep_gain(base, axis, cfg.real_list("axis_values"), checked_runs(cfg), cfg.uint("seed"), opts);
  } catch (const gv::InvalidParameter& e) {
    const std::string what = e.what();
    if (what.find("axis") != std::string::npos) throw ConfigError("axis_values", what);
    throw;
  }
  std::vector<std::pair<double, gv::GainEstimate>> rows;
  for (const auto& pt : result.points) rows.emplace_back(pt.axis_value, pt.estimate);
  emit(cfg, gains_csv(rows));
}

std::vector<double> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("samples_file", "cannot open '" + path + "'");
  std::string line;
  std::vector<double> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string cell = line.substr(0, line.find(','));
    if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) {
      if (line_no == 1) continue;  // header
      throw ConfigError("samples_file", "line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> gain_samples(Config& cfg, std::size_t threads) {
  if (cfg.has("samples_file")) return read_samples(cfg.text("samples_file"));
  auto e = simulate_gain(cfg, threads, true);
  return std::move(*e.retained_samples);
}

void run_kde(Config& cfg, std::size_t threads) {
  const auto samples = gain_samples(cfg, threads);
  std::optional<double> bw;
  if (cfg.has("bandwidth")) bw = cfg.real("bandwidth");
  if (bw && !(*bw > 0.0)) throw ConfigError("bandwidth", "must be > 0");
  const double h = bw ? *bw : gv::silverman_bandwidth(samples);
  if (cfg.uint("grid_points") < 2) throw ConfigError("grid_points", "must be >= 2");
  const auto grid = gv::default_grid(samples, h, cfg.uint("grid_points"));
  Csv csv("x,density");
  for (const auto& pt : gv::kde_density(samples, h, grid)) csv.row(pt.x, pt.density);
  emit(cfg, csv.str());
}

void run_qq(Config& cfg, std::size_t threads) {
  const auto samples = gain_samples(cfg, threads);
  Csv csv("theoretical,sample");
  for (const auto& pt : gv::qq_points(samples)) csv.row(pt.theoretical, pt.sample);
  emit(cfg, csv.str());
}

/// round(fraction * N) ones placed on a seeded uniformly random subset of nodes.
std::vector<std::uint8_t> initial_opinions(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  gv::RngStream rng(seed, std::uint64_t{1} << 62);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  const auto ones = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t i = 0; i < ones; ++i) out[order[i]] = 1;
  return out;
}

void run_fpc(Config& cfg, std::size_t threads) {
  const auto w = build_weights(cfg);
  gv::FpcConfig fc;
  fc.k = checked_k(cfg);
  fc.theta = cfg.real("theta");
  fc.beta = cfg.real("beta");
  fc.max_rounds = cfg.uint("max_rounds");
  fc.finality_l = cfg.uint("finality_l");
  fc.scheme_f = weight_function(cfg, "f");
  fc.scheme_g = weight_function(cfg, "g");
  fc.threads = threads;
  const double ones = cfg.real("initial_ones");
  if (!(ones >= 0.0 && ones <= 1.0)) throw ConfigError("initial_ones", "must lie in [0, 1]");
  const auto seed = cfg.uint("seed");
  const auto trace = gv::run_fpc(fc, w, initial_opinions(w.size(), ones, seed), seed);

  Csv csv("round,u_t,ones_fraction");
  for (std::size_t t = 0; t < trace.opinions_by_round.size(); ++t)
    csv.row(t, t >= 2 ? fmt(trace.thresholds[t - 2]) : std::string(), trace.ones_fraction(t));
  ordered_json summary;
  summary["consensus_round"] = trace.consensus_round ? json(*trace.consensus_round) : json(nullptr);
  summary["final_agreement"] = trace.final_agreement;
  summary["rounds"] = trace.opinions_by_round.size() - 1;
  summary["final_ones_fraction"] = trace.ones_fraction(trace.opinions_by_round.size() - 1);
  emit(cfg, csv.str());
  if (cfg.has("output_path")) {
    write_file(cfg.text("output_path") + ".summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump() << '\n';
  } else {
    std::cerr << summary.dump() << '\n';
  }
}

void run_tau(Config& cfg, std::size_t) {
  if (!cfg.has("p")) {
    if (cfg.has("r")) throw ConfigError("r", "needs p");
    const auto m = gv::tau_argmax();
    Csv csv("m_star,tau_star");
    csv.row(m.m_star, m.tau_star);
    emit(cfg, csv.str());
    return;
  }
  const double p = cfg.real("p");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("p", "must lie in (0, 1)");
  if (!cfg.has("r")) cfg.set("r", 2);
  const auto r = cfg.uint("r");
  if (r == 0) throw ConfigError("r", "must be >= 1");
  Csv csv("p,r,tau_r,tau");
  csv.row(p, r, gv::tau_r_value(p, r), gv::tau_limit(p));
  emit(cfg, csv.str());
}

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

std::size_t parse_threads(const std::string& text, const std::string& source) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(source, "expected a non-negative integer, got '" + text + "'");
  return static_cast<std::size_t>(std::stoull(text));
}

int run(int argc, char** argv) {
  CLI::App app{"Greedy weighted sampling, voting power and split-gain experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "greedyvote 1.0.0");

  struct SubState {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;
    std::string threads;
  };
  std::map<std::string, SubState> subs;
  const std::map<std::string, std::string> descriptions{
      {"exact", "exact laws of v_k, (A_k(i), v_k) or u_k as CSV"},
      {"sample", "raw greedy samples as CSV"},
      {"power", "voting power of one node (Monte Carlo, exact or k = 2 closed form)"},
      {"gain", "split gain of one node"},
      {"sweep", "split gain along one experiment axis"},
      {"kde", "kernel density of per-run split gains"},
      {"qq", "normal QQ points of per-run split gains"},
      {"fpc", "simulate FPC consensus"},
      {"tau", "k = 2 split-gain limit: maximizer, or tau_r(p) and tau(p)"},
  };
  for (const auto& name : kSubcommands) {
    auto& st = subs[name];
    st.app = app.add_subcommand(name, descriptions.at(name));
    const auto defaults = gvcli::subcommand_defaults(name);
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
      const auto& spec = gvcli::key_spec(it.key());
      st.opts[it.key()] = st.app->add_option("--" + dashed(it.key()), st.raw[it.key()], spec.help);
    }
    st.app->add_option("--config", st.config_path, "JSON config file; flags override its values");
    st.app->add_option("--threads", st.threads, "worker threads (0 = all cores; env GREEDYVOTE_THREADS)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string name;
  for (const auto& [n, st] : subs)
    if (st.app->parsed()) name = n;
  auto& st = subs.at(name);

  std::optional<json> file;
  if (!st.config_path.empty()) {
    std::ifstream in(st.config_path);
    if (!in) throw ConfigError("config", "cannot open '" + st.config_path + "'");
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
  }
  std::map<std::string, json> flags;
  for (const auto& [key, opt] : st.opts)
    if (opt->count() > 0) flags[key] = gvcli::parse_flag(gvcli::key_spec(key), st.raw.at(key));
  Config cfg = gvcli::resolve_config(name, file, flags);

  // --threads, then the config file, then GREEDYVOTE_THREADS, then all cores.
  std::size_t threads = 0;
  if (!st.threads.empty()) {
    threads = parse_threads(st.threads, "threads");
  } else if (file && file->contains("threads")) {
    const auto& t = file->at("threads");
    if (!t.is_number_unsigned()) throw ConfigError("threads", "expected a non-negative integer");
    threads = t.get<std::size_t>();
  } else if (const char* env = std::getenv("GREEDYVOTE_THREADS"); env && *env) {
    threads = parse_threads(env, "GREEDYVOTE_THREADS");
  }

  static const std::map<std::string, void (*)(Config&, std::size_t)> handlers{
      {"exact", run_exact}, {"sample", run_sample}, {"power", run_power}, {"gain", run_gain}, {"sweep", run_sweep},
      {"kde", run_kde},     {"qq", run_qq},         {"fpc", run_fpc},     {"tau", run_tau},
  };
  handlers.at(name)(cfg, threads);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gv::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gv::UnsupportedConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gv::ResourceLimit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
