// lmrt: command-line front end for the limited-memory recursive tree library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmrt/analysis.hpp"
#include "lmrt/errors.hpp"
#include "lmrt/exploration.hpp"
#include "lmrt/limits.hpp"
#include "lmrt/parallel.hpp"
#include "lmrt/rng.hpp"
#include "lmrt/stats.hpp"
#include "lmrt/sweep.hpp"
#include "lmrt/tree.hpp"

using namespace lmrt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAssert = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::optional<double> macroscopic, mesoscopic;
  std::string custom_j, sarrt;
  Label n = 1000;
  std::uint64_t seed = 1;
  std::uint64_t reps = 1;
  std::string out;
  std::string format = "csv";
  std::string config;
  unsigned threads = 0;
  std::string export_dot;
  // subcommand specific
  std::size_t k = 2;
  std::vector<Label> starts;
  std::size_t size_cap = 4;
  std::uint64_t ref_samples = 100000;
  std::string convention = "model";
  double t_max = 3.0;
  double slack = 0.02;
  std::vector<double> theta;
  double tol = 1e-9;
  bool assert_pass = false;

  // the same flag is registered once per subcommand
  std::multimap<std::string, CLI::Option*> given;
  bool was_given(const std::string& name) const {
    auto [lo, hi] = given.equal_range(name);
    for (auto it = lo; it != hi; ++it)
      if (it->second->count() > 0) return true;
    return false;
  }
  void note(const std::string& name, CLI::Option* opt) { given.emplace(name, opt); }
};

void add_regime(CLI::App* sub, Options& o) {
  auto* g = sub->add_option_group("regime", "attachment schedule (choose one)");
  o.note("macroscopic", g->add_option("--macroscopic", o.macroscopic, "j(n) = floor(theta n)"));
  o.note("mesoscopic", g->add_option("--mesoscopic", o.mesoscopic, "j(n) = n - floor(n^beta)"));
  o.note("custom-j", g->add_option("--custom-j", o.custom_j, "file with j(1), j(2), ... one per line"));
  o.note("sarrt", g->add_option("--sarrt", o.sarrt, "uniform[:theta]  (V ~ U[theta, 1])"));
  g->require_option(0, 1);
}

void add_common(CLI::App* sub, Options& o, bool regime = true) {
  if (regime) add_regime(sub, o);
  o.note("n", sub->add_option("--n", o.n, "number of vertices")->check(CLI::PositiveNumber));
  o.note("seed", sub->add_option("--seed", o.seed, "64-bit seed"));
  o.note("out", sub->add_option("--out", o.out, "output path (default stdout)"));
  o.note("format", sub->add_option("--format", o.format, "csv or json")
                          ->check(CLI::IsMember({"csv", "json"})));
  sub->add_option("--config", o.config, "JSON file with option defaults");
}

void add_reps(CLI::App* sub, Options& o) {
  o.note("reps", sub->add_option("--reps", o.reps, "replications")->check(CLI::PositiveNumber));
  o.note("threads", sub->add_option("--threads", o.threads, "worker threads"));
}

// Fills options not given on the command line from the --config file.
void apply_config(Options& o) {
  if (o.config.empty()) return;
  std::ifstream in(o.config);
  if (!in) throw UsageError("cannot open config " + o.config);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  const bool regime_given = o.was_given("macroscopic") || o.was_given("mesoscopic") ||
                            o.was_given("custom-j") || o.was_given("sarrt");
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key) && !o.was_given(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  try {
    if (!regime_given) {
      if (j.contains("macroscopic")) o.macroscopic = j["macroscopic"].get<double>();
      if (j.contains("mesoscopic")) o.mesoscopic = j["mesoscopic"].get<double>();
      if (j.contains("custom-j")) o.custom_j = j["custom-j"].get<std::string>();
      if (j.contains("sarrt")) o.sarrt = j["sarrt"].get<std::string>();
    }
    take("n", o.n);
    take("seed", o.seed);
    take("reps", o.reps);
    take("out", o.out);
    take("format", o.format);
    take("threads", o.threads);
    take("k", o.k);
    take("size-cap", o.size_cap);
    take("ref-samples", o.ref_samples);
    take("convention", o.convention);
    take("t-max", o.t_max);
    take("slack", o.slack);
    take("tol", o.tol);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

void check_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream os;
    os << what << " must lie in (0,1), got " << x;
    throw UsageError(os.str());
  }
}

struct Regime {
  MemorySchedule schedule;
  Json spec;
};

Regime parse_regime(const Options& o) {
  int count = o.macroscopic.has_value() + o.mesoscopic.has_value() + !o.custom_j.empty() +
              !o.sarrt.empty();
  if (count == 0) throw UsageError("choose a regime: --macroscopic, --mesoscopic, --custom-j or --sarrt");
  if (count > 1) throw UsageError("regime flags are mutually exclusive");
  if (o.macroscopic) {
    check_unit(*o.macroscopic, "theta");
    return {Macroscopic{*o.macroscopic}, {{"type", "macroscopic"}, {"theta", *o.macroscopic}}};
  }
  if (o.mesoscopic) {
    check_unit(*o.mesoscopic, "beta");
    return {Mesoscopic{*o.mesoscopic}, {{"type", "mesoscopic"}, {"beta", *o.mesoscopic}}};
  }
  if (!o.sarrt.empty()) {
    double theta = 0.0;
    if (o.sarrt.rfind("uniform", 0) != 0) throw UsageError("--sarrt expects uniform[:theta]");
    if (o.sarrt.size() > 7) {
      if (o.sarrt[7] != ':') throw UsageError("--sarrt expects uniform[:theta]");
      try {
        theta = std::stod(o.sarrt.substr(8));
      } catch (const std::exception&) {
        throw UsageError("--sarrt: bad theta '" + o.sarrt.substr(8) + "'");
      }
    }
    if (!(theta >= 0.0 && theta < 1.0)) throw UsageError("sarrt theta must lie in [0,1)");
    return {sarrt_uniform(theta), {{"type", "sarrt_uniform"}, {"theta", theta}}};
  }
  std::ifstream in(o.custom_j);
  if (!in) throw UsageError("cannot open " + o.custom_j);
  std::vector<Label> table;
  for (std::string line; std::getline(in, line);) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Label v;
    if (ls >> v) table.push_back(v);
  }
  if (table.empty()) throw UsageError("custom j file is empty");
  Json spec = {{"type", "custom_j"}, {"j", table}};
  MemorySchedule s = custom_from_table(table, o.custom_j);
  try {
    validate(s, table.size());
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return {s, spec};
}

Json effective(const std::string& command, const Options& o, const Json& regime) {
  Json e = {{"command", command}, {"n", o.n}, {"seed", o.seed}, {"format", o.format},
            {"generator", kGeneratorName}};
  if (!regime.is_null()) e["schedule"] = regime;
  return e;
}

// Writes `body` to --out (or stdout). CSV files get a sidecar <out>.meta.json
// with the effective configuration and any summary values.
void emit(const Options& o, const std::string& body, const Json& meta) {
  if (o.out.empty()) {
    std::cout << body;
    std::cout.flush();
    return;
  }
  {
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + o.out + " for writing");
    f << body;
    if (!f.flush()) throw IoError("write failed: " + o.out);
  }
  if (o.format == "csv") {
    std::ofstream m(o.out + ".meta.json", std::ios::binary | std::ios::trunc);
    if (!m) throw IoError("cannot open " + o.out + ".meta.json for writing");
    m << meta.dump(2) << '\n';
  }
}

void print_summary(const Options& o, const Json& summary) {
  if (o.out.empty()) return;  // keep stdout clean when it carries the data
  for (const auto& [k, v] : summary.items()) std::cout << k << '=' << v.dump() << '\n';
}

std::optional<double> meso_beta(const MemorySchedule& s) {
  if (auto* m = std::get_if<Mesoscopic>(&s)) return m->beta;
  return std::nullopt;
}
std::optional<double> macro_theta(const MemorySchedule& s) {
  if (auto* m = std::get_if<Macroscopic>(&s)) return m->theta;
  return std::nullopt;
}

unsigned threads_of(const Options& o) { return o.threads ? o.threads : default_threads(); }

// ---------------------------------------------------------------------------

int cmd_grow(const Options& o) {
  const auto r = parse_regime(o);
  const Tree t = grow_tree(r.schedule, o.n, o.seed);
  Json meta = {{"config", effective("grow", o, r.spec)}, {"height", height(t)}};
  if (!o.export_dot.empty()) {
    std::ofstream dot(o.export_dot);
    if (!dot) throw IoError("cannot open " + o.export_dot + " for writing");
    write_dot(t, dot);
  }
  std::ostringstream body;
  if (o.format == "csv") {
    write_parent_csv(t, body);
  } else {
    auto parents = t.parents();
    Json j = meta;
    j["parents"] = std::vector<Label>(parents.begin() + 2, parents.end());
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, {{"height", height(t)}});
  return 0;
}

std::map<std::uint64_t, double> degree_reference(const MemorySchedule& s) {
  std::map<std::uint64_t, double> pmf;
  if (meso_beta(s))
    for (std::uint64_t k = 1; k <= 64; ++k) pmf[k] = meso_degree_pmf(k);
  if (auto theta = macro_theta(s))
    for (std::uint64_t k = 1; k <= 200; ++k) {
      const double p = macro_degree_pmf(*theta, k);
      if (p < 1e-17) break;
      pmf[k] = p;
    }
  return pmf;
}

int cmd_degrees(const Options& o) {
  const auto r = parse_regime(o);
  std::vector<std::map<std::uint64_t, std::uint64_t>> per(o.reps);
  parallel_for(o.reps, threads_of(o), [&](std::uint64_t i) {
    per[i] = grow_streaming(r.schedule, o.n, derive_seed(o.seed, i)).degree_histogram;
  });
  std::map<std::uint64_t, std::uint64_t> hist;
  for (const auto& h : per)
    for (const auto& [k, c] : h) hist[k] += c;
  const double total = double(o.n) * double(o.reps);
  const auto ref = degree_reference(r.schedule);
  const double d1 = hist.count(1) ? hist[1] / total : 0.0;
  Json summary = {{"degree_1_frequency", d1}};
  if (!ref.empty()) {
    summary["tv_vs_limit"] = tv_distance(hist, ref);
    summary["limit_degree_1"] = ref.at(1);
  }
  Json cfg = effective("degrees", o, r.spec);
  cfg["reps"] = o.reps;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::set<std::uint64_t> keys;
  for (const auto& [k, c] : hist) keys.insert(k);
  for (const auto& [k, p] : ref) keys.insert(k);
  std::ostringstream body;
  if (o.format == "csv") {
    body << "degree,count,frequency,limit_pmf\n";
    for (auto k : keys) {
      const std::uint64_t c = hist.count(k) ? hist[k] : 0;
      body << k << ',' << c << ',' << fmt17(c / total) << ','
           << (ref.count(k) ? fmt17(ref.at(k)) : "") << '\n';
    }
  } else {
    Json rows = Json::array();
    for (auto k : keys) {
      const std::uint64_t c = hist.count(k) ? hist[k] : 0;
      Json row = {{"degree", k}, {"count", c}, {"frequency", c / total}};
      if (ref.count(k)) row["limit_pmf"] = ref.at(k);
      rows.push_back(row);
    }
    Json j = meta;
    j["histogram"] = rows;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_height(const Options& o) {
  const auto r = parse_regime(o);
  std::vector<std::uint64_t> heights(o.reps);
  parallel_for(o.reps, threads_of(o), [&](std::uint64_t i) {
    heights[i] = grow_streaming(r.schedule, o.n, derive_seed(o.seed, i)).height;
  });
  double scale = 1.0;
  std::string scale_name = "none";
  if (auto b = meso_beta(r.schedule)) {
    scale = std::pow(double(o.n), 1.0 - *b);
    scale_name = "n^(1-beta)";
  } else if (macro_theta(r.schedule) && o.n > 1) {
    scale = std::log(double(o.n));
    scale_name = "log n";
  }
  std::vector<double> scaled;
  for (auto h : heights) scaled.push_back(double(h) / scale);
  const auto s = summarize(scaled);
  Json summary = {{"mean_scaled_height", s.mean}, {"scale", scale_name}};
  if (auto b = meso_beta(r.schedule)) summary["limit"] = height_constant_meso(*b);
  if (auto t = macro_theta(r.schedule)) summary["limit"] = 1.0 / kappa(*t);
  Json cfg = effective("height", o, r.spec);
  cfg["reps"] = o.reps;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::ostringstream body;
  if (o.format == "csv") {
    body << "replication,seed,height,scaled_height\n";
    for (std::uint64_t i = 0; i < o.reps; ++i)
      body << i << ',' << derive_seed(o.seed, i) << ',' << heights[i] << ',' << fmt17(scaled[i]) << '\n';
  } else {
    Json rows = Json::array();
    for (std::uint64_t i = 0; i < o.reps; ++i)
      rows.push_back({{"replication", i}, {"seed", derive_seed(o.seed, i)},
                      {"height", heights[i]}, {"scaled_height", scaled[i]}});
    Json j = meta;
    j["replications"] = rows;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_chain(const Options& o) {
  const auto r = parse_regime(o);
  const auto beta = meso_beta(r.schedule);
  if (!beta) throw UsageError("chain needs --mesoscopic");
  ChainConvention conv;
  if (o.convention == "model") conv = ChainConvention::kModelConsistent;
  else if (o.convention == "paper") conv = ChainConvention::kPaperLiteral;
  else throw UsageError("--convention must be model or paper");
  const double scale = std::pow(double(o.n), 1.0 - *beta);
  std::vector<std::vector<Label>> chains(o.reps);
  parallel_for(o.reps, threads_of(o), [&](std::uint64_t i) {
    chains[i] = simulate_chain(o.n, *beta, derive_seed(o.seed, i), {}, conv);
  });
  std::vector<double> dev;
  for (const auto& c : chains) dev.push_back(chain_fluid_deviation(c, o.n, *beta, o.t_max));
  const auto s = summarize(dev);
  Json summary = {{"max_deviation", s.max}, {"mean_deviation", s.mean}, {"t_max", o.t_max}};
  Json cfg = effective("chain", o, r.spec);
  cfg["reps"] = o.reps;
  cfg["convention"] = o.convention;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::ostringstream body;
  auto row = [&](std::uint64_t rep, std::size_t k, Label l, std::ostream& os) {
    const double t = double(k) / scale;
    const double x = double(l) / double(o.n);
    const double f = f_beta(*beta, t);
    os << rep << ',' << k << ',' << l << ',' << fmt17(t) << ',' << fmt17(x) << ','
       << fmt17(f) << ',' << fmt17(x - f) << '\n';
  };
  if (o.format == "csv") {
    body << "replication,k,label,t,scaled_label,f_beta,residual\n";
    for (std::uint64_t i = 0; i < o.reps; ++i)
      for (std::size_t k = 0; k < chains[i].size(); ++k) row(i, k, chains[i][k], body);
  } else {
    Json reps = Json::array();
    for (std::uint64_t i = 0; i < o.reps; ++i)
      reps.push_back({{"replication", i}, {"seed", derive_seed(o.seed, i)},
                      {"labels", chains[i]}, {"deviation", dev[i]}});
    Json j = meta;
    j["chains"] = reps;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_fringe(const Options& o) {
  const auto r = parse_regime(o);
  if (o.size_cap < 1) throw UsageError("--size-cap must be >= 1");
  std::vector<FringeDistribution> per(o.reps);
  parallel_for(o.reps, threads_of(o), [&](std::uint64_t i) {
    per[i] = empirical_fringe(grow_tree(r.schedule, o.n, derive_seed(o.seed, i)), o.size_cap);
  });
  FringeDistribution emp;
  for (const auto& d : per) {
    for (const auto& [code, c] : d.counts) emp.counts[code] += c;
    emp.truncated += d.truncated;
    emp.total += d.total;
  }
  std::map<std::string, double> ref;
  std::string ref_name = "none";
  if (meso_beta(r.schedule)) {
    ref_name = "poisson_gw_exact";
    double listed = 0.0;
    for (const auto& code : enumerate_shapes(o.size_cap)) listed += ref[code] = poisson_gw_shape_probability(code);
    ref[std::string(kTruncatedKey)] = std::max(0.0, 1.0 - listed);
  } else if (auto theta = macro_theta(r.schedule)) {
    ref_name = "macro_ctbp_monte_carlo";
    FringeDistribution mc;
    for (std::uint64_t i = 0; i < o.ref_samples; ++i)
      mc.add(sample_macro_fringe(*theta, derive_seed(~o.seed, i), o.size_cap));
    ref = mc.probabilities();
  } else if (auto* s = std::get_if<Sarrt>(&r.schedule)) {
    const double theta = r.spec["theta"].get<double>();
    (void)s;
    ref_name = "sarrt_ctbp_monte_carlo";
    FringeDistribution mc;
    const auto density = uniform_density(theta, 1.0);
    for (std::uint64_t i = 0; i < o.ref_samples; ++i)
      mc.add(sample_sarrt_fringe(density, 1.0 / (1.0 - theta), derive_seed(~o.seed, i), o.size_cap));
    ref = mc.probabilities();
  }
  const auto probs = emp.probabilities();
  Json summary = {{"reference", ref_name}};
  if (!ref.empty()) summary["tv_vs_reference"] = tv_distance(probs, ref);
  Json cfg = effective("fringe", o, r.spec);
  cfg["reps"] = o.reps;
  cfg["size_cap"] = o.size_cap;
  if (ref_name.find("monte_carlo") != std::string::npos) cfg["ref_samples"] = o.ref_samples;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::set<std::string> keys;
  for (const auto& [k, p] : probs) keys.insert(k);
  for (const auto& [k, p] : ref) keys.insert(k);
  keys.erase(std::string(kTruncatedKey));
  std::ostringstream body;
  auto count_of = [&](const std::string& k) -> std::uint64_t {
    if (k == kTruncatedKey) return emp.truncated;
    auto it = emp.counts.find(k);
    return it == emp.counts.end() ? 0 : it->second;
  };
  std::vector<std::string> ordered(keys.begin(), keys.end());
  ordered.push_back(std::string(kTruncatedKey));
  if (o.format == "csv") {
    body << "code,count,frequency,reference\n";
    for (const auto& k : ordered)
      body << k << ',' << count_of(k) << ',' << fmt17(double(count_of(k)) / double(emp.total)) << ','
           << (ref.count(k) ? fmt17(ref.at(k)) : "") << '\n';
  } else {
    Json rows = Json::array();
    for (const auto& k : ordered) {
      Json row = {{"code", k}, {"count", count_of(k)},
                  {"frequency", double(count_of(k)) / double(emp.total)}};
      if (ref.count(k)) row["reference"] = ref.at(k);
      rows.push_back(row);
    }
    Json j = meta;
    j["fringe"] = rows;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

void write_spanned_dot(const Tree& t, const SpannedSubtree& sub, std::ostream& out) {
  std::set<Label> vertices;
  for (Label leaf : sub.leaves)
    for (Label v : ancestor_chain(t, leaf)) vertices.insert(v);
  std::set<Label> branch;
  for (const auto& b : sub.branchpoints) branch.insert(b.label);
  out << "digraph T {";
  for (Label v : vertices) {
    if (branch.count(v)) out << ' ' << v << " [shape=box, label=\"" << v << " (branchpoint)\"];";
    else if (std::find(sub.leaves.begin(), sub.leaves.end(), v) != sub.leaves.end())
      out << ' ' << v << " [shape=doublecircle];";
  }
  for (Label v : vertices)
    if (v > 1) out << ' ' << v << " -> " << t.parent(v) << ';';
  out << " }\n";
}

int cmd_explore(const Options& o) {
  const auto r = parse_regime(o);
  const Tree t = grow_tree(r.schedule, o.n, o.seed);
  std::optional<std::vector<Label>> starts;
  if (!o.starts.empty()) starts = o.starts;
  const auto tr = explore_ancestral_lines(t, o.k, starts);
  if (!tr.starts_in_window && r.schedule.index() != 2)
    std::cerr << "warning: starts below the attachment window of n-1\n";
  Json summary = {{"termination", tr.termination},
                  {"terminal_label", tr.terminal_label},
                  {"terminal_depth", tr.terminal_depth},
                  {"coalesced_pair", {tr.coalesced_pair.first + 1, tr.coalesced_pair.second + 1}}};
  Json cfg = effective("explore", o, r.spec);
  cfg["k"] = o.k;
  cfg["starts"] = tr.starts;
  Json meta = {{"config", cfg}, {"summary", summary}};
  if (!o.export_dot.empty()) {
    std::ofstream dot(o.export_dot);
    if (!dot) throw IoError("cannot open " + o.export_dot + " for writing");
    write_spanned_dot(t, spanned_subtree(t, tr.starts), dot);
  }
  std::ostringstream body;
  if (o.format == "csv") {
    write_trace_csv(tr, body);
  } else {
    Json steps = Json::array();
    for (const auto& s : tr.steps)
      steps.push_back({{"m", s.m}, {"revealed_label", s.revealed},
                       {"chosen_line", s.line + 1}, {"counts", s.counts}});
    Json j = meta;
    j["steps"] = steps;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_spine(const Options& o) {
  const auto r = parse_regime(o);
  if (o.n < 2) throw UsageError("spine needs n >= 2");
  const Tree t = grow_tree(r.schedule, o.n, o.seed);
  const auto d = spine_distances(t);
  std::map<std::int64_t, std::uint64_t> hist;
  std::vector<std::int64_t> sample(d.begin() + 1, d.end());
  for (auto v : sample) ++hist[v];
  Json summary = {{"max_dist_to_spine", hist.rbegin()->first}};
  std::optional<double> p;
  if (auto b = meso_beta(r.schedule)) {
    p = std::pow(double(o.n), -*b);
    summary["max_scaled"] = double(hist.rbegin()->first) / std::pow(double(o.n), 1.0 - *b);
    const auto dom = cdf_dominance(sample, [&](std::int64_t x) { return geometric_plus_one_cdf(*p, x); }, o.slack);
    summary["dominated_by_geometric"] = dom.pass;
    summary["worst_gap"] = dom.worst_gap;
    if (dom.witness) summary["witness"] = *dom.witness;
  }
  Json cfg = effective("spine", o, r.spec);
  cfg["slack"] = o.slack;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::ostringstream body;
  double cum = 0.0;
  if (o.format == "csv") {
    body << "distance,count,frequency,empirical_cdf,geometric_cdf\n";
    for (const auto& [x, c] : hist) {
      cum += double(c) / double(o.n);
      body << x << ',' << c << ',' << fmt17(double(c) / double(o.n)) << ',' << fmt17(cum) << ','
           << (p ? fmt17(geometric_plus_one_cdf(*p, x)) : "") << '\n';
    }
  } else {
    Json rows = Json::array();
    for (const auto& [x, c] : hist) {
      cum += double(c) / double(o.n);
      Json row = {{"distance", x}, {"count", c}, {"empirical_cdf", cum}};
      if (p) row["geometric_cdf"] = geometric_plus_one_cdf(*p, x);
      rows.push_back(row);
    }
    Json j = meta;
    j["distribution"] = rows;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_branchpoints(const Options& o) {
  const auto r = parse_regime(o);
  const auto beta = meso_beta(r.schedule);
  if (!beta) throw UsageError("branchpoints needs --mesoscopic");
  if (o.k < 2) throw UsageError("--k must be >= 2");
  const auto recs = branchpoint_statistics(*beta, o.n, o.k, o.reps, o.seed, threads_of(o));
  std::vector<double> x;
  for (const auto& rec : recs) x.push_back(rec.scaled_depth);
  const double expo = 4.0 * double(o.k) * double(o.k - 1);
  const double ks = ks_one_sample(x, [expo](double v) { return v <= 0 ? 0.0 : v >= 1 ? 1.0 : std::pow(v, expo); });
  Json summary = {{"ks_vs_power_law", ks}, {"exponent", expo}};
  Json cfg = effective("branchpoints", o, r.spec);
  cfg["k"] = o.k;
  cfg["reps"] = o.reps;
  Json meta = {{"config", cfg}, {"summary", summary}};
  std::ostringstream body;
  if (o.format == "csv") {
    write_branchpoint_csv(recs, body);
  } else {
    Json rows = Json::array();
    for (const auto& rec : recs)
      rows.push_back({{"replication", rec.replication}, {"seed", rec.seed},
                      {"depth", rec.depth}, {"scaled_depth", rec.scaled_depth}});
    Json j = meta;
    j["records"] = rows;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  print_summary(o, summary);
  return 0;
}

int cmd_constants(const Options& o) {
  std::vector<double> thetas = o.theta;
  if (thetas.empty())
    for (int i = 1; i <= 9; ++i) thetas.push_back(i / 10.0);
  for (double t : thetas) check_unit(t, "theta");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  std::vector<HeightConstants> rows;
  for (double t : thetas) rows.push_back(height_constants(t, o.tol));
  Json cfg = {{"command", "constants"}, {"theta", thetas}, {"tol", o.tol}};
  Json meta = {{"config", cfg}};
  std::ostringstream body;
  if (o.format == "csv") {
    write_constants_csv(rows, body);
  } else {
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"theta", r.theta}, {"kappa", r.kappa}, {"alpha_max", r.alpha_max},
                     {"mu_drift", r.mu_drift}, {"c_theta", r.c_theta},
                     {"solver_tolerance", r.solver_tolerance}});
    Json j = meta;
    j["constants"] = arr;
    body << j.dump() << '\n';
  }
  emit(o, body.str(), meta);
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.config.empty()) throw UsageError("sweep needs --config <file>");
  std::ifstream in(o.config);
  if (!in) throw UsageError("cannot open config " + o.config);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw UsageError("config " + o.config + ": " + e.what());
  }
  SweepConfig cfg;
  try {
    cfg = SweepConfig::from_json(j);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (o.was_given("threads")) cfg.threads = o.threads;
  if (!o.out.empty()) {
    if (o.format == "json") cfg.json_path = o.out;
    else cfg.csv_path = o.out;
  }
  const auto report = run_sweep(cfg);
  if (cfg.json_path.empty() && cfg.csv_path.empty()) {
    if (o.format == "json") {
      std::cout << report.to_json().dump(2) << '\n';
    } else {
      report.write_csv(std::cout);
    }
  } else {
    if (!cfg.csv_path.empty()) {
      std::ofstream m(cfg.csv_path + ".meta.json");
      if (!m) throw IoError("cannot write " + cfg.csv_path + ".meta.json");
      m << Json{{"config", report.config}, {"config_digest", report.config_digest},
                {"generator", report.generator}}.dump(2) << '\n';
    }
    for (const auto& c : report.comparisons)
      std::cout << "comparison " << c.name << ": value=" << fmt17(c.value)
                << " distance=" << fmt17(c.distance) << " threshold=" << fmt17(c.threshold)
                << (c.pass ? " pass" : " FAIL") << '\n';
  }
  if (o.assert_pass && !report.all_pass()) {
    std::cerr << "error: sweep comparisons failed\n";
    return kExitAssert;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive trees with limited memory: generation, analysis, limits, sweeps"};
  app.require_subcommand(1);
  Options o;

  auto* grow = app.add_subcommand("grow", "grow one tree, write its parent array");
  add_common(grow, o);
  grow->add_option("--export-dot", o.export_dot, "also write the tree as DOT");

  auto* degrees = app.add_subcommand("degrees", "degree histogram vs the limiting pmf");
  add_common(degrees, o);
  add_reps(degrees, o);

  auto* height_cmd = app.add_subcommand("height", "per-replication heights");
  add_common(height_cmd, o);
  add_reps(height_cmd, o);

  auto* chain = app.add_subcommand("chain", "ancestor chain of n vs the fluid limit");
  add_common(chain, o);
  add_reps(chain, o);
  o.note("convention", chain->add_option("--convention", o.convention, "model or paper"));
  o.note("t-max", chain->add_option("--t-max", o.t_max, "time horizon for the deviation"));

  auto* fringe = app.add_subcommand("fringe", "empirical fringe vs the reference law");
  add_common(fringe, o);
  add_reps(fringe, o);
  o.note("size-cap", fringe->add_option("--size-cap", o.size_cap, "largest fringe kept"));
  o.note("ref-samples", fringe->add_option("--ref-samples", o.ref_samples, "Monte-Carlo reference draws"));

  auto* explore = app.add_subcommand("explore", "ancestral exploration of the k youngest vertices");
  add_common(explore, o);
  o.note("k", explore->add_option("--k", o.k, "number of lines"));
  explore->add_option("--starts", o.starts, "explicit start labels, decreasing")->delimiter(',');
  explore->add_option("--export-dot", o.export_dot, "spanned subtree as DOT");

  auto* spine = app.add_subcommand("spine", "distances to the root-to-n path");
  add_common(spine, o);
  o.note("slack", spine->add_option("--slack", o.slack, "dominance slack"));

  auto* bp = app.add_subcommand("branchpoints", "scaled top-branchpoint depths");
  add_common(bp, o);
  add_reps(bp, o);
  o.note("k", bp->add_option("--k", o.k, "number of lines"));

  auto* constants = app.add_subcommand("constants", "kappa / alpha_max table");
  constants->add_option("--theta", o.theta, "theta values (default 0.1..0.9)")->delimiter(',');
  o.note("tol", constants->add_option("--tol", o.tol, "solver tolerance"));
  constants->add_option("--out", o.out, "output path");
  constants->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sweep = app.add_subcommand("sweep", "run a sweep configuration");
  sweep->add_option("--config", o.config, "sweep JSON")->required();
  o.note("threads", sweep->add_option("--threads", o.threads, "worker threads"));
  sweep->add_option("--out", o.out, "override the report path");
  sweep->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_flag("--assert", o.assert_pass, "exit 3 if any comparison fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name != "sweep" && name != "constants") apply_config(o);
    if (name == "grow") return cmd_grow(o);
    if (name == "degrees") return cmd_degrees(o);
    if (name == "height") return cmd_height(o);
    if (name == "chain") return cmd_chain(o);
    if (name == "fringe") return cmd_fringe(o);
    if (name == "explore") return cmd_explore(o);
    if (name == "spine") return cmd_spine(o);
    if (name == "branchpoints") return cmd_branchpoints(o);
    if (name == "constants") return cmd_constants(o);
    return cmd_sweep(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
