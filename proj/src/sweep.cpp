#include "lmrt/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "lmrt/analysis.hpp"
#include "lmrt/errors.hpp"
#include "lmrt/exploration.hpp"
#include "lmrt/limits.hpp"
#include "lmrt/parallel.hpp"
#include "lmrt/rng.hpp"
#include "lmrt/tree.hpp"

namespace lmrt {

namespace {

constexpr std::uint64_t kDegreePmfTerms = 64;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double require_unit(const Json& spec, const char* key) {
  if (!spec.contains(key) || !spec[key].is_number())
    throw InvalidArgument(std::string("schedule: missing numeric '") + key + "'");
  return spec[key].get<double>();
}

std::optional<double> meso_beta(const MemorySchedule& s) {
  if (const auto* m = std::get_if<Mesoscopic>(&s)) return m->beta;
  return std::nullopt;
}

std::optional<double> macro_theta(const MemorySchedule& s) {
  if (const auto* m = std::get_if<Macroscopic>(&s)) return m->theta;
  return std::nullopt;
}

std::map<std::uint64_t, double> degree_reference(const MemorySchedule& s) {
  std::map<std::uint64_t, double> pmf;
  if (meso_beta(s)) {
    for (std::uint64_t k = 1; k <= kDegreePmfTerms; ++k) pmf[k] = meso_degree_pmf(k);
  } else if (auto theta = macro_theta(s)) {
    for (std::uint64_t k = 1; k <= kDegreePmfTerms; ++k) {
      const double p = macro_degree_pmf(*theta, k);
      if (p < 1e-17) break;
      pmf[k] = p;
    }
  }
  return pmf;
}

std::map<std::string, double> gw_reference(std::size_t cap) {
  std::map<std::string, double> ref;
  double listed = 0.0;
  for (const auto& code : enumerate_shapes(cap)) {
    ref[code] = poisson_gw_shape_probability(code);
    listed += ref[code];
  }
  ref[std::string(kTruncatedKey)] = std::max(0.0, 1.0 - listed);
  return ref;
}

void write_file(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << body;
    if (!out.flush()) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace

MemorySchedule custom_from_table(std::vector<Label> table, std::string name) {
  auto shared = std::make_shared<const std::vector<Label>>(std::move(table));
  CustomJ c;
  c.name = std::move(name);
  c.j = [shared](Label m) -> Label {
    if (m == 0 || m > shared->size())
      throw InvalidArgument("custom j table has no entry for m=" + std::to_string(m));
    return (*shared)[m - 1];
  };
  return c;
}

MemorySchedule schedule_from_json(const Json& spec) {
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
    throw InvalidArgument("schedule: expected an object with a 'type' string");
  const auto type = spec["type"].get<std::string>();
  MemorySchedule s;
  if (type == "mesoscopic") {
    s = Mesoscopic{require_unit(spec, "beta")};
  } else if (type == "macroscopic") {
    s = Macroscopic{require_unit(spec, "theta")};
  } else if (type == "sarrt_uniform") {
    const double theta = require_unit(spec, "theta");
    if (!(theta >= 0.0 && theta < 1.0))
      throw InvalidArgument("sarrt_uniform: theta must lie in [0,1)");
    s = sarrt_uniform(theta);
  } else if (type == "full_memory") {
    s = full_memory_schedule();
  } else if (type == "custom_j") {
    if (!spec.contains("j") || !spec["j"].is_array())
      throw InvalidArgument("custom_j: missing array 'j'");
    s = custom_from_table(spec["j"].get<std::vector<Label>>());
  } else {
    throw InvalidArgument("schedule: unknown type '" + type + "'");
  }
  if (type != "custom_j") validate(s);
  return s;
}

SweepConfig SweepConfig::from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("sweep config must be a JSON object");
  SweepConfig c;
  try {
    c.schedule_spec = j.at("schedule");
    const auto& n = j.at("n");
    if (n.is_array()) {
      c.n = n.get<std::vector<Label>>();
    } else {
      c.n = {n.get<Label>()};
    }
    c.replications = j.value("replications", std::uint64_t{1});
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    const auto& st = j.at("statistics");
    if (st.is_array()) {
      for (const auto& name : st) {
        const auto s = name.get<std::string>();
        if (s == "height") c.statistics.height = true;
        else if (s == "degree_hist") c.statistics.degree_hist = true;
        else if (s == "chain") c.statistics.chain = true;
        else if (s == "spine") c.statistics.spine = true;
        else throw InvalidArgument("statistic '" + s + "' needs parameters or is unknown");
      }
    } else {
      for (const auto& [key, val] : st.items()) {
        if (key == "height") c.statistics.height = val.get<bool>();
        else if (key == "degree_hist") c.statistics.degree_hist = val.get<bool>();
        else if (key == "chain") c.statistics.chain = val.get<bool>();
        else if (key == "spine") c.statistics.spine = val.get<bool>();
        else if (key == "fringe") c.statistics.fringe_cap = val.at("size_cap").get<std::size_t>();
        else if (key == "branchpoints") c.statistics.branchpoints_k = val.at("k").get<std::size_t>();
        else throw InvalidArgument("unknown statistic '" + key + "'");
      }
    }
    for (const auto& cj : j.value("comparisons", Json::array())) {
      Comparison cmp;
      cmp.name = cj.at("name").get<std::string>();
      cmp.metric = cj.at("metric").get<std::string>();
      cmp.aggregate = cj.value("aggregate", std::string("mean"));
      if (cj.contains("n")) cmp.n = cj["n"].get<Label>();
      cmp.reference = cj.at("reference").get<double>();
      cmp.threshold = cj.at("threshold").get<double>();
      cmp.relative = cj.value("relative", false);
      c.comparisons.push_back(std::move(cmp));
    }
    if (j.contains("output")) {
      const auto& out = j["output"];
      c.json_path = out.value("json", std::string());
      c.csv_path = out.value("csv", std::string());
    }
    c.resume_path = j.value("resume", std::string());
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

Json SweepConfig::to_json() const {
  Json stats = Json::object();
  if (statistics.height) stats["height"] = true;
  if (statistics.degree_hist) stats["degree_hist"] = true;
  if (statistics.chain) stats["chain"] = true;
  if (statistics.spine) stats["spine"] = true;
  if (statistics.fringe_cap) stats["fringe"] = {{"size_cap", *statistics.fringe_cap}};
  if (statistics.branchpoints_k) stats["branchpoints"] = {{"k", *statistics.branchpoints_k}};
  Json cmps = Json::array();
  for (const auto& c : comparisons) {
    Json cj = {{"name", c.name},           {"metric", c.metric},
               {"aggregate", c.aggregate}, {"reference", c.reference},
               {"threshold", c.threshold}, {"relative", c.relative}};
    if (c.n) cj["n"] = *c.n;
    cmps.push_back(std::move(cj));
  }
  return {{"schedule", schedule_spec},
          {"n", n},
          {"replications", replications},
          {"master_seed", master_seed},
          {"statistics", stats},
          {"comparisons", cmps}};
}

std::string SweepConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

void SweepConfig::validate() const {
  if (replications < 1) throw InvalidArgument("sweep: replications must be >= 1");
  if (n.empty()) throw InvalidArgument("sweep: n list is empty");
  for (Label v : n)
    if (v < 1) throw InvalidArgument("sweep: n entries must be >= 1");
  if (statistics.empty()) throw InvalidArgument("sweep: no statistics requested");
  if (statistics.fringe_cap && *statistics.fringe_cap < 1)
    throw InvalidArgument("sweep: fringe size_cap must be >= 1");
  if (statistics.branchpoints_k && *statistics.branchpoints_k < 2)
    throw InvalidArgument("sweep: branchpoints k must be >= 2");
  static const std::set<std::string> kAggregates = {"mean", "variance", "min", "max",
                                                    "q05",  "q50",      "q95"};
  for (const auto& c : comparisons) {
    if (!kAggregates.count(c.aggregate))
      throw InvalidArgument("sweep: unknown aggregate '" + c.aggregate + "'");
    if (c.n && std::find(n.begin(), n.end(), *c.n) == n.end())
      throw InvalidArgument("sweep: comparison '" + c.name + "' refers to an n not swept");
  }
  schedule_from_json(schedule_spec);
}

std::map<std::string, double> cell_metrics(const MemorySchedule& schedule,
                                           const StatisticsRequest& stats,
                                           Label n, std::uint64_t seed) {
  std::map<std::string, double> m;
  const auto beta = meso_beta(schedule);
  const auto theta = macro_theta(schedule);
  const double dn = static_cast<double>(n);
  const double line_scale = beta ? std::pow(dn, 1.0 - *beta) : 1.0;

  auto record_height = [&](std::uint64_t h) {
    m["height"] = static_cast<double>(h);
    if (beta) m["height_scaled"] = static_cast<double>(h) / line_scale;
    if (theta) m["height_over_log_n"] = n > 1 ? static_cast<double>(h) / std::log(dn) : 0.0;
  };
  auto record_degrees = [&](const std::map<std::uint64_t, std::uint64_t>& hist) {
    const auto d1 = hist.find(1);
    m["degree_1_fraction"] =
        d1 == hist.end() ? 0.0 : static_cast<double>(d1->second) / dn;
    m["max_degree"] = hist.empty() ? 0.0 : static_cast<double>(hist.rbegin()->first);
    const auto ref = degree_reference(schedule);
    if (!ref.empty()) m["degree_tv"] = tv_distance(hist, ref);
  };

  const bool needs_tree = stats.fringe_cap || stats.spine || stats.branchpoints_k ||
                          (stats.chain && (!beta || stats.height || stats.degree_hist));
  if (!needs_tree) {
    if (stats.height || stats.degree_hist) {
      const auto g = grow_streaming(schedule, n, seed);
      if (stats.height) record_height(g.height);
      if (stats.degree_hist) record_degrees(g.degree_histogram);
    }
    if (stats.chain) {
      const auto chain = simulate_chain(n, *beta, seed);
      m["chain_length"] = static_cast<double>(chain.size() - 1);
      m["chain_deviation"] = chain_fluid_deviation(chain, n, *beta, 3.0);
    }
    return m;
  }

  const Tree tree = grow_tree(schedule, n, seed);
  if (stats.height) record_height(height(tree));
  if (stats.degree_hist) record_degrees(degree_histogram(tree));
  if (stats.chain) {
    const auto chain = ancestor_chain(tree, n);
    m["chain_length"] = static_cast<double>(chain.size() - 1);
    if (beta) m["chain_deviation"] = chain_fluid_deviation(chain, n, *beta, 3.0);
  }
  if (stats.spine) {
    const auto d = spine_distances(tree);
    std::uint64_t worst = 0;
    double sum = 0.0;
    for (Label v = 1; v <= n; ++v) {
      worst = std::max<std::uint64_t>(worst, d[v]);
      sum += d[v];
    }
    m["spine_max"] = static_cast<double>(worst);
    m["spine_mean"] = sum / dn;
    if (beta) m["spine_max_scaled"] = static_cast<double>(worst) / line_scale;
  }
  if (stats.fringe_cap) {
    const auto dist = empirical_fringe(tree, *stats.fringe_cap);
    m["fringe_leaf_fraction"] = dist.frequency("()");
    m["fringe_truncated"] = dist.truncated_frequency();
    if (beta) m["fringe_tv"] = tv_distance(dist.probabilities(), gw_reference(*stats.fringe_cap));
  }
  if (stats.branchpoints_k && n >= *stats.branchpoints_k) {
    const auto trace = explore_ancestral_lines(tree, *stats.branchpoints_k);
    m["branchpoint_depth"] = static_cast<double>(trace.terminal_depth);
    if (beta)
      m["branchpoint_scaled"] = static_cast<double>(trace.terminal_depth) /
                                (height_constant_meso(*beta) * line_scale);
  }
  return m;
}

Aggregates aggregate_cells(const std::vector<CellRecord>& cells) {
  std::map<Label, std::map<std::string, std::vector<double>>> columns;
  for (const auto& c : cells)
    for (const auto& [name, v] : c.metrics) columns[c.n][name].push_back(v);
  Aggregates out;
  for (const auto& [n, metrics] : columns)
    for (const auto& [name, values] : metrics) out[n][name] = summarize(values);
  return out;
}

double aggregate_value(const Summary& s, const std::string& name) {
  if (name == "mean") return s.mean;
  if (name == "variance") return s.variance;
  if (name == "min") return s.min;
  if (name == "max") return s.max;
  if (name == "q05") return s.q05;
  if (name == "q50") return s.q50;
  if (name == "q95") return s.q95;
  throw InvalidArgument("unknown aggregate '" + name + "'");
}

bool ReplicationReport::all_pass() const {
  for (const auto& c : comparisons)
    if (!c.pass) return false;
  return complete;
}

namespace {

Json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"min", s.min}, {"max", s.max},
          {"q05", s.q05},   {"q50", s.q50},           {"q95", s.q95}, {"count", s.count}};
}

}  // namespace

Json ReplicationReport::to_json() const {
  Json cj = Json::array();
  for (const auto& c : cells)
    cj.push_back({{"n", c.n}, {"rep", c.rep}, {"seed", c.seed}, {"metrics", c.metrics}});
  Json aj = Json::object();
  for (const auto& [n, metrics] : aggregates) {
    Json per = Json::object();
    for (const auto& [name, s] : metrics) per[name] = summary_json(s);
    aj[std::to_string(n)] = std::move(per);
  }
  Json cmp = Json::array();
  for (const auto& c : comparisons)
    cmp.push_back({{"name", c.name},           {"metric", c.metric},
                   {"n", c.n},                 {"aggregate", c.aggregate},
                   {"value", c.value},         {"reference", c.reference},
                   {"distance", c.distance},   {"threshold", c.threshold},
                   {"pass", c.pass}});
  Json out = {{"config", config},   {"config_digest", config_digest},
              {"generator", generator}, {"complete", complete},
              {"cells", cj},        {"aggregates", aj},
              {"comparisons", cmp}};
  if (!complete) out["resume_from"] = resume_from;
  return out;
}

ReplicationReport ReplicationReport::from_json(const Json& j) {
  ReplicationReport r;
  try {
    r.config = j.at("config");
    r.config_digest = j.at("config_digest").get<std::string>();
    r.generator = j.at("generator").get<std::string>();
    r.complete = j.at("complete").get<bool>();
    r.resume_from = j.value("resume_from", std::uint64_t{0});
    for (const auto& c : j.at("cells")) {
      CellRecord rec;
      rec.n = c.at("n").get<Label>();
      rec.rep = c.at("rep").get<std::uint64_t>();
      rec.seed = c.at("seed").get<std::uint64_t>();
      rec.metrics = c.at("metrics").get<std::map<std::string, double>>();
      r.cells.push_back(std::move(rec));
    }
    for (const auto& [nkey, per] : j.at("aggregates").items()) {
      for (const auto& [name, s] : per.items()) {
        Summary sum;
        sum.mean = s.at("mean").get<double>();
        sum.variance = s.at("variance").get<double>();
        sum.min = s.at("min").get<double>();
        sum.max = s.at("max").get<double>();
        sum.q05 = s.at("q05").get<double>();
        sum.q50 = s.at("q50").get<double>();
        sum.q95 = s.at("q95").get<double>();
        sum.count = s.at("count").get<std::size_t>();
        r.aggregates[std::stoull(nkey)][name] = sum;
      }
    }
    for (const auto& c : j.at("comparisons")) {
      ComparisonResult cr;
      cr.name = c.at("name").get<std::string>();
      cr.metric = c.at("metric").get<std::string>();
      cr.n = c.at("n").get<Label>();
      cr.aggregate = c.at("aggregate").get<std::string>();
      cr.value = c.at("value").get<double>();
      cr.reference = c.at("reference").get<double>();
      cr.distance = c.at("distance").get<double>();
      cr.threshold = c.at("threshold").get<double>();
      cr.pass = c.at("pass").get<bool>();
      r.comparisons.push_back(std::move(cr));
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("report: ") + e.what());
  }
  return r;
}

void ReplicationReport::write_csv(std::ostream& out) const {
  std::set<std::string> names;
  for (const auto& c : cells)
    for (const auto& [name, v] : c.metrics) names.insert(name);
  out << "n,rep,seed";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (const auto& c : cells) {
    out << c.n << ',' << c.rep << ',' << c.seed;
    for (const auto& name : names) {
      out << ',';
      if (auto it = c.metrics.find(name); it != c.metrics.end()) out << fmt17(it->second);
    }
    out << '\n';
  }
}

ReplicationReport run_sweep(const SweepConfig& config) {
  config.validate();
  const MemorySchedule schedule = schedule_from_json(config.schedule_spec);
  const std::uint64_t reps = config.replications;
  const std::uint64_t total = reps * config.n.size();

  ReplicationReport report;
  report.config = config.to_json();
  report.config_digest = config.digest();
  report.generator = kGeneratorName;

  std::vector<std::optional<CellRecord>> slots(total);
  if (!config.resume_path.empty()) {
    std::ifstream in(config.resume_path);
    if (!in) throw IoError("cannot open " + config.resume_path);
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw IoError("cannot parse " + config.resume_path + ": " + e.what());
    }
    const auto prior = ReplicationReport::from_json(j);
    if (prior.config_digest != report.config_digest)
      throw InvalidArgument("resume: config digest does not match");
    for (const auto& c : prior.cells) {
      const auto ni = static_cast<std::uint64_t>(
          std::find(config.n.begin(), config.n.end(), c.n) - config.n.begin());
      const std::uint64_t idx = ni * reps + c.rep;
      if (ni < config.n.size() && c.rep < reps && c.seed == derive_seed(config.master_seed, idx))
        slots[idx] = c;
    }
  }

  std::exception_ptr failure;
  try {
    const unsigned threads = config.threads.value_or(default_threads());
    parallel_for(total, threads, [&](std::uint64_t idx) {
      if (slots[idx]) return;
      CellRecord rec;
      rec.n = config.n[idx / reps];
      rec.rep = idx % reps;
      rec.seed = derive_seed(config.master_seed, idx);
      rec.metrics = cell_metrics(schedule, config.statistics, rec.n, rec.seed);
      slots[idx] = std::move(rec);
    });
  } catch (...) {
    failure = std::current_exception();
  }

  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (slots[idx]) {
      report.cells.push_back(*slots[idx]);
    } else if (report.complete) {
      report.complete = false;
      report.resume_from = idx;
    }
  }
  report.aggregates = aggregate_cells(report.cells);

  if (report.complete) {
    const Label last_n = config.n.back();
    for (const auto& c : config.comparisons) {
      ComparisonResult r;
      r.name = c.name;
      r.metric = c.metric;
      r.n = c.n.value_or(last_n);
      r.aggregate = c.aggregate;
      r.reference = c.reference;
      r.threshold = c.threshold;
      const Summary* summary = nullptr;
      if (auto per = report.aggregates.find(r.n); per != report.aggregates.end())
        if (auto it = per->second.find(c.metric); it != per->second.end())
          summary = &it->second;
      if (!summary) {
        // Unknown metric: reported as a failed comparison.
        r.value = 0.0;
        r.distance = std::numeric_limits<double>::max();
        r.pass = false;
      } else {
        r.value = aggregate_value(*summary, c.aggregate);
        r.distance = std::abs(r.value - c.reference);
        if (c.relative) r.distance /= std::abs(c.reference);
        r.pass = r.distance <= c.threshold;
      }
      report.comparisons.push_back(std::move(r));
    }
  }

  if (!config.json_path.empty()) write_file(config.json_path, report.to_json().dump(2) + "\n");
  if (!config.csv_path.empty()) {
    std::ostringstream csv;
    report.write_csv(csv);
    write_file(config.csv_path, csv.str());
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

}  // namespace lmrt
