#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lmrt/analysis.hpp"
#include "lmrt/errors.hpp"
#include "lmrt/exploration.hpp"
#include "lmrt/limits.hpp"
#include "lmrt/rng.hpp"
#include "lmrt/stats.hpp"
#include "lmrt/sweep.hpp"
#include "lmrt/tree.hpp"

namespace py = pybind11;
using namespace lmrt;

namespace {

MemorySchedule schedule_of(const std::string& spec) {
  Json j;
  try {
    j = Json::parse(spec);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("schedule: ") + e.what());
  }
  return schedule_from_json(j);
}

py::dict fringe_dict(const FringeDistribution& d) {
  py::dict counts;
  for (const auto& [code, c] : d.counts) counts[py::str(code)] = c;
  py::dict out;
  out["counts"] = counts;
  out["truncated"] = d.truncated;
  out["total"] = d.total;
  return out;
}

py::dict trace_dict(const ExplorationTrace& tr) {
  py::list steps;
  for (const auto& s : tr.steps) {
    py::dict step;
    step["m"] = s.m;
    step["revealed_label"] = s.revealed;
    step["chosen_line"] = s.line + 1;
    step["counts"] = s.counts;
    steps.append(step);
  }
  py::dict out;
  out["k"] = tr.k;
  out["starts"] = tr.starts;
  out["steps"] = steps;
  out["termination"] = tr.termination;
  out["terminal_label"] = tr.terminal_label;
  out["terminal_depth"] = tr.terminal_depth;
  out["coalesced_pair"] = py::make_tuple(tr.coalesced_pair.first + 1, tr.coalesced_pair.second + 1);
  out["starts_in_window"] = tr.starts_in_window;
  return out;
}

}  // namespace

PYBIND11_MODULE(_lmrt, m) {
  m.doc() = "Recursive trees with limited memory (C++ core)";
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.attr("GENERATOR") = kGeneratorName;
  m.def("derive_seed", &derive_seed, py::arg("master_seed"), py::arg("index"));

  py::class_<Tree>(m, "Tree")
      .def_static(
          "from_parents",
          [](const std::vector<Label>& parents) { return Tree::from_parents(parents); },
          py::arg("parents"))
      .def_property_readonly("n", &Tree::size)
      .def_property_readonly("seed", &Tree::seed)
      .def("parent", &Tree::parent, py::arg("v"))
      .def("parents", &Tree::parents)
      .def("height", [](const Tree& t) { return height(t); })
      .def("depths", [](const Tree& t) { return depths(t); })
      .def("depth_of", [](const Tree& t, Label v) { return depth_of(t, v); }, py::arg("v"))
      .def("ancestor_chain", [](const Tree& t, Label v) { return ancestor_chain(t, v); }, py::arg("v"))
      .def("degree_histogram", [](const Tree& t) { return degree_histogram(t); })
      .def("spine_distances", [](const Tree& t) { return spine_distances(t); })
      .def("max_dist_to_spine", [](const Tree& t) { return max_dist_to_spine(t); })
      .def(
          "fringe_at",
          [](const Tree& t, Label v, std::size_t cap) -> std::optional<std::string> {
            const auto f = fringe_at(t, v, cap);
            if (!f) return std::nullopt;
            return f->code;
          },
          py::arg("v"), py::arg("size_cap"))
      .def(
          "empirical_fringe", [](const Tree& t, std::size_t cap) { return fringe_dict(empirical_fringe(t, cap)); },
          py::arg("size_cap"))
      .def("to_csv",
           [](const Tree& t) {
             std::ostringstream os;
             write_parent_csv(t, os);
             return os.str();
           })
      .def("to_dot",
           [](const Tree& t) {
             std::ostringstream os;
             write_dot(t, os);
             return os.str();
           })
      .def("__len__", &Tree::size)
      .def("__eq__", [](const Tree& a, const Tree& b) { return a == b; });

  m.def(
      "tree_from_csv",
      [](const std::string& text) {
        std::istringstream in(text);
        return read_parent_csv(in);
      },
      py::arg("text"));

  m.def(
      "_grow_tree", [](const std::string& spec, Label n, std::uint64_t seed) { return grow_tree(schedule_of(spec), n, seed); },
      py::arg("schedule"), py::arg("n"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "_grow_streaming",
      [](const std::string& spec, Label n, std::uint64_t seed) {
        GrowthSummary g;
        {
          py::gil_scoped_release release;
          g = grow_streaming(schedule_of(spec), n, seed);
        }
        py::dict out;
        out["n"] = g.n;
        out["height"] = g.height;
        out["degree_histogram"] = g.degree_histogram;
        out["seed"] = g.seed;
        return out;
      },
      py::arg("schedule"), py::arg("n"), py::arg("seed"));
  m.def(
      "_describe", [](const std::string& spec) { return describe(schedule_of(spec)); }, py::arg("schedule"));

  m.def(
      "explore_ancestral_lines",
      [](const Tree& t, std::size_t k, std::optional<std::vector<Label>> starts) {
        return trace_dict(explore_ancestral_lines(t, k, starts));
      },
      py::arg("tree"), py::arg("k"), py::arg("starts") = py::none());
  m.def(
      "spanned_subtree",
      [](const Tree& t, const std::vector<Label>& leaves) {
        std::ostringstream os;
        write_spanned_json(spanned_subtree(t, leaves), os);
        return os.str();
      },
      py::arg("tree"), py::arg("leaves"));
  m.def(
      "simulate_chain",
      [](Label n, double beta, std::uint64_t seed, Label threshold, const std::string& convention) {
        ChainConvention c;
        if (convention == "model") c = ChainConvention::kModelConsistent;
        else if (convention == "paper") c = ChainConvention::kPaperLiteral;
        else throw InvalidArgument("convention must be 'model' or 'paper'");
        return simulate_chain(n, beta, seed, ChainStop{threshold}, c);
      },
      py::arg("n"), py::arg("beta"), py::arg("seed"), py::arg("threshold") = 0, py::arg("convention") = "model");
  m.def("chain_fluid_deviation", &chain_fluid_deviation, py::arg("chain"), py::arg("n"), py::arg("beta"),
        py::arg("t_max"));
  m.def(
      "branchpoint_statistics",
      [](double beta, Label n, std::size_t k, std::uint64_t reps, std::uint64_t master, unsigned threads) {
        std::vector<BranchpointRecord> recs;
        {
          py::gil_scoped_release release;
          recs = branchpoint_statistics(beta, n, k, reps, master, threads);
        }
        py::list out;
        for (const auto& r : recs) {
          py::dict d;
          d["replication"] = r.replication;
          d["seed"] = r.seed;
          d["depth"] = r.depth;
          d["scaled_depth"] = r.scaled_depth;
          d["termination"] = r.termination;
          d["max_line_imbalance"] = r.max_line_imbalance;
          out.append(d);
        }
        return out;
      },
      py::arg("beta"), py::arg("n"), py::arg("k"), py::arg("replications"), py::arg("master_seed"),
      py::arg("threads") = 1);

  // limits
  m.def("f_beta", &f_beta, py::arg("beta"), py::arg("t"));
  m.def("height_constant_meso", &height_constant_meso, py::arg("beta"));
  m.def("kappa", &kappa, py::arg("theta"), py::arg("tol") = 1e-9);
  m.def("alpha_max", &alpha_max, py::arg("theta"), py::arg("tol") = 1e-12);
  m.def("mu_of", &mu_of, py::arg("theta"), py::arg("a"), py::arg("tol") = 1e-12);
  m.def("phi", &phi, py::arg("theta"), py::arg("lambda_"));
  m.def("lambda_mgf", &lambda_mgf, py::arg("theta"), py::arg("lambda_"));
  m.def("legendre", &legendre, py::arg("theta"), py::arg("z"));
  m.def("psi", &psi, py::arg("theta"), py::arg("c"));
  m.def(
      "height_constants",
      [](double theta, double tol) {
        const auto h = height_constants(theta, tol);
        py::dict d;
        d["theta"] = h.theta;
        d["kappa"] = h.kappa;
        d["alpha_max"] = h.alpha_max;
        d["mu_drift"] = h.mu_drift;
        d["c_theta"] = h.c_theta;
        d["solver_tolerance"] = h.solver_tolerance;
        return d;
      },
      py::arg("theta"), py::arg("tol") = 1e-9);
  m.def("meso_degree_pmf", &meso_degree_pmf, py::arg("k"));
  m.def("macro_degree_pmf", &macro_degree_pmf, py::arg("theta"), py::arg("k"), py::arg("quad_tol") = 1e-10);
  m.def("poisson_gw_shape_probability", [](const std::string& code) { return poisson_gw_shape_probability(code); },
        py::arg("code"));
  m.def("enumerate_shapes", &enumerate_shapes, py::arg("max_size"));
  m.def("branchpoint_sample", &branchpoint_sample, py::arg("k"), py::arg("seed"));
  m.def("branchpoint_cdf", &branchpoint_cdf, py::arg("k"), py::arg("l"), py::arg("x"));
  m.def(
      "sample_poisson_gw",
      [](std::uint64_t seed, std::size_t cap) -> std::optional<std::string> {
        const auto f = sample_poisson_gw(seed, cap);
        if (!f) return std::nullopt;
        return f->code;
      },
      py::arg("seed"), py::arg("size_cap"));
  m.def(
      "sample_macro_fringe",
      [](double theta, std::uint64_t seed, std::size_t cap) -> std::optional<std::string> {
        const auto f = sample_macro_fringe(theta, seed, cap);
        if (!f) return std::nullopt;
        return f->code;
      },
      py::arg("theta"), py::arg("seed"), py::arg("size_cap"));
  m.def("n_j_count", &n_j_count, py::arg("j"), py::arg("beta"));

  // statistics
  m.def(
      "ks_one_sample",
      [](const std::vector<double>& sample, const std::function<double(double)>& cdf) {
        return ks_one_sample(sample, cdf);
      },
      py::arg("sample"), py::arg("cdf"));
  m.def("dkw_epsilon", &dkw_epsilon, py::arg("m"), py::arg("alpha"));
  m.def(
      "tv_distance",
      [](const std::map<std::string, double>& p, const std::map<std::string, double>& q) { return tv_distance(p, q); },
      py::arg("p"), py::arg("q"));

  // sweeps: JSON in, JSON out
  m.def(
      "_run_sweep",
      [](const std::string& config) {
        SweepConfig c;
        try {
          c = SweepConfig::from_json(Json::parse(config));
        } catch (const Json::exception& e) {
          throw InvalidArgument(std::string("sweep config: ") + e.what());
        }
        ReplicationReport r;
        {
          py::gil_scoped_release release;
          r = run_sweep(c);
        }
        return r.to_json().dump();
      },
      py::arg("config"));
}
