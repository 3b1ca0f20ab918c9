#include "gridh2_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "gridh2/case_bank.hpp"
#include "gridh2/dynamics.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2/harness.hpp"
#include "gridh2/optimize.hpp"
#include "gridh2/simulate.hpp"
#include "gridh2_cli/json_io.hpp"
#include "gridh2_cli/svg.hpp"

namespace gridh2::cli {

namespace fs = std::filesystem;

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v, int precision = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string paint(const GlobalOptions& g, const std::string& text, bool good) {
  if (!g.color) return text;
  return std::string(good ? "\033[32m" : "\033[31m") + text + "\033[0m";
}

// Left-aligned text table with a header rule.
class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> width;
    for (const auto& row : rows_) {
      width.resize(std::max(width.size(), row.size()), 0);
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      for (std::size_t c = 0; c < rows_[r].size(); ++c) {
        const bool last = c + 1 == rows_[r].size();
        out << (c ? "  " : "") << std::left << std::setw(last ? 0 : static_cast<int>(width[c]))
            << rows_[r][c];
      }
      out << '\n';
      if (r == 0) {
        std::size_t total = 0;
        for (std::size_t w : width) total += w + 2;
        out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
      }
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kInvalidInput, "failed writing '" + path.string() + "'");
}

fs::path output_dir(const GlobalOptions& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kInvalidInput, "cannot create '" + g.out_dir + "': " + ec.message());
  return dir;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

template <class Fn>
int guarded(Streams io, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    io.err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    io.err << "error [invalid_input]: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::bad_alloc&) {
    io.err << "error [numerical_failure]: out of memory\n";
    return kExitNumerical;
  }
}

const char* kind_name(NodeKind k) { return k == NodeKind::kMachine ? "machine" : "converter"; }

// Groups for plotting: case-bank areas when known, otherwise one per node.
std::vector<std::vector<std::size_t>> plot_areas(const std::string& source, std::size_t n) {
  if (source.rfind("case:", 0) == 0) {
    const CaseBankEntry& c = find_case(source.substr(5));
    if (!c.areas.empty()) return c.areas;
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({i});
  return out;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kNonZeroFirstEigenvalue:
    case ErrorCode::kInsufficientSamples:
    case ErrorCode::kTooLarge:
      return kExitInvalid;
    case ErrorCode::kDisconnectedNetwork:
      return kExitDisconnected;
    case ErrorCode::kNotHurwitz:
    case ErrorCode::kNumericalFailure:
      return kExitNumerical;
    case ErrorCode::kUnstableStep:
      return kExitUnstableStep;
    case ErrorCode::kInfeasible:
      return kExitInfeasible;
  }
  return kExitNumerical;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int run_analyze(const GlobalOptions& g, const std::string& network, Streams io) {
  return guarded(io, [&] {
    const NetworkDocument doc = load_network(network);
    const PowerNetwork& net = doc.network;
    if (!is_connected(net)) {
      throw Error(ErrorCode::kDisconnectedNetwork,
                  "network has " + std::to_string(count_components(
                                       net.size(), [&] {
                                         EdgeList e;
                                         for (const Edge& x : net.edges) e.emplace_back(x.from, x.to);
                                         return e;
                                       }())) +
                      " components");
    }
    const GramianResult h2 = h2_norm(net);
    const SpectralData spec = build_laplacian(net);
    const H2Bounds bounds = h2_bounds(spec.eigenvalues, net.inertia(), net.damping(), net.gamma);
    const SpectrumNorms norms = spectrum_norms(spec.eigenvalues);
    const Eigen::VectorXd centrality = mode_centrality(net, bounds.m_min, bounds.d_min);
    const double slack = 1e-9 * std::max(1.0, h2.h2_squared);
    const bool lower_ok = bounds.lower <= h2.h2_squared + slack;
    const bool upper_ok = h2.h2_squared <= bounds.upper + slack;

    Json report;
    report["network"] = network;
    report["nodes"] = net.size();
    report["edges"] = net.edges.size();
    report["gamma"] = net.gamma;
    report["h2_squared"] = h2.h2_squared;
    report["h2_norm"] = std::sqrt(h2.h2_squared);
    report["lyapunov_residual"] = h2.residual;
    report["spectrum"] = vector_json(spec.eigenvalues);
    report["spectrum_norms"] = {{"inf", norms.inf}, {"two", norms.two}, {"one", norms.one}};
    report["bounds"] = {{"lower", bounds.lower},
                        {"upper", bounds.upper},
                        {"gap_estimate", bounds.gap_estimate},
                        {"lower_holds", lower_ok},
                        {"upper_holds", upper_ok},
                        {"m_min", bounds.m_min},
                        {"m_max", bounds.m_max},
                        {"d_min", bounds.d_min},
                        {"d_max", bounds.d_max}};
    report["mode_centrality"] = {{"inertia", bounds.m_min},
                                 {"damping", bounds.d_min},
                                 {"values", vector_json(centrality)}};

    if (!g.out_dir.empty()) write_file(output_dir(g) / "analysis.json", dump(report));
    if (g.json) {
      io.out << dump(report);
    } else if (!g.quiet) {
      io.out << "network      " << network << " (" << net.size() << " nodes, " << net.edges.size()
             << " edges, gamma " << num(net.gamma) << ")\n"
             << "h2_squared   " << num(h2.h2_squared, 12) << "\n"
             << "h2_norm      " << num(std::sqrt(h2.h2_squared), 12) << "\n"
             << "residual     " << num(h2.residual, 3) << "\n"
             << "lower bound  " << num(bounds.lower, 12) << "  "
             << paint(g, lower_ok ? "[holds]" : "[violated]", lower_ok) << "\n"
             << "upper bound  " << num(bounds.upper, 12) << "  "
             << paint(g, upper_ok ? "[holds]" : "[violated]", upper_ok) << "\n"
             << "gap estimate " << num(bounds.gap_estimate, 12) << "\n\n";
      Table nodes({"node", "id", "kind", "inertia", "damping", "angle_star"});
      for (std::size_t i = 0; i < net.size(); ++i) {
        const Node& n = net.nodes[i];
        nodes.add({std::to_string(i), n.id, kind_name(n.kind), num(n.inertia), num(n.damping),
                   num(n.angle_star)});
      }
      nodes.print(io.out);
      io.out << '\n';
      Table modes({"mode", "eigenvalue", "centrality"});
      for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
        modes.add({std::to_string(k + 1), num(spec.eigenvalues(k)),
                   k == 0 ? "-" : num(centrality(k - 1))});
      }
      modes.print(io.out);
    }
    return static_cast<int>(kExitOk);
  });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

namespace {

std::string trajectories_csv(const SimulationEnsemble& ens) {
  std::string out = "time,trial,node,theta,omega\n";
  char buf[160];
  const Eigen::Index n = ens.nodes;
  for (const Trajectory& t : ens.trajectories) {
    for (Eigen::Index r = 0; r < t.states.rows(); ++r) {
      for (Eigen::Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%zu,%ld,%.10g,%.10g\n", ens.time_grid(r), t.trial,
                      static_cast<long>(i), t.states(r, i), t.states(r, n + i));
        out += buf;
      }
    }
  }
  return out;
}

std::string frequency_svg(const SimulationEnsemble& ens, const PowerNetwork& net,
                          const std::vector<std::vector<std::size_t>>& areas) {
  std::vector<Series> series;
  if (ens.trajectories.empty()) return line_plot_svg({}, series);
  const Eigen::MatrixXd omega = ens.frequency_series(0);
  std::vector<double> time(ens.time_grid.data(), ens.time_grid.data() + ens.time_grid.size());
  for (std::size_t a = 0; a < areas.size(); ++a) {
    for (std::size_t k = 0; k < areas[a].size(); ++k) {
      const std::size_t i = areas[a][k];
      Series s;
      s.label = net.nodes[i].id + (areas.size() > 1 && areas.size() < net.size()
                                       ? " (area " + std::to_string(a + 1) + ")"
                                       : "");
      s.color = kPalette[(areas.size() == net.size() ? i : 2 * a + k) % std::size(kPalette)];
      s.x = time;
      for (Eigen::Index r = 0; r < omega.rows(); ++r) {
        s.y.push_back(net.nominal_frequency + omega(r, static_cast<Eigen::Index>(i)));
      }
      series.push_back(std::move(s));
    }
  }
  PlotSpec spec;
  spec.title = "Frequency response, trial " + std::to_string(ens.trajectories.front().trial);
  spec.x_label = "time (s)";
  spec.y_label = "omega* + omega (rad/s)";
  return line_plot_svg(spec, series);
}

}  // namespace

int run_simulate(const GlobalOptions& g, const SimulateOptions& o, Streams io) {
  return guarded(io, [&] {
    const NetworkDocument doc = load_network(o.network);
    const PowerNetwork& net = doc.network;
    if (!is_connected(net)) throw Error(ErrorCode::kDisconnectedNetwork, "network is disconnected");
    SimulationConfig cfg;
    cfg.dt = o.dt;
    cfg.horizon = o.horizon;
    cfg.burn_in = o.burn_in;
    cfg.trials = o.trials;
    cfg.seed = g.seed.value_or(0);
    cfg.scheme = parse_scheme(o.scheme);
    cfg.record_trials = std::min(o.record_trials, o.trials);
    cfg.record_stride = o.record_stride;
    cfg.threads = o.threads;
    validate(cfg);
    const auto n = static_cast<Eigen::Index>(net.size());
    const InitialCondition ic = doc.initial_condition.value_or(InitialCondition::at_rest(n));

    const SpectralData spec = build_laplacian(net);
    const StateSpace ss = assemble(net, spec);
    const double analytic = h2_norm(deflate(ss)).h2_squared;
    const SimulationEnsemble ens = simulate(ss, ic, cfg);
    const H2Estimate est = empirical_h2(ens);
    const double gap = std::abs(est.estimate - analytic) / std::max(analytic, 1e-300);

    Json summary;
    summary["network"] = o.network;
    summary["empirical_h2"] = est.estimate;
    summary["stderr"] = est.standard_error;
    summary["analytic_h2"] = analytic;
    summary["relative_gap"] = gap;
    summary["within_3_stderr"] = std::abs(est.estimate - analytic) <= 3.0 * est.standard_error;
    summary["config"] = {{"dt", cfg.dt},
                         {"horizon", cfg.horizon},
                         {"burn_in", cfg.burn_in},
                         {"trials", cfg.trials},
                         {"scheme", to_string(cfg.scheme)},
                         {"record_trials", cfg.record_trials},
                         {"record_stride", cfg.record_stride}};
    summary["seed"] = cfg.seed;

    if (!g.out_dir.empty()) {
      const fs::path dir = output_dir(g);
      write_file(dir / "trajectories.csv", trajectories_csv(ens));
      write_file(dir / "summary.json", dump(summary));
      if (o.plot) write_file(dir / "frequency.svg", frequency_svg(ens, net, plot_areas(o.network, net.size())));
    } else if (o.plot) {
      throw Error(ErrorCode::kInvalidInput, "--plot needs --out DIR");
    }
    if (g.json) {
      io.out << dump(summary);
    } else if (!g.quiet) {
      io.out << "network        " << o.network << "\n"
             << "scheme         " << to_string(cfg.scheme) << ", dt " << num(cfg.dt) << ", horizon "
             << num(cfg.horizon) << ", burn-in " << num(cfg.burn_in) << ", trials " << cfg.trials
             << ", seed " << cfg.seed << "\n"
             << "analytic h2^2  " << num(analytic, 10) << "\n"
             << "empirical h2^2 " << num(est.estimate, 10) << " +/- " << num(est.standard_error, 4)
             << "\n"
             << "relative gap   " << num(gap, 4) << "  "
             << paint(g, summary["within_3_stderr"].get<bool>() ? "[within 3 stderr]" : "[outside 3 stderr]",
                      summary["within_3_stderr"].get<bool>())
             << "\n";
      if (!g.out_dir.empty()) io.out << "wrote          " << g.out_dir << "\n";
    }
    return static_cast<int>(kExitOk);
  });
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

namespace {

std::string scenario_of(const OptimizeOptions& o, const Json* doc) {
  std::string from_doc;
  if (doc != nullptr) {
    if (const auto it = doc->find("scenario"); it != doc->end() && it->is_string()) {
      from_doc = it->get<std::string>();
    }
  }
  if (!o.scenario.empty() && !from_doc.empty() && o.scenario != from_doc) {
    throw Error(ErrorCode::kInvalidInput,
                "--scenario " + o.scenario + " does not match the file's scenario '" + from_doc + "'");
  }
  const std::string s = o.scenario.empty() ? from_doc : o.scenario;
  if (s.empty()) throw Error(ErrorCode::kInvalidInput, "no scenario given (use --scenario)");
  if (s != "susceptance" && s != "assignment" && s != "minmax" && s != "allocation") {
    throw Error(ErrorCode::kInvalidInput, "unknown scenario '" + s + "'");
  }
  return s;
}

std::string edges_text(const EdgeList& edges) {
  std::string out;
  for (const auto& [a, b] : edges) {
    out += (out.empty() ? "" : " ") + std::string("(") + std::to_string(a) + "," + std::to_string(b) + ")";
  }
  return out;
}

std::string vec_text(const Eigen::VectorXd& v, int precision = 8) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + num(v(i), precision);
  return out;
}

}  // namespace

int run_optimize(const GlobalOptions& g, const OptimizeOptions& o, Streams io) {
  return guarded(io, [&] {
    const bool from_case = o.problem.rfind("case:", 0) == 0;
    Json doc;
    if (!from_case) doc = load_json(o.problem);
    const std::string scenario = scenario_of(o, from_case ? nullptr : &doc);
    const CaseBankEntry* entry = from_case ? &find_case(o.problem.substr(5)) : nullptr;
    auto missing = [&] {
      return Error(ErrorCode::kInvalidInput,
                   "case '" + entry->name + "' has no " + scenario + " preset");
    };

    Json report;
    report["scenario"] = scenario;
    ScenarioSolution sol;
    double violation = 0.0;
    std::optional<double> uniform;
    std::vector<std::string> converter_ids;

    if (scenario == "susceptance") {
      SusceptanceProblem p;
      if (entry) {
        if (!entry->presets.susceptance) throw missing();
        p = *entry->presets.susceptance;
      } else {
        p = susceptance_from_json(doc);
      }
      report["problem"] = problem_json(p);
      sol = solve_susceptance(p);
      violation = feasibility_violation(p, sol);
    } else if (scenario == "assignment") {
      AssignmentProblem p;
      if (entry) {
        if (!entry->presets.assignment) throw missing();
        p = *entry->presets.assignment;
      } else {
        p = assignment_from_json(doc);
      }
      report["problem"] = problem_json(p);
      sol = solve_assignment(p);
      violation = feasibility_violation(p, sol);
    } else if (scenario == "minmax") {
      MinMaxProblem p;
      if (entry) {
        if (!entry->presets.minmax) throw missing();
        p = *entry->presets.minmax;
      } else {
        p = minmax_from_json(doc);
      }
      report["problem"] = problem_json(p);
      sol = solve_minmax(p);
      violation = feasibility_violation(p, sol);
    } else {
      AllocationProblem p;
      PowerNetwork net;
      Json network_json;
      if (entry) {
        if (!entry->presets.allocation) throw missing();
        p = *entry->presets.allocation;
        net = entry->network;
        network_json = o.problem;
      } else {
        p = allocation_from_json(doc, net);
        network_json = doc.at("network");
      }
      if (g.seed) p.seed = *g.seed;
      if (o.starts) p.starts = *o.starts;
      report["problem"] = problem_json(p, network_json);
      const AllocationDerived derived = derive_allocation(p, net);
      sol = solve_allocation(p, net);
      for (std::size_t i : p.converters) converter_ids.push_back(net.nodes[i].id);
      violation = feasibility_violation(p, net, sol);
      const auto n_c = static_cast<Eigen::Index>(p.converters.size());
      const Eigen::VectorXd m_u = Eigen::VectorXd::Constant(n_c, p.inertia_budget / static_cast<double>(n_c));
      const Eigen::VectorXd d_u = Eigen::VectorXd::Constant(n_c, derived.damping_sum / static_cast<double>(n_c));
      const bool inside = (m_u.array() >= p.m_lower.array()).all() && (m_u.array() <= p.m_upper.array()).all() &&
                          (d_u.array() >= p.d_lower.array()).all() && (d_u.array() <= p.d_upper.array()).all();
      report["derived"] = {{"p_bar", derived.p_bar},
                           {"sharing_ratio", derived.sharing_ratio},
                           {"damping_sum", derived.damping_sum}};
      if (inside) {
        uniform = allocation_objective(net, p.converters, m_u, d_u).value;
        report["uniform"] = {{"inertia", vector_json(m_u)},
                             {"damping", vector_json(d_u)},
                             {"objective", *uniform},
                             {"improvement", 1.0 - sol.objective / *uniform}};
      }
    }
    report["solution"] = solution_json(sol);
    report["feasibility_violation"] = violation;
    report["feasible"] = violation <= 1e-6;

    if (!g.out_dir.empty()) {
      const fs::path dir = output_dir(g);
      write_file(dir / ("solution_" + scenario + ".json"), dump(report));
      if (o.plot) {
        Series s;
        s.label = "objective";
        s.color = kPalette[0];
        for (std::size_t k = 0; k < sol.history.size(); ++k) {
          s.x.push_back(static_cast<double>(k));
          s.y.push_back(sol.history[k]);
        }
        PlotSpec spec;
        spec.title = "Convergence (" + scenario + ")";
        spec.x_label = "iteration";
        spec.y_label = "objective";
        write_file(dir / ("convergence_" + scenario + ".svg"), line_plot_svg(spec, {s}));
      }
    } else if (o.plot) {
      throw Error(ErrorCode::kInvalidInput, "--plot needs --out DIR");
    }

    if (g.json) {
      io.out << dump(report);
    } else if (!g.quiet) {
      io.out << "scenario     " << scenario << "\n";
      if (!sol.edges.empty()) io.out << "edges        " << edges_text(sol.edges) << "\n";
      if (sol.susceptances.size() > 0) io.out << "susceptances " << vec_text(sol.susceptances) << "\n";
      if (!sol.converters.empty()) {
        Table t({"converter", "id", "inertia", "damping", "power"});
        io.out << '\n';
        for (std::size_t k = 0; k < sol.converters.size(); ++k) {
          const auto i = static_cast<Eigen::Index>(sol.converters[k]);
          const auto kk = static_cast<Eigen::Index>(k);
          t.add({std::to_string(sol.converters[k]), converter_ids[k], num(sol.inertia(kk), 10), num(sol.damping(kk), 10), num(sol.steady_power(i), 6)});
        }
        t.print(io.out);
        io.out << '\n';
      }
      io.out << "objective    " << num(sol.objective, 10) << "\n";
      if (uniform) {
        io.out << "uniform      " << num(*uniform, 10) << "  (improvement "
               << num(100.0 * (1.0 - sol.objective / *uniform), 4) << "%)\n";
      }
      io.out << "feasibility  " << num(violation, 3) << "  "
             << paint(g, violation <= 1e-6 ? "[feasible]" : "[violated]", violation <= 1e-6) << "\n"
             << "iterations   " << sol.iterations << (sol.converged ? "" : " (limit reached)") << "\n"
             << "certificate  " << sol.certificate << "\n";
    }
    if (!sol.converged) {
      io.err << "warning: iteration limit reached; best iterate reported\n";
      return static_cast<int>(kExitMaxIterations);
    }
    return static_cast<int>(kExitOk);
  });
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(const GlobalOptions& g, const ValidateOptions& o, Streams io) {
  return guarded(io, [&] {
    if (o.instances == 0) throw Error(ErrorCode::kInvalidInput, "--instances must be at least 1");
    const std::uint64_t seed = g.seed.value_or(0);
    Json report;
    report["family"] = o.family;
    report["instances"] = o.instances;
    report["seed"] = seed;
    std::size_t hard = 0;
    std::vector<std::string> lines;

    if (o.family == "bounds") {
      const BoundsReport r = run_bounds_harness(o.instances, seed);
      hard = r.crashes + r.gap_failures + r.norm_chain_failures;
      report["lower_violations"] = r.lower_violations;
      report["upper_violations"] = r.upper_violations;
      report["gap_failures"] = r.gap_failures;
      report["norm_chain_failures"] = r.norm_chain_failures;
      report["crashes"] = r.crashes;
      Json findings = Json::array();
      for (const BoundFinding& f : r.findings) {
        findings.push_back({{"kind", f.kind},
                            {"instance", f.instance},
                            {"seed", f.master_seed},
                            {"nodes", f.nodes},
                            {"lower", f.lower},
                            {"h2_squared", f.h2_squared},
                            {"upper", f.upper}});
      }
      report["findings"] = std::move(findings);
      lines.push_back("lower-bound violations  " + std::to_string(r.lower_violations) + " (findings)");
      lines.push_back("upper-bound violations  " + std::to_string(r.upper_violations) + " (findings)");
      lines.push_back("gap failures            " + std::to_string(r.gap_failures));
      lines.push_back("norm-chain failures     " + std::to_string(r.norm_chain_failures));
      lines.push_back("crashes                 " + std::to_string(r.crashes));
      for (const BoundFinding& f : r.findings) {
        lines.push_back("  " + f.kind + ": instance " + std::to_string(f.instance) + " (seed " +
                        std::to_string(f.master_seed) + ", n = " + std::to_string(f.nodes) +
                        ") lower " + num(f.lower, 10) + ", h2 " + num(f.h2_squared, 10) +
                        ", upper " + num(f.upper, 10));
      }
    } else if (o.family == "oracle" || o.family == "gradients") {
      const ComparisonReport r = o.family == "oracle" ? run_oracle_harness(o.instances, seed)
                                                      : run_gradient_harness(o.instances, seed);
      hard = r.failures;
      report["passed"] = r.instances - r.failures;
      report["failures"] = r.failures;
      report["max_relative_error"] = r.max_relative_error;
      report["tolerance"] = r.tolerance;
      report["failing_instances"] = r.failing_instances;
      lines.push_back("matches                 " + std::to_string(r.instances - r.failures) + "/" +
                      std::to_string(r.instances) + " within " + num(r.tolerance, 2));
      lines.push_back("max relative error      " + num(r.max_relative_error, 4));
      for (std::size_t i : r.failing_instances) {
        lines.push_back("  failure: instance " + std::to_string(i) + " (seed " + std::to_string(seed) + ")");
      }
    } else {
      throw Error(ErrorCode::kInvalidInput,
                  "unknown family '" + o.family + "' (expected bounds, gradients or oracle)");
    }
    report["hard_failures"] = hard;
    report["passed_all"] = hard == 0;

    if (!g.out_dir.empty()) write_file(output_dir(g) / ("validate_" + o.family + ".json"), dump(report));
    if (g.json) {
      io.out << dump(report);
    } else if (!g.quiet) {
      io.out << "family                  " << o.family << " (" << o.instances << " instances, seed "
             << seed << ")\n";
      for (const std::string& l : lines) io.out << l << '\n';
      io.out << "result                  "
             << paint(g, hard == 0 ? "PASS" : "FAIL (" + std::to_string(hard) + " hard failures)", hard == 0)
             << '\n';
    }
    return hard == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitNumerical);
  });
}

// ---------------------------------------------------------------------------
// cases
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> preset_names(const CaseBankEntry& c) {
  std::vector<std::string> out;
  if (c.presets.susceptance) out.emplace_back("susceptance");
  if (c.presets.assignment) out.emplace_back("assignment");
  if (c.presets.minmax) out.emplace_back("minmax");
  if (c.presets.allocation) out.emplace_back("allocation");
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += (out.empty() ? "" : ",") + p;
  return out.empty() ? "-" : out;
}

Json case_json(const CaseBankEntry& c) {
  Json doc;
  doc["name"] = c.name;
  doc["description"] = c.description;
  doc["provenance"] = c.provenance;
  doc["network"] = network_to_json(c.network, &c.initial_condition);
  doc["areas"] = c.areas;
  Json presets = Json::object();
  if (c.presets.susceptance) presets["susceptance"] = problem_json(*c.presets.susceptance);
  if (c.presets.assignment) presets["assignment"] = problem_json(*c.presets.assignment);
  if (c.presets.minmax) presets["minmax"] = problem_json(*c.presets.minmax);
  if (c.presets.allocation) presets["allocation"] = problem_json(*c.presets.allocation, "case:" + c.name);
  doc["presets"] = std::move(presets);
  return doc;
}

}  // namespace

int run_cases_list(const GlobalOptions& g, Streams io) {
  return guarded(io, [&] {
    if (g.json) {
      Json out = Json::array();
      for (const CaseBankEntry& c : case_bank()) {
        out.push_back({{"name", c.name},
                       {"nodes", c.network.size()},
                       {"edges", c.network.edges.size()},
                       {"presets", preset_names(c)},
                       {"description", c.description}});
      }
      io.out << dump(out);
    } else if (!g.quiet) {
      Table t({"name", "nodes", "edges", "presets", "description"});
      for (const CaseBankEntry& c : case_bank()) {
        t.add({c.name, std::to_string(c.network.size()), std::to_string(c.network.edges.size()),
               join(preset_names(c)), c.description});
      }
      t.print(io.out);
    }
    return static_cast<int>(kExitOk);
  });
}

int run_cases_show(const GlobalOptions& g, const std::string& name, Streams io) {
  return guarded(io, [&] {
    const CaseBankEntry& c = find_case(name);
    if (g.json) {
      io.out << dump(case_json(c));
      return static_cast<int>(kExitOk);
    }
    if (g.quiet) return static_cast<int>(kExitOk);
    io.out << "name        " << c.name << "\n"
           << "description " << c.description << "\n"
           << "provenance  " << c.provenance << "\n"
           << "gamma       " << num(c.network.gamma) << "\n"
           << "presets     " << join(preset_names(c)) << "\n\n";
    Table nodes({"node", "id", "kind", "inertia", "damping", "angle_star"});
    for (std::size_t i = 0; i < c.network.size(); ++i) {
      const Node& n = c.network.nodes[i];
      nodes.add({std::to_string(i), n.id, kind_name(n.kind), num(n.inertia), num(n.damping),
                 num(n.angle_star)});
    }
    nodes.print(io.out);
    io.out << '\n';
    Table edges({"edge", "from", "to", "susceptance"});
    for (std::size_t e = 0; e < c.network.edges.size(); ++e) {
      const Edge& x = c.network.edges[e];
      edges.add({std::to_string(e), std::to_string(x.from), std::to_string(x.to), num(x.susceptance)});
    }
    edges.print(io.out);
    return static_cast<int>(kExitOk);
  });
}

int run_cases_export(const GlobalOptions& g, const std::string& name, Streams io) {
  return guarded(io, [&] {
    const CaseBankEntry& c = find_case(name);
    const Json network = network_to_json(c.network, &c.initial_condition);
    if (g.out_dir.empty()) {
      io.out << dump(network);
      return static_cast<int>(kExitOk);
    }
    const fs::path dir = output_dir(g);
    std::vector<std::string> written;
    auto emit = [&](const std::string& file, const Json& doc) {
      write_file(dir / file, dump(doc));
      written.push_back((dir / file).string());
    };
    emit(c.name + ".network.json", network);
    if (c.presets.susceptance) emit(c.name + ".susceptance.json", problem_json(*c.presets.susceptance));
    if (c.presets.assignment) emit(c.name + ".assignment.json", problem_json(*c.presets.assignment));
    if (c.presets.minmax) emit(c.name + ".minmax.json", problem_json(*c.presets.minmax));
    if (c.presets.allocation) {
      emit(c.name + ".allocation.json", problem_json(*c.presets.allocation, network));
    }
    if (g.json) {
      io.out << dump(Json{{"case", c.name}, {"files", written}});
    } else if (!g.quiet) {
      for (const std::string& f : written) io.out << "wrote " << f << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace gridh2::cli
