#include "gridh2_cli/json_io.hpp"

#include <fstream>
#include <sstream>

#include "gridh2/case_bank.hpp"
#include "gridh2/error.hpp"

namespace gridh2::cli {

namespace {

constexpr std::string_view kCasePrefix = "case:";

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kInvalidInput, path + ": " + what);
}

const Json& member(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

double number(const Json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

double number_or(const Json& obj, const std::string& key, double fallback,
                 const std::string& path) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, path + "." + key);
}

std::size_t index(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema_error(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t index_or(const Json& obj, const std::string& key, std::size_t fallback,
                     const std::string& path) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : index(*it, path + "." + key);
}

bool bool_or(const Json& obj, const std::string& key, bool fallback, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) schema_error(path + "." + key, "expected true or false");
  return it->get<bool>();
}

std::string string_or(const Json& obj, const std::string& key, const std::string& fallback,
                      const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) schema_error(path + "." + key, "expected a string");
  return it->get<std::string>();
}

Eigen::VectorXd vector(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Eigen::VectorXd vector_or_zero(const Json& obj, const std::string& key, std::size_t n,
                               const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return vector(*it, path + "." + key);
}

EdgeList edge_pairs(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of [from, to] pairs");
  EdgeList out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != 2) schema_error(p, "expected [from, to]");
    out.emplace_back(index(v[i][0], p + "[0]"), index(v[i][1], p + "[1]"));
  }
  return out;
}

Json edges_json(const EdgeList& edges) {
  Json out = Json::array();
  for (const auto& [a, b] : edges) out.push_back({a, b});
  return out;
}

CostMode cost_mode(const Json& obj, const std::string& path) {
  const std::string mode = string_or(obj, "cost_mode", "equality", path);
  if (mode == "equality") return CostMode::kEquality;
  if (mode == "inequality") return CostMode::kInequality;
  schema_error(path + ".cost_mode", "expected \"equality\" or \"inequality\"");
}

std::string_view cost_mode_name(CostMode mode) {
  return mode == CostMode::kEquality ? "equality" : "inequality";
}

SearchStrategy strategy(const Json& obj, const std::string& path) {
  try {
    return parse_strategy(string_or(obj, "strategy", "exhaustive", path));
  } catch (const Error& e) {
    schema_error(path + ".strategy", e.what());
  }
}

Eigen::MatrixXd matrix(const Json& v, Eigen::Index rows, Eigen::Index cols,
                       const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(rows)) {
    schema_error(path, "expected " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(cols)) {
      schema_error(p, "expected " + std::to_string(cols) + " columns");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = number(row[static_cast<std::size_t>(j)], p + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

InitialCondition initial_condition(const Json& v, std::size_t n, const std::string& path) {
  const auto dim = static_cast<Eigen::Index>(2 * n);
  InitialCondition ic;
  ic.mean = vector_or_zero(v, "mean", 2 * n, path);
  if (ic.mean.size() != dim) schema_error(path + ".mean", "expected length 2n = " + std::to_string(dim));
  ic.cov_factor = Eigen::MatrixXd::Zero(dim, dim);
  const auto it = v.find("cov_factor");
  if (it == v.end()) return ic;
  const std::string p = path + ".cov_factor";
  if (it->is_object()) {
    const Json& scaled = member(*it, "scaled_identity", p);
    const double theta = number(member(scaled, "theta_sigma", p + ".scaled_identity"),
                                p + ".scaled_identity.theta_sigma");
    const double omega = number(member(scaled, "omega_sigma", p + ".scaled_identity"),
                                p + ".scaled_identity.omega_sigma");
    const auto nn = static_cast<Eigen::Index>(n);
    ic.cov_factor.topLeftCorner(nn, nn).diagonal().setConstant(theta);
    ic.cov_factor.bottomRightCorner(nn, nn).diagonal().setConstant(omega);
  } else {
    ic.cov_factor = matrix(*it, dim, dim, p);
  }
  return ic;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into a line and column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw Error(ErrorCode::kInvalidInput, source + ": line " + std::to_string(line) + ", column " +
                                              std::to_string(column) + ": " + what);
  }
}

Json load_json(const std::string& path_or_case) {
  if (path_or_case.rfind(kCasePrefix, 0) == 0) {
    const CaseBankEntry& c = find_case(path_or_case.substr(kCasePrefix.size()));
    return network_to_json(c.network, &c.initial_condition);
  }
  std::ifstream in(path_or_case, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open '" + path_or_case + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path_or_case);
}

NetworkDocument network_from_json(const Json& doc) {
  NetworkDocument out;
  PowerNetwork& net = out.network;
  const Json& nodes = member(doc, "nodes", "$");
  if (!nodes.is_array()) schema_error("$.nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = "$.nodes[" + std::to_string(i) + "]";
    const Json& v = nodes[i];
    if (!v.is_object()) schema_error(p, "expected an object");
    Node node;
    node.id = string_or(v, "id", "n" + std::to_string(i), p);
    const std::string kind = string_or(v, "kind", "machine", p);
    if (kind == "machine") {
      node.kind = NodeKind::kMachine;
    } else if (kind == "converter") {
      node.kind = NodeKind::kConverter;
    } else {
      schema_error(p + ".kind", "expected \"machine\" or \"converter\"");
    }
    node.inertia = number(member(v, "inertia", p), p + ".inertia");
    node.damping = number(member(v, "damping", p), p + ".damping");
    node.angle_star = number_or(v, "angle_star", 0.0, p);
    if (const auto it = v.find("power_max"); it != v.end()) {
      node.power_max = number(*it, p + ".power_max");
    }
    net.nodes.push_back(std::move(node));
  }
  const Json& edges = member(doc, "edges", "$");
  if (!edges.is_array()) schema_error("$.edges", "expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string p = "$.edges[" + std::to_string(e) + "]";
    Edge edge;
    edge.from = index(member(edges[e], "from", p), p + ".from");
    edge.to = index(member(edges[e], "to", p), p + ".to");
    edge.susceptance = number(member(edges[e], "susceptance", p), p + ".susceptance");
    net.edges.push_back(edge);
  }
  net.gamma = number(member(doc, "gamma", "$"), "$.gamma");
  net.nominal_frequency = number_or(doc, "nominal_frequency", 1.0, "$");
  if (const auto it = doc.find("initial_condition"); it != doc.end()) {
    if (!it->is_object()) schema_error("$.initial_condition", "expected an object");
    out.initial_condition = initial_condition(*it, net.size(), "$.initial_condition");
  }
  return out;
}

Json network_to_json(const PowerNetwork& net, const InitialCondition* ic) {
  Json doc;
  Json nodes = Json::array();
  for (const Node& n : net.nodes) {
    Json v;
    v["id"] = n.id;
    v["kind"] = n.kind == NodeKind::kMachine ? "machine" : "converter";
    v["inertia"] = n.inertia;
    v["damping"] = n.damping;
    v["angle_star"] = n.angle_star;
    if (n.power_max) v["power_max"] = *n.power_max;
    nodes.push_back(std::move(v));
  }
  doc["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const Edge& e : net.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"susceptance", e.susceptance}});
  }
  doc["edges"] = std::move(edges);
  doc["gamma"] = net.gamma;
  doc["nominal_frequency"] = net.nominal_frequency;
  if (ic != nullptr) {
    doc["initial_condition"] = {{"mean", vector_json(ic->mean)},
                                {"cov_factor", matrix_json(ic->cov_factor)}};
  }
  return doc;
}

NetworkDocument load_network(const std::string& path_or_case) {
  NetworkDocument doc = network_from_json(load_json(path_or_case));
  validate(doc.network);
  if (doc.initial_condition) validate(*doc.initial_condition, static_cast<Eigen::Index>(doc.network.size()));
  return doc;
}

SusceptanceProblem susceptance_from_json(const Json& doc) {
  SusceptanceProblem p;
  p.n_nodes = index(member(doc, "n_nodes", "$"), "$.n_nodes");
  p.edges = edge_pairs(member(doc, "edges", "$"), "$.edges");
  p.theta_star = vector_or_zero(doc, "theta_star", p.n_nodes, "$");
  p.b_min = vector(member(doc, "b_min", "$"), "$.b_min");
  p.b_max = vector(member(doc, "b_max", "$"), "$.b_max");
  const auto it = doc.find("costs");
  p.costs = it == doc.end() ? Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.edges.size()))
                            : vector(*it, "$.costs");
  p.budget = number(member(doc, "budget", "$"), "$.budget");
  p.m_min = number_or(doc, "m_min", 1.0, "$");
  p.d_min = number_or(doc, "d_min", 1.0, "$");
  p.gamma = number_or(doc, "gamma", 1.0, "$");
  p.cost_mode = cost_mode(doc, "$");
  p.max_iterations = static_cast<int>(index_or(doc, "max_iterations", 10000, "$"));
  p.tolerance = number_or(doc, "tolerance", 1e-8, "$");
  return p;
}

AssignmentProblem assignment_from_json(const Json& doc) {
  AssignmentProblem p;
  p.n_nodes = index(member(doc, "n_nodes", "$"), "$.n_nodes");
  p.edge_susceptances = vector(member(doc, "edge_susceptances", "$"), "$.edge_susceptances");
  p.theta_star = vector_or_zero(doc, "theta_star", p.n_nodes, "$");
  p.m_min = number_or(doc, "m_min", 1.0, "$");
  p.d_min = number_or(doc, "d_min", 1.0, "$");
  p.gamma = number_or(doc, "gamma", 1.0, "$");
  p.require_connected = bool_or(doc, "require_connected", false, "$");
  p.strategy = strategy(doc, "$");
  p.max_evaluations = number_or(doc, "max_evaluations", 1e7, "$");
  return p;
}

MinMaxProblem minmax_from_json(const Json& doc) {
  MinMaxProblem p;
  p.n_nodes = index(member(doc, "n_nodes", "$"), "$.n_nodes");
  p.b_min = vector(member(doc, "b_min", "$"), "$.b_min");
  p.b_max = vector(member(doc, "b_max", "$"), "$.b_max");
  const auto it = doc.find("costs");
  p.costs = it == doc.end() ? Eigen::VectorXd::Ones(p.b_min.size()) : vector(*it, "$.costs");
  p.budget = number(member(doc, "budget", "$"), "$.budget");
  p.cost_mode = cost_mode(doc, "$");
  p.theta_star = vector_or_zero(doc, "theta_star", p.n_nodes, "$");
  p.m_min = number_or(doc, "m_min", 1.0, "$");
  p.d_min = number_or(doc, "d_min", 1.0, "$");
  p.gamma = number_or(doc, "gamma", 1.0, "$");
  p.require_connected = bool_or(doc, "require_connected", true, "$");
  p.strategy = strategy(doc, "$");
  if (const auto t = doc.find("topology"); t != doc.end()) p.topology = edge_pairs(*t, "$.topology");
  p.max_iterations = static_cast<int>(index_or(doc, "max_iterations", 4000, "$"));
  p.max_topologies = number_or(doc, "max_topologies", 2e4, "$");
  return p;
}

AllocationProblem allocation_from_json(const Json& doc, PowerNetwork& net) {
  const Json& network = member(doc, "network", "$");
  if (network.is_string()) {
    net = load_network(network.get<std::string>()).network;
  } else {
    try {
      net = network_from_json(network).network;
    } catch (const Error& e) {
      // Re-anchor nested schema paths under $.network.
      std::string what = e.what();
      if (what.rfind("$", 0) == 0) what = "$.network" + what.substr(1);
      throw Error(e.code(), what);
    }
    validate(net);
  }
  AllocationProblem p;
  const Json& conv = member(doc, "converters", "$");
  if (!conv.is_array()) schema_error("$.converters", "expected an array of node indices");
  for (std::size_t i = 0; i < conv.size(); ++i) {
    p.converters.push_back(index(conv[i], "$.converters[" + std::to_string(i) + "]"));
  }
  p.machine_power = vector(member(doc, "machine_power", "$"), "$.machine_power");
  p.m_lower = vector(member(doc, "m_lower", "$"), "$.m_lower");
  p.m_upper = vector(member(doc, "m_upper", "$"), "$.m_upper");
  p.d_lower = vector(member(doc, "d_lower", "$"), "$.d_lower");
  p.d_upper = vector(member(doc, "d_upper", "$"), "$.d_upper");
  p.inertia_budget = number(member(doc, "inertia_budget", "$"), "$.inertia_budget");
  p.starts = index_or(doc, "starts", 8, "$");
  p.seed = index_or(doc, "seed", 0, "$");
  p.max_iterations = static_cast<int>(index_or(doc, "max_iterations", 3000, "$"));
  p.tolerance = number_or(doc, "tolerance", 1e-9, "$");
  return p;
}

Json problem_json(const SusceptanceProblem& p) {
  Json doc;
  doc["scenario"] = "susceptance";
  doc["n_nodes"] = p.n_nodes;
  doc["edges"] = edges_json(p.edges);
  doc["theta_star"] = vector_json(p.theta_star);
  doc["b_min"] = vector_json(p.b_min);
  doc["b_max"] = vector_json(p.b_max);
  doc["costs"] = vector_json(p.costs);
  doc["budget"] = p.budget;
  doc["cost_mode"] = cost_mode_name(p.cost_mode);
  doc["m_min"] = p.m_min;
  doc["d_min"] = p.d_min;
  doc["gamma"] = p.gamma;
  doc["max_iterations"] = p.max_iterations;
  doc["tolerance"] = p.tolerance;
  return doc;
}

Json problem_json(const AssignmentProblem& p) {
  Json doc;
  doc["scenario"] = "assignment";
  doc["n_nodes"] = p.n_nodes;
  doc["edge_susceptances"] = vector_json(p.edge_susceptances);
  doc["theta_star"] = vector_json(p.theta_star);
  doc["m_min"] = p.m_min;
  doc["d_min"] = p.d_min;
  doc["gamma"] = p.gamma;
  doc["require_connected"] = p.require_connected;
  doc["strategy"] = to_string(p.strategy);
  doc["max_evaluations"] = p.max_evaluations;
  return doc;
}

Json problem_json(const MinMaxProblem& p) {
  Json doc;
  doc["scenario"] = "minmax";
  doc["n_nodes"] = p.n_nodes;
  doc["b_min"] = vector_json(p.b_min);
  doc["b_max"] = vector_json(p.b_max);
  doc["costs"] = vector_json(p.costs);
  doc["budget"] = p.budget;
  doc["cost_mode"] = cost_mode_name(p.cost_mode);
  doc["theta_star"] = vector_json(p.theta_star);
  doc["m_min"] = p.m_min;
  doc["d_min"] = p.d_min;
  doc["gamma"] = p.gamma;
  doc["require_connected"] = p.require_connected;
  doc["strategy"] = to_string(p.strategy);
  if (p.topology) doc["topology"] = edges_json(*p.topology);
  doc["max_iterations"] = p.max_iterations;
  doc["max_topologies"] = p.max_topologies;
  return doc;
}

Json problem_json(const AllocationProblem& p, const Json& network) {
  Json doc;
  doc["scenario"] = "allocation";
  doc["network"] = network;
  doc["converters"] = p.converters;
  doc["machine_power"] = vector_json(p.machine_power);
  doc["m_lower"] = vector_json(p.m_lower);
  doc["m_upper"] = vector_json(p.m_upper);
  doc["d_lower"] = vector_json(p.d_lower);
  doc["d_upper"] = vector_json(p.d_upper);
  doc["inertia_budget"] = p.inertia_budget;
  doc["starts"] = p.starts;
  doc["seed"] = p.seed;
  doc["max_iterations"] = p.max_iterations;
  doc["tolerance"] = p.tolerance;
  return doc;
}

Json solution_json(const ScenarioSolution& s) {
  Json doc;
  doc["scenario"] = s.scenario;
  if (!s.edges.empty()) doc["edges"] = edges_json(s.edges);
  if (s.susceptances.size() > 0) doc["susceptances"] = vector_json(s.susceptances);
  if (!s.converters.empty()) {
    doc["converters"] = s.converters;
    doc["inertia"] = vector_json(s.inertia);
    doc["damping"] = vector_json(s.damping);
  }
  doc["objective"] = s.objective;
  doc["steady_power"] = vector_json(s.steady_power);
  doc["iterations"] = s.iterations;
  doc["converged"] = s.converged;
  doc["kkt_residual"] = s.kkt_residual;
  doc["certificate"] = s.certificate;
  doc["candidates_evaluated"] = s.candidates_evaluated;
  doc["history"] = s.history;
  if (!s.starts.empty()) {
    Json starts = Json::array();
    for (const StartRecord& r : s.starts) {
      starts.push_back({{"initial", vector_json(r.initial)},
                        {"initial_objective", r.initial_objective},
                        {"final", vector_json(r.final)},
                        {"final_objective", r.final_objective},
                        {"iterations", r.iterations},
                        {"converged", r.converged}});
    }
    doc["starts"] = std::move(starts);
  }
  return doc;
}

}  // namespace gridh2::cli
