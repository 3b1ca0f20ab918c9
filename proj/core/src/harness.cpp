#include "gridh2/harness.hpp"

#include <algorithm>
#include <cmath>

#include "gridh2/error.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

PowerNetwork random_connected_network(Rng& rng, const RandomNetworkOptions& options) {
  std::uniform_int_distribution<std::size_t> size_dist(options.min_nodes, options.max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size_dist(rng);

  PowerNetwork net;
  net.gamma = log_uniform(rng, options.gamma_lo, options.gamma_hi);
  const double shared_m = log_uniform(rng, options.param_lo, options.param_hi);
  const double shared_d = log_uniform(rng, options.param_lo, options.param_hi);
  for (std::size_t i = 0; i < n; ++i) {
    Node node;
    node.id = "n" + std::to_string(i);
    node.kind = i % 2 == 0 ? NodeKind::kMachine : NodeKind::kConverter;
    node.inertia = options.homogeneous ? shared_m : log_uniform(rng, options.param_lo, options.param_hi);
    node.damping = options.homogeneous ? shared_d : log_uniform(rng, options.param_lo, options.param_hi);
    net.nodes.push_back(node);
  }
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> parent(0, k - 1);
    const std::size_t j = parent(rng);
    net.edges.push_back({j, k, log_uniform(rng, options.param_lo, options.param_hi)});
    linked[j][k] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (linked[i][j]) continue;
      if (unit(rng) < options.extra_edge_probability) {
        net.edges.push_back({i, j, log_uniform(rng, options.param_lo, options.param_hi)});
      }
    }
  }
  return net;
}

BoundsReport run_bounds_harness(std::size_t instances, std::uint64_t master_seed) {
  BoundsReport report;
  report.instances = instances;
  RandomNetworkOptions options;
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = make_rng(master_seed, i);
    BoundFinding finding;
    finding.instance = i;
    finding.master_seed = master_seed;
    try {
      const PowerNetwork net = random_connected_network(rng, options);
      finding.nodes = net.size();
      const SpectralData spec = build_laplacian(net);
      const H2Bounds bounds = h2_bounds(spec.eigenvalues, net.inertia(), net.damping(), net.gamma);
      const double h2 = h2_norm(deflate(assemble(net, spec))).h2_squared;
      finding.lower = bounds.lower;
      finding.upper = bounds.upper;
      finding.h2_squared = h2;
      const double slack = 1e-9 * std::max(1.0, bounds.upper);
      if (h2 < bounds.lower - slack) {
        ++report.lower_violations;
        finding.kind = "lower";
        report.findings.push_back(finding);
      }
      if (h2 > bounds.upper + slack) {
        ++report.upper_violations;
        finding.kind = "upper";
        report.findings.push_back(finding);
      }
      if (bounds.upper - bounds.lower > bounds.gap_estimate + slack) {
        ++report.gap_failures;
        finding.kind = "gap";
        report.findings.push_back(finding);
      }
      const SpectrumNorms norms = spectrum_norms(spec.eigenvalues);
      const double tol = 1e-9 * std::max(1.0, norms.one);
      const double n = static_cast<double>(net.size());
      if (!(norms.inf <= norms.two + tol && norms.two <= norms.one + tol &&
            norms.one <= n * norms.inf + tol)) {
        ++report.norm_chain_failures;
        finding.kind = "norm_chain";
        report.findings.push_back(finding);
      }
    } catch (const std::exception& e) {
      ++report.crashes;
      finding.kind = std::string("crash: ") + e.what();
      report.findings.push_back(finding);
    }
  }
  return report;
}

ComparisonReport run_oracle_harness(std::size_t instances, std::uint64_t master_seed,
                                    double tolerance) {
  ComparisonReport report;
  report.instances = instances;
  report.master_seed = master_seed;
  report.tolerance = tolerance;
  RandomNetworkOptions options;
  options.min_nodes = 2;
  options.max_nodes = 10;
  options.param_lo = 0.1;
  options.param_hi = 10.0;
  options.gamma_lo = 0.1;
  options.gamma_hi = 10.0;
  options.homogeneous = true;
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = make_rng(master_seed, i);
    double err = INFINITY;
    try {
      const PowerNetwork net = random_connected_network(rng, options);
      const SpectralData spec = build_laplacian(net);
      const double lyap = h2_norm(deflate(assemble(net, spec))).h2_squared;
      const double closed =
          closed_form_h2(spec.eigenvalues, net.nodes[0].inertia, net.nodes[0].damping, net.gamma);
      err = std::abs(lyap - closed) / std::max(std::abs(closed), 1e-300);
    } catch (const Error&) {
    }
    report.max_relative_error = std::max(report.max_relative_error, err);
    if (!(err <= tolerance)) {
      ++report.failures;
      report.failing_instances.push_back(i);
    }
  }
  return report;
}

ComparisonReport run_gradient_harness(std::size_t instances, std::uint64_t master_seed,
                                      double tolerance) {
  ComparisonReport report;
  report.instances = instances;
  report.master_seed = master_seed;
  report.tolerance = tolerance;
  RandomNetworkOptions options;
  options.min_nodes = 2;
  options.max_nodes = 6;
  options.param_lo = 0.5;
  options.param_hi = 2.0;
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = make_rng(master_seed, i);
    double err = INFINITY;
    try {
      const PowerNetwork net = random_connected_network(rng, options);
      const SpectralData spec = build_laplacian(net);
      const Eigen::VectorXd m = net.inertia();
      const Eigen::VectorXd d = net.damping();
      const H2Sensitivity adj = h2_sensitivity(m, d, spec, net.gamma);
      auto value = [&](const Eigen::VectorXd& mm, const Eigen::VectorXd& dd) {
        return h2_norm(deflate(assemble(mm, dd, spec, net.gamma))).h2_squared;
      };
      Eigen::VectorXd fd(2 * m.size());
      Eigen::VectorXd an(2 * m.size());
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        const double hm = 1e-5 * m(k);
        Eigen::VectorXd mp = m, mn = m;
        mp(k) += hm;
        mn(k) -= hm;
        fd(k) = (value(mp, d) - value(mn, d)) / (2.0 * hm);
        an(k) = adj.d_inertia(k);
        const double hd = 1e-5 * d(k);
        Eigen::VectorXd dp = d, dn = d;
        dp(k) += hd;
        dn(k) -= hd;
        fd(m.size() + k) = (value(m, dp) - value(m, dn)) / (2.0 * hd);
        an(m.size() + k) = adj.d_damping(k);
      }
      // Componentwise relative error, floored at 1e-3 of the largest entry so
      // vanishing components do not divide by round-off.
      const double floor = 1e-3 * fd.cwiseAbs().maxCoeff();
      err = 0.0;
      for (Eigen::Index k = 0; k < fd.size(); ++k) {
        err = std::max(err, std::abs(an(k) - fd(k)) / std::max(std::abs(fd(k)), floor));
      }
    } catch (const Error&) {
    }
    report.max_relative_error = std::max(report.max_relative_error, err);
    if (!(err <= tolerance)) {
      ++report.failures;
      report.failing_instances.push_back(i);
    }
  }
  return report;
}

}  // namespace gridh2
