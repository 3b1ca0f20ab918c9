#include "gridh2/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gridh2/error.hpp"

namespace gridh2 {

InitialCondition InitialCondition::at_rest(Eigen::Index nodes) {
  return {Eigen::VectorXd::Zero(2 * nodes), Eigen::MatrixXd::Zero(2 * nodes, 2 * nodes)};
}

void validate(const InitialCondition& ic, Eigen::Index nodes) {
  if (ic.mean.size() != 2 * nodes) {
    throw Error(ErrorCode::kInvalidInput, "initial condition mean must have length 2n = " +
                                              std::to_string(2 * nodes));
  }
  if (ic.cov_factor.rows() != 2 * nodes || ic.cov_factor.cols() != 2 * nodes) {
    throw Error(ErrorCode::kInvalidInput, "initial condition cov_factor must be 2n x 2n");
  }
  if (!ic.mean.allFinite() || !ic.cov_factor.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "initial condition contains non-finite values");
  }
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::kExact ? "exact" : "em";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "em" || name == "euler-maruyama") return Scheme::kEulerMaruyama;
  if (name == "exact") return Scheme::kExact;
  throw Error(ErrorCode::kInvalidInput, "unknown scheme '" + std::string(name) + "'");
}

void validate(const SimulationConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::kInvalidInput, "dt must be positive");
  if (!(cfg.horizon > 0.0)) throw Error(ErrorCode::kInvalidInput, "horizon must be positive");
  if (cfg.dt > cfg.horizon / 100.0) {
    throw Error(ErrorCode::kInvalidInput, "dt must not exceed horizon/100");
  }
  if (!(cfg.burn_in >= 0.0) || !(cfg.burn_in < cfg.horizon)) {
    throw Error(ErrorCode::kInvalidInput, "burn_in must lie in [0, horizon)");
  }
  if (cfg.trials == 0) throw Error(ErrorCode::kInvalidInput, "trials must be positive");
  if (cfg.record_stride == 0) {
    throw Error(ErrorCode::kInvalidInput, "record_stride must be positive");
  }
}

Eigen::MatrixXd SimulationEnsemble::frequency_series(std::size_t trajectory_index) const {
  return trajectories.at(trajectory_index).states.rightCols(nodes);
}

Eigen::VectorXd sample_initial(const InitialCondition& ic, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(ic.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return ic.mean + ic.cov_factor * z;
}

namespace {

constexpr std::uint64_t kInitialStream = 0;
constexpr std::uint64_t kNoiseStream = 1;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Row-major dense copies so the inner loop stays free of expression templates.
struct StepOperator {
  std::size_t dim = 0;
  std::size_t noise_dim = 0;
  std::vector<double> transition;  // dim x dim: x_next = transition * x + noise
  std::vector<double> noise;       // dim x noise_dim
  std::vector<double> output;      // 2n x dim
};

StepOperator make_operator(const Eigen::MatrixXd& transition, const Eigen::MatrixXd& noise,
                           const Eigen::MatrixXd& output) {
  StepOperator op;
  op.dim = static_cast<std::size_t>(transition.rows());
  op.noise_dim = static_cast<std::size_t>(noise.cols());
  op.transition.resize(op.dim * op.dim);
  op.noise.resize(op.dim * op.noise_dim);
  op.output.resize(static_cast<std::size_t>(output.rows()) * op.dim);
  for (std::size_t i = 0; i < op.dim; ++i) {
    for (std::size_t j = 0; j < op.dim; ++j) {
      op.transition[i * op.dim + j] = transition(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < op.noise_dim; ++j) {
      op.noise[i * op.noise_dim + j] = noise(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j));
    }
  }
  for (Eigen::Index i = 0; i < output.rows(); ++i) {
    for (std::size_t j = 0; j < op.dim; ++j) {
      op.output[static_cast<std::size_t>(i) * op.dim + j] =
          output(i, static_cast<Eigen::Index>(j));
    }
  }
  return op;
}

double output_energy(const StepOperator& op, const std::vector<double>& x) {
  const std::size_t rows = op.output.size() / op.dim;
  double energy = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = &op.output[i * op.dim];
    double y = 0.0;
    for (std::size_t j = 0; j < op.dim; ++j) y += row[j] * x[j];
    energy += y * y;
  }
  return energy;
}

struct RunLayout {
  std::size_t steps = 0;
  std::size_t first_averaged = 0;
  std::size_t recorded_rows = 0;
};

RunLayout layout_for(const SimulationConfig& cfg) {
  RunLayout l;
  l.steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  l.first_averaged = static_cast<std::size_t>(std::ceil(cfg.burn_in / cfg.dt - 1e-9));
  l.first_averaged = std::min(l.first_averaged, l.steps);
  l.recorded_rows = l.steps / cfg.record_stride + 1;
  return l;
}

SimulationEnsemble run_ensemble(const StepOperator& op, const InitialCondition& ic,
                                const SimulationConfig& cfg, Eigen::Index nodes) {
  const RunLayout layout = layout_for(cfg);
  SimulationEnsemble ens;
  ens.nodes = nodes;
  ens.steps = layout.steps;
  ens.dt = cfg.dt;
  ens.burn_in = cfg.burn_in;
  ens.horizon = cfg.horizon;
  ens.trial_means = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.trials));
  ens.time_grid.resize(static_cast<Eigen::Index>(layout.recorded_rows));
  for (std::size_t r = 0; r < layout.recorded_rows; ++r) {
    ens.time_grid(static_cast<Eigen::Index>(r)) =
        static_cast<double>(r * cfg.record_stride) * cfg.dt;
  }
  const std::size_t recorded = std::min(cfg.record_trials, cfg.trials);
  ens.trajectories.resize(recorded);

  const double noise_scale = cfg.scheme == Scheme::kExact ? 1.0 : std::sqrt(cfg.dt);
  const std::size_t averaged_samples = layout.steps - layout.first_averaged + 1;

  auto run_trial = [&](std::size_t trial) {
    Rng init_rng = make_rng(cfg.seed, trial, kInitialStream);
    Rng noise_rng = make_rng(cfg.seed, trial, kNoiseStream);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Eigen::VectorXd x0 = sample_initial(ic, init_rng);
    std::vector<double> x(x0.data(), x0.data() + x0.size());
    std::vector<double> next(op.dim);
    std::vector<double> dw(op.noise_dim);

    Trajectory* traj = trial < recorded ? &ens.trajectories[trial] : nullptr;
    if (traj != nullptr) {
      traj->trial = trial;
      traj->states.resize(static_cast<Eigen::Index>(layout.recorded_rows),
                          static_cast<Eigen::Index>(op.dim));
    }
    auto record = [&](std::size_t k) {
      if (traj == nullptr || k % cfg.record_stride != 0) return;
      const auto row = static_cast<Eigen::Index>(k / cfg.record_stride);
      for (std::size_t j = 0; j < op.dim; ++j) {
        traj->states(row, static_cast<Eigen::Index>(j)) = x[j];
      }
    };

    CompensatedSum energy;
    record(0);
    if (layout.first_averaged == 0) energy.add(output_energy(op, x));
    for (std::size_t k = 1; k <= layout.steps; ++k) {
      for (std::size_t j = 0; j < op.noise_dim; ++j) dw[j] = noise_scale * normal(noise_rng);
      for (std::size_t i = 0; i < op.dim; ++i) {
        const double* row = &op.transition[i * op.dim];
        double acc = 0.0;
        for (std::size_t j = 0; j < op.dim; ++j) acc += row[j] * x[j];
        const double* nrow = &op.noise[i * op.noise_dim];
        for (std::size_t j = 0; j < op.noise_dim; ++j) acc += nrow[j] * dw[j];
        next[i] = acc;
      }
      x.swap(next);
      record(k);
      if (k >= layout.first_averaged) energy.add(output_energy(op, x));
    }
    ens.trial_means(static_cast<Eigen::Index>(trial)) =
        energy.value() / static_cast<double>(averaged_samples);
  };

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg.trials)));
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < cfg.trials; t += workers) run_trial(t);
      });
    }
  }

  if (cfg.trials >= 2) {
    const H2Estimate est = empirical_h2(ens);
    ens.empirical_h2_squared = est.estimate;
    ens.empirical_h2_stderr = est.standard_error;
  } else {
    ens.empirical_h2_squared = ens.trial_means(0);
  }
  return ens;
}

void check_step_stability(const StateSpace& ss, double dt) {
  const DeflatedSystem sys = deflate(ss);
  const Eigen::MatrixXd step =
      Eigen::MatrixXd::Identity(sys.a_r.rows(), sys.a_r.cols()) + dt * sys.a_r;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(step, false);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigenvalue computation failed");
  }
  const double radius = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0)) {
    std::ostringstream msg;
    msg << "explicit step is unstable at dt = " << dt << " (spectral radius " << radius
        << "); reduce dt";
    throw Error(ErrorCode::kUnstableStep, msg.str());
  }
}

}  // namespace

SimulationEnsemble euler_maruyama(const StateSpace& ss, const InitialCondition& ic,
                                  const SimulationConfig& cfg) {
  validate(cfg);
  validate(ic, ss.nodes());
  check_step_stability(ss, cfg.dt);
  const Eigen::Index dim = ss.a.rows();
  const Eigen::MatrixXd transition = Eigen::MatrixXd::Identity(dim, dim) + cfg.dt * ss.a;
  SimulationConfig em = cfg;
  em.scheme = Scheme::kEulerMaruyama;
  return run_ensemble(make_operator(transition, ss.r, ss.c), ic, em, ss.nodes());
}

namespace {

SimulationEnsemble exact_scheme(const StateSpace& ss, const InitialCondition& ic,
                                const SimulationConfig& cfg) {
  validate(cfg);
  validate(ic, ss.nodes());
  // Also rejects disconnected networks, like the explicit scheme.
  deflate(ss);
  const Eigen::Index dim = ss.a.rows();
  // Van Loan: exp([[-A, R R^T], [0, A^T]] dt) = [[*, F12], [0, F22]] with
  // Phi = F22^T and the one-step covariance Q_d = Phi F12.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
  h.topLeftCorner(dim, dim) = -ss.a;
  h.topRightCorner(dim, dim) = ss.r * ss.r.transpose();
  h.bottomRightCorner(dim, dim) = ss.a.transpose();
  const Eigen::MatrixXd e = (h * cfg.dt).exp();
  const Eigen::MatrixXd phi = e.bottomRightCorner(dim, dim).transpose();
  Eigen::MatrixXd qd = phi * e.topRightCorner(dim, dim);
  qd = 0.5 * (qd + qd.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qd);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "step covariance factorization failed");
  }
  const Eigen::VectorXd root =
      eig.eigenvalues().unaryExpr([](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();
  return run_ensemble(make_operator(phi, factor, ss.c), ic, cfg, ss.nodes());
}

}  // namespace

SimulationEnsemble simulate(const StateSpace& ss, const InitialCondition& ic,
                            const SimulationConfig& cfg) {
  if (cfg.scheme == Scheme::kExact) return exact_scheme(ss, ic, cfg);
  return euler_maruyama(ss, ic, cfg);
}

H2Estimate empirical_h2(const SimulationEnsemble& ens) {
  const Eigen::Index trials = ens.trial_means.size();
  if (trials < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "empirical_h2 needs at least two trials for a standard error");
  }
  if (!(ens.burn_in < ens.horizon)) {
    throw Error(ErrorCode::kInvalidInput, "burn_in must be below the horizon");
  }
  CompensatedSum sum;
  for (Eigen::Index t = 0; t < trials; ++t) sum.add(ens.trial_means(t));
  const double mean = sum.value() / static_cast<double>(trials);
  CompensatedSum sq;
  for (Eigen::Index t = 0; t < trials; ++t) {
    const double dev = ens.trial_means(t) - mean;
    sq.add(dev * dev);
  }
  const double var = sq.value() / static_cast<double>(trials - 1);
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

}  // namespace gridh2
