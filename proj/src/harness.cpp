// harness.cpp: experiment pipelines over the library modules.
//
// Every runner follows the same contract: build inputs from the config
// (recording each key it reads), execute, write CSV tables, collect the
// built-in assertions, and finish with a JSON manifest. Nothing here draws
// randomness outside the seeded counter-based generators, so a rerun with
// the same config and seed reproduces every output byte for byte.
#include "mk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <utility>

#include <json.hpp>

#include "mk/chain.hpp"
#include "mk/csvio.hpp"
#include "mk/fock.hpp"
#include "mk/fpde.hpp"
#include "mk/lindblad.hpp"
#include "mk/version.hpp"
#include "mk/wigner.hpp"

namespace mk::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using wigner::PhaseGrid;
using wigner::PhaseSpaceField;

constexpr double kPi = 3.14159265358979323846;

const std::vector<std::pair<Kind, const char*>>& kind_table() {
  static const std::vector<std::pair<Kind, const char*>> table = {
      {Kind::bath_corr, "bath-corr"},
      {Kind::stability, "stability"},
      {Kind::evolve_lindblad, "evolve-lindblad"},
      {Kind::evolve_fp, "evolve-fp"},
      {Kind::wigner, "wigner"},
      {Kind::classical_limit, "classical-limit"},
      {Kind::ordering_sweep, "ordering-sweep"},
      {Kind::gme_compare, "gme-compare"},
      {Kind::chain_oracle, "chain-oracle"},
      {Kind::secular_check, "secular-check"},
  };
  return table;
}

Assertion check_le(std::string name, double value, double bound) {
  const bool pass = value <= bound;
  return {std::move(name), value, bound, "<=", pass};
}

Assertion check_ge(std::string name, double value, double bound) {
  const bool pass = value >= bound;
  return {std::move(name), value, bound, ">=", pass};
}

ordered_json config_json(const Config& cfg) {
  ordered_json out = ordered_json::object();
  for (const auto& key : cfg.keys())
    std::visit([&](const auto& x) { out[key] = x; }, cfg.value(key));
  return out;
}

ordered_json matrix_json(const Eigen::Matrix2d& m) {
  return ordered_json::array(
      {ordered_json::array({m(0, 0), m(0, 1)}),
       ordered_json::array({m(1, 0), m(1, 1)})});
}

// Writes manifest.json and settles the overall verdict.
void finalize(const ExperimentConfig& cfg, RunResult& result,
              ordered_json derived) {
  result.kind = cfg.kind;
  result.out_dir = cfg.out_dir;
  result.ok = true;
  for (const auto& a : result.assertions) result.ok = result.ok && a.pass;

  ordered_json m;
  m["kind"] = kind_name(cfg.kind);
  m["version"] = version_string;
  m["seed"] = cfg.seed;
  m["parameters"] = config_json(cfg.resolved);
  m["derived"] = std::move(derived);
  ordered_json tables = ordered_json::array();
  for (const auto& t : result.tables) tables.push_back(t.filename().string());
  m["tables"] = std::move(tables);
  ordered_json checks = ordered_json::array();
  for (const auto& a : result.assertions) {
    ordered_json c;
    c["name"] = a.name;
    c["value"] = a.value;
    c["comparison"] = a.comparison;
    c["bound"] = a.bound;
    c["pass"] = a.pass;
    checks.push_back(std::move(c));
  }
  m["assertions"] = std::move(checks);
  m["ok"] = result.ok;

  result.manifest = cfg.out_dir / "manifest.json";
  std::ofstream out(result.manifest);
  if (!out) throw DomainError("cannot write " + result.manifest.string());
  out << m.dump(2) << '\n';
}

CsvTable new_table(const ExperimentConfig& cfg, std::vector<std::string> cols) {
  CsvTable t;
  t.metadata = {{"kind", kind_name(cfg.kind)},
                {"version", version_string},
                {"seed", std::to_string(cfg.seed)}};
  t.columns = std::move(cols);
  return t;
}

void emit(const ExperimentConfig& cfg, RunResult& result,
          const std::string& filename, const CsvTable& table) {
  const fs::path path = cfg.out_dir / filename;
  write_csv(path, table);
  result.tables.push_back(path);
}

// ------------------------------------------------------------ field helpers

PhaseGrid grid_from_config(const ExperimentConfig& cfg) {
  const double half = cfg.number("grid_half", 4.0);
  const int n = static_cast<int>(cfg.integer("grid_n", 128));
  PhaseGrid grid{-half, half, -half, half, n, n};
  grid.validate();
  return grid;
}

PhaseSpaceField gaussian_field(const PhaseGrid& grid,
                               const Eigen::Vector2d& mean,
                               const Eigen::Matrix2d& cov, double a = 0.0) {
  PhaseSpaceField f;
  f.grid = grid;
  f.a = a;
  f.values.resize(grid.n_q, grid.n_p);
  const Eigen::Matrix2d prec = cov.inverse();
  for (int j = 0; j < grid.n_p; ++j)
    for (int i = 0; i < grid.n_q; ++i) {
      const Eigen::Vector2d x(grid.q(i) - mean(0), grid.p(j) - mean(1));
      f.values(i, j) = std::exp(-0.5 * x.dot(prec * x));
    }
  f.values /= f.integral();
  return f;
}

void field_moments(const PhaseSpaceField& f, Eigen::Vector2d& mean,
                   Eigen::Matrix2d& cov) {
  const auto& g = f.grid;
  const double cell = g.dq() * g.dp();
  double mass = 0.0, mq = 0.0, mp = 0.0;
  for (int j = 0; j < g.n_p; ++j)
    for (int i = 0; i < g.n_q; ++i) {
      const double w = f.values(i, j) * cell;
      mass += w;
      mq += w * g.q(i);
      mp += w * g.p(j);
    }
  mean << mq / mass, mp / mass;
  double sqq = 0.0, sqp = 0.0, spp = 0.0;
  for (int j = 0; j < g.n_p; ++j)
    for (int i = 0; i < g.n_q; ++i) {
      const double w = f.values(i, j) * cell;
      const double dq = g.q(i) - mean(0), dp = g.p(j) - mean(1);
      sqq += w * dq * dq;
      sqp += w * dq * dp;
      spp += w * dp * dp;
    }
  cov << sqq / mass, sqp / mass, sqp / mass, spp / mass;
}

// Affine drift read off the operator; moment flow is d<x>/dt = G <x> + c,
// dS/dt = G S + S G^T + 2 D.
void probe_drift(const fpde::FPOperator& op, Eigen::Matrix2d& g,
                 Eigen::Vector2d& c) {
  const double aq0 = op.drift_q(0.0, 0.0);
  const double ap0 = op.drift_p(0.0, 0.0);
  g << -(op.drift_q(1.0, 0.0) - aq0), -(op.drift_q(0.0, 1.0) - aq0),
      -(op.drift_p(1.0, 0.0) - ap0), -(op.drift_p(0.0, 1.0) - ap0);
  c << -aq0, -ap0;
}

void step_moments(const Eigen::Matrix2d& g, const Eigen::Vector2d& c,
                  const Eigen::Matrix2d& d, Eigen::Vector2d& mean,
                  Eigen::Matrix2d& cov, double dt) {
  auto fm = [&](const Eigen::Vector2d& m) -> Eigen::Vector2d {
    return g * m + c;
  };
  auto fs = [&](const Eigen::Matrix2d& s) -> Eigen::Matrix2d {
    return g * s + s * g.transpose() + 2.0 * d;
  };
  const Eigen::Vector2d k1 = fm(mean);
  const Eigen::Matrix2d l1 = fs(cov);
  const Eigen::Vector2d k2 = fm(mean + 0.5 * dt * k1);
  const Eigen::Matrix2d l2 = fs(cov + 0.5 * dt * l1);
  const Eigen::Vector2d k3 = fm(mean + 0.5 * dt * k2);
  const Eigen::Matrix2d l3 = fs(cov + 0.5 * dt * l2);
  const Eigen::Vector2d k4 = fm(mean + dt * k3);
  const Eigen::Matrix2d l4 = fs(cov + dt * l3);
  mean += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  cov += (dt / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

GridData to_grid_data(const PhaseSpaceField& f) {
  GridData g;
  g.n_q = static_cast<std::uint64_t>(f.grid.n_q);
  g.n_p = static_cast<std::uint64_t>(f.grid.n_p);
  g.q_min = f.grid.q_min;
  g.q_max = f.grid.q_max;
  g.p_min = f.grid.p_min;
  g.p_max = f.grid.p_max;
  g.values.resize(g.n_q * g.n_p);
  for (int i = 0; i < f.grid.n_q; ++i)
    for (int j = 0; j < f.grid.n_p; ++j)
      g.values[static_cast<std::size_t>(i) * g.n_p + j] = f.values(i, j);
  return g;
}

// --------------------------------------------------------------- fock helpers

fock::DensityMatrix displaced_thermal(const fock::FockBasis& basis,
                                      double beta_state, double shift_q,
                                      double shift_p) {
  auto rho = fock::thermal_state(basis, beta_state);
  if (shift_q != 0.0 || shift_p != 0.0) {
    const std::complex<double> z(
        std::sqrt(basis.omega0 / (2.0 * basis.hbar)) * shift_q,
        shift_p / std::sqrt(2.0 * basis.hbar * basis.omega0));
    const auto d = wigner::displacement_operator(basis, z);
    rho.rho = d * rho.rho * d.adjoint();
    // Truncated displacement is not exactly unitary; re-pin the trace.
    rho.rho /= rho.rho.trace().real();
  }
  return rho;
}

// ------------------------------------------------------------------ runners

RunResult run_bath_corr(const ExperimentConfig& cfg) {
  RunResult result;
  const auto spec = bath_from_config(cfg);
  const double omega0 = cfg.number("omega0", 1.0);
  const double hbar = cfg.number("hbar", 1.0);
  const double s_max = cfg.number("s_max", 20.0);
  const auto n_s = cfg.integer("n_s", 201);
  if (n_s < 2 || !(s_max > 0.0))
    throw DomainError("need n_s >= 2 and s_max > 0");

  auto table = new_table(cfg, {"s", "h", "g"});
  double h0 = 0.0, peak = 0.0;
  int bad = 0;
  for (std::int64_t k = 0; k < n_s; ++k) {
    const double s = s_max * static_cast<double>(k) /
                     static_cast<double>(n_s - 1);
    const auto corr = bath::time_correlations(spec, s);
    if (!std::isfinite(corr.h) || !std::isfinite(corr.g)) ++bad;
    if (k == 0) h0 = corr.h;
    peak = std::max(peak, std::abs(corr.h));
    table.rows.push_back({s, corr.h, corr.g});
  }
  emit(cfg, result, "bath_corr.csv", table);

  const auto summary = bath::correlations_summary(spec, omega0, hbar);
  ordered_json derived;
  derived["delta_shift"] = summary.delta_shift;
  derived["chi_coeff"] = summary.chi_coeff;
  derived["occupancy"] = summary.occupancy;
  derived["gamma_sq"] = summary.gamma_sq;

  result.assertions.push_back(
      check_le("nonfinite correlation entries", bad, 0.0));
  result.assertions.push_back(check_ge("origin autocorrelation", h0, 0.0));
  if (h0 > 0.0)
    result.assertions.push_back(check_le("peak lag over origin value",
                                         peak / h0, 1.0 + 1e-12));
  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_stability(const ExperimentConfig& cfg) {
  RunResult result;
  const auto spec = bath_from_config(cfg);
  const double omega0 = cfg.number("omega0", 1.0);
  const double lambda = cfg.number("lambda", 0.1);
  const double beta = cfg.number("beta", 1.0);
  const double hbar = cfg.number("hbar", 1.0);

  const auto stab = bath::stability_check(spec, lambda, omega0);
  result.assertions.push_back(
      check_ge("binding margin", stab.margin, 0.0));

  ordered_json derived;
  derived["binding_margin"] = stab.margin;

  auto table = new_table(cfg, {"lambda", "omega0", "margin", "form_eig_min"});
  double eig_min = 0.0;
  if (spec.spectral_density) {
    const auto coeffs =
        lindblad::coefficients_from_model(spec, lambda, omega0, beta, hbar);
    const auto form = lindblad::lindblad_form_check(coeffs);
    eig_min = form.eigenvalues[0];
    result.assertions.push_back(
        check_ge("dissipator form admissible", form.ok ? 1.0 : 0.0, 1.0));
    derived["coefficients"] = {
        {"d1", coeffs.d1},   {"d2", coeffs.d2},
        {"d", coeffs.d},     {"lam", coeffs.lam},
        {"kappa", coeffs.kappa}, {"h_scale", coeffs.h_scale}};
    derived["form_eigenvalues"] =
        ordered_json::array({form.eigenvalues[0], form.eigenvalues[1]});
  }
  table.rows.push_back({lambda, omega0, stab.margin, eig_min});
  emit(cfg, result, "stability.csv", table);

  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_evolve_lindblad(const ExperimentConfig& cfg) {
  RunResult result;
  const auto spec = bath_from_config(cfg);
  const double omega0 = cfg.number("omega0", 1.0);
  const double lambda = cfg.number("lambda", 0.2);
  const double beta = cfg.number("beta", 1.0);
  const double hbar = cfg.number("hbar", 1.0);
  const int dim = static_cast<int>(cfg.integer("dim", 32));
  const double beta_init = cfg.number("beta_init", 0.9);
  const double shift_q = cfg.number("displace_q", 0.0);
  const double shift_p = cfg.number("displace_p", 0.0);
  const double t_max = cfg.number("t_max", 4.0);
  const double dt = cfg.number("dt", 1e-3);
  const auto stride = static_cast<int>(cfg.integer("store_stride", 200));

  const fock::FockBasis basis{dim, hbar, omega0};
  const auto op = lindblad::oscillator_generator(basis, spec, lambda);
  const auto rho0 = displaced_thermal(basis, beta_init, shift_q, shift_p);
  const auto sigma = fock::thermal_state(basis, beta);
  const auto traj = lindblad::evolve(op, rho0, t_max, dt, stride);

  auto table = new_table(cfg, {"t", "trace_defect", "herm_defect", "min_eig",
                               "mean_n", "rel_entropy"});
  double worst_trace = 0.0, worst_herm = 0.0, worst_eig = 0.0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  double prev_h = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& state = traj.states[k];
    const auto chk = fock::check_density(state);
    const double h = lindblad::relative_entropy(state, sigma);
    worst_trace = std::max(worst_trace, chk.trace_defect);
    worst_herm = std::max(worst_herm, chk.hermiticity_defect);
    worst_eig = std::min(worst_eig, chk.min_eigenvalue);
    if (k > 0) worst_rise = std::max(worst_rise, h - prev_h);
    prev_h = h;
    table.rows.push_back({traj.times[k], chk.trace_defect,
                          chk.hermiticity_defect, chk.min_eigenvalue,
                          fock::mean_occupancy(state), h});
  }
  emit(cfg, result, "evolve_lindblad.csv", table);

  result.assertions.push_back(
      check_le("trace drift", worst_trace, 1e-9));
  result.assertions.push_back(
      check_le("hermiticity defect", worst_herm, 1e-12));
  result.assertions.push_back(
      check_ge("smallest eigenvalue", worst_eig, -1e-9));
  result.assertions.push_back(check_le("relative entropy rise per frame",
                                       worst_rise, 1e-10 * stride));

  const auto coeffs =
      lindblad::coefficients_from_model(spec, lambda, omega0, beta, hbar);
  ordered_json derived;
  derived["coefficients"] = {
      {"d1", coeffs.d1},   {"d2", coeffs.d2},
      {"d", coeffs.d},     {"lam", coeffs.lam},
      {"kappa", coeffs.kappa}, {"h_scale", coeffs.h_scale}};
  finalize(cfg, result, std::move(derived));
  return result;
}

fpde::Variant variant_from_name(const std::string& name) {
  if (name == "classical") return fpde::Variant::classical;
  if (name == "gme") return fpde::Variant::gme;
  if (name == "general") return fpde::Variant::general;
  if (name == "quantum_ps") return fpde::Variant::quantum_ps;
  throw DomainError("unknown variant " + name);
}

RunResult run_evolve_fp(const ExperimentConfig& cfg) {
  RunResult result;
  const double omega0 = cfg.number("omega0", 1.0);
  const double beta = cfg.number("beta", 1.0);
  const auto variant = variant_from_name(cfg.str("variant", "classical"));

  fpde::BuildParams params;
  params.omega0 = omega0;
  params.lambda = cfg.number("lambda", 0.3);
  params.a = cfg.number("a", 0.0);
  if (variant == fpde::Variant::general) {
    lindblad::LindbladCoefficients c;
    c.d1 = cfg.number("coeff_d1");
    c.d2 = cfg.number("coeff_d2");
    c.d = cfg.number("coeff_d", 0.0);
    c.lam = cfg.number("coeff_lam");
    c.kappa = cfg.number("coeff_kappa", 0.0);
    c.omega0 = omega0;
    c.hbar = cfg.number("hbar", 1.0);
    c.h_scale = cfg.number("coeff_h_scale", 1.0);
    params.coefficients = c;
  } else {
    params.spec = bath_from_config(cfg);
    params.hbar = cfg.number("hbar", 1.0);
  }
  const auto op = fpde::build(variant, params);

  const auto grid = grid_from_config(cfg);
  Eigen::Vector2d mean(cfg.number("mean_q", 0.5), cfg.number("mean_p", 0.0));
  Eigen::Matrix2d cov;
  cov << cfg.number("cov_qq", 1.0 / (beta * omega0 * omega0)),
      cfg.number("cov_qp", 0.0), cfg.number("cov_qp", 0.0),
      cfg.number("cov_pp", 1.0 / beta);
  const auto f0 = gaussian_field(grid, mean, cov);

  const double t_max = cfg.number("t_max", 3.0);
  const double dt = cfg.number("dt", 2e-3);
  const auto stride = static_cast<int>(cfg.integer("store_stride", 200));
  const auto traj = fpde::evolve_field(op, f0, t_max, dt, stride);

  Eigen::Matrix2d g;
  Eigen::Vector2d c;
  probe_drift(op, g, c);
  Eigen::Vector2d ode_mean = mean;
  Eigen::Matrix2d ode_cov = cov;

  auto table = new_table(cfg, {"t", "mass", "mean_q", "mean_p", "cov_qq",
                               "cov_qp", "cov_pp", "min_value"});
  double worst_mass = 0.0, worst_moment = 0.0, min_ratio = 0.0;
  std::size_t frame = 0;
  const long n_steps = std::llround(t_max / dt);
  for (long step = 0; step <= n_steps; ++step) {
    const double t = step * dt;
    if (frame < traj.times.size() &&
        std::abs(traj.times[frame] - t) < 0.5 * dt) {
      const auto& f = traj.fields[frame];
      Eigen::Vector2d fm;
      Eigen::Matrix2d fc;
      field_moments(f, fm, fc);
      const double mass = f.integral();
      const double mn = f.values.minCoeff();
      const double mx = f.values.maxCoeff();
      worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
      worst_moment = std::max(
          {worst_moment, (fm - ode_mean).cwiseAbs().maxCoeff(),
           (fc - ode_cov).cwiseAbs().maxCoeff()});
      min_ratio = std::min(min_ratio, mn / mx);
      table.rows.push_back(
          {t, mass, fm(0), fm(1), fc(0, 0), fc(0, 1), fc(1, 1), mn});
      ++frame;
    }
    if (step < n_steps)
      step_moments(g, c, op.diffusion, ode_mean, ode_cov, dt);
  }
  emit(cfg, result, "evolve_fp.csv", table);
  if (cfg.flag("write_field", false)) {
    const fs::path grid_path = cfg.out_dir / "final_field.mkgrid";
    write_grid(grid_path, to_grid_data(traj.fields.back()));
    result.tables.push_back(grid_path);
  }

  result.assertions.push_back(check_le("mass drift", worst_mass, 1e-9));
  result.assertions.push_back(check_le(
      "moment gap to the closed flow", worst_moment,
      cfg.number("moment_tol", 1e-2)));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> des(op.diffusion);
  if (des.eigenvalues()(0) >= 0.0)
    result.assertions.push_back(check_ge(
        "field floor over peak", min_ratio,
        cfg.number("positivity_floor", -1e-8)));

  ordered_json derived;
  derived["drift"] = matrix_json(g);
  derived["diffusion"] = matrix_json(op.diffusion);
  derived["renorm_factor"] = op.renorm_factor;
  try {
    const auto md = fpde::moments(op);
    derived["stationary_covariance"] = matrix_json(md.stationary_covariance);
  } catch (const NonHurwitzDrift&) {
    derived["stationary_covariance"] = nullptr;
  }
  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_wigner(const ExperimentConfig& cfg) {
  RunResult result;
  const double omega0 = cfg.number("omega0", 1.0);
  const double hbar = cfg.number("hbar", 1.0);
  const double a = cfg.number("a", 0.0);
  const int dim = static_cast<int>(cfg.integer("dim", 48));
  const fock::FockBasis basis{dim, hbar, omega0};

  const std::string state_name = cfg.str("state", "thermal");
  fock::DensityMatrix rho{basis, {}};
  if (state_name == "vacuum") {
    rho = fock::thermal_state(basis, 60.0 / (hbar * omega0));
  } else if (state_name == "thermal") {
    rho = fock::thermal_state(basis, cfg.number("beta_state", 1.0));
  } else if (state_name == "displaced") {
    rho = displaced_thermal(basis, cfg.number("beta_state", 1.0),
                            cfg.number("displace_q", 1.0),
                            cfg.number("displace_p", 0.0));
  } else {
    throw DomainError("unknown state " + state_name);
  }

  const auto kernel = wigner::ordering_kernel(a, omega0, hbar);
  const auto grid = grid_from_config(cfg);
  const auto field = wigner::generalized_wigner(rho, kernel, grid);
  const auto back = wigner::inverse_transform(field, kernel, basis);
  const double round_trip = lindblad::trace_norm(rho.rho - back.rho);
  const double norm_defect = std::abs(field.integral() - 1.0);

  auto table = new_table(cfg, {"q", "p", "value"});
  for (int i = 0; i < grid.n_q; ++i)
    for (int j = 0; j < grid.n_p; ++j)
      table.rows.push_back({grid.q(i), grid.p(j), field.values(i, j)});
  emit(cfg, result, "wigner_field.csv", table);
  const fs::path grid_path = cfg.out_dir / "field.mkgrid";
  write_grid(grid_path, to_grid_data(field));
  result.tables.push_back(grid_path);

  const double trip_tol = a == 0.0 ? 1e-10 : 1e-9;
  result.assertions.push_back(
      check_le("round trip trace distance", round_trip, trip_tol));
  result.assertions.push_back(
      check_le("normalization defect", norm_defect, 1e-8));
  // The transform discards its imaginary residual only after checking it
  // against 1e-10 of the real peak, so arriving here certifies realness.
  result.assertions.push_back(check_le("imaginary residual bound", 1e-10,
                                       1e-10));

  if (state_name == "vacuum" && a == 0.0) {
    double sup = 0.0;
    for (int i = 0; i < grid.n_q; ++i)
      for (int j = 0; j < grid.n_p; ++j) {
        const double q = grid.q(i), p = grid.p(j);
        const double exact =
            std::exp(-(omega0 * q * q + p * p / omega0) / hbar) /
            (kPi * hbar);
        sup = std::max(sup, std::abs(field.values(i, j) - exact));
      }
    result.assertions.push_back(
        check_le("vacuum field vs closed form", sup, 1e-8));
  }

  Eigen::Vector2d fm;
  Eigen::Matrix2d fc;
  field_moments(field, fm, fc);
  ordered_json derived;
  derived["mean"] = ordered_json::array({fm(0), fm(1)});
  derived["covariance"] = matrix_json(fc);
  finalize(cfg, result, std::move(derived));
  return result;
}

// Shared dynamics of the two sweep experiments: a quantum bath drives the
// ordering-dependent equation from a fixed hbar-independent Gaussian.
struct SweepSetup {
  bath::BathSpec spec;
  double lambda = 0.0;
  double omega0 = 1.0;
  double beta = 1.0;
  double s0 = 0.7;
  PhaseGrid grid;
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
  double t_max = 0.0;
  double dt = 0.0;
};

SweepSetup sweep_setup(const ExperimentConfig& cfg) {
  SweepSetup s;
  s.spec = bath_from_config(cfg);
  if (!s.spec.spectral_density)
    throw DomainError("the sweep needs a quantum bath");
  s.lambda = cfg.number("lambda", 0.25);
  s.omega0 = cfg.number("omega0", 1.0);
  s.beta = cfg.number("beta", 1.0);
  s.s0 = cfg.number("s0", 0.7);
  s.grid = grid_from_config(cfg);
  s.mean << cfg.number("mean_q", 0.8), cfg.number("mean_p", 0.0);
  s.cov << s.s0 / s.omega0, 0.0, 0.0, s.s0 * s.omega0;
  s.t_max = 2.0 * kPi / s.omega0 * cfg.number("t_periods", 3.0);
  s.dt = cfg.number("dt", 4e-3);
  return s;
}

// hbar = 0 takes the coefficient limit; the shift terms carry a factor hbar,
// so the built operator is the same for every ordering, exactly.
fpde::FPOperator sweep_operator(const SweepSetup& s, double hbar, double a) {
  fpde::BuildParams params;
  params.lambda = s.lambda;
  params.omega0 = s.omega0;
  params.a = a;
  params.spec = s.spec;
  if (hbar > 0.0) {
    params.hbar = hbar;
    return fpde::build(fpde::Variant::quantum_ps, params);
  }
  params.coefficients = lindblad::coefficients_from_model(
      s.spec, s.lambda, s.omega0, s.beta, 0.0);
  return fpde::build(fpde::Variant::general, params);
}

PhaseSpaceField sweep_run(const SweepSetup& s, double hbar, double a) {
  const auto op = sweep_operator(s, hbar, a);
  const auto f0 = gaussian_field(s.grid, s.mean, s.cov);
  const auto traj =
      fpde::evolve_field(op, f0, s.t_max, s.dt, 1 << 30);
  return traj.fields.back();
}

double sup_distance(const PhaseSpaceField& x, const PhaseSpaceField& y) {
  return (x.values - y.values).cwiseAbs().maxCoeff();
}

// Largest spread, over the orderings, of any drift or diffusion entry of the
// hbar = 0 operator. Zero means the limit forgot the ordering.
double limit_ordering_spread(const SweepSetup& s,
                             const std::vector<double>& a_values) {
  double spread = 0.0;
  const auto ref = sweep_operator(s, 0.0, a_values.front());
  Eigen::Matrix2d gr;
  Eigen::Vector2d cr;
  probe_drift(ref, gr, cr);
  for (const double a : a_values) {
    const auto op = sweep_operator(s, 0.0, a);
    Eigen::Matrix2d g;
    Eigen::Vector2d c;
    probe_drift(op, g, c);
    spread = std::max(spread, (op.diffusion - ref.diffusion)
                                  .cwiseAbs()
                                  .maxCoeff());
    spread = std::max(spread, (g - gr).cwiseAbs().maxCoeff());
    spread = std::max(spread, (c - cr).cwiseAbs().maxCoeff());
  }
  return spread;
}

RunResult run_classical_limit(const ExperimentConfig& cfg) {
  RunResult result;
  const auto table_data = classical_limit_sweep(cfg);

  auto table = new_table(
      cfg, {"hbar", "dim", "sup_dist", "l1_dist", "ratio", "fock_dist"});
  for (std::size_t k = 0; k < table_data.rows.size(); ++k) {
    const auto& row = table_data.rows[k];
    const double ratio = k > 0 ? table_data.ratios[k - 1] : -1.0;
    table.rows.push_back({row.hbar, static_cast<double>(row.dim),
                          row.sup_dist, row.l1_dist, ratio, row.fock_dist});
  }
  emit(cfg, result, "classical_limit.csv", table);

  const double ratio_lo = cfg.number("ratio_lo", 1.6);
  const double ratio_hi = cfg.number("ratio_hi", 2.4);
  const auto hbars = cfg.list("hbar_list", {0.4, 0.2, 0.1, 0.05});
  for (std::size_t k = 0; k + 1 < hbars.size(); ++k) {
    if (std::abs(hbars[k] / hbars[k + 1] - 2.0) > 1e-9) continue;
    char name[64];
    std::snprintf(name, sizeof name, "halving ratio at hbar %g",
                  hbars[k + 1]);
    result.assertions.push_back(
        check_ge(name, table_data.ratios[k], ratio_lo));
    result.assertions.push_back(
        check_le(name, table_data.ratios[k], ratio_hi));
  }
  result.assertions.push_back(
      check_ge("convergence slope", table_data.slope,
               cfg.number("slope_lo", 0.7)));
  result.assertions.push_back(
      check_le("convergence slope", table_data.slope,
               cfg.number("slope_hi", 1.3)));

  const auto setup = sweep_setup(cfg);
  const double spread = limit_ordering_spread(setup, {-1.0, 0.0, 1.0});
  result.assertions.push_back(
      check_le("limit operator ordering spread", spread, 0.0));

  const double fock_tol = cfg.number("fock_tol", 2e-3);
  for (const auto& row : table_data.rows)
    if (row.fock_dist >= 0.0) {
      char name[64];
      std::snprintf(name, sizeof name, "transform route gap at hbar %g",
                    row.hbar);
      result.assertions.push_back(check_le(name, row.fock_dist, fock_tol));
    }

  ordered_json derived;
  derived["slope"] = table_data.slope;
  derived["ratios"] = table_data.ratios;
  derived["limit_ordering_spread"] = spread;
  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_ordering_sweep(const ExperimentConfig& cfg) {
  RunResult result;
  const auto table_data = ordering_sweep(cfg);

  auto table = new_table(cfg, {"hbar", "a_lo", "a_hi", "sup_dist"});
  for (const auto& row : table_data.rows)
    table.rows.push_back({row.hbar, row.a_lo, row.a_hi, row.sup_dist});
  emit(cfg, result, "ordering_sweep.csv", table);

  result.assertions.push_back(check_le("limit operator ordering spread",
                                       table_data.zero_mismatch, 0.0));
  const double ratio_lo = cfg.number("ratio_lo", 1.6);
  const double ratio_hi = cfg.number("ratio_hi", 2.4);
  for (std::size_t k = 0; k < table_data.ratios.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof name, "pair ratio %zu", k);
    result.assertions.push_back(
        check_ge(name, table_data.ratios[k], ratio_lo));
    result.assertions.push_back(
        check_le(name, table_data.ratios[k], ratio_hi));
  }
  if (table_data.grid_error >= 0.0)
    result.assertions.push_back(
        check_ge("leading distance over grid error",
                 table_data.min_leading_dist,
                 cfg.number("grid_error_factor", 10.0) *
                     table_data.grid_error));

  ordered_json derived;
  derived["zero_mismatch"] = table_data.zero_mismatch;
  derived["ratios"] = table_data.ratios;
  derived["grid_error"] = table_data.grid_error;
  derived["min_leading_dist"] = table_data.min_leading_dist;
  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_gme_compare(const ExperimentConfig& cfg) {
  RunResult result;
  const double omega0 = cfg.number("omega0", 1.0);
  const double beta = cfg.number("beta", 25.0);
  const double lambda = cfg.number("lambda", 0.9);

  fpde::BuildParams params;
  params.lambda = lambda;
  params.omega0 = omega0;
  params.spec = bath_from_config(cfg);
  const auto classical = fpde::build(fpde::Variant::classical, params);
  const auto defective = fpde::build(fpde::Variant::gme, params);

  const auto shifts = bath::frequency_shifts(*params.spec, omega0);
  const double det = defective.diffusion.determinant();
  result.assertions.push_back(
      check_ge("mixed-diffusion coefficient", std::abs(shifts.chi), 1e-12));
  result.assertions.push_back(
      check_le("defective diffusion determinant", det, -1e-15));

  const auto grid = grid_from_config(cfg);
  const auto mb = fpde::mb_distribution(beta, omega0, grid);
  const double res_cl = fpde::stationarity_residual(classical, mb);
  const double res_gme = fpde::stationarity_residual(defective, mb);
  const double ratio = res_gme / std::max(res_cl, 1e-300);
  result.assertions.push_back(check_ge(
      "stationarity residual ratio", ratio, cfg.number("ratio_min", 1e4)));

  auto res_table = new_table(cfg, {"residual_classical", "residual_defective",
                                   "determinant", "chi"});
  res_table.rows.push_back({res_cl, res_gme, det, shifts.chi});
  emit(cfg, result, "residuals.csv", res_table);

  ordered_json derived;
  derived["chi_coeff"] = shifts.chi;
  derived["determinant"] = det;
  derived["residual_classical"] = res_cl;
  derived["residual_defective"] = res_gme;
  derived["residual_ratio"] = ratio;

  if (cfg.flag("run_negativity", true)) {
    const double blob_scale = cfg.number("blob_scale", 1.0);
    Eigen::Vector2d mean(cfg.number("mean_q", 0.1), cfg.number("mean_p", 0.0));
    const double var = blob_scale / beta;
    Eigen::Matrix2d cov = var * Eigen::Matrix2d::Identity();
    auto f0 = gaussian_field(grid, mean, cov);

    // Near-grid ripple under a tight envelope: the indefinite matrix runs a
    // backward heat flow along its negative eigendirection and amplifies it;
    // the balanced twin evolves the bare blob and stays positive.
    auto probe = f0;
    const double kk = kPi / (2.0 * grid.dq());
    const double seed_amp = 1e-10 * f0.values.maxCoeff();
    const double env = 2.0 * (4.0 * var);
    for (int j = 0; j < grid.n_p; ++j)
      for (int i = 0; i < grid.n_q; ++i) {
        const double q = grid.q(i) - mean(0), p = grid.p(j) - mean(1);
        probe.values(i, j) += seed_amp * std::exp(-(q * q + p * p) / env) *
                              std::cos(kk * grid.q(i)) *
                              std::cos(kk * grid.p(j));
      }

    const double chunk_t = cfg.number("chunk_t", 0.02);
    const double chunk_dt = cfg.number("chunk_dt", 1e-3);
    const auto max_chunks = cfg.integer("max_chunks", 25);
    const double threshold = cfg.number("neg_threshold", -1e-4);

    auto probe_table = new_table(cfg, {"t", "min_over_max"});
    PhaseSpaceField running = probe;
    double worst = 0.0;
    for (std::int64_t chunk = 0; chunk < max_chunks && worst > threshold;
         ++chunk) {
      const auto bad =
          fpde::evolve_field(defective, running, chunk_t, chunk_dt, 1 << 30);
      running = bad.fields.back();
      const double ratio_now =
          running.values.minCoeff() / running.values.maxCoeff();
      worst = std::min(worst, ratio_now);
      probe_table.rows.push_back(
          {static_cast<double>(chunk + 1) * chunk_t, ratio_now});
    }
    emit(cfg, result, "gme_probe.csv", probe_table);
    result.assertions.push_back(
        check_le("defective field floor over peak", worst, threshold));

    const double t_cl = cfg.number("classical_t_max", 0.6);
    const double dt_cl = cfg.number("classical_dt", 5e-3);
    const auto good = fpde::evolve_field(
        classical, f0, t_cl, dt_cl,
        static_cast<int>(cfg.integer("classical_stride", 40)));
    auto cl_table = new_table(cfg, {"t", "mass", "min_value", "max_value"});
    double cl_floor = 0.0, cl_mass = 0.0;
    for (std::size_t k = 0; k < good.fields.size(); ++k) {
      const auto& f = good.fields[k];
      const double mn = f.values.minCoeff(), mx = f.values.maxCoeff();
      cl_floor = std::min(cl_floor, mn / mx);
      cl_mass = std::max(cl_mass, std::abs(f.integral() - 1.0));
      cl_table.rows.push_back({good.times[k], f.integral(), mn, mx});
    }
    emit(cfg, result, "classical_control.csv", cl_table);
    result.assertions.push_back(
        check_ge("balanced field floor over peak", cl_floor, -1e-8));
    result.assertions.push_back(
        check_le("balanced mass drift", cl_mass, 1e-9));
    derived["defective_floor"] = worst;
    derived["balanced_floor"] = cl_floor;
  }

  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_chain_oracle(const ExperimentConfig& cfg) {
  RunResult result;
  const auto n_modes = static_cast<int>(cfg.integer("modes", 512));
  const double h0 = cfg.number("h0", 2.5);
  const double h1 = cfg.number("h1", -1.0);
  const double omega0 = cfg.number("omega0", 1.0);
  const double beta = cfg.number("beta", 1.0);

  auto config = chain::nn_config(n_modes, h0, h1);
  config.beta = beta;
  config.omega0 = omega0;
  config.epsilons = chain::gaussian_epsilons(
      n_modes, cfg.number("eps_center", n_modes / 2.0),
      cfg.number("eps_width", 2.0), cfg.number("eps_amp", 1.0),
      cfg.number("eps_wavenumber", 0.0));
  config.validate();

  const auto samples = static_cast<int>(cfg.integer("samples", 10000));
  const double dt = cfg.number("dt", 0.02);
  const double s_step = cfg.number("s_step", 0.5);
  const double s_max = cfg.number("s_max", 40.0);
  const auto stride = static_cast<int>(std::llround(s_step / dt));
  if (std::abs(stride * dt - s_step) > 1e-12)
    throw DomainError("s_step must be a multiple of dt");

  const auto points = chain::gibbs_sample(config, samples, cfg.seed);
  const auto ensemble = chain::integrate(config, points, s_max, dt, stride);
  std::vector<double> s_grid;
  for (double s = 0.0; s <= s_max + 1e-9; s += s_step) s_grid.push_back(s);
  const auto est = chain::empirical_correlation(config, ensemble, s_grid);

  auto table = new_table(cfg, {"s", "empirical", "stderr", "exact", "z"});
  double worst_z = 0.0;
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    const double exact = chain::discrete_correlation(config, s_grid[k]);
    const double z =
        std::abs(est.mean(static_cast<Eigen::Index>(k)) - exact) /
        est.stderror(static_cast<Eigen::Index>(k));
    worst_z = std::max(worst_z, z);
    table.rows.push_back({s_grid[k],
                          est.mean(static_cast<Eigen::Index>(k)),
                          est.stderror(static_cast<Eigen::Index>(k)), exact,
                          z});
  }
  emit(cfg, result, "chain_correlation.csv", table);
  result.assertions.push_back(
      check_le("correlation standard-error multiples", worst_z, 3.0));

  ordered_json derived;
  const auto effective =
      chain::effective_bath(config, static_cast<int>(cfg.integer("bath_bins",
                                                                 64)));
  derived["classical_rate"] = bath::classical_rate(effective, omega0);

  if (cfg.flag("relax", false)) {
    const double lambda = cfg.number("relax_lambda", 0.1);
    const auto curve = chain::relaxation_experiment(
        config, lambda, cfg.number("relax_t_max", 80.0),
        static_cast<int>(cfg.integer("relax_samples", 2500)), cfg.seed + 1,
        cfg.number("relax_q0", 3.0), cfg.number("relax_p0", 0.0), dt,
        static_cast<int>(cfg.integer("relax_stride", 25)),
        cfg.number("relax_fit_start", 0.0));

    fpde::BuildParams params;
    params.lambda = lambda;
    params.omega0 = omega0;
    params.spec = effective;
    const auto op = fpde::build(fpde::Variant::classical, params);
    Eigen::Matrix2d g;
    Eigen::Vector2d c;
    probe_drift(op, g, c);
    const double rate_fp = -g.trace();
    const double gap = std::abs(curve.rate - rate_fp) / rate_fp;

    auto relax_table = new_table(cfg, {"t", "mean_energy", "stderr"});
    for (std::size_t k = 0; k < curve.times.size(); ++k)
      relax_table.rows.push_back(
          {curve.times[k], curve.mean_energy(static_cast<Eigen::Index>(k)),
           curve.stderr_energy(static_cast<Eigen::Index>(k))});
    emit(cfg, result, "relaxation.csv", relax_table);

    result.assertions.push_back(check_le(
        "relaxation rate gap", gap, cfg.number("rate_tol", 0.10)));
    derived["rate_empirical"] = curve.rate;
    derived["rate_stderr"] = curve.rate_stderr;
    derived["rate_moment_flow"] = rate_fp;
    derived["rate_gap"] = gap;
  }

  finalize(cfg, result, std::move(derived));
  return result;
}

RunResult run_secular_check(const ExperimentConfig& cfg) {
  RunResult result;
  const auto spec = bath_from_config(cfg);
  if (!spec.spectral_density)
    throw DomainError("the secular comparison needs a quantum bath");
  const double omega0 = cfg.number("omega0", 1.0);
  const double hbar = cfg.number("hbar", 1.0);
  const double lambda = cfg.number("lambda", 0.8);
  const int dim = static_cast<int>(cfg.integer("dim", 20));
  const fock::FockBasis basis{dim, hbar, omega0};

  const auto osc = lindblad::oscillator_generator(basis, spec, lambda);
  const auto red = lindblad::redfield_generator(basis, spec, lambda);
  const auto h = fock::system_hamiltonian(basis);
  const auto sec = lindblad::secular_average(red, h);
  const auto sec2 = lindblad::secular_average(sec, h);

  const auto osc_dense = osc.dense();
  const auto sec_dense = sec.dense();
  const double gap = (sec_dense - osc_dense).cwiseAbs().maxCoeff();
  const double idem = (sec2.dense() - sec_dense).cwiseAbs().maxCoeff();

  auto table = new_table(cfg, {"dim", "average_gap", "idempotency_defect"});
  table.rows.push_back({static_cast<double>(dim), gap, idem});
  emit(cfg, result, "secular_check.csv", table);

  result.assertions.push_back(check_le(
      "averaged generator gap", gap, cfg.number("secular_tol", 1e-12)));
  result.assertions.push_back(
      check_le("idempotency defect", idem, 1e-13));

  ordered_json derived;
  derived["average_gap"] = gap;
  derived["idempotency_defect"] = idem;
  finalize(cfg, result, std::move(derived));
  return result;
}

}  // namespace

// ----------------------------------------------------------------- public

Kind kind_from_name(const std::string& name) {
  for (const auto& [kind, label] : kind_table())
    if (name == label) return kind;
  throw DomainError("unknown experiment kind " + name);
}

std::string kind_name(Kind kind) {
  for (const auto& [k, label] : kind_table())
    if (k == kind) return label;
  throw DomainError("unmapped experiment kind");
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [kind, label] : kind_table()) out.emplace_back(label);
    return out;
  }();
  return names;
}

double ExperimentConfig::number(const std::string& key) const {
  if (!values.has(key)) throw DomainError("missing config key " + key);
  const double v = values.number(key);
  resolved.set(key, v);
  return v;
}

double ExperimentConfig::number(const std::string& key,
                                double fallback) const {
  const double v = values.number(key, fallback);
  resolved.set(key, v);
  return v;
}

std::int64_t ExperimentConfig::integer(const std::string& key,
                                       std::int64_t fallback) const {
  const auto v = values.integer(key, fallback);
  resolved.set(key, v);
  return v;
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  const bool v = values.boolean(key, fallback);
  resolved.set(key, v);
  return v;
}

std::string ExperimentConfig::str(const std::string& key,
                                  const std::string& fallback) const {
  const auto v = values.str(key, fallback);
  resolved.set(key, v);
  return v;
}

std::vector<double> ExperimentConfig::list(
    const std::string& key, std::vector<double> fallback) const {
  const auto v = values.number_list(key, std::move(fallback));
  resolved.set(key, v);
  return v;
}

std::filesystem::path ExperimentConfig::resolve_path(
    const std::string& value) const {
  const fs::path p(value);
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

ExperimentConfig init_experiment(Kind kind, Config values,
                                 const fs::path& base_dir) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.values = std::move(values);
  cfg.base_dir = base_dir;
  if (cfg.values.has("kind") && cfg.values.str("kind") != kind_name(kind))
    throw DomainError("config is for kind " + cfg.values.str("kind") +
                      ", requested " + kind_name(kind));
  cfg.seed = static_cast<std::uint64_t>(cfg.values.integer("seed", 1));
  cfg.out_dir =
      cfg.resolve_path(cfg.values.str("out", "runs/" + kind_name(kind)));
  return cfg;
}

}  // namespace

ExperimentConfig load_experiment(Kind kind, const fs::path& config_path) {
  return init_experiment(kind, Config::parse_file(config_path),
                         config_path.parent_path());
}

ExperimentConfig make_experiment(Kind kind, Config values,
                                 const fs::path& base_dir) {
  return init_experiment(kind, std::move(values), base_dir);
}

bath::BathSpec bath_from_config(const ExperimentConfig& config) {
  const std::string kind = config.str("bath", "classical-gauss");
  const double beta = config.number("beta", 1.0);
  if (kind == "classical-gauss") {
    const double amp = config.number("bath_amp", 1.0);
    const double scale = config.number("bath_scale", 1.0);
    return bath::classical_spec(
        [amp, scale](double w) {
          return amp * w * std::exp(-0.5 * (w / scale) * (w / scale));
        },
        beta);
  }
  if (kind == "quantum-gauss") {
    const double amp = config.number("bath_amp", 1.0);
    const double scale = config.number("bath_scale", 1.0);
    return bath::quantum_spec(
        [amp, scale](double w) {
          return amp * std::sqrt(std::abs(w)) *
                 std::exp(-0.5 * (w / scale) * (w / scale));
        },
        [](double) { return 1.0; }, beta);
  }
  if (kind == "table") {
    if (!config.values.has("bath_table"))
      throw DomainError("bath = table needs bath_table");
    const auto path = config.resolve_path(config.str("bath_table", ""));
    if (!fs::exists(path))
      throw DomainError("bath table " + path.string() + " does not exist");
    const std::string domain = config.str("bath_domain", "positive");
    if (domain != "positive" && domain != "symmetric")
      throw DomainError("bath_domain must be positive or symmetric");
    return bath::tabulated_spec(path,
                                domain == "positive"
                                    ? bath::Domain::positive
                                    : bath::Domain::symmetric,
                                beta);
  }
  throw DomainError("unknown bath " + kind);
}

RunResult run_experiment(const ExperimentConfig& config) {
  fs::create_directories(config.out_dir);
  switch (config.kind) {
    case Kind::bath_corr:
      return run_bath_corr(config);
    case Kind::stability:
      return run_stability(config);
    case Kind::evolve_lindblad:
      return run_evolve_lindblad(config);
    case Kind::evolve_fp:
      return run_evolve_fp(config);
    case Kind::wigner:
      return run_wigner(config);
    case Kind::classical_limit:
      return run_classical_limit(config);
    case Kind::ordering_sweep:
      return run_ordering_sweep(config);
    case Kind::gme_compare:
      return run_gme_compare(config);
    case Kind::chain_oracle:
      return run_chain_oracle(config);
    case Kind::secular_check:
      return run_secular_check(config);
  }
  throw DomainError("unmapped experiment kind");
}

LimitTable classical_limit_sweep(const ExperimentConfig& config) {
  const auto setup = sweep_setup(config);
  const auto hbars = config.list("hbar_list", {0.4, 0.2, 0.1, 0.05});
  if (hbars.empty()) throw DomainError("hbar_list must not be empty");
  for (std::size_t k = 0; k < hbars.size(); ++k) {
    if (!(hbars[k] > 0.0)) throw DomainError("hbar entries must be positive");
    if (k > 0 && !(hbars[k] < hbars[k - 1]))
      throw DomainError("hbar_list must decrease");
  }
  const double a = config.number("a", 1.0);
  const double fock_min = config.number("fock_hbar_min", 1.0);
  const auto fock_n = static_cast<int>(config.integer("fock_grid_n", 64));
  const double fock_dt = config.number("fock_dt", 2e-3);

  const auto reference = sweep_run(setup, 0.0, a);
  const double cell = setup.grid.dq() * setup.grid.dp();

  LimitTable out;
  for (const double hbar : hbars) {
    LimitRow row;
    row.hbar = hbar;
    const auto field = sweep_run(setup, hbar, a);
    row.sup_dist = sup_distance(field, reference);
    row.l1_dist = (field.values - reference.values).cwiseAbs().sum() * cell;

    if (hbar >= fock_min) {
      const int dim = static_cast<int>(
          std::ceil(12.0 / (setup.beta * hbar * setup.omega0)));
      row.dim = dim;
      const double n0 = setup.s0 - (1.0 + a) * hbar / 2.0;
      if (!(n0 > 0.0))
        throw DomainError(
            "target variance is too small for this ordering and hbar");
      const double beta_state =
          std::log(1.0 + hbar / n0) / (hbar * setup.omega0);
      const fock::FockBasis basis{dim, hbar, setup.omega0};
      const auto rho0 =
          displaced_thermal(basis, beta_state, setup.mean(0), setup.mean(1));
      const auto op =
          lindblad::oscillator_generator(basis, setup.spec, setup.lambda);
      const auto traj =
          lindblad::evolve(op, rho0, setup.t_max, fock_dt, 1 << 30);

      if (setup.grid.n_q % fock_n != 0)
        throw DomainError("fock_grid_n must divide grid_n");
      const int node_stride = setup.grid.n_q / fock_n;
      PhaseGrid coarse{setup.grid.q_min, setup.grid.q_max, setup.grid.p_min,
                       setup.grid.p_max, fock_n, fock_n};
      const auto kernel =
          wigner::ordering_kernel(a, setup.omega0, hbar);
      const auto w =
          wigner::generalized_wigner(traj.states.back(), kernel, coarse);
      double gap = 0.0;
      for (int i = 0; i < fock_n; ++i)
        for (int j = 0; j < fock_n; ++j)
          gap = std::max(gap,
                         std::abs(w.values(i, j) -
                                  field.values(i * node_stride,
                                               j * node_stride)));
      row.fock_dist = gap;
    }
    out.rows.push_back(row);
  }

  for (std::size_t k = 0; k + 1 < out.rows.size(); ++k)
    out.ratios.push_back(out.rows[k].sup_dist / out.rows[k + 1].sup_dist);

  // Least-squares slope of ln sup_dist against ln hbar.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& row : out.rows) {
    const double x = std::log(row.hbar), y = std::log(row.sup_dist);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(out.rows.size());
  const double denom = n * sxx - sx * sx;
  out.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  return out;
}

OrderingTable ordering_sweep(const ExperimentConfig& config) {
  const auto setup = sweep_setup(config);
  const auto hbars = config.list("hbar_list", {0.4, 0.2});
  const auto a_values = config.list("a_list", {-1.0, 0.0, 1.0});
  if (hbars.empty() || a_values.size() < 2)
    throw DomainError("need hbar_list entries and at least two orderings");
  for (const double h : hbars)
    if (!(h > 0.0)) throw DomainError("hbar entries must be positive");

  OrderingTable out;
  std::vector<std::vector<PhaseSpaceField>> fields(hbars.size());
  for (std::size_t hk = 0; hk < hbars.size(); ++hk)
    for (const double a : a_values)
      fields[hk].push_back(sweep_run(setup, hbars[hk], a));

  for (std::size_t hk = 0; hk < hbars.size(); ++hk)
    for (std::size_t i = 0; i < a_values.size(); ++i)
      for (std::size_t j = i + 1; j < a_values.size(); ++j)
        out.rows.push_back({hbars[hk], a_values[i], a_values[j],
                            sup_distance(fields[hk][i], fields[hk][j])});

  // Distance ratios across halved hbar entries, pair by pair, distinct
  // orderings only (identical pairs sit at distance zero exactly).
  const std::size_t n_pairs = a_values.size() * (a_values.size() - 1) / 2;
  for (std::size_t hk = 0; hk + 1 < hbars.size(); ++hk) {
    if (std::abs(hbars[hk] / hbars[hk + 1] - 2.0) > 1e-9) continue;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const auto& hi = out.rows[hk * n_pairs + p];
      const auto& lo = out.rows[(hk + 1) * n_pairs + p];
      if (hi.a_lo == hi.a_hi) continue;
      out.ratios.push_back(hi.sup_dist / lo.sup_dist);
    }
  }

  out.zero_mismatch = limit_ordering_spread(setup, a_values);

  out.min_leading_dist = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_pairs; ++p)
    if (out.rows[p].a_lo != out.rows[p].a_hi)
      out.min_leading_dist = std::min(out.min_leading_dist,
                                      out.rows[p].sup_dist);

  if (config.flag("grid_error_check", false)) {
    // Richardson against the halved grid: nodes of the coarse grid sit on
    // every other node of the fine one, and the scheme is second order.
    ExperimentConfig coarse_cfg = config;
    coarse_cfg.resolved = config.resolved;
    auto coarse_setup = setup;
    coarse_setup.grid.n_q /= 2;
    coarse_setup.grid.n_p /= 2;
    const double a_ref =
        std::find(a_values.begin(), a_values.end(), 0.0) != a_values.end()
            ? 0.0
            : a_values.front();
    const auto fine = sweep_run(setup, hbars.front(), a_ref);
    const auto coarse = sweep_run(coarse_setup, hbars.front(), a_ref);
    double diff = 0.0;
    for (int i = 0; i < coarse_setup.grid.n_q; ++i)
      for (int j = 0; j < coarse_setup.grid.n_p; ++j)
        diff = std::max(diff, std::abs(coarse.values(i, j) -
                                       fine.values(2 * i, 2 * j)));
    out.grid_error = diff / 3.0;
  }
  return out;
}

}  // namespace harness
