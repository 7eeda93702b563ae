#include "vssea/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "vssea/commands.hpp"
#include "vssea/config.hpp"
#include "vssea/observer.hpp"
#include "vssea/scenario.hpp"

namespace vssea {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

ChannelProfile always_on(double bias, double amplitude, double frequency) {
  return {bias, amplitude, frequency, 0.0, 1e9};
}

struct DistPoint {
  DisturbanceSample value_sample;
  DisturbanceEstimate estimate;
};

/// Plant plus observer on the linear model, driven by the given disturbance
/// history. Calls `visit(t, estimate, truth)` after every step.
template <class Dist, class Visit>
void run_observer(double bandwidth, double duration, double h, Dist&& dist, Visit&& visit) {
  const PlantParams p;
  const LinearModel m = linear_matrices(p);
  const DobGains g = design_gains(bandwidth);
  const ObserverMatrices om = observer_matrices(m.A, m.B, g);
  auto u = [](double t) { return 0.5 * std::sin(3.0 * t); };

  Vector z = Vector::Zero(16);
  z.tail<12>() = auxiliary_from_truth(DisturbanceEstimate{}, z.head<4>(), g);
  auto f = [&](double t, const Vector& y) {
    const Eigen::Vector4d x = y.head<4>();
    Vector dy(16);
    dy.head<4>() = linear_form_deriv(p, PlantState::from(x), u(t), dist(t).value_sample);
    dy.tail<12>() = observer_deriv(y.tail<12>(), u(t), x, om);
    return dy;
  };
  const long steps = std::lround(duration / h);
  visit(0.0, extract_estimates(z.tail<12>(), z.head<4>(), g), dist(0.0).estimate);
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    z = rk4_step(f, t, z, h);
    const double t1 = static_cast<double>(i + 1) * h;
    visit(t1, extract_estimates(z.tail<12>(), z.head<4>(), g), dist(t1).estimate);
  }
}

ScenarioConfig smooth_exact_config() {
  ScenarioConfig c;
  c.controller.estimates = EstimateSource::kExact;
  c.sim.hold = ControlHold::kContinuous;
  c.disturbance.link = always_on(0.5, 0.3, std::numbers::pi);
  c.disturbance.motor = always_on(0.0, 0.2, 2.0 * std::numbers::pi);
  return c;
}

std::string trace_csv(const ScenarioConfig& c) {
  const RunOutcome r = simulate(c);
  std::ostringstream os;
  write_csv(os, r.trace, r.failure);
  return os.str();
}

double max_abs_e1(const SimTrace& tr, double from, double to) {
  double m = 0.0;
  for (const auto& r : tr.rows) {
    if (r.t >= from && r.t <= to) m = std::max(m, std::abs(r.e.e1));
  }
  return m;
}

double rms_e1(const SimTrace& tr, double from, double to) {
  double acc = 0.0;
  int n = 0;
  for (const auto& r : tr.rows) {
    if (r.t >= from && r.t < to) {
      acc += r.e.e1 * r.e.e1;
      ++n;
    }
  }
  return n ? std::sqrt(acc / n) : 0.0;
}

class Suite {
 public:
  explicit Suite(FaultInjection fault) : fault_(fault) {}

  template <class F>
  void check(const std::string& module, const std::string& name, F&& body) {
    CheckResult r{module, name, false, {}};
    try {
      body(r);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> run();

 private:
  FaultInjection fault_;
  std::vector<CheckResult> results_;
};

std::vector<CheckResult> Suite::run() {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // -- numkit -------------------------------------------------------------
  check("numkit", "controllability rank of error chain", [&](CheckResult& r) {
    const auto g = gamma_model(PlantParams{}.j_e);
    const int rank = controllability_rank(g.A, g.B);
    r.passed = rank == 4;
    r.detail = "rank " + std::to_string(rank);
  });

  check("numkit", "lyapunov solution symmetric positive definite", [&](CheckResult& r) {
    int bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 3;
      Matrix a = Matrix::NullaryExpr(n, n, [&] { return gauss(rng); });
      const double shift = a.eigenvalues().real().maxCoeff() + 0.5;
      a -= shift * Matrix::Identity(n, n);
      const Matrix m = Matrix::NullaryExpr(n, n, [&] { return gauss(rng); });
      const Matrix q = m * m.transpose() + 0.1 * Matrix::Identity(n, n);
      const Matrix p = solve_lyapunov(a, q);
      worst = std::max(worst, lyapunov_residual(a, p, q) / q.norm());
      if ((p - p.transpose()).norm() > 0.0 || !is_positive_definite(p)) ++bad;
    }
    r.passed = bad == 0 && worst <= 1e-9;
    r.detail = std::to_string(bad) + " failures, worst relative residual " + sci(worst);
  });

  check("numkit", "care residual and stability on random systems", [&](CheckResult& r) {
    int bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + trial % 3;
      const int m = 1 + trial % 2;
      const Matrix a = Matrix::NullaryExpr(n, n, [&] { return gauss(rng); });
      const Matrix b = Matrix::NullaryExpr(n, m, [&] { return gauss(rng); });
      const Matrix w = Matrix::NullaryExpr(n, n, [&] { return gauss(rng); });
      const Matrix q = w * w.transpose() + 0.1 * Matrix::Identity(n, n);
      const Matrix rr = Matrix::Identity(m, m);
      const CareSolution s = solve_care(a, b, q, rr);
      const double res = riccati_residual(a, b, q, rr, s.P) / (1.0 + s.P.norm());
      worst = std::max(worst, res);
      if (!(res <= 1e-8) || !is_hurwitz(a - b * s.K)) ++bad;
    }
    r.passed = bad == 0;
    r.detail = std::to_string(bad) + " failures, worst scaled residual " + sci(worst);
  });

  check("numkit", "routh-hurwitz agrees with companion eigenvalues", [&](CheckResult& r) {
    int disagree = 0, stable = 0, tested = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + trial % 4;
      std::vector<double> c(static_cast<std::size_t>(n) + 1);
      for (auto& x : c) x = 4.0 * unit(rng) - 0.5;
      c[static_cast<std::size_t>(n)] = 0.5 + unit(rng);
      Matrix comp = Matrix::Zero(n, n);
      for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
      for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
      const double max_re = comp.eigenvalues().real().maxCoeff();
      if (std::abs(max_re) < 1e-9) continue;
      ++tested;
      const bool oracle = max_re < 0.0;
      stable += oracle;
      if (routh_hurwitz(Polynomial(c)) != oracle) ++disagree;
    }
    r.passed = disagree == 0;
    r.detail = std::to_string(disagree) + " disagreements in " + std::to_string(tested) + " (" +
               std::to_string(stable) + " stable)";
  });

  check("numkit", "pole placement recovers requested polynomial", [&](CheckResult& r) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::array<std::complex<double>, 4> poles;
      if (trial % 2 == 0) {
        for (auto& p : poles) p = -(0.5 + 9.5 * unit(rng));
      } else {
        const double re = -(0.5 + 5.0 * unit(rng)), im = 5.0 * unit(rng);
        poles = {{{re, im}, {re, -im}, -(0.5 + 5.0 * unit(rng)), -(0.5 + 5.0 * unit(rng))}};
      }
      const Eigen::Vector4d k = pole_place_chain(poles);
      const Polynomial want = Polynomial::from_roots(poles);
      const Polynomial got = characteristic_polynomial(closed_loop_error_matrix(SfbGains{k}));
      for (int i = 0; i <= 4; ++i) {
        const double scale = std::max(1.0, std::abs(want.coeffs[static_cast<std::size_t>(i)]));
        worst = std::max(worst, std::abs(got.coeffs[static_cast<std::size_t>(i)] -
                                         want.coeffs[static_cast<std::size_t>(i)]) / scale);
      }
    }
    r.passed = worst <= 1e-12;
    r.detail = "worst relative coefficient error " + sci(worst);
  });

  check("numkit", "rk4 observed order", [&](CheckResult& r) {
    auto err = [](double h) {
      Vector x = Vector::Ones(1);
      const int n = static_cast<int>(std::lround(1.0 / h));
      for (int i = 0; i < n; ++i) x = rk4_step([](double, const Vector& y) { return y; }, i * h, x, h);
      return std::abs(x[0] - std::exp(1.0));
    };
    const double e1 = err(0.1), e2 = err(0.05), e3 = err(0.025);
    const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
    r.passed = order >= 3.7;
    r.detail = "order " + sci(order);
  });

  // -- plant --------------------------------------------------------------
  check("plant", "energy conservation without friction", [&](CheckResult& r) {
    PlantParams p;
    p.b_l = 0.0;
    p.b_e = 0.0;
    PlantState x{0.3, -0.5, -0.2, 1.0};
    const double e0 = stored_energy(p, x);
    const double h = 1e-4;
    double drift = 0.0;
    Vector y = x.vec();
    for (int i = 0; i < 100000; ++i) {
      y = rk4_step([&](double, const Vector& z) -> Vector {
        return linear_form_deriv(p, PlantState::from(z), 0.0, DisturbanceSample{});
      }, i * h, y, h);
      drift = std::max(drift, std::abs(stored_energy(p, PlantState::from(y)) - e0) / e0);
    }
    r.passed = drift < 1e-6;
    r.detail = "max relative drift " + sci(drift);
  });

  check("plant", "spring torque odd and stiffness even", [&](CheckResult& r) {
    PlantParams p;
    p.spring = SpringModel::kNonlinear;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double th = p.theta_ms_min + 0.3 * unit(rng);
      const double d = 4.0 * unit(rng) - 2.0;
      worst = std::max(worst, std::abs(spring_torque(p, th, -d) + spring_torque(p, th, d)));
      worst = std::max(worst, std::abs(spring_stiffness(p, th, -d) - spring_stiffness(p, th, d)));
    }
    r.passed = worst == 0.0;
    r.detail = "worst asymmetry " + sci(worst);
  });

  check("plant", "stiffness is the torque derivative", [&](CheckResult& r) {
    PlantParams p;
    p.spring = SpringModel::kNonlinear;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double th = p.theta_ms_min + 0.3 * unit(rng);
      const double d = 4.0 * unit(rng) - 2.0;
      const double step = 1e-4;
      const double fd = (spring_torque(p, th, d + step) - spring_torque(p, th, d - step)) / (2.0 * step);
      const double k = spring_stiffness(p, th, d);
      worst = std::max(worst, std::abs(fd - k) / std::abs(k));
    }
    r.passed = worst <= 1e-6;
    r.detail = "worst relative error " + sci(worst);
  });

  check("plant", "linear model is the jacobian at the origin", [&](CheckResult& r) {
    const PlantParams p;
    const LinearModel lm = linear_matrices(p);
    auto f = [&](const Eigen::Vector4d& x, double u) {
      const PlantState s = PlantState::from(x);
      return equilibrium_deriv(p, s, u, p.k * s.deflection(), DisturbanceSample{}).vec();
    };
    const double step = 1e-6;
    Eigen::Matrix4d jac;
    for (int j = 0; j < 4; ++j) {
      const Eigen::Vector4d dx = step * Eigen::Vector4d::Unit(j);
      jac.col(j) = (f(dx, 0.0) - f(-dx, 0.0)) / (2.0 * step);
    }
    const Eigen::Vector4d bcol = (f(Eigen::Vector4d::Zero(), step) - f(Eigen::Vector4d::Zero(), -step)) / (2.0 * step);
    const double err = std::max((jac - lm.A).cwiseAbs().maxCoeff(), (bcol - lm.B).cwiseAbs().maxCoeff());
    r.passed = err <= 1e-6 * std::max(1.0, lm.A.cwiseAbs().maxCoeff());
    r.detail = "max entry error " + sci(err);
  });

  // -- reconstruction -----------------------------------------------------
  check("reconstruction", "representation equivalence", [&](CheckResult& r) {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      worst = std::max(worst, representation_equivalence(PlantParams{}, OpenLoopExcitation::random(seed), 5.0,
                                                         1e-4, fault_.pi2_form));
    }
    r.passed = worst < 1e-8;
    r.detail = "max state deviation " + sci(worst);
  });

  check("reconstruction", "error chain derivatives", [&](CheckResult& r) {
    ScenarioConfig c = smooth_exact_config();
    c.reference.kind = ReferenceKind::kSinusoid;
    c.sim.duration_s = 3.0;
    c.sim.decimation = 1;
    const SimTrace tr = run_scenario(c);
    auto mismatch = [&](std::size_t stride) {
      const double dt = c.sim.step_s * static_cast<double>(stride);
      double worst = 0.0;
      for (std::size_t i = stride; i + stride < tr.rows.size(); ++i) {
        const auto& a = tr.rows[i - stride].e;
        const auto& b = tr.rows[i + stride].e;
        const auto& m = tr.rows[i].e;
        worst = std::max({worst, std::abs((b.e1 - a.e1) / (2 * dt) - m.e2), std::abs((b.e2 - a.e2) / (2 * dt) - m.e3),
                          std::abs((b.e3 - a.e3) / (2 * dt) - m.e4)});
      }
      return worst;
    };
    double scale = 1.0;
    for (const auto& row : tr.rows) scale = std::max(scale, row.e.vec().cwiseAbs().maxCoeff());
    const double fine = mismatch(1), coarse = mismatch(2);
    const double ratio = coarse / fine;
    r.passed = ratio > 3.0 && fine < 1e-3 * scale;
    r.detail = "mismatch " + sci(fine) + ", halving ratio " + sci(ratio);
  });

  check("reconstruction", "matched term from spring and friction only", [&](CheckResult& r) {
    const PlantParams p;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const PlantState x{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
      const double u = gauss(rng);
      const PiTerms t = pi_terms(p, x, u, DisturbanceEstimate{});
      const double d = x.deflection(), dd = x.dtheta_e - x.dtheta_l;
      const double ddl = (p.k * d - p.b_l * x.dtheta_l) / p.j_l;
      const double dde = (u - p.k * d - p.b_e * x.dtheta_e) / p.j_e;
      const double dddl = (p.k * dd - p.b_l * ddl) / p.j_l;
      const double ddddl = (p.k * (dde - ddl) - p.b_l * dddl) / p.j_l;
      const double want = (dde - ddddl) + (u / p.j_e - dde);
      const double got = matched_disturbance(t.ddpi2, t.pi4);
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    r.passed = worst <= 1e-9;
    r.detail = "worst relative error " + sci(worst);
  });

  // -- observer -----------------------------------------------------------
  check("observer", "quadratic disturbance error below 1e-6 at 10/w", [&](CheckResult& r) {
    const DobConvergence c = dob_polynomial_convergence(20.0);
    const double rel = c.error_at_10_over_omega / c.initial_error;
    r.passed = rel < 1e-6;
    r.detail = "relative error " + sci(rel);
  });

  check("observer", "quadratic disturbance decay rate near w", [&](CheckResult& r) {
    const DobConvergence c = dob_polynomial_convergence(20.0);
    r.passed = std::abs(c.fitted_rate - 20.0) <= 0.25 * 20.0;
    r.detail = "fitted rate " + sci(c.fitted_rate) + " for w = 20";
  });

  check("observer", "bandwidth monotonicity", [&](CheckResult& r) {
    const double e5 = dob_sinusoid_error(5.0, 1.0), e50 = dob_sinusoid_error(50.0, 1.0),
                 e500 = dob_sinusoid_error(500.0, 1.0);
    r.passed = e5 > e50 && e50 > e500 && e5 / e50 >= 20.0;
    r.detail = "errors " + sci(e5) + " / " + sci(e50) + " / " + sci(e500);
  });

  check("observer", "structural zeros", [&](CheckResult& r) {
    double worst = 0.0;
    run_observer(
        50.0, 1.0, 1e-3,
        [](double t) {
          const PlantParams p;
          DisturbanceSample d{0.3 * std::sin(t), 0.2 * std::cos(2 * t), 0.0};
          return DistPoint{d, DisturbanceEstimate::from_torques(p, d, {}, {})};
        },
        [&](double, const DisturbanceEstimate& e, const DisturbanceEstimate&) {
          worst = std::max({worst, std::abs(e.value[0]), std::abs(e.value[2]), std::abs(e.rate[0]),
                            std::abs(e.rate[2]), std::abs(e.accel[0]), std::abs(e.accel[2])});
        });
    r.passed = worst == 0.0;
    r.detail = "largest entry " + sci(worst);
  });

  // -- control ------------------------------------------------------------
  check("control", "nominal pole fidelity", [&](CheckResult& r) {
    const double err = nominal_pole_fidelity(fault_.compensation);
    r.passed = err <= 1e-6;
    r.detail = "max deviation relative to |e0| " + sci(err);
  });

  check("control", "lyapunov certificate for synthesized gains", [&](CheckResult& r) {
    std::vector<SfbSynthesis> all;
    all.push_back(synthesize_pole_placement(std::array<std::complex<double>, 4>{{-8.0, -8.0, -8.0, -8.0}}));
    all.push_back(synthesize_pole_placement(std::array<std::complex<double>, 4>{{-2.0, -2.0, -2.0, -2.0}}));
    all.push_back(synthesize_lqr(ControllerConfig{}.lqr_q, 1.0));
    all.push_back(synthesize_lqr(Eigen::Vector4d(100.0, 10.0, 1.0, 0.1), 0.01));
    for (int i = 0; i < 20; ++i) {
      const double re = -(0.5 + 10.0 * unit(rng)), im = 5.0 * unit(rng);
      all.push_back(synthesize_pole_placement(std::array<std::complex<double>, 4>{
          {{re, im}, {re, -im}, -(0.5 + 10.0 * unit(rng)), -(0.5 + 10.0 * unit(rng))}}));
    }
    double worst = 0.0;
    int bad = 0;
    for (const auto& s : all) {
      worst = std::max(worst, s.certificate.residual);
      if (!(s.certificate.residual <= 1e-9) || !s.certificate.positive_definite) ++bad;
    }
    r.passed = bad == 0;
    r.detail = std::to_string(all.size()) + " gains, worst residual " + sci(worst);
  });

  check("control", "ultimate bound shrinks with estimate error", [&](CheckResult& r) {
    std::vector<double> bounds;
    for (double level : {0.1, 0.01, 0.001}) {
      ScenarioConfig c = smooth_exact_config();
      c.controller.injected_estimate_error = level;
      c.sim.duration_s = 8.0;
      const SimTrace tr = run_scenario(c);
      double b = 0.0;
      for (const auto& row : tr.rows) {
        if (row.t >= 4.0) b = std::max(b, row.e.vec().norm());
      }
      bounds.push_back(b);
    }
    r.passed = std::isfinite(bounds[0]) && bounds[0] > bounds[1] && bounds[1] > bounds[2];
    r.detail = "bounds " + sci(bounds[0]) + " / " + sci(bounds[1]) + " / " + sci(bounds[2]);
  });

  check("control", "sliding band reached and kept", [&](CheckResult& r) {
    ScenarioConfig c = smooth_exact_config();
    c.controller.kind = ControllerKind::kSmc;
    c.sim.hold = ControlHold::kZeroOrderHold;
    c.sim.duration_s = 6.0;
    c.sim.decimation = 1;
    const SimTrace tr = run_scenario(c);
    const double eps = c.controller.smc.epsilon;
    std::size_t entry = tr.rows.size();
    int increases = 0, escapes = 0;
    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
      const double s = std::abs(tr.rows[i].sigma);
      if (entry == tr.rows.size()) {
        if (s <= eps) entry = i;
        else if (i > 0 && s > std::abs(tr.rows[i - 1].sigma)) ++increases;
      } else if (s > eps) {
        ++escapes;
      }
    }
    r.passed = entry < tr.rows.size() && increases == 0 && escapes == 0;
    r.detail = entry < tr.rows.size() ? "band reached at t = " + sci(tr.rows[entry].t) + ", " +
                                            std::to_string(escapes) + " escapes, " + std::to_string(increases) +
                                            " increases while reaching"
                                      : "band never reached";
  });

  check("control", "compensation-off baseline contrast", [&](CheckResult& r) {
    ScenarioConfig on;
    ScenarioConfig off;
    off.controller.use_dob = false;
    const double e_on = compute_metrics(run_scenario(on)).window_error;
    const double e_off = compute_metrics(run_scenario(off)).window_error;
    r.passed = e_off >= 10.0 * e_on;
    r.detail = "ratio " + sci(e_off / e_on);
  });

  // -- scenario -----------------------------------------------------------
  check("scenario", "determinism", [&](CheckResult& r) {
    ScenarioConfig c;
    c.sim.noise_std = 1e-4;
    c.sim.seed = 7;
    r.passed = trace_csv(c) == trace_csv(c);
    r.detail = r.passed ? "identical" : "traces differ";
  });

  check("scenario", "step-size robustness", [&](CheckResult& r) {
    ScenarioConfig c = smooth_exact_config();
    c.controller.estimates = EstimateSource::kObserver;
    c.plant.spring = SpringModel::kNonlinear;
    c.reference.kind = ReferenceKind::kQuintic;
    c.sim.duration_s = 4.0;
    const SimTrace a = run_scenario(c);
    c.sim.step_s /= 2.0;
    c.sim.decimation *= 2;
    const SimTrace b = run_scenario(c);
    const Eigen::Vector4d xa = a.rows.back().x.vec(), xb = b.rows.back().x.vec();
    const double rel = (xa - xb).norm() / xa.norm();
    r.passed = rel < 1e-6;
    r.detail = "relative change " + sci(rel);
  });

  check("scenario", "dob settling unaffected by disturbance", [&](CheckResult& r) {
    ScenarioConfig c;
    const Metrics with = compute_metrics(run_scenario(c));
    c.disturbance = DisturbanceProfile::none();
    const Metrics without = compute_metrics(run_scenario(c));
    const double rel = std::abs(with.settling_time_2pct - without.settling_time_2pct) / without.settling_time_2pct;
    r.passed = with.settled && without.settled && rel <= 0.05;
    r.detail = "settling " + sci(with.settling_time_2pct) + " s vs " + sci(without.settling_time_2pct) + " s";
  });

  check("scenario", "disturbance window bounds for robust controllers", [&](CheckResult& r) {
    std::string detail;
    bool ok = true;
    for (ControllerKind kind : {ControllerKind::kPolePlacement, ControllerKind::kSmc}) {
      ScenarioConfig c;
      c.plant.spring = SpringModel::kNonlinear;
      c.controller.kind = kind;
      const SimTrace tr = run_scenario(c);
      const double pre = rms_e1(tr, 0.0, 3.0);
      const double during = max_abs_e1(tr, 3.0, 10.0);
      const double after = max_abs_e1(tr, 11.0, c.sim.duration_s);
      ok = ok && during < 10.0 * pre && after < 2.0 * pre;
      detail += (detail.empty() ? "" : "; ") + std::string(kind == ControllerKind::kSmc ? "smc" : "sfb") +
                " window/pre " + sci(during / pre) + ", after/pre " + sci(after / pre);
    }
    r.passed = ok;
    r.detail = detail;
  });

  // -- cli ----------------------------------------------------------------
  check("cli", "csv format", [&](CheckResult& r) {
    ScenarioConfig c;
    c.sim.duration_s = 0.05;
    const std::string csv = trace_csv(c);
    const bool lf = csv.find('\r') == std::string::npos;
    const bool header = csv.rfind(csv_header() + "\n", 0) == 0;
    const bool digits = format_double(0.1) == "0.10000000000000001" && format_double(-2.5) == "-2.5";
    r.passed = lf && header && digits;
    r.detail = std::string("lf ") + (lf ? "ok" : "bad") + ", header " + (header ? "ok" : "bad") + ", digits " +
               (digits ? "ok" : "bad");
  });

  check("cli", "override order independence", [&](CheckResult& r) {
    std::vector<std::string> ov = {"sim.duration_s=0.5", "controller.pole_1=-5", "observer.bandwidth=80",
                                   "reference.kind=sinusoid", "plant.j_l=0.06"};
    const std::string base = trace_csv(parse_config("", ov));
    std::sort(ov.begin(), ov.end());
    bool same = true;
    do {
      same = same && trace_csv(parse_config("", ov)) == base;
    } while (same && std::next_permutation(ov.begin(), ov.end()));
    r.passed = same;
    r.detail = same ? "all 120 orders identical" : "order changed the result";
  });

  check("cli", "exit code mapping", [&](CheckResult& r) {
    auto code = [](std::vector<std::string> ov) {
      CommandLine cmd;
      cmd.verb = "simulate";
      cmd.overrides = std::move(ov);
      std::ostringstream out, err;
      return static_cast<int>(run_command(cmd, out, err));
    };
    const int ok = code({"sim.duration_s=0.1"});
    const int cfg = code({"sim.step_s=-1"});
    const int syn = code({"controller.pole_1=1"});
    const int div = code({"sim.step_s=0.1"});
    r.passed = ok == 0 && cfg == 1 && syn == 2 && div == 3;
    r.detail = "ok " + std::to_string(ok) + ", config " + std::to_string(cfg) + ", synthesis " +
               std::to_string(syn) + ", divergence " + std::to_string(div);
  });

  return std::move(results_);
}

}  // namespace

double nominal_pole_fidelity(Compensation compensation, double duration_s) {
  ScenarioConfig c = smooth_exact_config();
  c.controller.compensation = compensation;
  c.reference.kind = ReferenceKind::kSinusoid;
  c.reference.amplitude = 0.5;
  c.reference.frequency = 2.0;
  c.sim.initial = {0.2, -0.1, 0.1, 0.3};
  c.sim.duration_s = duration_s;
  const ResolvedController rc = synthesize(c);
  const Eigen::Matrix4d acl = closed_loop_error_matrix(rc.sfb.gains);
  const SimTrace tr = run_scenario(c);
  const Eigen::Vector4d e0 = tr.rows.front().e.vec();
  double worst = 0.0;
  for (const auto& row : tr.rows) {
    const Eigen::Matrix4d phi = (acl * row.t).exp();
    worst = std::max(worst, (row.e.vec() - phi * e0).cwiseAbs().maxCoeff());
  }
  return worst / std::max(1.0, e0.cwiseAbs().maxCoeff());
}

DobConvergence dob_polynomial_convergence(double bandwidth) {
  const PlantParams p;
  auto dist = [&](double t) {
    const DisturbanceSample d{0.3 + 0.2 * t - 0.05 * t * t, 0.1 - 0.1 * t + 0.02 * t * t, 0.0};
    const DisturbanceSample dr{0.2 - 0.1 * t, -0.1 + 0.04 * t, 0.0};
    const DisturbanceSample da{-0.1, 0.04, 0.0};
    return DistPoint{d, DisturbanceEstimate::from_torques(p, d, dr, da)};
  };
  DobConvergence out;
  std::vector<std::pair<double, double>> samples;
  const double t10 = 10.0 / bandwidth;
  const double h = 0.01 / bandwidth;
  run_observer(bandwidth, 30.0 / bandwidth, h, dist,
               [&](double t, const DisturbanceEstimate& est, const DisturbanceEstimate& truth) {
                 const double e = (est.value - truth.value).norm();
                 if (t == 0.0) out.initial_error = e;
                 if (std::abs(t - t10) < 0.5 * h) out.error_at_10_over_omega = e;
                 if (t >= t10 && e > 0.0) samples.emplace_back(t, std::log(e));
               });
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (const auto& [t, l] : samples) {
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
  }
  const double n = static_cast<double>(samples.size());
  out.fitted_rate = -(n * stl - st * sl) / (n * stt - st * st);
  return out;
}

double dob_sinusoid_error(double bandwidth, double disturbance_frequency) {
  const PlantParams p;
  const double w = disturbance_frequency;
  auto dist = [&](double t) {
    const DisturbanceSample d{0.5 * std::sin(w * t), 0.3 * std::sin(w * t + 1.0), 0.0};
    return DistPoint{d, DisturbanceEstimate::from_torques(p, d, {}, {})};
  };
  const double period = 2.0 * std::numbers::pi / w;
  const double settle = 40.0 / std::min(bandwidth, 10.0 * w);
  const double duration = settle + 2.0 * period;
  const double h = std::min(1e-3, 0.05 / bandwidth);
  double acc = 0.0;
  long n = 0;
  run_observer(bandwidth, duration, h, dist,
               [&](double t, const DisturbanceEstimate& est, const DisturbanceEstimate& truth) {
                 if (t < settle) return;
                 const double el = est.link_torque(p) - truth.link_torque(p);
                 const double em = est.motor_torque(p) - truth.motor_torque(p);
                 acc += el * el + em * em;
                 ++n;
               });
  return std::sqrt(acc / static_cast<double>(n));
}

std::vector<CheckResult> run_validation(const FaultInjection& fault) { return Suite(fault).run(); }

std::string format_validation(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  std::size_t wm = 6, wn = 5;
  for (const auto& r : results) {
    wm = std::max(wm, r.module.size());
    wn = std::max(wn, r.name.size());
  }
  int passed = 0;
  os << std::left << std::setw(static_cast<int>(wm)) << "module" << "  " << std::setw(static_cast<int>(wn)) << "check"
     << "  result  detail\n";
  for (const auto& r : results) {
    passed += r.passed;
    os << std::left << std::setw(static_cast<int>(wm)) << r.module << "  " << std::setw(static_cast<int>(wn))
       << r.name << "  " << (r.passed ? "PASS  " : "FAIL  ") << "  " << r.detail << '\n';
  }
  os << "passed " << passed << "/" << results.size() << '\n';
  return os.str();
}

}  // namespace vssea
