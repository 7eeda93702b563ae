#include <algorithm>
#include <sstream>
#include <set>

#include <gtest/gtest.h>

#include "vssea/commands.hpp"
#include "vssea/config.hpp"

namespace vssea {
namespace {

std::string error_of(std::string_view text, std::vector<std::string> ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string short_run(const ScenarioConfig& c) {
  ScenarioConfig s = c;
  s.sim.duration_s = 0.3;
  const RunOutcome r = simulate(s);
  std::ostringstream os;
  write_csv(os, r.trace, r.failure);
  return os.str();
}

TEST(Parse, EmptyFileGivesDefaults) {
  const ScenarioConfig c = parse_config("");
  const ScenarioConfig d;
  EXPECT_EQ(c.plant.j_l, d.plant.j_l);
  EXPECT_EQ(c.plant.k, d.plant.k);
  EXPECT_DOUBLE_EQ(c.plant.upsilon_tau, 2.0 * 100.0 * 0.001);
  EXPECT_DOUBLE_EQ(c.plant.upsilon_k, c.plant.upsilon_tau / 2.0);
  EXPECT_EQ(c.controller.kind, ControllerKind::kPolePlacement);
  EXPECT_TRUE(c.controller.use_dob);
  EXPECT_EQ(c.controller.poles[3], std::complex<double>(-8.0, 0.0));
  EXPECT_EQ(c.controller.lqr_q, d.controller.lqr_q);
  EXPECT_EQ(c.controller.smc.s, d.controller.smc.s);
  EXPECT_EQ(c.observer.bandwidth, 100.0);
  EXPECT_FALSE(c.observer.gains.has_value());
  EXPECT_EQ(c.reference.kind, ReferenceKind::kStep);
  EXPECT_EQ(c.disturbance.link.bias, 0.5);
  EXPECT_EQ(c.disturbance.motor.t_off, 10.0);
  EXPECT_EQ(c.sim.step_s, 1e-3);
  EXPECT_EQ(c.sim.decimation, 10);
  EXPECT_FALSE(c.sim.initial_theta_ms.has_value());
  EXPECT_EQ(short_run(c), short_run(d));
}

TEST(Parse, DefaultTextRoundTrips) {
  const std::string text = default_config_text();
  EXPECT_NE(text.find("[controller]"), std::string::npos);
  EXPECT_EQ(short_run(parse_config(text)), short_run(parse_config("")));
  const auto keys = config_keys();
  EXPECT_TRUE(std::find(keys.begin(), keys.end(), "observer.bandwidth") != keys.end());
  EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()).size(), keys.size());
}

TEST(Parse, SectionsValuesAndComments) {
  const ScenarioConfig c = parse_config(R"(
# leading comment
[plant]
spring = nonlinear   ; trailing comment
j_l = 0.06
[controller]
kind = "smc+dob"
pole_1 = -3
pole_1_im = 1
pole_2 = -3
pole_2_im = -1
[observer]
projection = false
[sim]
control_hold = continuous
seed = 42
)");
  EXPECT_EQ(c.plant.spring, SpringModel::kNonlinear);
  EXPECT_EQ(c.plant.j_l, 0.06);
  EXPECT_EQ(c.controller.kind, ControllerKind::kSmc);
  EXPECT_TRUE(c.controller.use_dob);
  EXPECT_EQ(c.controller.poles[0], std::complex<double>(-3, 1));
  EXPECT_EQ(c.controller.poles[1], std::complex<double>(-3, -1));
  EXPECT_FALSE(c.observer.projection);
  EXPECT_EQ(c.sim.hold, ControlHold::kContinuous);
  EXPECT_EQ(c.sim.seed, 42u);
}

TEST(Parse, ControllerKindSetsDobFlag) {
  EXPECT_FALSE(parse_config("[controller]\nkind = pp\n").controller.use_dob);
  EXPECT_TRUE(parse_config("[controller]\nkind = lqr+dob\n").controller.use_dob);
  EXPECT_EQ(parse_config("[controller]\nkind = lqr\n").controller.kind, ControllerKind::kLqr);
  EXPECT_EQ(parse_config("[controller]\nkind = open_loop\n").controller.kind, ControllerKind::kOpenLoop);
}

TEST(Errors, UnknownKeyWithLine) {
  const std::string e = error_of("[plant]\nj_l = 0.1\nj_x = 2\n");
  EXPECT_NE(e.find("line 3"), std::string::npos);
  EXPECT_NE(e.find("plant.j_x"), std::string::npos);
}

TEST(Errors, Malformed) {
  EXPECT_NE(error_of("[plant]\nj_l = 0.1\nj_l = 0.2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("[gains]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("j_l = 1\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[plant]\nj_l\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[plant\n").find("section header"), std::string::npos);
}

TEST(Errors, TypeMismatch) {
  EXPECT_NE(error_of("[plant]\nj_l = fast\n").find("plant.j_l: expected a number"), std::string::npos);
  EXPECT_NE(error_of("[plant]\nj_l = \"0.1\"\n").find("expected a number"), std::string::npos);
  EXPECT_NE(error_of("[sim]\ndecimation = 2.5\n").find("integer"), std::string::npos);
  EXPECT_NE(error_of("[observer]\nprojection = yes\n").find("true or false"), std::string::npos);
  EXPECT_NE(error_of("[controller]\nkind = pid\n").find("expected one of"), std::string::npos);
}

TEST(Errors, InvariantViolationsNameKey) {
  EXPECT_NE(error_of("[sim]\nstep_s = -1\n").find("sim.step_s"), std::string::npos);
  EXPECT_NE(error_of("", {"sim.step_s=-1"}).find("sim.step_s"), std::string::npos);
  EXPECT_NE(error_of("[observer]\nbandwidth = 0\n").find("observer.bandwidth"), std::string::npos);
  EXPECT_NE(error_of("[plant]\nk = -5\n").find("plant.k"), std::string::npos);
}

TEST(Derived, SpringConsistency) {
  const ScenarioConfig c = parse_config("[plant]\nupsilon_tau = 0.4\n");
  EXPECT_EQ(c.plant.upsilon_k, 0.2);
  EXPECT_NE(error_of("[plant]\nupsilon_tau = 0.4\nupsilon_k = 0.3\n").find("plant.upsilon_k"), std::string::npos);
  const ScenarioConfig free = parse_config("[plant]\nspring_consistency = false\nupsilon_k = 0.3\n");
  EXPECT_EQ(free.plant.upsilon_k, 0.3);
  const ScenarioConfig nominal = parse_config("[plant]\ntheta_ms_nominal = 0.05\nk = 80\n");
  EXPECT_DOUBLE_EQ(nominal.plant.upsilon_tau, 2 * 80 * 0.05 * 0.05 * 0.05);
}

TEST(Derived, ObserverGainsTogether) {
  EXPECT_NE(error_of("[observer]\ng0 = 30\n").find("together"), std::string::npos);
  const ScenarioConfig c = parse_config("[observer]\ng0 = 30\ng1 = 300\ng2 = 1000\n");
  ASSERT_TRUE(c.observer.gains.has_value());
  EXPECT_EQ(c.observer.resolved_gains().g1, 300.0);
}

TEST(Overrides, PrecedenceAndConflicts) {
  const std::vector<std::string> ov = {"plant.j_l=0.07"};
  EXPECT_EQ(parse_config("[plant]\nj_l = 0.06\n", ov).plant.j_l, 0.07);
  EXPECT_NE(error_of("", {"plant.j_l=0.07", "plant.j_l=0.08"}).find("conflicting"), std::string::npos);
  EXPECT_EQ(error_of("", {"plant.j_l=0.07", "plant.j_l=0.07"}), "");
  EXPECT_NE(error_of("", {"plant.nope=1"}).find("unknown key"), std::string::npos);
  EXPECT_NE(error_of("", {"plant.j_l"}).find("key=value"), std::string::npos);
}

TEST(Overrides, OrderIndependent) {
  std::vector<std::string> ov = {"controller.pole_1=-5", "observer.bandwidth=80", "plant.j_l=0.06",
                                 "reference.kind=sinusoid"};
  std::sort(ov.begin(), ov.end());
  const std::string base = short_run(parse_config("", ov));
  while (std::next_permutation(ov.begin(), ov.end())) {
    EXPECT_EQ(short_run(parse_config("", ov)), base);
  }
}

TEST(Synthesis, UnstablePolesAreSynthesisErrors) {
  const ScenarioConfig c = parse_config("[controller]\npole_1 = 1\n");
  EXPECT_THROW(synthesize(c), SynthesisError);
  const ScenarioConfig odd = parse_config("[controller]\npole_1_im = 2\n");
  EXPECT_THROW(synthesize(odd), SynthesisError);
}

TEST(Synthesis, LqrWithSlowObserverPassesCertificate) {
  const ScenarioConfig c = parse_config("[controller]\nkind = lqr\n[observer]\nbandwidth = 20\n");
  const ResolvedController rc = synthesize(c);
  EXPECT_EQ(rc.sfb.method, "lqr");
  EXPECT_TRUE(rc.sfb.certificate.positive_definite);
  EXPECT_LE(rc.sfb.certificate.residual, 1e-9);
  EXPECT_EQ(rc.observer_gains.g2, 8000.0);
}

}  // namespace
}  // namespace vssea
