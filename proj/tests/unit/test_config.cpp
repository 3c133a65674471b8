#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stefan/config.hpp"

using namespace stefan;

namespace {

constexpr const char* kFlower = R"(# dendritic onset on 128^2
[scenario]
scenario = crystal_growth
n = 128
domain_min = -2
domain_max = 2
interface = flower
interface_value = 0.066666666666666666
interface_amplitude = 0.3
t_liquid = -0.5

[physics]
st = 0.5
epsilon_kappa = 2e-3
epsilon_v = 2e-3

[numerics]
t_end = 0.8
dt_rule = cfl
cfl = 0.5
capillary_factor = 0.1  ; explicit curvature bound

[output]
output_every = 100
onset_factor = 3
)";

}  // namespace

TEST(ParseConfig, MinimalFileGivesDefaults) {
  const CaseConfig c = parse_config("scenario = planar_stefan\n");
  const CaseConfig d = default_config(Scenario::PlanarStefan);
  EXPECT_EQ(serialize_config(c), serialize_config(d));
  EXPECT_EQ(c.st, 1.0);
  ASSERT_TRUE(reference_solution(c).has_value());
}

TEST(ParseConfig, OverridesBySection) {
  const CaseConfig c = parse_config(kFlower);
  EXPECT_EQ(c.scenario, Scenario::CrystalGrowth);
  EXPECT_EQ(c.n, 128);
  EXPECT_EQ(c.interface.kind, InitialInterface::Kind::Flower);
  EXPECT_EQ(c.st, 0.5);
  EXPECT_EQ(c.capillary_factor, 0.1);
  EXPECT_EQ(c.output_every, 100);
  EXPECT_EQ(c.dt.kind, DtRule::Kind::DerivedCfl);
}

TEST(ParseConfig, CanonicalRoundTripIsBitExact) {
  const CaseConfig a = parse_config(kFlower);
  const std::string text = serialize_config(a);
  const CaseConfig b = parse_config(text);
  EXPECT_EQ(serialize_config(b), text);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(a.interface.value, b.interface.value);
  EXPECT_EQ(a.eps_kappa, b.eps_kappa);

  CaseConfig odd = default_config(Scenario::FrankSphere);
  odd.st = 0.1 + 0.2;
  odd.eps_kappa = std::nextafter(1e-3, 1.0);
  odd.dt = {DtRule::Kind::Quadratic, 1.0 / 3.0};
  odd.coupling = InterfaceCoupling::Lagged;
  odd.anisotropy = AnisotropyModel::Kind::Fourfold;
  odd.anisotropy_strength = 0.05;
  const CaseConfig back = parse_config(serialize_config(odd));
  EXPECT_EQ(back.st, odd.st);
  EXPECT_EQ(back.eps_kappa, odd.eps_kappa);
  EXPECT_EQ(back.dt.value, odd.dt.value);
  EXPECT_EQ(back.coupling, InterfaceCoupling::Lagged);
  EXPECT_EQ(serialize_config(back), serialize_config(odd));
}

TEST(ParseConfig, HashChangesWithContent) {
  CaseConfig a = default_config(Scenario::CrankLayer);
  CaseConfig b = a;
  b.n = 64;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  // FNV-1a test vectors.
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(ParseConfig, NegativeCapillarityIsValidationError) {
  EXPECT_THROW((void)parse_config("scenario = planar_stefan\n[physics]\nepsilon_kappa = -1\n"), ValidationError);
  EXPECT_THROW((void)parse_config("[scenario]\nscenario = planar_stefan\nn = 4\n"), ValidationError);
  EXPECT_THROW((void)parse_config("[scenario]\nscenario = planar_stefan\n[physics]\nst = -0.5\n"), ValidationError);
}

TEST(ParseConfig, ParseErrorsCarryLine) {
  auto line_of = [](const char* text) {
    try {
      (void)parse_config(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[scenario]\nscenario = planar_stefan\nwidth = 3\n"), 3);
  EXPECT_EQ(line_of("[scenario]\nscenario = planar_stefan\n[physics]\nn = 64\n"), 4);
  EXPECT_EQ(line_of("[scenario]\nscenario = planar_stefan\nn = 32\nn = 64\n"), 4);
  EXPECT_EQ(line_of("[scenario]\nscenario = planar_stefan\nn = lots\n"), 3);
  EXPECT_EQ(line_of("[scenario]\nscenario = rayleigh_benard\n"), 2);
  EXPECT_EQ(line_of("[scenario\n"), 1);
  EXPECT_EQ(line_of("[scenario]\njust text\n"), 2);
  EXPECT_EQ(line_of("[mesh]\n"), 1);
  EXPECT_EQ(line_of("[physics]\nst = 1\n"), 0);  // no scenario
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2e-3), "0.002");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  for (double v : {1.0 / 3.0, 6.02214076e23, -1.5e-300, 0.1 + 0.2})
    EXPECT_EQ(std::stod(format_double(v)), v);
}
