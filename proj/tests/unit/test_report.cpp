#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "heterodyn/report.hpp"
#include "heterodyn/version.hpp"

namespace heterodyn {
namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// First line that is not a comment.
std::string column_line(const std::string& s) {
  for (const auto& l : lines(s))
    if (l.empty() || l[0] != '#') return l;
  return {};
}

TEST(Report, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Report, HeaderCarriesVersionHashAndSeed) {
  std::ostringstream os;
  write_header(os, 0xabcdefull, {42, 7});
  EXPECT_EQ(os.str(), std::string("# heterodyn version=") + kVersion + " config_hash=0000000000abcdef seed=42:7\n");
}

TEST(Report, DensityTableRoundTrips) {
  const GridDensity w = GridDensity::normalized(Grid({0.0, 1.0}, 3), {1.0, 2.0, 3.0});
  std::ostringstream os;
  write_density_csv(os, w, 1, {0, 0});
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[1], "cell,lo,hi,center,density");
  for (std::size_t i = 0; i < 3; ++i) {
    std::istringstream row(ls[2 + i]);
    std::string f;
    std::vector<double> v;
    while (std::getline(row, f, ',')) v.push_back(std::stod(f));
    EXPECT_EQ(v[0], static_cast<double>(i));
    EXPECT_EQ(v[4], w.weight(i));
  }
}

TEST(Report, ColumnContracts) {
  std::ostringstream st, gu, mo, tr;
  StabilityReport s;
  s.steps.push_back({0, 1.5, 0.2, false, 1.5, 0.0, 0.0});
  write_stability_csv(st, s, 0, {});
  EXPECT_EQ(column_line(st.str()), "step,theta0,tv,event,bound");
  write_gumbel_csv(gu, GumbelReport{}, 0, {});
  EXPECT_EQ(column_line(gu.str()), "tau,u_t,W_hat,ci_lo,ci_hi,e_minus_tau,beta_spectral");
  write_modulation_csv(mo, ModulationReport{}, 0, {});
  EXPECT_EQ(column_line(mo.str()), "K,t,kappa_hat,sigma_hat,xi_hat,log_t,target_integral");
  Trajectory t;
  t.x = {0.5, 0.6};
  t.z = {0.51, 0.59};
  write_trajectory_csv(tr, t);
  const auto ls = lines(tr.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[1], "t,x,z");
  EXPECT_EQ(ls[2], "0,0.5,0.51000000000000001");
}

TEST(Report, ValidationRows) {
  ValidationReport r;
  r.checks.push_back({"delta_below_one", true, "Delta = 0.9", true});
  r.checks.push_back({"confinement", false, "largest excursion = 0.1", true});
  std::ostringstream os;
  write_validation_csv(os, r, 0, {});
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[2], "delta_below_one,PASS,\"Delta = 0.9\"");
  EXPECT_EQ(ls[3], "confinement,FAIL,\"largest excursion = 0.1\"");
}

}  // namespace
}  // namespace heterodyn
