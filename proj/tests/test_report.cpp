#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "wnpg/report.hpp"

using namespace wnpg;

TEST(Report, F64RoundTripIsBitExact) {
  const Vec xs{0.0, -0.0, 1.0 / 3.0, -1e-308, 4.9e-324, std::numeric_limits<double>::max(),
               std::numeric_limits<double>::infinity()};
  const std::string bytes = encode_f64(xs);
  ASSERT_EQ(bytes.size(), xs.size() * 8);
  const Vec back = decode_f64(bytes);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i]), std::bit_cast<std::uint64_t>(xs[i]));
  }
  EXPECT_THROW(decode_f64("abc"), Error);
}

TEST(Report, F64IsLittleEndian) {
  const std::string b = encode_f64(Vec{1.0});
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(static_cast<unsigned char>(b[7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(b[6]), 0xF0);
  EXPECT_EQ(b[0], '\0');
}

TEST(Report, RecordCsv) {
  RunRecord rec;
  RunRow a;
  a.k = 1;
  a.J_hat = -2.5;
  a.grad_norm = 0.1;
  a.zeta = 0.01;
  RunRow b = a;
  b.k = 2;
  b.J_det = -1.0;
  b.wallclock_ms = 3.0;
  rec.rows = {a, b};
  EXPECT_EQ(record_csv(rec),
            "k,J_hat,J_det,grad_norm,zeta,wallclock_ms\n"
            "1,-2.5,,0.10000000000000001,0.01,\n"
            "2,-2.5,-1,0.10000000000000001,0.01,3\n");
}

TEST(Report, NumbersRoundTripThroughText) {
  for (double x : {0.1, -3.8138312345678, 1e-300, 12345678.9}) EXPECT_EQ(std::stod(fmt_num(x)), x);
}

TEST(Report, SweepCsvSanitizesStatus) {
  SweepResult s;
  SweepRow r;
  r.sigma_sq = 1e-3;
  r.seed = 9;
  r.J_hat_final = -4.0;
  r.J_det_final = -3.5;
  r.status = "error: a, b\nc";
  s.rows = {r};
  EXPECT_EQ(sweep_csv(s), "sigma_sq,seed,J_hat_final,J_det_final,status\n0.001,9,-4,-3.5,error: a; b c\n");
}

TEST(Report, VarianceCsv) {
  const std::vector<VarianceRow> rows{{10, 0.5, 100}, {40, 0.125, 100}};
  EXPECT_EQ(variance_csv(rows, 0.1, Algo::gpomdp, "bandit"),
            "N,trace_variance,reps,sigma,algo,env\n10,0.5,100,0.10000000000000001,gpomdp,bandit\n"
            "40,0.125,100,0.10000000000000001,gpomdp,bandit\n");
}

TEST(Report, SvgIsDeterministicAndWellFormed) {
  RunRecord rec;
  for (std::size_t k = 1; k <= 5; ++k) {
    RunRow r;
    r.k = k;
    r.J_hat = -10.0 / static_cast<double>(k);
    if (k % 2 == 0) r.J_det = r.J_hat + 0.5;
    rec.rows.push_back(r);
  }
  const std::string a = curves_svg(rec, "t"), b = curves_svg(rec, "t");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_EQ(a.find("nan"), std::string::npos);

  SweepResult s;
  for (double s2 : {1e-4, 1e-3, 1e-2}) {
    SweepAggregate g;
    g.sigma_sq = s2;
    g.runs_ok = s2 < 1e-2 ? 2 : 0;
    g.J_det_mean = s2 < 1e-2 ? -4.0 : std::nan("");
    g.J_det_halfwidth = 0.2;
    s.aggregates.push_back(g);
  }
  const std::string sv = sweep_svg(s, "sweep");
  EXPECT_EQ(sv, sweep_svg(s, "sweep"));
  EXPECT_EQ(sv.find("nan"), std::string::npos);
  EXPECT_NE(sv.find("<circle"), std::string::npos);
}

TEST(Report, FileHelpers) {
  const std::string path = ::testing::TempDir() + "wnpg_report_test.bin";
  write_file(path, std::string("a\0b", 3));
  EXPECT_EQ(read_file(path), std::string("a\0b", 3));
  EXPECT_THROW(read_file(path + ".missing"), Error);
}
